#include "ssa/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssa {

RewardRecord reward(const std::optional<std::string>& final_answer, bool format_correct,
                    std::string_view gold) {
    RewardRecord rec;
    rec.format_correct = format_correct;
    rec.is_correct = final_answer && answers_equivalent(*final_answer, gold);
    if (rec.is_correct) rec.reward = 1.0;
    else if (rec.format_correct) rec.reward = 0.05;
    else rec.reward = 0.0;
    return rec;
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double floor) {
    if (rewards.size() < 2)
        throw std::invalid_argument("group_advantages requires a group of at least 2");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rewards.size());  // population variance
    double std_dev = std::sqrt(var);
    std::vector<double> advantages(rewards.size(), 0.0);
    if (std_dev < floor) return advantages;  // zero-variance guard
    for (std::size_t i = 0; i < rewards.size(); ++i)
        advantages[i] = (rewards[i] - mean) / std_dev;
    return advantages;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
    double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

double surrogate_mean(const GrpoGroup& group, double epsilon) {
    const std::size_t g = group.rewards.size();
    if (group.advantages.size() != g || group.tokens.size() != g)
        throw std::invalid_argument("GRPO group records are misaligned");
    double total = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        const auto& toks = group.tokens[i];
        if (toks.empty()) throw std::invalid_argument("rollout has no token records");
        double rollout = 0.0;
        for (const auto& tok : toks) {
            double ratio = std::exp(tok.logprob_new - tok.logprob_old);
            rollout += clipped_surrogate(ratio, group.advantages[i], epsilon);
        }
        total += rollout / static_cast<double>(toks.size());
    }
    return total / static_cast<double>(g);
}

double grpo_objective(const GrpoGroup& group, const GrpoConfig& config, double kl_divergence) {
    return surrogate_mean(group, config.clip_epsilon) - config.kl_coefficient * kl_divergence;
}

// ---------------------------------------------------------------------------

ToyPolicy::ToyPolicy(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.size() != kToyFeatureCount)
        throw std::invalid_argument("toy policy expects one weight per feature");
}

namespace {

double score(const std::vector<double>& w, const CandidateFeatures& f) {
    return w[0] * f.agreement + w[1] * f.validity + w[2] * f.scorer_hint;
}

std::vector<double> feature_vector(const CandidateFeatures& f) {
    return {f.agreement, f.validity, f.scorer_hint};
}

}  // namespace

std::vector<double> ToyPolicy::action_logprobs(const ToyInstance& inst) const {
    std::vector<double> scores;
    scores.reserve(inst.candidates.size() + 1);
    for (const auto& f : inst.candidates) scores.push_back(score(weights_, f));
    scores.push_back(0.0);  // abstain
    double max_score = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - max_score);
    double log_z = max_score + std::log(sum);
    for (double& s : scores) s -= log_z;
    return scores;
}

std::vector<double> ToyPolicy::action_probs(const ToyInstance& inst) const {
    auto logs = action_logprobs(inst);
    for (double& l : logs) l = std::exp(l);
    return logs;
}

std::size_t ToyPolicy::sample_action(const ToyInstance& inst, std::mt19937_64& rng) const {
    auto probs = action_probs(inst);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double u = uniform(rng), acc = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u <= acc) return a;
    }
    return probs.size() - 1;
}

double toy_kl(const ToyPolicy& policy, const ToyPolicy& reference, const ToyInstance& inst) {
    auto lp = policy.action_logprobs(inst);
    auto lr = reference.action_logprobs(inst);
    double kl = 0.0;
    for (std::size_t a = 0; a < lp.size(); ++a) kl += std::exp(lp[a]) * (lp[a] - lr[a]);
    return kl;
}

double toy_action_reward(const ToyInstance& inst, std::size_t action) {
    if (action == inst.correct_index) return 1.0;
    if (action < inst.candidates.size()) return 0.05;  // picked a candidate: format holds
    return 0.0;                                        // abstain
}

ToyGroupEval evaluate_toy_group(const ToyPolicy& policy, const ToyPolicy& old_policy,
                                const ToyPolicy& reference, const ToyInstance& inst,
                                const std::vector<std::size_t>& actions,
                                const std::vector<double>& rewards, const GrpoConfig& config) {
    if (actions.size() != rewards.size())
        throw std::invalid_argument("actions/rewards are misaligned");
    const std::size_t g = actions.size();

    ToyGroupEval eval;
    eval.group.rewards = rewards;
    eval.group.advantages = group_advantages(rewards, config.advantage_std_floor);

    auto lp_new = policy.action_logprobs(inst);
    auto lp_old = old_policy.action_logprobs(inst);
    auto lp_ref = reference.action_logprobs(inst);
    auto probs = policy.action_probs(inst);

    // E_pi[phi], with phi(abstain) = 0
    std::vector<double> mean_feature(kToyFeatureCount, 0.0);
    for (std::size_t a = 0; a < inst.candidates.size(); ++a) {
        auto phi = feature_vector(inst.candidates[a]);
        for (std::size_t d = 0; d < kToyFeatureCount; ++d) mean_feature[d] += probs[a] * phi[d];
    }
    auto score_gradient = [&](std::size_t a) {  // d log pi(a) / d w
        std::vector<double> grad(kToyFeatureCount, 0.0);
        if (a < inst.candidates.size()) grad = feature_vector(inst.candidates[a]);
        for (std::size_t d = 0; d < kToyFeatureCount; ++d) grad[d] -= mean_feature[d];
        return grad;
    };

    eval.gradient.assign(kToyFeatureCount, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        std::size_t a = actions[i];
        eval.group.tokens.push_back({TokenRecord{lp_new[a], lp_old[a], lp_ref[a]}});
        eval.mean_reward += rewards[i];

        double adv = eval.group.advantages[i];
        double ratio = std::exp(lp_new[a] - lp_old[a]);
        double clipped = std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
        // the unclipped branch carries the gradient when it attains the min
        if (ratio * adv <= clipped * adv) {
            auto grad = score_gradient(a);
            for (std::size_t d = 0; d < kToyFeatureCount; ++d)
                eval.gradient[d] += adv * ratio * grad[d] / static_cast<double>(g);
        }
    }
    eval.mean_reward /= static_cast<double>(g);

    eval.kl = toy_kl(policy, reference, inst);
    // d KL / d w = sum_a pi(a) (dlogpi(a)/dw) (log pi(a) - log ref(a))
    for (std::size_t a = 0; a < probs.size(); ++a) {
        auto grad = score_gradient(a);
        double term = probs[a] * (lp_new[a] - lp_ref[a]);
        for (std::size_t d = 0; d < kToyFeatureCount; ++d)
            eval.gradient[d] -= config.kl_coefficient * term * grad[d];
    }

    eval.objective = grpo_objective(eval.group, config, eval.kl);
    return eval;
}

ToyEnvironment separable_environment(int num_candidates) {
    ToyEnvironment env;
    env.draw = [num_candidates](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        ToyInstance inst;
        inst.candidates.resize(num_candidates);
        inst.correct_index =
            std::uniform_int_distribution<std::size_t>(0, num_candidates - 1)(rng);
        for (int i = 0; i < num_candidates; ++i) {
            bool correct = static_cast<std::size_t>(i) == inst.correct_index;
            // agreement perfectly separates the correct candidate
            inst.candidates[i].agreement = correct ? 1.0 : 0.2 * uniform(rng);
            inst.candidates[i].validity = 1.0;
            inst.candidates[i].scorer_hint = uniform(rng);  // uninformative noise
        }
        return inst;
    };
    return env;
}

TrainResult train_toy(ToyPolicy policy, const ToyEnvironment& env, const GrpoConfig& config,
                      const TrainOptions& options) {
    if (config.group_size < 2) throw std::invalid_argument("group_size must be >= 2");
    std::mt19937_64 rng(options.seed);

    TrainResult result;
    ToyPolicy old_policy = policy;
    ToyPolicy reference = policy;

    for (int step = 0; step < options.steps; ++step) {
        if (options.old_refresh_every > 0 && step % options.old_refresh_every == 0)
            old_policy = policy;
        if (options.ref_refresh_every > 0 && step > 0 && step % options.ref_refresh_every == 0)
            reference = policy;

        ToyInstance inst = env.draw(rng);
        std::vector<std::size_t> actions(config.group_size);
        std::vector<double> rewards(config.group_size);
        for (int i = 0; i < config.group_size; ++i) {
            actions[i] = old_policy.sample_action(inst, rng);
            rewards[i] = toy_action_reward(inst, actions[i]);
        }

        ToyGroupEval eval =
            evaluate_toy_group(policy, old_policy, reference, inst, actions, rewards, config);
        if (!std::isfinite(eval.objective))
            throw std::runtime_error("GRPO training diverged: non-finite objective at step " +
                                     std::to_string(step));

        for (std::size_t d = 0; d < kToyFeatureCount; ++d)
            policy.weights()[d] += config.learning_rate * eval.gradient[d];

        result.curve.push_back({step, eval.mean_reward, eval.objective, eval.kl});
    }

    result.policy = std::move(policy);
    result.reference = std::move(reference);
    return result;
}

}  // namespace ssa
