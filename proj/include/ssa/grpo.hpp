#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "ssa/core_types.hpp"

namespace ssa {

// Reward shaping over a final decision: 1.0 correct, 0.05 format-only, 0.0
// otherwise. The image is exactly {0.0, 0.05, 1.0}.
struct RewardRecord {
    bool is_correct = false;
    bool format_correct = false;
    double reward = 0.0;
};

RewardRecord reward(const std::optional<std::string>& final_answer, bool format_correct,
                    std::string_view gold);

// Group-relative advantages: (r_i - mean(r)) / max(std(r), floor), population
// std. Zero-variance groups (std < floor) yield all-zero advantages.
std::vector<double> group_advantages(const std::vector<double>& rewards, double floor = 1e-8);

// min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv)
double clipped_surrogate(double ratio, double advantage, double epsilon);

struct TokenRecord {
    double logprob_new = 0.0;
    double logprob_old = 0.0;
    double logprob_ref = 0.0;
};

struct GrpoGroup {
    std::vector<double> rewards;
    std::vector<double> advantages;
    std::vector<std::vector<TokenRecord>> tokens;  // one list per rollout
};

// (1/G) sum_i (1/|y_i|) sum_t min(rho * A_i, clip(rho) * A_i), with
// rho = exp(logprob_new - logprob_old). Throws on misaligned records.
double surrogate_mean(const GrpoGroup& group, double epsilon);

// surrogate_mean minus beta * kl_divergence. The KL term is supplied by the
// caller; the toy policy computes it exactly over its action space.
double grpo_objective(const GrpoGroup& group, const GrpoConfig& config, double kl_divergence);

// ---------------------------------------------------------------------------
// Toy differentiable policy: softmax over per-candidate feature scores plus
// an abstain action with fixed score 0. Small enough for exact KL and an
// analytic policy gradient, which the finite-difference suite cross-checks.

struct CandidateFeatures {
    double agreement = 0.0;   // share of candidates agreeing with this answer
    double validity = 0.0;    // extraction succeeded
    double scorer_hint = 0.0; // external scorer signal
};

inline constexpr std::size_t kToyFeatureCount = 3;

struct ToyInstance {
    std::vector<CandidateFeatures> candidates;
    std::size_t correct_index = 0;
};

class ToyPolicy {
  public:
    ToyPolicy() : weights_(kToyFeatureCount, 0.0) {}
    explicit ToyPolicy(std::vector<double> weights);

    // Action space: 0..K-1 pick candidate i, K = abstain.
    std::vector<double> action_probs(const ToyInstance& inst) const;
    std::vector<double> action_logprobs(const ToyInstance& inst) const;
    std::size_t sample_action(const ToyInstance& inst, std::mt19937_64& rng) const;

    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& weights() { return weights_; }

  private:
    std::vector<double> weights_;
};

// Exact KL(pi || ref) over the instance's action space.
double toy_kl(const ToyPolicy& policy, const ToyPolicy& reference, const ToyInstance& inst);

struct ToyGroupEval {
    double objective = 0.0;
    std::vector<double> gradient;  // d objective / d weights
    GrpoGroup group;
    double kl = 0.0;
    double mean_reward = 0.0;
};

// Builds the GRPO group for explicit actions/rewards and evaluates objective,
// exact KL, and the analytic gradient against fixed old/reference snapshots.
ToyGroupEval evaluate_toy_group(const ToyPolicy& policy, const ToyPolicy& old_policy,
                                const ToyPolicy& reference, const ToyInstance& inst,
                                const std::vector<std::size_t>& actions,
                                const std::vector<double>& rewards, const GrpoConfig& config);

// Toy reward: 1.0 for the correct candidate, 0.05 for any other candidate
// (format still honored), 0.0 for abstain.
double toy_action_reward(const ToyInstance& inst, std::size_t action);

struct ToyEnvironment {
    std::function<ToyInstance(std::mt19937_64&)> draw;
};

// Environment where the agreement feature perfectly marks the correct
// candidate; a linear policy separates it.
ToyEnvironment separable_environment(int num_candidates = 4);

struct CurvePoint {
    int step = 0;
    double mean_reward = 0.0;
    double objective = 0.0;
    double kl = 0.0;
};

struct TrainOptions {
    int steps = 2000;
    std::uint64_t seed = 1;
    // Old-policy refresh cadence in steps; 1 = fully on-policy (rho = 1).
    int old_refresh_every = 1;
    // Reference refresh cadence; 0 = keep the initial snapshot.
    int ref_refresh_every = 0;
};

struct TrainResult {
    ToyPolicy policy;
    ToyPolicy reference;
    std::vector<CurvePoint> curve;
};

// Plain gradient ascent on the GRPO objective. Throws on a non-finite
// objective (divergence guard).
TrainResult train_toy(ToyPolicy policy, const ToyEnvironment& env, const GrpoConfig& config,
                      const TrainOptions& options);

}  // namespace ssa
