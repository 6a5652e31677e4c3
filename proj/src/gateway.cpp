#include "ssa/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

// httplib is pulled in by the translation unit once; keep it out of the header.
#include "httplib.h"

namespace ssa {
namespace {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    return x;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string prompt_digest(std::string_view prompt) { return hex64(fnv1a(prompt)); }

void RunLedger::append(const Record& rec) {
    json j{{"request_id", rec.request_id},
           {"prompt_digest", rec.prompt_digest},
           {"question_id", rec.question_id},
           {"strategy", rec.strategy},
           {"params", {{"temperature", rec.temperature}, {"max_tokens", rec.max_tokens}}},
           {"latency_ms", rec.latency_ms},
           {"outcome", rec.outcome}};
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << "\n";
}

std::vector<RunLedger::Record> RunLedger::load(const std::string& path) {
    std::vector<Record> records;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        Record rec;
        rec.request_id = j.value("request_id", "");
        rec.prompt_digest = j.value("prompt_digest", "");
        rec.question_id = j.value("question_id", "");
        rec.strategy = j.value("strategy", "");
        if (j.contains("params")) {
            rec.temperature = j["params"].value("temperature", 0.0);
            rec.max_tokens = j["params"].value("max_tokens", 0);
        }
        rec.latency_ms = j.value("latency_ms", std::int64_t{0});
        rec.outcome = j.value("outcome", "");
        records.push_back(std::move(rec));
    }
    return records;
}

void Gateway::log_request(const std::string& prompt, const SamplingParams& params,
                          int sample_index, std::int64_t latency_ms, const std::string& outcome) {
    if (!ledger_) return;
    RunLedger::Record rec;
    rec.prompt_digest = prompt_digest(prompt);
    rec.request_id = rec.prompt_digest + "-" + std::to_string(sample_index);
    rec.question_id = question_id_;
    rec.strategy = strategy_tag_;
    rec.temperature = params.temperature;
    rec.max_tokens = params.max_tokens;
    rec.latency_ms = latency_ms;
    rec.outcome = outcome;
    ledger_->append(rec);
}

MockGateway::MockGateway(std::uint64_t seed, LmEndpoint endpoint)
    : seed_(seed), endpoint_(std::move(endpoint)) {}

std::string MockGateway::default_reply(const std::string& prompt, int sample_index,
                                       std::uint64_t seed) {
    // Aggregation prompt: echo the consensus of the embedded answer slots.
    if (prompt.find("Answer 1:") != std::string::npos) {
        std::vector<std::string> answers;
        std::size_t pos = 0;
        while ((pos = prompt.find("<answer>", pos)) != std::string::npos) {
            std::size_t end = prompt.find("</answer>", pos);
            if (end == std::string::npos) break;
            answers.push_back(normalize_answer(prompt.substr(pos + 8, end - pos - 8)));
            pos = end + 9;
        }
        std::string best;
        std::size_t best_count = 0;
        for (std::size_t i = 0; i < answers.size(); ++i) {
            std::size_t count = 0;
            for (const auto& a : answers)
                if (answers_equivalent(a, answers[i])) ++count;
            if (count > best_count) {
                best_count = count;
                best = answers[i];
            }
        }
        if (best.empty()) return "<think>no parsable candidates</think> <answer>0</answer>";
        return "<think>picking the most frequent candidate</think> <answer>" + best + "</answer>";
    }
    // Candidate generation: consensus value per prompt, with a deterministic
    // minority of dissenting samples.
    std::uint64_t base = mix(fnv1a(prompt), seed);
    std::uint64_t draw = mix(base, static_cast<std::uint64_t>(sample_index) + 1);
    std::uint64_t value = (draw % 4 != 0) ? base % 100 : draw % 1000;
    return "<think>worked the problem, sample " + std::to_string(sample_index) +
           "</think> <answer>" + std::to_string(value) + "</answer>";
}

std::string MockGateway::complete(const std::string& prompt, const SamplingParams& params,
                                  int sample_index) {
    if (fault_ && fault_(prompt, sample_index)) {
        log_request(prompt, params, sample_index, 0, "transport_error");
        throw GatewayError(GatewayErrorKind::transport, "mock: injected fault");
    }
    std::string reply =
        handler_ ? handler_(prompt, sample_index, seed_) : default_reply(prompt, sample_index, seed_);
    log_request(prompt, params, sample_index, 0, "ok");
    return reply;
}

HttpGateway::HttpGateway(LmEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpGateway::complete(const std::string& prompt, const SamplingParams& params,
                                  int sample_index) {
    json body{{"model", endpoint_.model_name},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens},
              {"n", 1}};
    if (params.top_p) body["top_p"] = *params.top_p;
    if (params.top_k) body["top_k"] = *params.top_k;

    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(endpoint_.timeout_seconds * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<int>(endpoint_.timeout_seconds * 1000)));
    httplib::Headers headers;
    if (!endpoint_.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const int attempts = 3;
    std::string last_error;
    auto start = std::chrono::steady_clock::now();
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(backoff_base_ms_ << (attempt - 1)));
        auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        if (res->status != 200) {
            log_request(prompt, params, sample_index, latency, "transport_error");
            throw GatewayError(GatewayErrorKind::transport,
                               "upstream status " + std::to_string(res->status) + ": " + res->body);
        }
        try {
            json reply = json::parse(res->body);
            std::string content = reply.at("choices").at(0).at("message").at("content");
            log_request(prompt, params, sample_index, latency, "ok");
            return content;
        } catch (const json::exception& e) {
            log_request(prompt, params, sample_index, latency, "malformed_payload");
            throw GatewayError(GatewayErrorKind::malformed_payload,
                               std::string("cannot parse completion payload: ") + e.what());
        }
    }
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    log_request(prompt, params, sample_index, latency, "transport_error");
    throw GatewayError(GatewayErrorKind::transport, "all retries failed: " + last_error);
}

double score_via_http(const std::string& base_url, const std::string& question,
                      const std::string& segment, double timeout_seconds) {
    httplib::Client client(base_url);
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(timeout_seconds * 1000)));
    json body{{"question", question}, {"segment", segment}};
    auto res = client.Post("/v1/score", body.dump(), "application/json");
    if (!res || res->status != 200)
        throw GatewayError(GatewayErrorKind::transport, "scorer request failed");
    try {
        return json::parse(res->body).at("score").get<double>();
    } catch (const json::exception& e) {
        throw GatewayError(GatewayErrorKind::malformed_payload,
                           std::string("bad scorer payload: ") + e.what());
    }
}

std::string question_prompt(const Question& question) {
    return "Solve the following problem. Show your reasoning inside <think></think> tags and "
           "give the final answer inside <answer></answer> tags.\n\nQuestion: " +
           question.text;
}

SampleSet sample_k(Gateway& gateway, const Question& question, const SamplingParams& params,
                   ExtractionFormat format) {
    const int k = params.k;
    std::string prompt = question_prompt(question);
    gateway.set_question_id(question.id);

    std::vector<std::string> replies(k);
    std::vector<std::string> statuses(k, "pending");
    std::atomic<int> next{0};
    int workers = std::min(gateway.endpoint().max_parallel, k);
    auto work = [&] {
        for (int i = next.fetch_add(1); i < k; i = next.fetch_add(1)) {
            try {
                replies[i] = gateway.complete(prompt, params, i);
                statuses[i] = "ok";
            } catch (const GatewayError& e) {
                statuses[i] = e.kind() == GatewayErrorKind::malformed_payload
                                  ? "malformed_payload"
                                  : "transport_error";
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    bool any_ok = false;
    for (const auto& s : statuses)
        if (s == "ok") any_ok = true;
    if (!any_ok && k > 0)
        throw SampleSetError("sample_k: every request failed", statuses);

    SampleSet set;
    set.question = question;
    set.candidates.reserve(k);
    for (int i = 0; i < k; ++i) {
        Candidate cand;
        cand.text = replies[i];
        cand.token_count = count_tokens(cand.text);
        if (statuses[i] == "ok") {
            if (auto ext = extract_answer(cand.text, format)) {
                cand.extracted_answer = normalize_answer(ext->answer);
                cand.is_valid = true;
            }
        }
        set.candidates.push_back(std::move(cand));
    }
    return set;
}

std::string complete_checked(Gateway& gateway, const std::string& prompt,
                             const SamplingParams& params) {
    if (count_tokens(prompt) > gateway.endpoint().context_budget_tokens)
        throw GatewayError(GatewayErrorKind::context_overflow,
                           "prompt of " + std::to_string(count_tokens(prompt)) +
                               " tokens exceeds context budget of " +
                               std::to_string(gateway.endpoint().context_budget_tokens));
    return gateway.complete(prompt, params, 0);
}

}  // namespace ssa
