#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssa/core_types.hpp"
#include "ssa/extraction.hpp"

namespace ssa {

struct LmEndpoint {
    std::string base_url;          // e.g. "http://localhost:8000"
    std::string model_name;
    std::string api_key_env;       // env var holding the key; empty = no auth
    double timeout_seconds = 120.0;
    int max_parallel = 4;
    std::uint64_t context_budget_tokens = 32768;
};

struct SamplingParams {
    double temperature = 0.5;
    int max_tokens = 1024;
    int k = 1;
    std::optional<double> top_p;   // passed through verbatim when set
    std::optional<int> top_k;
};

enum class GatewayErrorKind { transport, context_overflow, malformed_payload };

class GatewayError : public std::runtime_error {
  public:
    GatewayError(GatewayErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    GatewayErrorKind kind() const { return kind_; }

  private:
    GatewayErrorKind kind_;
};

// Thrown by sample_k only when every request failed at the transport level.
class SampleSetError : public std::runtime_error {
  public:
    SampleSetError(std::string what, std::vector<std::string> per_index_status)
        : std::runtime_error(std::move(what)), statuses_(std::move(per_index_status)) {}
    const std::vector<std::string>& per_index_status() const { return statuses_; }

  private:
    std::vector<std::string> statuses_;
};

// Append-only JSONL request log, one record per upstream call.
class RunLedger {
  public:
    struct Record {
        std::string request_id;
        std::string prompt_digest;
        std::string question_id;
        std::string strategy;
        double temperature = 0.0;
        int max_tokens = 0;
        std::int64_t latency_ms = 0;
        std::string outcome;  // "ok" | "transport_error" | ...
    };

    explicit RunLedger(std::string path) : path_(std::move(path)) {}
    void append(const Record& rec);
    static std::vector<Record> load(const std::string& path);

  private:
    std::string path_;
    std::mutex mutex_;
};

std::string prompt_digest(std::string_view prompt);

// Black-box chat-completion access. complete() returns one generation for
// the given prompt; sample_index distinguishes parallel draws of the same
// prompt so the mock can stay deterministic.
class Gateway {
  public:
    virtual ~Gateway() = default;
    virtual std::string complete(const std::string& prompt, const SamplingParams& params,
                                 int sample_index) = 0;
    virtual const LmEndpoint& endpoint() const = 0;

    void set_ledger(RunLedger* ledger) { ledger_ = ledger; }
    RunLedger* ledger() const { return ledger_; }
    void set_strategy_tag(std::string tag) { strategy_tag_ = std::move(tag); }
    void set_question_id(std::string id) { question_id_ = std::move(id); }

  protected:
    void log_request(const std::string& prompt, const SamplingParams& params, int sample_index,
                     std::int64_t latency_ms, const std::string& outcome);

  private:
    RunLedger* ledger_ = nullptr;
    std::string strategy_tag_;
    std::string question_id_;
};

// Deterministic scripted gateway: the reply is a pure function of
// (prompt digest, sample index, seed). A handler override and a fault
// predicate allow tests to script exact behavior.
class MockGateway : public Gateway {
  public:
    using Handler = std::function<std::string(const std::string& prompt, int sample_index,
                                              std::uint64_t seed)>;
    using FaultPredicate = std::function<bool(const std::string& prompt, int sample_index)>;

    explicit MockGateway(std::uint64_t seed, LmEndpoint endpoint = {"mock://", "mock", "", 1.0, 8});

    std::string complete(const std::string& prompt, const SamplingParams& params,
                         int sample_index) override;
    const LmEndpoint& endpoint() const override { return endpoint_; }

    void set_handler(Handler h) { handler_ = std::move(h); }
    void set_fault(FaultPredicate f) { fault_ = std::move(f); }
    std::uint64_t seed() const { return seed_; }

    // Built-in behavior when no handler is installed: candidate-generation
    // prompts get "<think>...</think> <answer>N</answer>" with N derived
    // from (digest, index, seed); aggregation prompts (containing labeled
    // answer blocks) get the most frequent embedded answer back.
    static std::string default_reply(const std::string& prompt, int sample_index,
                                     std::uint64_t seed);

  private:
    std::uint64_t seed_;
    LmEndpoint endpoint_;
    Handler handler_;
    FaultPredicate fault_;
};

// OpenAI-style chat-completions client over HTTP. 3 attempts with
// exponential backoff on transport errors and 5xx.
class HttpGateway : public Gateway {
  public:
    explicit HttpGateway(LmEndpoint endpoint);

    std::string complete(const std::string& prompt, const SamplingParams& params,
                         int sample_index) override;
    const LmEndpoint& endpoint() const override { return endpoint_; }

    void set_backoff_base_ms(int ms) { backoff_base_ms_ = ms; }

  private:
    LmEndpoint endpoint_;
    int backoff_base_ms_ = 250;
};

// Step 1 of the pipeline: k independent draws for one question, reassembled
// in request order. A failed draw becomes an invalid Candidate; only a full
// transport wipeout raises SampleSetError.
SampleSet sample_k(Gateway& gateway, const Question& question, const SamplingParams& params,
                   ExtractionFormat format);

// Single-prompt completion with a context-budget check. A prompt whose
// token count exceeds the endpoint budget raises
// GatewayError{context_overflow} without touching the wire.
std::string complete_checked(Gateway& gateway, const std::string& prompt,
                             const SamplingParams& params);

// Renders the user-facing content of a candidate-generation request.
std::string question_prompt(const Question& question);

// External scorer wire format: POST {base_url}/v1/score with
// {"question": ..., "segment": ...}, reply {"score": <real>}.
double score_via_http(const std::string& base_url, const std::string& question,
                      const std::string& segment, double timeout_seconds = 60.0);

}  // namespace ssa
