#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace alnf::client {

/// One judge call. Implementations must be safe to call from multiple
/// threads at once.
class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    virtual std::string send(const std::string& prompt, double temperature) = 0;
};

/// Produces a client per (run index, run seed). The mock uses both; remote
/// clients ignore them.
using ClientFactory =
    std::function<std::unique_ptr<JudgeClient>(int run_index, std::uint64_t run_seed)>;

// ---------------------------------------------------------------------------
// deterministic mock
// ---------------------------------------------------------------------------

enum class MockMode {
    prefer_contains,    // verdict prompts: prefer the response containing `needle`
    prefer_first,       // verdict prompts: always Response1
    first_slot_biased,  // verdict prompts: Response1 with probability first_slot_prob
    score_by_needle,    // scoring prompts: needle-bearing response gets the high score
    fixed_scores,       // scoring prompts: always (score_high, score_low)
};

MockMode mock_mode_from_string(const std::string& s);

struct MockJudgeConfig {
    MockMode mode = MockMode::prefer_contains;
    std::uint64_t seed = 0;
    int run_index = 0;
    std::string needle;
    double first_slot_prob = 0.8;
    double score_high = 8.0;
    double score_low = 8.0;
    // Optional per-run (high, low) table indexed by run_index.
    std::vector<std::pair<double, double>> scores_by_run;
    double score_noise = 0.0;  // +- uniform noise, seeded per prompt
    // Prompts containing this marker get a deliberately unparseable reply.
    std::string unparseable_needle;
};

/// Pure function of (prompt, config): parses the prompt sections it needs and
/// emits either a bare verdict token or a "s1 s2\n<explanation>" score line.
class MockJudge : public JudgeClient {
public:
    explicit MockJudge(MockJudgeConfig cfg) : cfg_(std::move(cfg)) {}

    std::string send(const std::string& prompt, double temperature) override;

private:
    MockJudgeConfig cfg_;
};

/// Extracts the body between a "[section]" header line and the next section
/// header (or end). Used by the mock and handy for tests.
std::string extract_section(const std::string& prompt, const std::string& header);

// ---------------------------------------------------------------------------
// remote chat-completion client
// ---------------------------------------------------------------------------

struct HttpJudgeConfig {
    std::string base_url;         // e.g. http://127.0.0.1:8080
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    std::string auth_env = "ALNF_JUDGE_TOKEN";  // env var holding the bearer token
    int max_attempts = 3;
    int backoff_initial_ms = 250;  // doubled per retry
    int timeout_seconds = 60;
};

/// POSTs an OpenAI-style chat completion and returns the first choice's
/// message content. Retries idempotently on transport errors and 5xx.
class HttpJudgeClient : public JudgeClient {
public:
    explicit HttpJudgeClient(HttpJudgeConfig cfg);

    std::string send(const std::string& prompt, double temperature) override;

private:
    HttpJudgeConfig cfg_;
    std::string token_;
};

}  // namespace alnf::client
