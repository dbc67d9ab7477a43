#include "alnf/judge_client.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alnf/errors.hpp"
#include "alnf/rng.hpp"

namespace alnf::client {

MockMode mock_mode_from_string(const std::string& s) {
    if (s == "prefer_contains") return MockMode::prefer_contains;
    if (s == "prefer_first") return MockMode::prefer_first;
    if (s == "first_slot_biased") return MockMode::first_slot_biased;
    if (s == "score_by_needle") return MockMode::score_by_needle;
    if (s == "fixed_scores") return MockMode::fixed_scores;
    throw ConfigError("unknown mock judge mode: " + s);
}

std::string extract_section(const std::string& prompt, const std::string& header) {
    const std::string tag = "[" + header + "]\n";
    const std::size_t at = prompt.find(tag);
    if (at == std::string::npos) return "";
    const std::size_t begin = at + tag.size();
    std::size_t end = prompt.find("\n\n[", begin);
    if (end == std::string::npos) end = prompt.size();
    return prompt.substr(begin, end - begin);
}

namespace {

std::string format_scores(double s1, double s2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g %g\nMock judge explanation.", s1, s2);
    return buf;
}

}  // namespace

std::string MockJudge::send(const std::string& prompt, double /*temperature*/) {
    if (!cfg_.unparseable_needle.empty() &&
        prompt.find(cfg_.unparseable_needle) != std::string::npos) {
        return "I cannot pick between these two.";
    }
    switch (cfg_.mode) {
        case MockMode::prefer_first:
            return "Response1";
        case MockMode::first_slot_biased: {
            Rng rng(derive_seed(cfg_.seed, "mock/bias", fnv1a64(prompt)));
            return rng.next_double() < cfg_.first_slot_prob ? "Response1" : "Response2";
        }
        case MockMode::prefer_contains: {
            const std::string r1 = extract_section(prompt, "Response1");
            const std::string r2 = extract_section(prompt, "Response2");
            const bool in1 = r1.find(cfg_.needle) != std::string::npos;
            const bool in2 = r2.find(cfg_.needle) != std::string::npos;
            if (in1 == in2) return "Response1";  // both or neither: fall back to the first slot
            return in1 ? "Response1" : "Response2";
        }
        case MockMode::score_by_needle:
        case MockMode::fixed_scores: {
            double high = cfg_.score_high, low = cfg_.score_low;
            if (!cfg_.scores_by_run.empty()) {
                const auto& entry =
                    cfg_.scores_by_run[static_cast<std::size_t>(cfg_.run_index) %
                                       cfg_.scores_by_run.size()];
                high = entry.first;
                low = entry.second;
            }
            if (cfg_.score_noise > 0.0) {
                Rng rng(derive_seed(cfg_.seed, "mock/noise", fnv1a64(prompt)));
                high += rng.next_double(-cfg_.score_noise, cfg_.score_noise);
                low += rng.next_double(-cfg_.score_noise, cfg_.score_noise);
            }
            if (cfg_.mode == MockMode::fixed_scores) return format_scores(high, low);
            const std::string a1 = extract_section(prompt, "Assistant 1");
            const bool first_has_needle = a1.find(cfg_.needle) != std::string::npos;
            return first_has_needle ? format_scores(high, low) : format_scores(low, high);
        }
    }
    throw ValidationError("unhandled mock judge mode");
}

HttpJudgeClient::HttpJudgeClient(HttpJudgeConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("judge.http.base_url is required");
    if (!cfg_.auth_env.empty()) {
        if (const char* tok = std::getenv(cfg_.auth_env.c_str())) token_ = tok;
    }
}

std::string HttpJudgeClient::send(const std::string& prompt, double temperature) {
    nlohmann::json body = {
        {"model", cfg_.model},
        {"temperature", temperature},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"},
                                                           {"content", prompt}}})},
    };
    const std::string payload = body.dump();

    int backoff_ms = cfg_.backoff_initial_ms;
    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        httplib::Client http(cfg_.base_url);
        http.set_connection_timeout(cfg_.timeout_seconds, 0);
        http.set_read_timeout(cfg_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

        auto res = http.Post(cfg_.path, headers, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                nlohmann::json reply = nlohmann::json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error("judge endpoint returned malformed JSON: " + std::string(e.what()));
            }
        }
        if (res && res->status >= 400 && res->status < 500) {
            throw Error("judge endpoint rejected the request with HTTP " +
                        std::to_string(res->status));
        }
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport error " + httplib::to_string(res.error());
        if (attempt < cfg_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    throw Error("judge call failed after " + std::to_string(cfg_.max_attempts) +
                " attempts: " + last_error);
}

}  // namespace alnf::client
