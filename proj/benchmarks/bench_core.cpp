#include <benchmark/benchmark.h>

#include "alnf/bench.hpp"
#include "alnf/ppo.hpp"
#include "alnf/prefpipe.hpp"
#include "alnf/reward.hpp"
#include "alnf/rng.hpp"
#include "alnf/tinylm.hpp"

using namespace alnf;

namespace {

lm::ModelArch bench_arch() {
    lm::ModelArch arch;
    arch.vocab_size = 64;
    arch.embed_dim = 16;
    arch.hidden_dim = 32;
    arch.context_window = 64;
    arch.hidden_layers = 2;
    return arch;
}

TokenSeq random_seq(Rng& rng, int vocab, std::size_t len) {
    TokenSeq seq;
    for (std::size_t i = 0; i < len; ++i)
        seq.push_back(static_cast<Token>(rng.next_index(vocab)));
    return seq;
}

void BM_logprobs(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto model = lm::PolicyModel::init(arch, Vocabulary{64, 0, 1, 2}, 1);
    Rng rng(2);
    const TokenSeq seq = random_seq(rng, arch.vocab_size, 48);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.log_probs(seq));
    }
}
BENCHMARK(BM_logprobs);

void BM_sample(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto model = lm::PolicyModel::init(arch, Vocabulary{64, 0, 1, 2}, 1);
    lm::SamplingConfig cfg;
    cfg.max_length = 48;
    cfg.seed = 3;
    const TokenSeq prompt{0, 5, 9};
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.sample(prompt, cfg));
    }
}
BENCHMARK(BM_sample);

void BM_pairwise_loss_grad(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto rm = reward::RewardModel::init(arch, Vocabulary{64, 0, 1, 2}, 4);
    Rng rng(5);
    std::vector<reward::PreferenceExample> batch;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
        reward::PreferenceExample ex;
        ex.input = random_seq(rng, arch.vocab_size, 6);
        ex.chosen = random_seq(rng, arch.vocab_size, 16);
        ex.rejected = random_seq(rng, arch.vocab_size, 16);
        batch.push_back(std::move(ex));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(reward::pairwise_loss_eval(rm, batch));
    }
}
BENCHMARK(BM_pairwise_loss_grad)->Arg(8)->Arg(32);

void BM_gae(benchmark::State& state) {
    Rng rng(6);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> rewards(n), values(n);
    for (auto& r : rewards) r = rng.next_double(-1, 1);
    for (auto& v : values) v = rng.next_double(-1, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ppo::gae(rewards, values, 1.0, 0.95));
    }
}
BENCHMARK(BM_gae)->Arg(16)->Arg(256);

void BM_order_switch_filter(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<prefpipe::PairItem> items;
    std::vector<prefpipe::LabelingRun> original, swapped;
    Rng rng(7);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "q" + std::to_string(i);
        items.push_back({id, "instr", "a", "b"});
        const bool keep = rng.next_double() < 0.8;
        original.push_back({id, prefpipe::PresentationOrder::original,
                            prefpipe::Verdict::response1});
        swapped.push_back({id, prefpipe::PresentationOrder::swapped,
                           keep ? prefpipe::Verdict::response2 : prefpipe::Verdict::response1});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(prefpipe::order_switch_filter(items, original, swapped));
    }
}
BENCHMARK(BM_order_switch_filter)->Arg(1000);

void BM_pearson(benchmark::State& state) {
    Rng rng(8);
    std::vector<double> xs(1000), ys(1000);
    for (auto& x : xs) x = rng.next_double(-1, 1);
    for (auto& y : ys) y = rng.next_double(-1, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bench::pearson(xs, ys));
    }
}
BENCHMARK(BM_pearson);

void BM_parse_yes_no(benchmark::State& state) {
    const std::string text = "بعد تفكير طويل، الإجابة هي نعم بالتأكيد";
    for (auto _ : state) {
        benchmark::DoNotOptimize(bench::parse_yes_no(text));
    }
}
BENCHMARK(BM_parse_yes_no);

}  // namespace

BENCHMARK_MAIN();
