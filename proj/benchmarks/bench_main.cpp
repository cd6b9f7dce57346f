#include <benchmark/benchmark.h>

#include "phishlex/features.hpp"
#include "phishlex/model_store.hpp"
#include "phishlex/pdns.hpp"
#include "phishlex/rng.hpp"
#include "phishlex/svm.hpp"
#include "phishlex/tree.hpp"
#include "phishlex/url_model.hpp"

namespace {

using namespace phishlex;

const char* kHosts[] = {
    "www.example.com",
    "login.secure-pay4u-8841.verify-account.top",
    "a1.b2.c3.d4.e5.long-subdomain-chain.example.org",
    "xn--sterreich-z7a.at",
};

void BM_NormalizeDecompose(benchmark::State& state) {
    std::size_t i = 0;
    for (auto _ : state) {
        const DomainParts parts = decompose(normalize(kHosts[i++ % 4]));
        benchmark::DoNotOptimize(parts);
    }
}
BENCHMARK(BM_NormalizeDecompose);

void BM_ExtractFeatures(benchmark::State& state) {
    const DomainParts parts = decompose("login.secure-pay4u-8841.verify-account.top");
    for (auto _ : state) {
        const FeatureVector f = extract(parts);
        benchmark::DoNotOptimize(f);
    }
}
BENCHMARK(BM_ExtractFeatures);

void BM_ShannonEntropy(benchmark::State& state) {
    const std::string s = "login.secure-pay4u-8841.verify-account.top";
    for (auto _ : state) {
        benchmark::DoNotOptimize(shannon_entropy(s));
    }
}
BENCHMARK(BM_ShannonEntropy);

LabeledDataset bench_corpus() {
    auto rng = make_rng(9001);
    LabeledDataset ds;
    for (int i = 0; i < 400; ++i) {
        LabeledExample ex;
        ex.label = i % 2 == 0 ? Label::Benign : Label::Malicious;
        for (double& v : ex.features.values) {
            v = static_cast<double>(draw_below(rng, 1000)) / 50.0;
        }
        ex.features.at_id(4) += ex.label == Label::Malicious ? 15.0 : 0.0;
        ex.host = "bench" + std::to_string(i) + ".test";
        ex.parts = decompose(ex.host);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

void BM_ForestFit(benchmark::State& state) {
    const LabeledDataset ds = bench_corpus();
    ForestParams params;
    params.n_estimators = static_cast<std::size_t>(state.range(0));
    params.tree.max_depth = 5;
    for (auto _ : state) {
        const ForestModel model = fit_forest(ds, params);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_ForestFit)->Arg(1)->Arg(10)->Arg(20);

void BM_ForestPredict(benchmark::State& state) {
    const LabeledDataset ds = bench_corpus();
    ForestParams params;
    params.n_estimators = 20;
    params.tree.max_depth = 5;
    const ForestModel model = fit_forest(ds, params);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            predict_forest(model, ds.examples[i++ % ds.examples.size()].features));
    }
}
BENCHMARK(BM_ForestPredict);

void BM_SvmDecision(benchmark::State& state) {
    const LabeledDataset ds = bench_corpus();
    SvmParams params;
    params.c = 10.0;
    const SvmModel model = fit_svm(ds, params);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            decision_value(model, ds.examples[i++ % ds.examples.size()].features));
    }
}
BENCHMARK(BM_SvmDecision);

void BM_PdnsParse(benchmark::State& state) {
    const std::string line =
        "1563000000.123||10.0.0.5||8.8.8.8||IN||test.com.||A||93.184.216.34||3600||1";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_line(line));
    }
}
BENCHMARK(BM_PdnsParse);

} // namespace

BENCHMARK_MAIN();
