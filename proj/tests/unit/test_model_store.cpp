#include "doctest.h"

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include "phishlex/errors.hpp"
#include "phishlex/model_store.hpp"
#include "phishlex/rng.hpp"
#include "support/synthetic.hpp"

using namespace phishlex;
using namespace phishlex::testsupport;

namespace {

std::filesystem::path temp_path(const std::string& stem) {
    return std::filesystem::temp_directory_path() /
           ("phishlex_ms_" + std::to_string(::getpid()) + "_" + stem + ".plxm");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << contents;
}

FeatureVector random_vector(std::mt19937_64& rng) {
    FeatureVector f;
    for (double& v : f.values) {
        v = static_cast<double>(draw_below(rng, 4000)) / 100.0;
    }
    return f;
}

struct Cleanup {
    std::vector<std::filesystem::path> paths;
    ~Cleanup() {
        for (const auto& p : paths) {
            std::filesystem::remove(p);
        }
    }
};

} // namespace

TEST_SUITE("model_store") {

TEST_CASE("forest round trip keeps every vote") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(60, 101);
    ForestParams params;
    params.n_estimators = 12;
    params.seed = 44;
    ModelEnvelope env = make_envelope(fit_forest(ds, params), "fnv1a:0000000000000000");

    const auto path = temp_path("forest");
    cleanup.paths.push_back(path);
    save_model(env, path);
    const ModelEnvelope back = load_model(path);
    CHECK(back.algorithm == Algo::Forest);
    CHECK(back.training_digest == env.training_digest);

    const auto& original = std::get<ForestModel>(env.payload);
    const auto& restored = std::get<ForestModel>(back.payload);
    auto rng = make_rng(500);
    for (int i = 0; i < 1000; ++i) {
        const FeatureVector x = random_vector(rng);
        const auto a = predict_forest(original, x);
        const auto b = predict_forest(restored, x);
        CHECK(a.label == b.label);
        CHECK(a.votes.benign == b.votes.benign);
        CHECK(a.votes.malicious == b.votes.malicious);
    }
}

TEST_CASE("svm round trip keeps every decision value") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(40, 103);
    SvmParams params;
    params.c = 5.0;
    params.seed = 9;
    ModelEnvelope env = make_envelope(fit_svm(ds, params), "fnv1a:0000000000000000");

    const auto path = temp_path("svm");
    cleanup.paths.push_back(path);
    save_model(env, path);
    const ModelEnvelope back = load_model(path);

    const auto& original = std::get<SvmModel>(env.payload);
    const auto& restored = std::get<SvmModel>(back.payload);
    CHECK(original.support_vectors.size() == restored.support_vectors.size());
    auto rng = make_rng(501);
    for (int i = 0; i < 1000; ++i) {
        const FeatureVector x = random_vector(rng);
        // shortest round-trip floats reload to the same doubles, so the
        // decision values match exactly
        CHECK(decision_value(original, x) == decision_value(restored, x));
    }
}

TEST_CASE("saving twice produces byte-identical files") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(30, 107);
    ForestParams params;
    params.n_estimators = 5;
    params.seed = 77;
    const ModelEnvelope env = make_envelope(fit_forest(ds, params), "fnv1a:00000000000000ab");

    const auto a = temp_path("twin_a");
    const auto b = temp_path("twin_b");
    cleanup.paths.push_back(a);
    cleanup.paths.push_back(b);
    save_model(env, a);
    save_model(env, b);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("a stamped save differs only by the created_at line") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(20, 109);
    ModelEnvelope env = make_envelope(fit_forest(ds, ForestParams{}), "fnv1a:0000000000000001");

    const auto plain = temp_path("plain");
    const auto stamped = temp_path("stamped");
    cleanup.paths.push_back(plain);
    cleanup.paths.push_back(stamped);
    save_model(env, plain);
    env.created_at = "2026-01-01T00:00:00Z";
    save_model(env, stamped);

    const std::string a = slurp(plain);
    const std::string b = slurp(stamped);
    CHECK(a != b);
    CHECK(b.find("created_at 2026-01-01T00:00:00Z\n") != std::string::npos);
    const ModelEnvelope back = load_model(stamped);
    CHECK(back.created_at == "2026-01-01T00:00:00Z");
    CHECK(model_digest(back) == model_digest(load_model(plain)));
}

TEST_CASE("unknown format version is a schema error") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(10, 113);
    const ModelEnvelope env = make_envelope(fit_forest(ds, ForestParams{}), "fnv1a:0");
    const auto path = temp_path("version");
    cleanup.paths.push_back(path);
    save_model(env, path);

    std::string contents = slurp(path);
    contents.replace(contents.find("plxm 1"), 6, "plxm 999");
    spit(path, contents);
    CHECK_THROWS_AS(load_model(path), SchemaError);
}

TEST_CASE("feature name mismatch is a schema error") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(10, 127);
    const ModelEnvelope env = make_envelope(fit_forest(ds, ForestParams{}), "fnv1a:0");
    const auto path = temp_path("names");
    cleanup.paths.push_back(path);
    save_model(env, path);

    std::string contents = slurp(path);
    const auto pos = contents.find("UniqueChars");
    contents.replace(pos, 11, "BogusChars1");
    spit(path, contents);
    CHECK_THROWS_AS(load_model(path), SchemaError);
}

TEST_CASE("truncation is a corrupt payload") {
    Cleanup cleanup;
    const LabeledDataset ds = synthetic_corpus(10, 131);
    const ModelEnvelope env = make_envelope(fit_forest(ds, ForestParams{}), "fnv1a:0");
    const auto path = temp_path("truncated");
    cleanup.paths.push_back(path);
    save_model(env, path);

    const std::string contents = slurp(path);
    spit(path, contents.substr(0, contents.size() * 2 / 3));
    CHECK_THROWS_AS(load_model(path), CorruptPayloadError);

    spit(path, contents.substr(0, 10));
    CHECK_THROWS_AS(load_model(path), CorruptPayloadError);
}

TEST_CASE("loading a missing file is an io error") {
    CHECK_THROWS_AS(load_model("/nonexistent/dir/m.plxm"), IoError);
}

TEST_CASE("model digest ignores the timestamp but tracks the payload") {
    const LabeledDataset ds = synthetic_corpus(15, 137);
    ForestParams params;
    params.seed = 1;
    ModelEnvelope a = make_envelope(fit_forest(ds, params), "fnv1a:0");
    const std::string before = model_digest(a);
    a.created_at = "2026-02-02T02:02:02Z";
    CHECK(model_digest(a) == before);

    params.seed = 2;
    const ModelEnvelope c = make_envelope(fit_forest(ds, params), "fnv1a:0");
    CHECK(model_digest(c) != before);
}

} // TEST_SUITE
