#include "doctest.h"

#include <cmath>

#include "phishlex/errors.hpp"
#include "phishlex/rng.hpp"
#include "phishlex/svm.hpp"
#include "support/synthetic.hpp"

using namespace phishlex;
using namespace phishlex::testsupport;

namespace {

LabeledDataset table(const std::vector<std::pair<std::array<double, 2>, Label>>& rows) {
    LabeledDataset ds;
    std::size_t i = 0;
    for (const auto& [xy, label] : rows) {
        LabeledExample ex;
        ex.host = "svm" + std::to_string(i++) + ".test";
        ex.parts = decompose(ex.host);
        ex.features.at_id(1) = xy[0];
        ex.features.at_id(2) = xy[1];
        ex.label = label;
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

// Two overlapping uniform clouds on two features.
LabeledDataset overlapping_fixture(std::size_t per_class, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::vector<std::pair<std::array<double, 2>, Label>> rows;
    auto noise = [&] {
        return static_cast<double>(draw_below(rng, 2001)) / 1000.0 - 1.0; // [-1, 1]
    };
    for (std::size_t i = 0; i < per_class; ++i) {
        rows.push_back({{-0.5 + noise(), -0.5 + noise()}, Label::Benign});
        rows.push_back({{0.5 + noise(), 0.5 + noise()}, Label::Malicious});
    }
    return table(rows);
}

double training_accuracy(const SvmModel& model, const LabeledDataset& ds) {
    std::size_t hits = 0;
    for (const auto& ex : ds.examples) {
        if (predict_svm(model, ex.features) == ex.label) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(ds.examples.size());
}

std::size_t margin_violations(const SvmModel& model, const LabeledDataset& ds) {
    std::size_t n = 0;
    for (const auto& ex : ds.examples) {
        const double y = ex.label == Label::Malicious ? 1.0 : -1.0;
        if (y * decision_value(model, ex.features) < 1.0 - 0.01) {
            ++n;
        }
    }
    return n;
}

} // namespace

TEST_SUITE("svm") {

TEST_CASE("rbf kernel") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);

    const std::vector<double> z{1.0, 2.0, 4.0}; // squared distance 1
    CHECK(rbf_kernel(x, z, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(rbf_kernel(x, z, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));

    const std::vector<double> short_vec{1.0};
    CHECK_THROWS_AS(rbf_kernel(x, short_vec, 1.0), DimensionMismatchError);
}

TEST_CASE("standardizer replaces zero spread with one") {
    const LabeledDataset ds = table({{{1.0, 5.0}, Label::Benign}, {{1.0, 7.0}, Label::Malicious}});
    const Standardizer s = fit_standardizer(ds);
    CHECK(s.stddevs[0] == 1.0); // constant column
    CHECK(s.means[0] == 1.0);
    CHECK(s.stddevs[1] == doctest::Approx(1.0).epsilon(1e-12));
    const FeatureVector z = s.apply(ds.examples[0].features);
    CHECK(z.values[0] == 0.0);
}

TEST_CASE("well separated pairs train to full accuracy") {
    const LabeledDataset ds = table({{{-5.0, -5.0}, Label::Benign},
                                     {{-4.0, -5.0}, Label::Benign},
                                     {{5.0, 5.0}, Label::Malicious},
                                     {{4.0, 5.0}, Label::Malicious}});
    SvmParams params;
    params.c = 1.0;
    params.gamma = 0.5;
    const SvmModel model = fit_svm(ds, params);
    CHECK(model.converged);
    CHECK(training_accuracy(model, ds) == 1.0);
}

TEST_CASE("rbf separates xor") {
    const LabeledDataset ds = table({{{0.0, 0.0}, Label::Benign},
                                     {{1.0, 1.0}, Label::Benign},
                                     {{0.0, 1.0}, Label::Malicious},
                                     {{1.0, 0.0}, Label::Malicious}});
    SvmParams params;
    params.c = 10.0;
    params.gamma = 1.0;
    const SvmModel model = fit_svm(ds, params);
    CHECK(model.converged);
    CHECK(training_accuracy(model, ds) == 1.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const LabeledDataset ds = overlapping_fixture(60, 13);
    SvmParams params;
    params.c = 1.0;
    params.seed = 5;
    const SvmModel a = fit_svm(ds, params);
    const SvmModel b = fit_svm(ds, params);
    REQUIRE(a.support_vectors.size() == b.support_vectors.size());
    for (const auto& ex : ds.examples) {
        CHECK(std::abs(decision_value(a, ex.features) - decision_value(b, ex.features)) <= 1e-9);
    }
}

TEST_CASE("flipping every label negates the decision function") {
    const LabeledDataset ds = overlapping_fixture(40, 29);
    LabeledDataset flipped = ds;
    for (auto& ex : flipped.examples) {
        ex.label = ex.label == Label::Benign ? Label::Malicious : Label::Benign;
    }
    SvmParams params;
    params.c = 2.0;
    params.seed = 3;
    const SvmModel pos = fit_svm(ds, params);
    const SvmModel neg = fit_svm(flipped, params);
    for (const auto& ex : ds.examples) {
        CHECK(decision_value(pos, ex.features) ==
              doctest::Approx(-decision_value(neg, ex.features)).epsilon(1e-9));
    }
}

TEST_CASE("dual feasibility holds after training") {
    const LabeledDataset ds = overlapping_fixture(80, 41);
    SvmParams params;
    params.c = 1.5;
    params.seed = 7;
    const SvmModel model = fit_svm(ds, params);
    double balance = 0.0;
    for (const SupportVector& sv : model.support_vectors) {
        CHECK(sv.alpha >= 0.0);
        CHECK(sv.alpha <= params.c + 1e-12);
        balance += sv.alpha * sv.y;
    }
    CHECK(std::abs(balance) < 1e-6);
}

TEST_CASE("non-bound support vectors sit on the margin") {
    const LabeledDataset ds = overlapping_fixture(60, 53);
    SvmParams params;
    params.c = 5.0;
    params.seed = 11;
    const SvmModel model = fit_svm(ds, params);
    REQUIRE(model.converged);

    std::size_t checked = 0;
    for (const SupportVector& sv : model.support_vectors) {
        if (sv.alpha >= params.c - 1e-9) {
            continue; // bound vectors may sit inside the margin
        }
        // evaluate the decision function at the (already standardized) vector
        double f = model.bias;
        for (const SupportVector& other : model.support_vectors) {
            f += other.alpha * other.y *
                 rbf_kernel(other.x.values, sv.x.values, params.gamma);
        }
        CHECK(std::abs(std::abs(f) - 1.0) <= 10.0 * params.tolerance);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("power-of-two rescaling of a raw column leaves predictions alone") {
    const LabeledDataset ds = overlapping_fixture(50, 67);
    LabeledDataset scaled = ds;
    for (auto& ex : scaled.examples) {
        ex.features.at_id(1) *= 4.0; // exact in floating point
    }
    SvmParams params;
    params.c = 1.0;
    params.seed = 17;
    const SvmModel a = fit_svm(ds, params);
    const SvmModel b = fit_svm(scaled, params);
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        CHECK(predict_svm(a, ds.examples[i].features) ==
              predict_svm(b, scaled.examples[i].features));
    }
}

TEST_CASE("raising c never adds margin violations on the fixture") {
    const LabeledDataset ds = overlapping_fixture(60, 71);
    std::size_t previous = ds.examples.size() + 1;
    for (double c : {0.1, 1.0, 10.0, 100.0}) {
        SvmParams params;
        params.c = c;
        params.seed = 19;
        params.max_passes = 400;
        const SvmModel model = fit_svm(ds, params);
        const std::size_t violations = margin_violations(model, ds);
        CHECK(violations <= previous);
        previous = violations;
    }
}

TEST_CASE("a one-pass budget returns a flagged model") {
    const LabeledDataset ds = overlapping_fixture(80, 83);
    SvmParams params;
    params.max_passes = 1;
    params.seed = 23;
    const SvmModel model = fit_svm(ds, params);
    CHECK_FALSE(model.converged);
    CHECK_FALSE(model.support_vectors.empty()); // still usable
}

TEST_CASE("degenerate model reduces to its bias") {
    SvmModel model;
    model.bias = -0.75;
    for (double& sd : model.standardizer.stddevs) {
        sd = 1.0;
    }
    FeatureVector x;
    x.at_id(1) = 3.0;
    CHECK(decision_value(model, x) == -0.75);
    CHECK(predict_svm(model, x) == Label::Benign);
}

TEST_CASE("training requires both classes") {
    LabeledDataset ds = table({{{0.0, 0.0}, Label::Benign}, {{1.0, 1.0}, Label::Benign}});
    CHECK_THROWS_AS(fit_svm(ds, SvmParams{}), EmptyDatasetError);
}

} // TEST_SUITE
