#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "phishlex/dataset.hpp"

namespace phishlex {

inline constexpr double kGammaPerFeature = 1.0 / static_cast<double>(kFeatureCount);
inline constexpr double kGammaLegacy = 1.0 / 500.0; // coarse preset kept for replays

struct SvmParams {
    double c = 1.0;
    double gamma = kGammaPerFeature;
    double tolerance = 1e-3;
    std::size_t max_passes = 200;
    std::uint64_t seed = 0;
};

// Per-feature z-scoring fitted on the training half; constant columns keep
// a divisor of 1 so they map to zero.
struct Standardizer {
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> stddevs{};

    FeatureVector apply(const FeatureVector& x) const;
};

Standardizer fit_standardizer(const LabeledDataset& ds);

struct SupportVector {
    FeatureVector x; // standardized
    double alpha = 0.0;
    int y = 1; // +1 Malicious, -1 Benign
};

struct SvmModel {
    std::vector<SupportVector> support_vectors;
    double bias = 0.0;
    SvmParams params;
    Standardizer standardizer;
    bool converged = true;
};

// exp(-gamma * ||x - z||^2). Throws DimensionMismatchError.
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

// Soft-margin dual via sequential minimal optimization. Sweeps until a full
// pass finds no KKT violation beyond tolerance; the pass budget caps work
// and a model that exhausts it comes back with converged=false. Working-pair
// fallback scans start at positions drawn from the seed.
SvmModel fit_svm(const LabeledDataset& train, const SvmParams& params);

// sum alpha_i y_i K(sv_i, standardize(x)) + bias. Malicious when > 0.
double decision_value(const SvmModel& model, const FeatureVector& x);

Label predict_svm(const SvmModel& model, const FeatureVector& x);

} // namespace phishlex
