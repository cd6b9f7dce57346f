#include "phishlex/svm.hpp"

#include <cmath>
#include <cstdlib>

#include "phishlex/errors.hpp"
#include "phishlex/rng.hpp"

namespace phishlex {

namespace {

constexpr double kStepEps = 1e-12;

struct Solver {
    const SvmParams& params;
    std::vector<FeatureVector> x; // standardized
    std::vector<int> y;
    std::vector<double> alpha;
    std::vector<double> error; // f(x_i) - y_i
    std::vector<std::vector<double>> kernel_cache;
    double b = 0.0;
    std::mt19937_64 rng;

    Solver(const LabeledDataset& train, const SvmParams& p, const Standardizer& std_)
        : params(p), rng(make_rng(p.seed)) {
        const std::size_t n = train.examples.size();
        x.reserve(n);
        y.reserve(n);
        for (const LabeledExample& ex : train.examples) {
            x.push_back(std_.apply(ex.features));
            y.push_back(ex.label == Label::Malicious ? 1 : -1);
        }
        alpha.assign(n, 0.0);
        error.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            error[i] = -static_cast<double>(y[i]); // f == 0 initially
        }
        if (n <= 2048) {
            kernel_cache.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                kernel_cache[i].resize(n);
                for (std::size_t j = 0; j <= i; ++j) {
                    const double k = rbf_kernel(x[i].values, x[j].values, params.gamma);
                    kernel_cache[i][j] = k;
                    kernel_cache[j][i] = k;
                }
            }
        }
    }

    std::size_t size() const { return x.size(); }

    double kernel(std::size_t i, std::size_t j) const {
        if (!kernel_cache.empty()) {
            return kernel_cache[i][j];
        }
        return rbf_kernel(x[i].values, x[j].values, params.gamma);
    }

    bool non_bound(std::size_t i) const {
        return alpha[i] > 0.0 && alpha[i] < params.c;
    }

    bool violates_kkt(std::size_t i) const {
        const double r = error[i] * y[i];
        return (r < -params.tolerance && alpha[i] < params.c) ||
               (r > params.tolerance && alpha[i] > 0.0);
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) {
            return false;
        }
        const double a1 = alpha[i1];
        const double a2 = alpha[i2];
        const double y1 = y[i1];
        const double y2 = y[i2];
        const double e1 = error[i1];
        const double e2 = error[i2];
        const double s = y1 * y2;
        const double c = params.c;

        double lo;
        double hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c, c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c);
            hi = std::min(c, a1 + a2);
        }
        if (lo >= hi) {
            return false;
        }

        const double k11 = kernel(i1, i1);
        const double k12 = kernel(i1, i2);
        const double k22 = kernel(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = a2 + y2 * (e1 - e2) / eta;
            a2_new = std::min(hi, std::max(lo, a2_new));
        } else {
            // flat direction: evaluate the dual objective at both clip ends.
            // y*(E - b) is the kernel expansion at the point without the
            // threshold term, which is what the endpoint formulas need.
            const double f1 = y1 * (e1 - b) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 - b) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - kStepEps) {
                a2_new = lo;
            } else if (obj_lo > obj_hi + kStepEps) {
                a2_new = hi;
            } else {
                return false;
            }
        }
        if (std::abs(a2_new - a2) < kStepEps * (a2_new + a2 + kStepEps)) {
            return false;
        }
        double a1_new = a1 + s * (a2 - a2_new);
        a1_new = std::min(c, std::max(0.0, a1_new));

        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);
        const double b1 = b - e1 - d1 * k11 - d2 * k12;
        const double b2 = b - e2 - d1 * k12 - d2 * k22;
        double b_new;
        if (a1_new > 0.0 && a1_new < c) {
            b_new = b1;
        } else if (a2_new > 0.0 && a2_new < c) {
            b_new = b2;
        } else {
            b_new = (b1 + b2) / 2.0;
        }
        const double db = b_new - b;

        for (std::size_t k = 0; k < size(); ++k) {
            error[k] += d1 * kernel(i1, k) + d2 * kernel(i2, k) + db;
        }
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        b = b_new;
        return true;
    }

    bool examine(std::size_t i2) {
        if (!violates_kkt(i2)) {
            return false;
        }
        const double e2 = error[i2];

        // second-choice heuristic: largest |E1 - E2| among non-bound points
        std::size_t best = size();
        double best_gap = -1.0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (!non_bound(i)) {
                continue;
            }
            const double gap = std::abs(error[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < size() && take_step(best, i2)) {
            return true;
        }

        const std::size_t n = size();
        std::size_t start = draw_below(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i1 = (start + k) % n;
            if (non_bound(i1) && take_step(i1, i2)) {
                return true;
            }
        }
        start = draw_below(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i1 = (start + k) % n;
            if (take_step(i1, i2)) {
                return true;
            }
        }
        return false;
    }

    // True when fully converged within the pass budget.
    bool solve() {
        bool examine_all = true;
        for (std::size_t pass = 0; pass < params.max_passes; ++pass) {
            std::size_t changed = 0;
            std::size_t violations = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < size(); ++i) {
                    if (violates_kkt(i)) {
                        ++violations;
                    }
                    if (examine(i)) {
                        ++changed;
                    }
                }
                if (violations == 0) {
                    return true;
                }
                if (changed == 0) {
                    return false; // violations remain but no pair makes progress
                }
                examine_all = false;
            } else {
                for (std::size_t i = 0; i < size(); ++i) {
                    if (non_bound(i) && examine(i)) {
                        ++changed;
                    }
                }
                if (changed == 0) {
                    examine_all = true;
                }
            }
        }
        return false;
    }
};

} // namespace

FeatureVector Standardizer::apply(const FeatureVector& x) const {
    FeatureVector out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out.values[i] = (x.values[i] - means[i]) / stddevs[i];
    }
    return out;
}

Standardizer fit_standardizer(const LabeledDataset& ds) {
    Standardizer s;
    const double n = static_cast<double>(ds.examples.size());
    for (const LabeledExample& ex : ds.examples) {
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            s.means[i] += ex.features.values[i];
        }
    }
    for (double& m : s.means) {
        m /= n;
    }
    for (const LabeledExample& ex : ds.examples) {
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            const double d = ex.features.values[i] - s.means[i];
            s.stddevs[i] += d * d;
        }
    }
    for (double& sd : s.stddevs) {
        sd = std::sqrt(sd / n);
        if (sd == 0.0) {
            sd = 1.0;
        }
    }
    return s;
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
    if (x.size() != z.size()) {
        throw DimensionMismatchError("rbf_kernel dimension mismatch");
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        dist2 += d * d;
    }
    return std::exp(-gamma * dist2);
}

SvmModel fit_svm(const LabeledDataset& train, const SvmParams& params) {
    if (train.count(Label::Benign) == 0 || train.count(Label::Malicious) == 0) {
        throw EmptyDatasetError("svm training needs both classes");
    }

    SvmModel model;
    model.params = params;
    model.standardizer = fit_standardizer(train);

    Solver solver(train, params, model.standardizer);
    model.converged = solver.solve();
    model.bias = solver.b;
    for (std::size_t i = 0; i < solver.size(); ++i) {
        if (solver.alpha[i] > kStepEps) {
            model.support_vectors.push_back(
                SupportVector{solver.x[i], solver.alpha[i], solver.y[i]});
        }
    }
    return model;
}

double decision_value(const SvmModel& model, const FeatureVector& x) {
    const FeatureVector z = model.standardizer.apply(x);
    double value = model.bias;
    for (const SupportVector& sv : model.support_vectors) {
        value += sv.alpha * sv.y * rbf_kernel(sv.x.values, z.values, model.params.gamma);
    }
    return value;
}

Label predict_svm(const SvmModel& model, const FeatureVector& x) {
    return decision_value(model, x) > 0.0 ? Label::Malicious : Label::Benign;
}

} // namespace phishlex
