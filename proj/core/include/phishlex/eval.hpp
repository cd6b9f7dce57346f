#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phishlex/dataset.hpp"
#include "phishlex/svm.hpp"
#include "phishlex/tree.hpp"

namespace phishlex {

// Malicious is the positive class throughout.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

struct PrecisionRecall {
    // nullopt marks an undefined metric (zero denominator), which is
    // reported as such rather than collapsed to 0.
    std::optional<double> precision;
    std::optional<double> recall;
};

struct EvalReport {
    ConfusionMatrix matrix;
    PrecisionRecall malicious; // headline numbers
    PrecisionRecall benign;
    std::optional<double> macro_precision;
    std::optional<double> macro_recall;
    std::string params; // grid point echoed back
};

ConfusionMatrix confusion(std::span<const Label> pred, std::span<const Label> truth);

PrecisionRecall precision_recall(const ConfusionMatrix& m);

// Full report with per-class and macro metrics.
EvalReport make_report(const ConfusionMatrix& m, std::string params);

using ParamGrid = std::variant<std::vector<ForestParams>, std::vector<SvmParams>>;

// One seeded split shared by every grid point; trains on the train half and
// scores the held-out half. Reports come back in grid order. Training
// failures rethrow annotated with the grid point.
std::vector<EvalReport> run_experiment(const LabeledDataset& ds, const ParamGrid& grid,
                                       const SplitConfig& split_cfg);

std::string describe(const ForestParams& p);
std::string describe(const SvmParams& p);

void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports);
void print_reports_table(std::ostream& out, const std::vector<EvalReport>& reports);
std::string reports_to_json(const std::vector<EvalReport>& reports);

} // namespace phishlex
