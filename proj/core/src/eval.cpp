#include "phishlex/eval.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "phishlex/errors.hpp"

namespace phishlex {

namespace {

std::string opt_str(const std::optional<double>& v) {
    if (!v) {
        return "undefined";
    }
    std::ostringstream os;
    os << std::setprecision(12) << *v;
    return os.str();
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> mean2(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) {
        return std::nullopt;
    }
    return (*a + *b) / 2.0;
}

template <typename Params, typename Model>
std::vector<EvalReport> sweep(const LabeledDataset& train, const LabeledDataset& test,
                              const std::vector<Params>& grid,
                              Model (*fit)(const LabeledDataset&, const Params&),
                              Label (*predict)(const Model&, const FeatureVector&)) {
    std::vector<Label> truth;
    truth.reserve(test.examples.size());
    for (const LabeledExample& ex : test.examples) {
        truth.push_back(ex.label);
    }

    std::vector<EvalReport> reports;
    reports.reserve(grid.size());
    for (const Params& point : grid) {
        try {
            const Model model = fit(train, point);
            std::vector<Label> pred;
            pred.reserve(test.examples.size());
            for (const LabeledExample& ex : test.examples) {
                pred.push_back(predict(model, ex.features));
            }
            reports.push_back(make_report(confusion(pred, truth), describe(point)));
        } catch (const Error& e) {
            throw Error("grid point [" + describe(point) + "]: " + e.what());
        }
    }
    return reports;
}

Label forest_label(const ForestModel& model, const FeatureVector& x) {
    return predict_forest(model, x).label;
}

std::string opt_param(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : "inf";
}

} // namespace

ConfusionMatrix confusion(std::span<const Label> pred, std::span<const Label> truth) {
    if (pred.size() != truth.size()) {
        throw LengthMismatchError("prediction/truth length mismatch");
    }
    if (pred.empty()) {
        throw EmptyInputError("nothing to score");
    }
    ConfusionMatrix m;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool predicted = pred[i] == Label::Malicious;
        const bool actual = truth[i] == Label::Malicious;
        if (predicted && actual) {
            ++m.tp;
        } else if (predicted && !actual) {
            ++m.fp;
        } else if (!predicted && actual) {
            ++m.fn;
        } else {
            ++m.tn;
        }
    }
    return m;
}

PrecisionRecall precision_recall(const ConfusionMatrix& m) {
    return PrecisionRecall{ratio(m.tp, m.tp + m.fp), ratio(m.tp, m.tp + m.fn)};
}

EvalReport make_report(const ConfusionMatrix& m, std::string params) {
    EvalReport r;
    r.matrix = m;
    r.malicious = precision_recall(m);
    r.benign = PrecisionRecall{ratio(m.tn, m.tn + m.fn), ratio(m.tn, m.tn + m.fp)};
    r.macro_precision = mean2(r.malicious.precision, r.benign.precision);
    r.macro_recall = mean2(r.malicious.recall, r.benign.recall);
    r.params = std::move(params);
    return r;
}

std::vector<EvalReport> run_experiment(const LabeledDataset& ds, const ParamGrid& grid,
                                       const SplitConfig& split_cfg) {
    const auto halves = split(ds, split_cfg);
    const LabeledDataset& train = halves.first;
    const LabeledDataset& test = halves.second;

    if (std::holds_alternative<std::vector<ForestParams>>(grid)) {
        return sweep(train, test, std::get<std::vector<ForestParams>>(grid), &fit_forest,
                     &forest_label);
    }
    return sweep(train, test, std::get<std::vector<SvmParams>>(grid), &fit_svm, &predict_svm);
}

std::string describe(const ForestParams& p) {
    std::ostringstream os;
    os << "forest n_estimators=" << p.n_estimators << " max_depth=" << opt_param(p.tree.max_depth)
       << " max_features=" << opt_param(p.tree.max_features)
       << " min_samples_split=" << p.tree.min_samples_split
       << " max_leaf_nodes=" << opt_param(p.tree.max_leaf_nodes)
       << " bootstrap=" << (p.bootstrap ? "true" : "false") << " seed=" << p.seed;
    return os.str();
}

std::string describe(const SvmParams& p) {
    std::ostringstream os;
    os << "svm c=" << p.c << " gamma=" << p.gamma << " tolerance=" << p.tolerance
       << " max_passes=" << p.max_passes << " seed=" << p.seed;
    return os.str();
}

void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
    out << "params,tp,fp,tn,fn,precision,recall,benign_precision,benign_recall,"
           "macro_precision,macro_recall\n";
    for (const EvalReport& r : reports) {
        out << '"' << r.params << "\"," << r.matrix.tp << ',' << r.matrix.fp << ','
            << r.matrix.tn << ',' << r.matrix.fn << ',' << opt_str(r.malicious.precision) << ','
            << opt_str(r.malicious.recall) << ',' << opt_str(r.benign.precision) << ','
            << opt_str(r.benign.recall) << ',' << opt_str(r.macro_precision) << ','
            << opt_str(r.macro_recall) << '\n';
    }
}

void print_reports_table(std::ostream& out, const std::vector<EvalReport>& reports) {
    out << std::left << std::setw(8) << "tp" << std::setw(8) << "fp" << std::setw(8) << "tn"
        << std::setw(8) << "fn" << std::setw(12) << "precision" << std::setw(12) << "recall"
        << "params\n";
    for (const EvalReport& r : reports) {
        std::ostringstream prec;
        std::ostringstream rec;
        if (r.malicious.precision) {
            prec << std::fixed << std::setprecision(4) << *r.malicious.precision;
        } else {
            prec << "undefined";
        }
        if (r.malicious.recall) {
            rec << std::fixed << std::setprecision(4) << *r.malicious.recall;
        } else {
            rec << "undefined";
        }
        out << std::left << std::setw(8) << r.matrix.tp << std::setw(8) << r.matrix.fp
            << std::setw(8) << r.matrix.tn << std::setw(8) << r.matrix.fn << std::setw(12)
            << prec.str() << std::setw(12) << rec.str() << r.params << '\n';
    }
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EvalReport& r : reports) {
        nlohmann::json j;
        j["params"] = r.params;
        j["matrix"] = {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"tn", r.matrix.tn},
                       {"fn", r.matrix.fn}};
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v) {
                j[key] = *v;
            } else {
                j[key] = nullptr;
            }
        };
        put("precision", r.malicious.precision);
        put("recall", r.malicious.recall);
        put("benign_precision", r.benign.precision);
        put("benign_recall", r.benign.recall);
        put("macro_precision", r.macro_precision);
        put("macro_recall", r.macro_recall);
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

} // namespace phishlex
