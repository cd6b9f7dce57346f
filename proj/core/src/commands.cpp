#include "phishlex/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "phishlex/errors.hpp"
#include "phishlex/pdns.hpp"
#include "phishlex/rng.hpp"
#include "phishlex/text.hpp"

namespace phishlex {

namespace {

void print_report(std::ostream& out, const EvalReport& report) {
    print_reports_table(out, {report});
}

std::vector<std::string> read_host_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> hosts;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            hosts.emplace_back(trim(line));
        }
    }
    return hosts;
}

} // namespace

int cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        auto allow = load_allowlist(opt.allowlist, opt.allow_limit);
        auto block = load_blocklist(opt.blocklist, opt.block_limit);
        if (opt.shuffle_source) {
            auto rng = make_rng(opt.seed);
            deterministic_shuffle(block, rng);
        }
        const LabeledDataset ds = curate(allow, block);
        save_labeled_csv(opt.out, ds);

        const Provenance& p = ds.provenance;
        out << "ingest: wrote " << ds.examples.size() << " rows to " << opt.out.string() << '\n'
            << "  allowlist_read     " << p.allowlist_read << '\n'
            << "  blocklist_read     " << p.blocklist_read << '\n'
            << "  benign_kept        " << ds.count(Label::Benign) << '\n'
            << "  malicious_kept     " << ds.count(Label::Malicious) << '\n'
            << "  ip_literals_dropped " << p.ip_literals_dropped << '\n'
            << "  duplicates_dropped " << p.duplicates_dropped << '\n'
            << "  overlaps_dropped   " << p.overlaps_dropped << '\n'
            << "  malformed_dropped  " << p.malformed_dropped << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "ingest: " << e.what() << '\n';
        return kExitIngest;
    }
}

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const LabeledDataset ds = load_labeled_csv(opt.data);
        const std::string digest = file_digest(opt.data);
        const auto halves = split(ds, opt.split);
        const LabeledDataset& train = halves.first;
        const LabeledDataset& test = halves.second;

        std::vector<Label> truth;
        truth.reserve(test.examples.size());
        for (const LabeledExample& ex : test.examples) {
            truth.push_back(ex.label);
        }
        std::vector<Label> pred;
        pred.reserve(test.examples.size());

        ModelEnvelope env;
        std::string params_echo;
        bool converged = true;
        if (opt.algo == Algo::Forest) {
            ForestModel model = fit_forest(train, opt.forest);
            for (const LabeledExample& ex : test.examples) {
                pred.push_back(predict_forest(model, ex.features).label);
            }
            params_echo = describe(opt.forest);
            env = make_envelope(std::move(model), digest);
        } else {
            SvmModel model = fit_svm(train, opt.svm);
            converged = model.converged;
            for (const LabeledExample& ex : test.examples) {
                pred.push_back(predict_svm(model, ex.features));
            }
            params_echo = describe(opt.svm);
            env = make_envelope(std::move(model), digest);
        }
        if (opt.stamp) {
            env.created_at = utc_now_iso8601();
        }
        save_model(env, opt.model_out);

        const EvalReport report = make_report(confusion(pred, truth), params_echo);
        print_report(out, report);
        out << "train: wrote " << opt.model_out.string() << " digest=" << model_digest(env)
            << '\n';
        if (!converged) {
            out << "train: warning: svm stopped on its pass budget before meeting "
                   "tolerance (model saved anyway)\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "train: " << e.what() << '\n';
        return kExitTrain;
    }
}

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const LabeledDataset ds = load_labeled_csv(opt.data);
        const auto reports = run_experiment(ds, opt.grid, opt.split);
        switch (opt.format) {
        case ReportFormat::Table:
            print_reports_table(out, reports);
            break;
        case ReportFormat::Csv:
            write_reports_csv(out, reports);
            break;
        case ReportFormat::Json:
            out << reports_to_json(reports) << '\n';
            break;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "evaluate: " << e.what() << '\n';
        return kExitTrain;
    }
}

int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<std::string> hosts = opt.hosts;
    try {
        if (opt.hosts_file) {
            const auto more = read_host_lines(*opt.hosts_file);
            hosts.insert(hosts.end(), more.begin(), more.end());
        }
        if (hosts.empty()) {
            err << "predict: no hosts given\n";
            return kExitMisuse;
        }
        const ModelEnvelope env = load_model(opt.model);
        out << "host,predicted,score\n";
        for (const std::string& raw : hosts) {
            try {
                const std::string host = normalize(raw);
                const EnvelopePrediction p = predict(env, extract(decompose(host)));
                out << host << ',' << label_name(p.label) << ',' << std::setprecision(12)
                    << p.score << '\n';
            } catch (const Error& e) {
                err << "predict: skipping " << raw << ": " << e.what() << '\n';
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "predict: " << e.what() << '\n';
        return kExitMisuse;
    }
}

int cmd_importance(const ImportanceOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const ModelEnvelope env = load_model(opt.model);
        if (env.algorithm != Algo::Forest) {
            err << "importance: model is not a forest; importance is undefined here\n";
            return kExitMisuse;
        }
        const auto importance = feature_importance(std::get<ForestModel>(env.payload));

        std::vector<std::size_t> order(kFeatureCount);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return importance[a] > importance[b];
        });

        out << std::left << std::setw(16) << "feature" << "importance\n";
        for (std::size_t i : order) {
            out << std::left << std::setw(16) << feature_names()[i] << std::setprecision(6)
                << std::fixed << importance[i] << '\n';
        }
        if (opt.csv_out) {
            std::ofstream csv(*opt.csv_out);
            if (!csv) {
                throw IoError("cannot open " + opt.csv_out->string() + " for writing");
            }
            csv << "feature_id,feature,importance\n";
            for (std::size_t i : order) {
                csv << (i + 1) << ',' << feature_names()[i] << ',' << std::setprecision(12)
                    << importance[i] << '\n';
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "importance: " << e.what() << '\n';
        return kExitMisuse;
    }
}

int cmd_pdns_aggregate(const PdnsAggregateOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        std::ifstream file_in;
        std::istream* in = &std::cin;
        if (opt.input) {
            file_in.open(*opt.input);
            if (!file_in) {
                throw IoError("cannot open " + opt.input->string());
            }
            in = &file_in;
        }
        std::ofstream file_out;
        std::ostream* csv = &out;
        if (opt.out) {
            file_out.open(*opt.out);
            if (!file_out) {
                throw IoError("cannot open " + opt.out->string() + " for writing");
            }
            csv = &file_out;
        }
        std::ofstream hosts_out;
        if (opt.hosts_out) {
            hosts_out.open(*opt.hosts_out, std::ios::app);
            if (!hosts_out) {
                throw IoError("cannot open " + opt.hosts_out->string() + " for writing");
            }
        }

        PdnsAggregator agg(opt.window_seconds, opt.skew_tolerance_seconds);
        write_aggregate_csv_header(*csv);
        std::size_t bad_lines = 0;

        auto emit = [&](const std::vector<AggregatedPdnsEntry>& entries) {
            for (const AggregatedPdnsEntry& e : entries) {
                write_aggregate_csv_row(*csv, e);
                if (hosts_out.is_open()) {
                    try {
                        hosts_out << normalize(e.query) << '\n';
                    } catch (const Error&) {
                        // queries that reduce to nothing never reach the classifier
                    }
                }
            }
        };

        std::string line;
        while (std::getline(*in, line)) {
            if (trim(line).empty()) {
                continue;
            }
            try {
                emit(agg.push(parse_line(line, opt.delimiter)));
            } catch (const Error& e) {
                ++bad_lines;
                err << "pdns-aggregate: skipping line: " << e.what() << '\n';
            }
        }
        emit(agg.flush());
        err << "pdns-aggregate: accepted=" << agg.accepted()
            << " skew_dropped=" << agg.skew_dropped() << " bad_lines=" << bad_lines << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "pdns-aggregate: " << e.what() << '\n';
        return kExitMisuse;
    }
}

int cmd_watch(const WatchConfig& cfg, std::stop_token stop, std::ostream& out,
              std::ostream& err) {
    try {
        WatchService service(cfg, out);
        service.run(stop);
        const WatchStats s = service.stats();
        out << "watch: stopped after " << s.polls << " polls, " << s.alerts << " alerts, "
            << s.retrains << " retrains\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "watch: " << e.what() << '\n';
        return kExitWatchStart;
    }
}

} // namespace phishlex
