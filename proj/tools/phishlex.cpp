// phishlex command line: ingest host lists, train/evaluate classifiers,
// inspect models, aggregate pdns logs and run the watch/alert loop.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "phishlex/commands.hpp"
#include "phishlex/errors.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) {
    g_interrupted.store(true);
}

std::optional<std::size_t> opt_size(long long v) {
    // 0 means unbounded on the command line
    if (v <= 0) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(v);
}

// "inf" or a non-positive value means unbounded.
std::optional<std::size_t> parse_bound(const std::string& s) {
    if (s == "inf" || s == "none") {
        return std::nullopt;
    }
    const long long v = std::stoll(s);
    return opt_size(v);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    using namespace phishlex;

    CLI::App app{"phishlex: lexical phishing-domain triage"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file presetting any flag");

    // ingest
    IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "build a labeled feature CSV from host lists");
    c_ingest->add_option("--allowlist", ingest.allowlist, "benign list (rank,domain or bare)")
        ->required();
    c_ingest->add_option("--blocklist", ingest.blocklist, "malicious list (url column or bare)")
        ->required();
    c_ingest->add_option("--out", ingest.out, "output labeled CSV")->required();
    c_ingest->add_option("--allow-limit", ingest.allow_limit, "max allowlist entries")
        ->envname("PHISHLEX_ALLOW_LIMIT");
    c_ingest->add_option("--block-limit", ingest.block_limit, "max blocklist entries")
        ->envname("PHISHLEX_BLOCK_LIMIT");
    c_ingest->add_flag("--shuffle-source", ingest.shuffle_source,
                       "shuffle the blocklist before curation");
    c_ingest->add_option("--seed", ingest.seed, "shuffle seed")->envname("PHISHLEX_SEED");

    // shared training knobs
    std::string algo_name_opt = "forest";
    SplitConfig split_cfg;
    bool no_stratify = false;
    long long max_depth = 0;
    long long max_features = 0;
    long long max_leaf_nodes = 0;
    std::uint64_t seed = 0;

    auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--algo", algo_name_opt, "forest or svm")
            ->check(CLI::IsMember({"forest", "svm"}))
            ->envname("PHISHLEX_ALGO");
        cmd->add_option("--train-fraction", split_cfg.train_fraction,
                        "train half size, in (0,1)")
            ->envname("PHISHLEX_TRAIN_FRACTION");
        cmd->add_flag("--no-stratify", no_stratify, "split without per-class stratification");
        cmd->add_option("--seed", seed, "seed for split/bootstrap/solver")
            ->envname("PHISHLEX_SEED");
    };

    // train
    TrainOptions train;
    auto* c_train = app.add_subcommand("train", "train a model and score the held-out half");
    c_train->add_option("--data", train.data, "labeled feature CSV")->required();
    c_train->add_option("--model-out", train.model_out, "output .plxm path")->required();
    add_shared(c_train);
    c_train->add_option("--n-estimators", train.forest.n_estimators, "trees in the forest")
        ->envname("PHISHLEX_N_ESTIMATORS");
    c_train->add_option("--max-depth", max_depth, "tree depth cap, 0 = unbounded")
        ->envname("PHISHLEX_MAX_DEPTH");
    c_train->add_option("--max-features", max_features, "features drawn per split, 0 = all");
    c_train->add_option("--min-samples-split", train.forest.tree.min_samples_split,
                        "smallest splittable node");
    c_train->add_option("--max-leaf-nodes", max_leaf_nodes, "leaf budget, 0 = unbounded");
    bool no_bootstrap = false;
    c_train->add_flag("--no-bootstrap", no_bootstrap, "fit each tree on the full train half");
    c_train->add_option("--c", train.svm.c, "svm soft-margin weight")
        ->envname("PHISHLEX_C");
    c_train->add_option("--gamma", train.svm.gamma,
                        "rbf width (default 1/21; 1/500 replays the coarse preset)")
        ->envname("PHISHLEX_GAMMA");
    c_train->add_option("--tolerance", train.svm.tolerance, "kkt tolerance");
    c_train->add_option("--max-passes", train.svm.max_passes, "smo pass budget");
    c_train->add_flag("--stamp", train.stamp, "record wall-clock created_at in the model file");

    // evaluate
    EvaluateOptions evaluate;
    std::string grid_estimators = "10";
    std::string grid_depth = "inf";
    std::string grid_features = "inf";
    std::string grid_min_split = "2";
    std::string grid_leaves = "inf";
    std::string grid_c = "1";
    std::string grid_gamma;
    std::string format = "table";
    bool eval_no_bootstrap = false;
    auto* c_eval = app.add_subcommand("evaluate", "sweep a parameter grid on one split");
    c_eval->add_option("--data", evaluate.data, "labeled feature CSV")->required();
    add_shared(c_eval);
    c_eval->add_option("--n-estimators", grid_estimators, "comma list, e.g. 1,10,20,50");
    c_eval->add_option("--max-depth", grid_depth, "comma list, inf allowed");
    c_eval->add_option("--max-features", grid_features, "comma list, inf allowed");
    c_eval->add_option("--min-samples-split", grid_min_split, "comma list");
    c_eval->add_option("--max-leaf-nodes", grid_leaves, "comma list, inf allowed");
    c_eval->add_flag("--no-bootstrap", eval_no_bootstrap, "disable bootstrap resampling");
    c_eval->add_option("--c", grid_c, "comma list of C values");
    c_eval->add_option("--gamma", grid_gamma, "comma list of gamma values (default 1/21)");
    c_eval->add_option("--format", format, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));

    // predict
    PredictOptions predict_opt;
    std::string hosts_file;
    auto* c_predict = app.add_subcommand("predict", "classify hosts with a stored model");
    c_predict->add_option("--model", predict_opt.model, "model .plxm path")->required();
    c_predict->add_option("hosts", predict_opt.hosts, "hosts or URLs to classify");
    c_predict->add_option("--input", hosts_file, "file of hosts, one per line");

    // importance
    ImportanceOptions importance;
    std::string importance_csv;
    auto* c_importance = app.add_subcommand("importance", "rank forest feature importance");
    c_importance->add_option("--model", importance.model, "model .plxm path")->required();
    c_importance->add_option("--csv-out", importance_csv, "write a plottable CSV here");

    // pdns-aggregate
    PdnsAggregateOptions pdns;
    std::string pdns_in;
    std::string pdns_out;
    std::string pdns_hosts;
    double window_hours = 12.0;
    auto* c_pdns = app.add_subcommand("pdns-aggregate", "dedupe a passive-dns log");
    c_pdns->add_option("--input", pdns_in, "log file (stdin when omitted)");
    c_pdns->add_option("--out", pdns_out, "aggregate CSV (stdout when omitted)");
    c_pdns->add_option("--hosts-out", pdns_hosts, "append emitted query hosts here");
    c_pdns->add_option("--delimiter", pdns.delimiter, "field delimiter (default ||)");
    c_pdns->add_option("--window-hours", window_hours, "dedupe window (default 12)");
    c_pdns->add_option("--skew-seconds", pdns.skew_tolerance_seconds,
                       "tolerated out-of-order span (default 60)");

    // watch
    WatchConfig watch;
    std::string retrain_csv;
    double retrain_seconds = 0.0;
    auto* c_watch = app.add_subcommand("watch", "tail a host file and alert on malicious hits");
    c_watch->add_option("--input", watch.input_path, "host file to tail")->required();
    c_watch->add_option("--model", watch.model_path, "model .plxm path")->required();
    c_watch->add_option("--alerts", watch.alert_sink, "alert sink (JSON lines, appended)")
        ->required();
    c_watch->add_option("--poll-seconds", watch.poll_interval_seconds,
                        "poll interval (default 3600)")
        ->envname("PHISHLEX_POLL_SECONDS");
    c_watch->add_option("--retrain-csv", retrain_csv, "labeled CSV to retrain from");
    c_watch->add_option("--retrain-seconds", retrain_seconds, "retrain cadence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help and friends
        }
        app.exit(e);
        return kExitMisuse;
    }

    split_cfg.seed = seed;
    split_cfg.stratified = !no_stratify;

    if (*c_ingest) {
        return cmd_ingest(ingest, std::cout, std::cerr);
    }

    if (*c_train) {
        train.algo = algo_name_opt == "svm" ? Algo::Svm : Algo::Forest;
        train.split = split_cfg;
        train.forest.tree.max_depth = opt_size(max_depth);
        train.forest.tree.max_features = opt_size(max_features);
        train.forest.tree.max_leaf_nodes = opt_size(max_leaf_nodes);
        train.forest.bootstrap = !no_bootstrap;
        train.forest.seed = seed;
        train.svm.seed = seed;
        return cmd_train(train, std::cout, std::cerr);
    }

    if (*c_eval) {
        evaluate.split = split_cfg;
        evaluate.format = format == "csv"    ? ReportFormat::Csv
                          : format == "json" ? ReportFormat::Json
                                             : ReportFormat::Table;
        try {
            if (algo_name_opt == "svm") {
                std::vector<SvmParams> grid;
                const auto cs = split_list(grid_c);
                auto gammas = split_list(grid_gamma);
                if (gammas.empty()) {
                    gammas.push_back(std::to_string(kGammaPerFeature));
                }
                for (const auto& c : cs) {
                    for (const auto& g : gammas) {
                        SvmParams p;
                        p.c = std::stod(c);
                        p.gamma = std::stod(g);
                        p.seed = seed;
                        grid.push_back(p);
                    }
                }
                evaluate.grid = std::move(grid);
            } else {
                std::vector<ForestParams> grid;
                for (const auto& n : split_list(grid_estimators)) {
                    for (const auto& d : split_list(grid_depth)) {
                        for (const auto& f : split_list(grid_features)) {
                            for (const auto& m : split_list(grid_min_split)) {
                                for (const auto& l : split_list(grid_leaves)) {
                                    ForestParams p;
                                    p.n_estimators = std::stoull(n);
                                    p.tree.max_depth = parse_bound(d);
                                    p.tree.max_features = parse_bound(f);
                                    p.tree.min_samples_split = std::stoull(m);
                                    p.tree.max_leaf_nodes = parse_bound(l);
                                    p.bootstrap = !eval_no_bootstrap;
                                    p.seed = seed;
                                    grid.push_back(p);
                                }
                            }
                        }
                    }
                }
                evaluate.grid = std::move(grid);
            }
        } catch (const std::exception& e) {
            std::cerr << "evaluate: bad grid value: " << e.what() << '\n';
            return kExitMisuse;
        }
        return cmd_evaluate(evaluate, std::cout, std::cerr);
    }

    if (*c_predict) {
        if (!hosts_file.empty()) {
            predict_opt.hosts_file = hosts_file;
        }
        return cmd_predict(predict_opt, std::cout, std::cerr);
    }

    if (*c_importance) {
        if (!importance_csv.empty()) {
            importance.csv_out = importance_csv;
        }
        return cmd_importance(importance, std::cout, std::cerr);
    }

    if (*c_pdns) {
        if (!pdns_in.empty()) {
            pdns.input = pdns_in;
        }
        if (!pdns_out.empty()) {
            pdns.out = pdns_out;
        }
        if (!pdns_hosts.empty()) {
            pdns.hosts_out = pdns_hosts;
        }
        pdns.window_seconds = window_hours * 3600.0;
        return cmd_pdns_aggregate(pdns, std::cout, std::cerr);
    }

    if (*c_watch) {
        if (!retrain_csv.empty() || retrain_seconds > 0.0) {
            if (retrain_csv.empty() || retrain_seconds <= 0.0) {
                std::cerr << "watch: --retrain-csv and --retrain-seconds go together\n";
                return kExitMisuse;
            }
            watch.retrain = RetrainConfig{retrain_csv, retrain_seconds};
        }
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::stop_source stop;
        std::thread signal_pump([&stop] {
            while (!stop.stop_requested()) {
                if (g_interrupted.load()) {
                    stop.request_stop();
                    break;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
        });
        const int rc = cmd_watch(watch, stop.get_token(), std::cout, std::cerr);
        stop.request_stop();
        signal_pump.join();
        return rc;
    }

    return kExitMisuse;
}
