#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "phishlex/eval.hpp"
#include "phishlex/model_store.hpp"
#include "phishlex/watch.hpp"

namespace phishlex {

// Exit-code map, fixed for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIngest = 2;
inline constexpr int kExitTrain = 3;
inline constexpr int kExitWatchStart = 4;
inline constexpr int kExitMisuse = 5;

struct IngestOptions {
    std::filesystem::path allowlist;
    std::filesystem::path blocklist;
    std::filesystem::path out;
    std::size_t allow_limit = 500;
    std::size_t block_limit = 500;
    bool shuffle_source = false; // re-order the blocklist before curation
    std::uint64_t seed = 0;
};

struct TrainOptions {
    std::filesystem::path data;
    Algo algo = Algo::Forest;
    ForestParams forest;
    SvmParams svm;
    SplitConfig split;
    std::filesystem::path model_out;
    bool stamp = false; // write wall-clock created_at into the model header
};

enum class ReportFormat { Table, Csv, Json };

struct EvaluateOptions {
    std::filesystem::path data;
    ParamGrid grid;
    SplitConfig split;
    ReportFormat format = ReportFormat::Table;
};

struct PredictOptions {
    std::filesystem::path model;
    std::vector<std::string> hosts;
    std::optional<std::filesystem::path> hosts_file;
};

struct ImportanceOptions {
    std::filesystem::path model;
    std::optional<std::filesystem::path> csv_out;
};

struct PdnsAggregateOptions {
    std::optional<std::filesystem::path> input; // stdin when absent
    std::optional<std::filesystem::path> out;   // stdout when absent
    std::optional<std::filesystem::path> hosts_out; // query-host stream for the classifier
    std::string delimiter = "||";
    double window_seconds = 12.0 * 3600.0;
    double skew_tolerance_seconds = 60.0;
};

int cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream& err);
int cmd_importance(const ImportanceOptions& opt, std::ostream& out, std::ostream& err);
int cmd_pdns_aggregate(const PdnsAggregateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_watch(const WatchConfig& cfg, std::stop_token stop, std::ostream& out,
              std::ostream& err);

} // namespace phishlex
