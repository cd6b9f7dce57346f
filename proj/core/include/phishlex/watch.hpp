#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>

#include "phishlex/model_store.hpp"

namespace phishlex {

struct RetrainConfig {
    std::filesystem::path training_csv;
    double every_seconds = 0.0; // > 0
};

struct WatchConfig {
    std::filesystem::path input_path;
    std::filesystem::path model_path;
    std::filesystem::path alert_sink;
    double poll_interval_seconds = 3600.0;
    std::optional<RetrainConfig> retrain;
};

struct WatchStats {
    std::size_t polls = 0;
    std::size_t lines_read = 0;
    std::size_t alerts = 0;
    std::size_t skipped_lines = 0;
    std::size_t read_errors = 0;
    std::size_t retrains = 0;
    std::size_t truncations = 0;
};

std::string utc_now_iso8601();

// Tails the input file by byte offset and appends one JSON line per
// malicious prediction to the alert sink. Retraining, when configured, runs
// on a side thread and publishes the new model with an atomic swap, so a
// poll always scores against exactly one model version.
class WatchService {
public:
    // Loads the model; a failure here is fatal to startup and propagates.
    WatchService(WatchConfig cfg, std::ostream& log);
    ~WatchService();

    WatchService(const WatchService&) = delete;
    WatchService& operator=(const WatchService&) = delete;

    // One tail-and-classify pass; also kicks off a retrain when one is due.
    void poll_once();

    // Polls until stop is requested; sleeps poll_interval between passes.
    void run(std::stop_token stop);

    WatchStats stats() const;
    std::string current_digest() const;

private:
    // one model version plus its digest, swapped as a unit
    struct Published {
        std::shared_ptr<const ModelEnvelope> env;
        std::string digest;
    };

    Published snapshot() const;
    void publish(std::shared_ptr<const ModelEnvelope> next);
    void maybe_start_retrain();
    void finish_retrain();
    void process_lines(const Published& model, const std::string& chunk);

    WatchConfig cfg_;
    std::ostream& log_;

    mutable std::mutex model_mutex_;
    Published model_;

    std::uint64_t offset_ = 0;
    std::size_t line_no_ = 0;
    std::string pending_; // partial trailing line carried between polls

    mutable std::mutex stats_mutex_;
    WatchStats stats_;

    std::chrono::steady_clock::time_point last_retrain_;
    std::thread retrain_worker_;
    std::atomic<bool> retrain_running_{false};
    std::shared_ptr<const ModelEnvelope> retrain_result_;
    std::mutex retrain_mutex_;
};

} // namespace phishlex
