#include "phishlex/watch.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "phishlex/errors.hpp"
#include "phishlex/text.hpp"

namespace phishlex {

std::string utc_now_iso8601() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

WatchService::WatchService(WatchConfig cfg, std::ostream& log)
    : cfg_(std::move(cfg)), log_(log) {
    auto env = std::make_shared<ModelEnvelope>(load_model(cfg_.model_path));
    model_.digest = model_digest(*env);
    model_.env = std::move(env);
    last_retrain_ = std::chrono::steady_clock::now();
    log_ << "watch: loaded " << cfg_.model_path.string() << " digest=" << model_.digest
         << '\n';
}

WatchService::~WatchService() {
    if (retrain_worker_.joinable()) {
        retrain_worker_.join();
    }
}

WatchService::Published WatchService::snapshot() const {
    std::lock_guard lock(model_mutex_);
    return model_;
}

void WatchService::publish(std::shared_ptr<const ModelEnvelope> next) {
    Published incoming{std::move(next), {}};
    incoming.digest = model_digest(*incoming.env);
    std::string old_digest;
    {
        std::lock_guard lock(model_mutex_);
        old_digest = model_.digest;
        model_ = std::move(incoming);
    }
    log_ << "watch: model swap old=" << old_digest << " new=" << current_digest() << '\n';
}

std::string WatchService::current_digest() const {
    std::lock_guard lock(model_mutex_);
    return model_.digest;
}

WatchStats WatchService::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

void WatchService::process_lines(const Published& model, const std::string& chunk) {
    std::ofstream sink(cfg_.alert_sink, std::ios::app);
    if (!sink) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.read_errors;
        log_ << "watch: cannot open alert sink " << cfg_.alert_sink.string() << '\n';
        return;
    }

    std::size_t begin = 0;
    while (begin < chunk.size()) {
        auto end = chunk.find('\n', begin);
        if (end == std::string::npos) {
            end = chunk.size();
        }
        std::string line = chunk.substr(begin, end - begin);
        begin = end + 1;
        ++line_no_;
        {
            std::lock_guard lock(stats_mutex_);
            ++stats_.lines_read;
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            const std::string host = normalize(line);
            const FeatureVector x = extract(decompose(host));
            const EnvelopePrediction p = predict(*model.env, x);
            if (p.label == Label::Malicious) {
                nlohmann::json alert;
                alert["emitted_at"] = utc_now_iso8601();
                alert["host"] = host;
                alert["predicted"] = "Malicious";
                alert["score"] = p.score;
                alert["model_digest"] = model.digest;
                alert["source_line"] = line_no_;
                sink << alert.dump() << '\n';
                std::lock_guard lock(stats_mutex_);
                ++stats_.alerts;
            }
        } catch (const Error& e) {
            std::lock_guard lock(stats_mutex_);
            ++stats_.skipped_lines;
            log_ << "watch: skipping line " << line_no_ << ": " << e.what() << '\n';
        }
    }
}

void WatchService::maybe_start_retrain() {
    if (!cfg_.retrain || retrain_running_.load()) {
        return;
    }
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_retrain_).count();
    if (elapsed < cfg_.retrain->every_seconds) {
        return;
    }
    last_retrain_ = now;
    retrain_running_.store(true);
    if (retrain_worker_.joinable()) {
        retrain_worker_.join();
    }
    retrain_worker_ = std::thread([this] {
        try {
            const LabeledDataset data = load_labeled_csv(cfg_.retrain->training_csv);
            const std::string digest = file_digest(cfg_.retrain->training_csv);
            const auto current = snapshot();
            ModelEnvelope next;
            if (current.env->algorithm == Algo::Forest) {
                next = make_envelope(
                    fit_forest(data, std::get<ForestModel>(current.env->payload).params),
                    digest);
            } else {
                next = make_envelope(
                    fit_svm(data, std::get<SvmModel>(current.env->payload).params), digest);
            }
            save_model(next, cfg_.model_path);
            auto shared = std::make_shared<ModelEnvelope>(std::move(next));
            {
                std::lock_guard lock(retrain_mutex_);
                retrain_result_ = std::move(shared);
            }
        } catch (const std::exception& e) {
            log_ << "watch: retrain failed, keeping current model: " << e.what() << '\n';
        }
        retrain_running_.store(false);
    });
}

void WatchService::finish_retrain() {
    std::shared_ptr<const ModelEnvelope> result;
    {
        std::lock_guard lock(retrain_mutex_);
        result = std::move(retrain_result_);
        retrain_result_.reset();
    }
    if (result) {
        publish(std::move(result));
        std::lock_guard lock(stats_mutex_);
        ++stats_.retrains;
    }
}

void WatchService::poll_once() {
    finish_retrain();
    const auto model = snapshot();
    {
        std::lock_guard lock(stats_mutex_);
        ++stats_.polls;
    }

    std::error_code ec;
    const auto size = std::filesystem::file_size(cfg_.input_path, ec);
    if (ec) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.read_errors;
        log_ << "watch: cannot stat " << cfg_.input_path.string() << ": " << ec.message()
             << '\n';
        maybe_start_retrain();
        return;
    }
    if (size < offset_) {
        // truncation: reprocess from the top
        offset_ = 0;
        line_no_ = 0;
        pending_.clear();
        std::lock_guard lock(stats_mutex_);
        ++stats_.truncations;
    }
    if (size > offset_) {
        std::ifstream in(cfg_.input_path, std::ios::binary);
        if (!in) {
            std::lock_guard lock(stats_mutex_);
            ++stats_.read_errors;
            log_ << "watch: cannot open " << cfg_.input_path.string() << '\n';
            maybe_start_retrain();
            return;
        }
        in.seekg(static_cast<std::streamoff>(offset_));
        std::string chunk(static_cast<std::size_t>(size - offset_), '\0');
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        chunk.resize(static_cast<std::size_t>(in.gcount()));
        offset_ += chunk.size();

        chunk.insert(0, pending_);
        pending_.clear();
        const auto last_nl = chunk.rfind('\n');
        if (last_nl == std::string::npos) {
            pending_ = std::move(chunk);
            chunk.clear();
        } else if (last_nl + 1 < chunk.size()) {
            pending_ = chunk.substr(last_nl + 1);
            chunk.resize(last_nl + 1);
        }
        if (!chunk.empty()) {
            process_lines(model, chunk);
        }
    }
    maybe_start_retrain();
}

void WatchService::run(std::stop_token stop) {
    using clock = std::chrono::steady_clock;
    while (!stop.stop_requested()) {
        poll_once();
        // sleep in slices so a stop request interrupts long poll intervals
        const auto deadline =
            clock::now() + std::chrono::duration_cast<clock::duration>(
                               std::chrono::duration<double>(cfg_.poll_interval_seconds));
        while (!stop.stop_requested()) {
            const auto now = clock::now();
            if (now >= deadline) {
                break;
            }
            std::this_thread::sleep_for(
                std::min<clock::duration>(std::chrono::milliseconds(50), deadline - now));
        }
    }
}

} // namespace phishlex
