#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "phishlex/svm.hpp"
#include "phishlex/tree.hpp"

namespace phishlex {

enum class Algo { Forest, Svm };

inline constexpr int kModelFormatVersion = 1;

// A trained model plus the metadata needed to refuse stale or mismatched
// files. Serialization is canonical: fixed key order, shortest round-trip
// floats, newline-only line ends. created_at is optional and sits outside
// the checksummed body, so stamped and unstamped saves of one model differ
// only in that single header line.
struct ModelEnvelope {
    int format_version = kModelFormatVersion;
    Algo algorithm = Algo::Forest;
    std::string created_at; // ISO-8601 UTC; empty = unstamped
    std::vector<std::string> feature_names;
    std::variant<ForestModel, SvmModel> payload;
    std::string training_digest; // fnv1a of the training CSV bytes
};

ModelEnvelope make_envelope(ForestModel model, std::string training_digest);
ModelEnvelope make_envelope(SvmModel model, std::string training_digest);

// Writes atomically (temp file + rename). Throws IoError.
void save_model(const ModelEnvelope& env, const std::filesystem::path& path);

// Throws SchemaError on version/name mismatch, CorruptPayloadError when the
// body checksum fails or the file is structurally incomplete.
ModelEnvelope load_model(const std::filesystem::path& path);

// Digest of the canonical body; identifies the model in alert records.
std::string model_digest(const ModelEnvelope& env);

std::string fnv1a_hex(std::string_view bytes);

std::string file_digest(const std::filesystem::path& path);

struct EnvelopePrediction {
    Label label = Label::Benign;
    double score = 0.0; // forest: malicious votes; svm: decision value
};

EnvelopePrediction predict(const ModelEnvelope& env, const FeatureVector& x);

std::string_view algo_name(Algo algo);

} // namespace phishlex
