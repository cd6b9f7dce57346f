#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "phishlex/features.hpp"
#include "phishlex/url_model.hpp"

namespace phishlex {

enum class Label { Benign, Malicious };

std::string_view label_name(Label label);

struct LabeledExample {
    std::string host;
    DomainParts parts;
    FeatureVector features;
    Label label = Label::Benign;
};

// What happened to the raw entries on the way into the dataset. Reads equal
// kept + ip_literals + duplicates + overlaps + malformed.
struct Provenance {
    std::size_t allowlist_read = 0;
    std::size_t blocklist_read = 0;
    std::size_t ip_literals_dropped = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t overlaps_dropped = 0;
    std::size_t malformed_dropped = 0;
};

struct LabeledDataset {
    std::vector<LabeledExample> examples;
    Provenance provenance;

    std::size_t count(Label label) const;
};

struct SplitConfig {
    double train_fraction = 0.5; // in (0,1)
    std::uint64_t seed = 0;
    bool stratified = true;
};

// Reads up to `limit` rows of "domain" or "rank,domain" in file order.
// Throws IoError / FormatError.
std::vector<RawEntry> load_allowlist(const std::filesystem::path& path, std::size_t limit);

// Reads up to `limit` entries, either one URL per line or a CSV with a
// header naming a `url` column. Entries stay raw; curate() normalizes.
std::vector<RawEntry> load_blocklist(const std::filesystem::path& path, std::size_t limit);

// Normalizes both lists, drops IP literals, within-list duplicates (first
// occurrence wins) and hosts present in both lists (from both sides), then
// labels and extracts features. Throws EmptyDatasetError when either class
// has no survivors.
LabeledDataset curate(const std::vector<RawEntry>& allow, const std::vector<RawEntry>& block);

// Seeded shuffle-and-cut. Stratified mode splits each class independently,
// with floor(count * train_fraction) going to the train half. Throws
// TooFewExamplesError unless each class has at least two examples.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitConfig& cfg);

// Labeled feature CSV: the 21 feature columns, then host, then Type.
// Floats carry 12 significant digits.
void write_labeled_csv(std::ostream& out, const LabeledDataset& ds);
LabeledDataset read_labeled_csv(std::istream& in);

LabeledDataset load_labeled_csv(const std::filesystem::path& path);
void save_labeled_csv(const std::filesystem::path& path, const LabeledDataset& ds);

} // namespace phishlex
