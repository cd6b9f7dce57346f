#include "phishlex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "phishlex/csv.hpp"
#include "phishlex/errors.hpp"
#include "phishlex/rng.hpp"
#include "phishlex/text.hpp"

namespace phishlex {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

std::string lowercase_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

std::string format_real(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct CuratedList {
    std::vector<std::string> hosts; // normalized, deduplicated, in input order
};

CuratedList clean_list(const std::vector<RawEntry>& entries, Provenance& prov) {
    CuratedList out;
    std::unordered_set<std::string> seen;
    for (const RawEntry& entry : entries) {
        std::string host;
        try {
            host = normalize(entry.text);
        } catch (const Error&) {
            ++prov.malformed_dropped;
            continue;
        }
        if (is_ip_literal(host)) {
            ++prov.ip_literals_dropped;
            continue;
        }
        if (!seen.insert(host).second) {
            ++prov.duplicates_dropped;
            continue;
        }
        out.hosts.push_back(std::move(host));
    }
    return out;
}

LabeledExample make_example(std::string host, Label label) {
    LabeledExample ex;
    ex.parts = decompose(host);
    ex.features = extract(ex.parts);
    ex.host = std::move(host);
    ex.label = label;
    return ex;
}

} // namespace

std::string_view label_name(Label label) {
    return label == Label::Benign ? "Benign" : "Malicious";
}

std::size_t LabeledDataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(),
                      [label](const LabeledExample& e) { return e.label == label; }));
}

std::vector<RawEntry> load_allowlist(const std::filesystem::path& path, std::size_t limit) {
    std::vector<RawEntry> out;
    for (const std::string& line : read_lines(path)) {
        if (out.size() >= limit) {
            break;
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() > 2) {
            throw FormatError("allowlist row has more than two fields: " + line);
        }
        const std::string domain(trim(fields.back()));
        if (domain.empty()) {
            throw FormatError("allowlist row has an empty domain field: " + line);
        }
        out.push_back(RawEntry{domain, Source::Allowlist});
    }
    return out;
}

std::vector<RawEntry> load_blocklist(const std::filesystem::path& path, std::size_t limit) {
    const auto lines = read_lines(path);
    std::vector<RawEntry> out;

    // A header row naming a url column switches to column extraction.
    std::size_t url_column = 0;
    bool has_header = false;
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) {
        ++first;
    }
    if (first < lines.size()) {
        const auto head = split_csv_line(lines[first]);
        if (head.size() > 1) {
            bool found = false;
            for (std::size_t i = 0; i < head.size(); ++i) {
                if (lowercase_ascii(trim(head[i])) == "url") {
                    url_column = i;
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw FormatError("blocklist header has no url column: " + lines[first]);
            }
            has_header = true;
        }
    }

    for (std::size_t i = has_header ? first + 1 : first; i < lines.size(); ++i) {
        if (out.size() >= limit) {
            break;
        }
        if (trim(lines[i]).empty()) {
            continue;
        }
        std::string url;
        if (has_header) {
            const auto fields = split_csv_line(lines[i]);
            if (url_column >= fields.size()) {
                throw FormatError("blocklist row is missing the url column: " + lines[i]);
            }
            url = std::string(trim(fields[url_column]));
        } else {
            url = std::string(trim(lines[i]));
        }
        out.push_back(RawEntry{std::move(url), Source::Blocklist});
    }
    return out;
}

LabeledDataset curate(const std::vector<RawEntry>& allow, const std::vector<RawEntry>& block) {
    LabeledDataset ds;
    ds.provenance.allowlist_read = allow.size();
    ds.provenance.blocklist_read = block.size();

    CuratedList benign = clean_list(allow, ds.provenance);
    CuratedList malicious = clean_list(block, ds.provenance);

    std::unordered_set<std::string> benign_hosts(benign.hosts.begin(), benign.hosts.end());
    std::unordered_set<std::string> overlap;
    for (const std::string& host : malicious.hosts) {
        if (benign_hosts.count(host) > 0) {
            overlap.insert(host);
        }
    }

    for (std::string& host : benign.hosts) {
        if (overlap.count(host) > 0) {
            ++ds.provenance.overlaps_dropped;
            continue;
        }
        ds.examples.push_back(make_example(std::move(host), Label::Benign));
    }
    for (std::string& host : malicious.hosts) {
        if (overlap.count(host) > 0) {
            ++ds.provenance.overlaps_dropped;
            continue;
        }
        ds.examples.push_back(make_example(std::move(host), Label::Malicious));
    }

    if (ds.count(Label::Benign) == 0 || ds.count(Label::Malicious) == 0) {
        throw EmptyDatasetError("curation left a class with no examples");
    }
    return ds;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitConfig& cfg) {
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw Error("train_fraction must be in (0,1)");
    }
    if (ds.count(Label::Benign) < 2 || ds.count(Label::Malicious) < 2) {
        throw TooFewExamplesError("split needs at least two examples per class");
    }

    auto rng = make_rng(cfg.seed);
    LabeledDataset train;
    LabeledDataset test;

    auto cut = [&](std::vector<std::size_t> idx) {
        deterministic_shuffle(idx, rng);
        const auto n_train = static_cast<std::size_t>(
            std::floor(static_cast<double>(idx.size()) * cfg.train_fraction));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? train : test).examples.push_back(ds.examples[idx[i]]);
        }
    };

    if (cfg.stratified) {
        for (Label label : {Label::Benign, Label::Malicious}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < ds.examples.size(); ++i) {
                if (ds.examples[i].label == label) {
                    idx.push_back(i);
                }
            }
            cut(std::move(idx));
        }
    } else {
        std::vector<std::size_t> idx(ds.examples.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        cut(std::move(idx));
    }
    return {std::move(train), std::move(test)};
}

void write_labeled_csv(std::ostream& out, const LabeledDataset& ds) {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i] << ',';
    }
    out << "host,Type\n";
    for (const LabeledExample& ex : ds.examples) {
        for (double v : ex.features.values) {
            out << format_real(v) << ',';
        }
        out << csv_quote(ex.host) << ',' << label_name(ex.label) << '\n';
    }
}

LabeledDataset read_labeled_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("labeled CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto head = split_csv_line(line);
    std::vector<std::size_t> feature_cols(kFeatureCount, head.size());
    std::size_t host_col = head.size();
    std::size_t type_col = head.size();
    for (std::size_t i = 0; i < head.size(); ++i) {
        const std::string name(trim(head[i]));
        if (name == "host") {
            host_col = i;
        } else if (name == "Type") {
            type_col = i;
        } else if (const auto fi = feature_index(name); fi < kFeatureCount) {
            feature_cols[fi] = i;
        }
    }
    if (host_col == head.size() || type_col == head.size()) {
        throw FormatError("labeled CSV header is missing host/Type columns");
    }
    for (std::size_t fi = 0; fi < kFeatureCount; ++fi) {
        if (feature_cols[fi] == head.size()) {
            throw FormatError("labeled CSV header is missing feature column " +
                              std::string(feature_names()[fi]));
        }
    }

    LabeledDataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != head.size()) {
            throw FormatError("labeled CSV row " + std::to_string(line_no) +
                              " has a field count mismatch");
        }
        LabeledExample ex;
        for (std::size_t fi = 0; fi < kFeatureCount; ++fi) {
            const std::string& raw = fields[feature_cols[fi]];
            try {
                ex.features.values[fi] = std::stod(raw);
            } catch (const std::exception&) {
                throw FormatError("labeled CSV row " + std::to_string(line_no) +
                                  " has a non-numeric feature: " + raw);
            }
        }
        ex.host = std::string(trim(fields[host_col]));
        const std::string type(trim(fields[type_col]));
        if (type == "Benign") {
            ex.label = Label::Benign;
        } else if (type == "Malicious") {
            ex.label = Label::Malicious;
        } else {
            throw FormatError("labeled CSV row " + std::to_string(line_no) +
                              " has an unknown Type: " + type);
        }
        ex.parts = decompose(ex.host);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

LabeledDataset load_labeled_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_labeled_csv(in);
}

void save_labeled_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_labeled_csv(out, ds);
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace phishlex
