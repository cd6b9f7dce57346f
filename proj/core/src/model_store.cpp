#include "phishlex/model_store.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phishlex/errors.hpp"

namespace phishlex {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw CorruptPayloadError("bad float in model file: " + std::string(s));
    }
    return v;
}

std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw CorruptPayloadError("bad integer in model file: " + std::string(s));
    }
    return v;
}

std::string format_opt(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : "inf";
}

std::optional<std::size_t> parse_opt(std::string_view s) {
    if (s == "inf") {
        return std::nullopt;
    }
    return static_cast<std::size_t>(parse_uint(s));
}

void write_tree(std::ostream& out, const TreeNode& node) {
    if (node.is_leaf) {
        out << "L " << (node.leaf_class == Label::Malicious ? "malicious" : "benign") << ' '
            << node.counts.benign << ' ' << node.counts.malicious << '\n';
        return;
    }
    out << "D " << node.feature_id << ' ' << format_double(node.threshold) << ' '
        << node.counts.benign << ' ' << node.counts.malicious << '\n';
    write_tree(out, *node.left);
    write_tree(out, *node.right);
}

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') {
            ++j;
        }
        if (j > i) {
            out.emplace_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

class LineReader {
public:
    explicit LineReader(const std::vector<std::string>& lines) : lines_(lines) {}

    const std::string& next() {
        if (pos_ >= lines_.size()) {
            throw CorruptPayloadError("model file ends early");
        }
        return lines_[pos_++];
    }

    bool done() const { return pos_ >= lines_.size(); }

private:
    const std::vector<std::string>& lines_;
    std::size_t pos_ = 0;
};

// Expects "key value" and returns the value.
std::string expect_key(LineReader& in, std::string_view key) {
    const std::string& line = in.next();
    if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ') {
        throw CorruptPayloadError("expected '" + std::string(key) + "' line, got: " + line);
    }
    return line.substr(key.size() + 1);
}

std::unique_ptr<TreeNode> read_tree(LineReader& in) {
    const auto tokens = tokenize(in.next());
    if (tokens.size() != 4 && tokens.size() != 5) {
        throw CorruptPayloadError("bad tree node line");
    }
    auto node = std::make_unique<TreeNode>();
    if (tokens[0] == "L" && tokens.size() == 4) {
        node->is_leaf = true;
        if (tokens[1] == "malicious") {
            node->leaf_class = Label::Malicious;
        } else if (tokens[1] == "benign") {
            node->leaf_class = Label::Benign;
        } else {
            throw CorruptPayloadError("bad leaf class: " + tokens[1]);
        }
        node->counts.benign = parse_uint(tokens[2]);
        node->counts.malicious = parse_uint(tokens[3]);
        return node;
    }
    if (tokens[0] == "D" && tokens.size() == 5) {
        node->is_leaf = false;
        node->feature_id = parse_uint(tokens[1]);
        if (node->feature_id < 1 || node->feature_id > kFeatureCount) {
            throw CorruptPayloadError("bad feature id in decision node");
        }
        node->threshold = parse_double(tokens[2]);
        node->counts.benign = parse_uint(tokens[3]);
        node->counts.malicious = parse_uint(tokens[4]);
        node->left = read_tree(in);
        node->right = read_tree(in);
        node->leaf_class =
            node->counts.malicious > node->counts.benign ? Label::Malicious : Label::Benign;
        return node;
    }
    throw CorruptPayloadError("unknown tree node tag");
}

std::string serialize_forest(const ForestModel& m) {
    std::ostringstream out;
    out << "n_estimators " << m.params.n_estimators << '\n';
    out << "bootstrap " << (m.params.bootstrap ? 1 : 0) << '\n';
    out << "seed " << m.params.seed << '\n';
    out << "max_depth " << format_opt(m.params.tree.max_depth) << '\n';
    out << "max_features " << format_opt(m.params.tree.max_features) << '\n';
    out << "min_samples_split " << m.params.tree.min_samples_split << '\n';
    out << "max_leaf_nodes " << format_opt(m.params.tree.max_leaf_nodes) << '\n';
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
        out << "tree " << t << '\n';
        write_tree(out, *m.trees[t]);
    }
    out << "end\n";
    return out.str();
}

ForestModel parse_forest(LineReader& in) {
    ForestModel m;
    m.params.n_estimators = parse_uint(expect_key(in, "n_estimators"));
    m.params.bootstrap = parse_uint(expect_key(in, "bootstrap")) != 0;
    m.params.seed = parse_uint(expect_key(in, "seed"));
    m.params.tree.max_depth = parse_opt(expect_key(in, "max_depth"));
    m.params.tree.max_features = parse_opt(expect_key(in, "max_features"));
    m.params.tree.min_samples_split = parse_uint(expect_key(in, "min_samples_split"));
    m.params.tree.max_leaf_nodes = parse_opt(expect_key(in, "max_leaf_nodes"));
    for (std::size_t t = 0; t < m.params.n_estimators; ++t) {
        const std::string tag = expect_key(in, "tree");
        if (parse_uint(tag) != t) {
            throw CorruptPayloadError("tree index out of order");
        }
        m.trees.push_back(read_tree(in));
    }
    if (in.next() != "end") {
        throw CorruptPayloadError("missing payload terminator");
    }
    return m;
}

std::string serialize_svm(const SvmModel& m) {
    std::ostringstream out;
    out << "c " << format_double(m.params.c) << '\n';
    out << "gamma " << format_double(m.params.gamma) << '\n';
    out << "tolerance " << format_double(m.params.tolerance) << '\n';
    out << "max_passes " << m.params.max_passes << '\n';
    out << "seed " << m.params.seed << '\n';
    out << "converged " << (m.converged ? 1 : 0) << '\n';
    out << "bias " << format_double(m.bias) << '\n';
    out << "means";
    for (double v : m.standardizer.means) {
        out << ' ' << format_double(v);
    }
    out << "\nstddevs";
    for (double v : m.standardizer.stddevs) {
        out << ' ' << format_double(v);
    }
    out << "\nsupport_vectors " << m.support_vectors.size() << '\n';
    for (const SupportVector& sv : m.support_vectors) {
        out << "sv " << format_double(sv.alpha) << ' ' << sv.y;
        for (double v : sv.x.values) {
            out << ' ' << format_double(v);
        }
        out << '\n';
    }
    out << "end\n";
    return out.str();
}

SvmModel parse_svm(LineReader& in) {
    SvmModel m;
    m.params.c = parse_double(expect_key(in, "c"));
    m.params.gamma = parse_double(expect_key(in, "gamma"));
    m.params.tolerance = parse_double(expect_key(in, "tolerance"));
    m.params.max_passes = parse_uint(expect_key(in, "max_passes"));
    m.params.seed = parse_uint(expect_key(in, "seed"));
    m.converged = parse_uint(expect_key(in, "converged")) != 0;
    m.bias = parse_double(expect_key(in, "bias"));

    auto parse_array = [&](std::string_view key, std::array<double, kFeatureCount>& dst) {
        const auto tokens = tokenize(expect_key(in, key));
        if (tokens.size() != kFeatureCount) {
            throw CorruptPayloadError(std::string(key) + " array has wrong length");
        }
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            dst[i] = parse_double(tokens[i]);
        }
    };
    parse_array("means", m.standardizer.means);
    parse_array("stddevs", m.standardizer.stddevs);

    const std::size_t n_sv = parse_uint(expect_key(in, "support_vectors"));
    for (std::size_t i = 0; i < n_sv; ++i) {
        const auto tokens = tokenize(in.next());
        if (tokens.size() != kFeatureCount + 3 || tokens[0] != "sv") {
            throw CorruptPayloadError("bad support vector line");
        }
        SupportVector sv;
        sv.alpha = parse_double(tokens[1]);
        sv.y = tokens[2] == "1" ? 1 : (tokens[2] == "-1" ? -1 : 0);
        if (sv.y == 0) {
            throw CorruptPayloadError("bad support vector label: " + tokens[2]);
        }
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            sv.x.values[k] = parse_double(tokens[3 + k]);
        }
        m.support_vectors.push_back(sv);
    }
    if (in.next() != "end") {
        throw CorruptPayloadError("missing payload terminator");
    }
    return m;
}

std::string serialize_body(const ModelEnvelope& env) {
    if (env.algorithm == Algo::Forest) {
        return serialize_forest(std::get<ForestModel>(env.payload));
    }
    return serialize_svm(std::get<SvmModel>(env.payload));
}

ModelEnvelope make_envelope_common(Algo algo, std::string training_digest) {
    ModelEnvelope env;
    env.algorithm = algo;
    env.training_digest = std::move(training_digest);
    const auto& names = feature_names();
    env.feature_names.assign(names.begin(), names.end());
    return env;
}

} // namespace

std::string_view algo_name(Algo algo) {
    return algo == Algo::Forest ? "forest" : "svm";
}

ModelEnvelope make_envelope(ForestModel model, std::string training_digest) {
    ModelEnvelope env = make_envelope_common(Algo::Forest, std::move(training_digest));
    env.payload = std::move(model);
    return env;
}

ModelEnvelope make_envelope(SvmModel model, std::string training_digest) {
    ModelEnvelope env = make_envelope_common(Algo::Svm, std::move(training_digest));
    env.payload = std::move(model);
    return env;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hex(buf.str());
}

std::string model_digest(const ModelEnvelope& env) {
    return fnv1a_hex(serialize_body(env));
}

void save_model(const ModelEnvelope& env, const std::filesystem::path& path) {
    const std::string body = serialize_body(env);

    std::ostringstream out;
    out << "plxm " << env.format_version << '\n';
    out << "algorithm " << algo_name(env.algorithm) << '\n';
    if (!env.created_at.empty()) {
        out << "created_at " << env.created_at << '\n';
    }
    out << "features";
    for (const std::string& name : env.feature_names) {
        out << ' ' << name;
    }
    out << '\n';
    out << "training_digest " << env.training_digest << '\n';
    out << "body_checksum " << fnv1a_hex(body) << '\n';
    out << "---\n";
    out << body;

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        f << out.str();
        if (!f.flush()) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot publish " + path.string() + ": " + ec.message());
    }
}

ModelEnvelope load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> header;
    std::string body;
    std::string line;
    bool in_body = false;
    bool saw_separator = false;
    while (std::getline(in, line)) {
        if (in_body) {
            body += line;
            body += '\n';
        } else if (line == "---") {
            in_body = true;
            saw_separator = true;
        } else {
            header.push_back(line);
        }
    }
    if (!saw_separator) {
        throw CorruptPayloadError("model file has no payload section: " + path.string());
    }

    ModelEnvelope env;
    std::string features_line;
    std::string checksum;
    std::string algorithm;
    bool saw_magic = false;
    for (const std::string& h : header) {
        const auto space = h.find(' ');
        const std::string key = h.substr(0, space);
        const std::string value = space == std::string::npos ? "" : h.substr(space + 1);
        if (key == "plxm") {
            saw_magic = true;
            env.format_version = static_cast<int>(parse_uint(value));
        } else if (key == "algorithm") {
            algorithm = value;
        } else if (key == "created_at") {
            env.created_at = value;
        } else if (key == "features") {
            features_line = value;
        } else if (key == "training_digest") {
            env.training_digest = value;
        } else if (key == "body_checksum") {
            checksum = value;
        } else {
            throw CorruptPayloadError("unknown header line: " + h);
        }
    }
    if (!saw_magic) {
        throw CorruptPayloadError("not a model file: " + path.string());
    }
    if (env.format_version != kModelFormatVersion) {
        throw SchemaError("unsupported model format_version " +
                          std::to_string(env.format_version));
    }
    if (algorithm == "forest") {
        env.algorithm = Algo::Forest;
    } else if (algorithm == "svm") {
        env.algorithm = Algo::Svm;
    } else {
        throw SchemaError("unknown algorithm: " + algorithm);
    }

    const auto names = tokenize(features_line);
    const auto& expected = feature_names();
    if (names.size() != expected.size()) {
        throw SchemaError("model feature list has wrong length");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] != expected[i]) {
            throw SchemaError("model feature name mismatch at position " + std::to_string(i + 1) +
                              ": " + names[i]);
        }
    }
    env.feature_names.assign(names.begin(), names.end());

    if (fnv1a_hex(body) != checksum) {
        throw CorruptPayloadError("model payload checksum mismatch: " + path.string());
    }

    std::vector<std::string> body_lines;
    std::size_t begin = 0;
    while (begin < body.size()) {
        const auto nl = body.find('\n', begin);
        body_lines.push_back(body.substr(begin, nl - begin));
        begin = nl + 1;
    }
    LineReader reader(body_lines);
    if (env.algorithm == Algo::Forest) {
        env.payload = parse_forest(reader);
    } else {
        env.payload = parse_svm(reader);
    }
    return env;
}

EnvelopePrediction predict(const ModelEnvelope& env, const FeatureVector& x) {
    EnvelopePrediction out;
    if (env.algorithm == Algo::Forest) {
        const auto p = predict_forest(std::get<ForestModel>(env.payload), x);
        out.label = p.label;
        out.score = static_cast<double>(p.votes.malicious);
    } else {
        const auto& model = std::get<SvmModel>(env.payload);
        out.score = decision_value(model, x);
        out.label = out.score > 0.0 ? Label::Malicious : Label::Benign;
    }
    return out;
}

} // namespace phishlex
