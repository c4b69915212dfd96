#include "csid/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "csid/errors.hpp"
#include "csid/strings.hpp"

namespace csid {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::clustered: return "clustered";
        case Mode::pooled: return "pooled";
        case Mode::single_agent: return "single_agent";
        case Mode::sweep_n: return "sweep_N";
        case Mode::sweep_cluster_size: return "sweep_cluster_size";
    }
    return "unknown";
}

bool parse_mode(const std::string& text, Mode& out) {
    for (Mode mode : {Mode::clustered, Mode::pooled, Mode::single_agent, Mode::sweep_n,
                      Mode::sweep_cluster_size}) {
        if (text == mode_name(mode)) {
            out = mode;
            return true;
        }
    }
    return false;
}

int ExperimentConfig::total_systems() const {
    int total = 0;
    for (const auto& cluster : clusters) total += cluster.members;
    return total;
}

std::vector<ClusterGroundTruth> ExperimentConfig::truths() const {
    std::vector<ClusterGroundTruth> out;
    out.reserve(clusters.size());
    for (const auto& cluster : clusters) {
        out.push_back(ClusterGroundTruth::from_ab(cluster.a, cluster.b));
    }
    return out;
}

std::vector<SystemSpec> ExperimentConfig::system_specs() const {
    std::vector<SystemSpec> specs;
    specs.reserve(total_systems());
    int system_id = 0;
    for (std::size_t j = 0; j < clusters.size(); ++j) {
        const ClusterConfig& cluster = clusters[j];
        for (int m = 0; m < cluster.members; ++m) {
            SystemSpec spec;
            spec.system_id = system_id++;
            spec.cluster_id = static_cast<int>(j);
            spec.sigma_x = cluster.sigma_x;
            spec.sigma_u = cluster.sigma_u;
            spec.sigma_w = cluster.sigma_w;
            spec.num_rollouts = cluster.num_rollouts >= 0 ? cluster.num_rollouts : num_rollouts;
            spec.horizon = horizon;
            specs.push_back(spec);
        }
    }
    return specs;
}

namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& message) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + message);
}

struct Statement {
    int line = 0;
    std::string key;
    std::string value;  // empty for "cluster {" / "}"
    enum class Kind { assign, open_cluster, close_block } kind = Kind::assign;
};

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Splits the text into statements. A value beginning with '[' may continue
// over following lines until its brackets balance.
std::vector<Statement> tokenize(const std::string& text, const std::string& source) {
    std::vector<Statement> statements;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    int pending_line = 0;
    std::string pending;  // unfinished "key = [..." statement
    int depth = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string line = strip(raw);
        if (line.empty()) continue;

        if (!pending.empty()) {
            pending += " " + line;
            for (char c : line) {
                if (c == '[') ++depth;
                if (c == ']') --depth;
            }
            if (depth > 0) continue;
            if (depth < 0) fail(source, line_no, "unbalanced ']'");
            Statement st;
            st.line = pending_line;
            const std::size_t eq = pending.find('=');
            st.key = strip(pending.substr(0, eq));
            st.value = strip(pending.substr(eq + 1));
            statements.push_back(std::move(st));
            pending.clear();
            continue;
        }

        if (line == "}") {
            statements.push_back({line_no, "", "", Statement::Kind::close_block});
            continue;
        }
        if (line.size() >= 1 && line.back() == '{') {
            const std::string name = strip(line.substr(0, line.size() - 1));
            if (name != "cluster") fail(source, line_no, "unknown block '" + name + "'");
            statements.push_back({line_no, name, "", Statement::Kind::open_cluster});
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail(source, line_no, "expected 'key = value', got '" + line + "'");
        }
        depth = 0;
        for (char c : line) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
        }
        if (depth > 0) {
            pending = line;
            pending_line = line_no;
            continue;
        }
        if (depth < 0) fail(source, line_no, "unbalanced ']'");
        Statement st;
        st.line = line_no;
        st.key = strip(line.substr(0, eq));
        st.value = strip(line.substr(eq + 1));
        statements.push_back(std::move(st));
    }
    if (!pending.empty()) fail(source, pending_line, "unterminated '[' value");
    return statements;
}

double require_double(const Statement& st, const std::string& source) {
    double v = 0.0;
    if (!parse_double(st.value, v)) {
        fail(source, st.line, st.key + ": expected a number, got '" + st.value + "'");
    }
    return v;
}

long long require_int(const Statement& st, const std::string& source) {
    long long v = 0;
    if (!parse_long(st.value, v)) {
        fail(source, st.line, st.key + ": expected an integer, got '" + st.value + "'");
    }
    return v;
}

std::uint64_t require_u64(const Statement& st, const std::string& source) {
    unsigned long long v = 0;
    if (!parse_u64(st.value, v)) {
        fail(source, st.line, st.key + ": expected an unsigned integer, got '" + st.value + "'");
    }
    return v;
}

// Parses "[x, y, ...]" of numbers.
std::vector<double> parse_number_list(const Statement& st, const std::string& source) {
    const std::string& v = st.value;
    if (v.empty() || v.front() != '[' || v.back() != ']') {
        fail(source, st.line, st.key + ": expected [ ... ]");
    }
    std::vector<double> out;
    std::string item;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const char c = v[i];
        if (c == ',') {
            item = strip(item);
            if (item.empty()) fail(source, st.line, st.key + ": empty list entry");
            double d = 0.0;
            if (!parse_double(item, d)) {
                fail(source, st.line, st.key + ": bad number '" + item + "'");
            }
            out.push_back(d);
            item.clear();
        } else {
            item += c;
        }
    }
    item = strip(item);
    if (!item.empty()) {
        double d = 0.0;
        if (!parse_double(item, d)) fail(source, st.line, st.key + ": bad number '" + item + "'");
        out.push_back(d);
    }
    return out;
}

// Parses "[[a, b], [c, d], ...]" into a matrix.
Matrix parse_matrix(const Statement& st, const std::string& source) {
    const std::string& v = st.value;
    std::vector<std::vector<double>> rows;
    std::size_t i = 0;
    auto skip_ws = [&]() {
        while (i < v.size() && std::isspace(static_cast<unsigned char>(v[i]))) ++i;
    };
    skip_ws();
    if (i >= v.size() || v[i] != '[') fail(source, st.line, st.key + ": expected [[ ... ]]");
    ++i;
    skip_ws();
    while (i < v.size() && v[i] != ']') {
        if (v[i] == ',') { ++i; skip_ws(); continue; }
        if (v[i] != '[') fail(source, st.line, st.key + ": expected '[' starting a row");
        const std::size_t close = v.find(']', i);
        if (close == std::string::npos) fail(source, st.line, st.key + ": unterminated row");
        Statement row_st{st.line, st.key, v.substr(i, close - i + 1), Statement::Kind::assign};
        rows.push_back(parse_number_list(row_st, source));
        i = close + 1;
        skip_ws();
    }
    if (i >= v.size() || v[i] != ']') fail(source, st.line, st.key + ": expected closing ']'");
    if (rows.empty()) fail(source, st.line, st.key + ": empty matrix");
    const std::size_t cols = rows[0].size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) fail(source, st.line, st.key + ": ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::vector<int> parse_int_list(const Statement& st, const std::string& source) {
    std::vector<int> out;
    for (double d : parse_number_list(st, source)) {
        const int v = static_cast<int>(d);
        if (static_cast<double>(v) != d) {
            fail(source, st.line, st.key + ": expected integers");
        }
        out.push_back(v);
    }
    return out;
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
    const std::vector<Statement> statements = tokenize(text, source_name);

    ExperimentConfig config;
    bool have_mode = false, have_k = false, have_n = false, have_t = false, have_r = false;
    long long declared_m = -1;
    int declared_m_line = 0;
    bool in_cluster = false;
    ClusterConfig current;
    int cluster_open_line = 0;
    bool have_a = false, have_b = false, have_members = false, have_sigmas[3] = {false, false, false};

    auto finish_cluster = [&](int line) {
        if (!have_members) fail(source_name, line, "cluster: missing 'members'");
        if (!have_sigmas[0] || !have_sigmas[1] || !have_sigmas[2]) {
            fail(source_name, line, "cluster: missing sigma_x / sigma_u / sigma_w");
        }
        if (!have_a || !have_b) fail(source_name, line, "cluster: missing A or B");
        if (current.a.rows() != current.a.cols()) {
            fail(source_name, line, "A: must be square");
        }
        if (current.b.rows() != current.a.rows()) {
            fail(source_name, line, "B: row count must match A");
        }
        config.clusters.push_back(current);
        current = ClusterConfig{};
        have_a = have_b = have_members = false;
        have_sigmas[0] = have_sigmas[1] = have_sigmas[2] = false;
        in_cluster = false;
    };

    for (const auto& st : statements) {
        if (st.kind == Statement::Kind::open_cluster) {
            if (in_cluster) fail(source_name, st.line, "nested cluster blocks are not allowed");
            in_cluster = true;
            cluster_open_line = st.line;
            continue;
        }
        if (st.kind == Statement::Kind::close_block) {
            if (!in_cluster) fail(source_name, st.line, "'}' without an open block");
            finish_cluster(st.line);
            continue;
        }

        if (in_cluster) {
            if (st.key == "members") {
                const long long v = require_int(st, source_name);
                if (v < 1) fail(source_name, st.line, "members: must be >= 1");
                current.members = static_cast<int>(v);
                have_members = true;
            } else if (st.key == "N") {
                const long long v = require_int(st, source_name);
                if (v < 1) fail(source_name, st.line, "N: must be >= 1");
                current.num_rollouts = static_cast<int>(v);
            } else if (st.key == "sigma_x" || st.key == "sigma_u" || st.key == "sigma_w") {
                const double v = require_double(st, source_name);
                if (v <= 0.0) fail(source_name, st.line, st.key + ": must be > 0");
                if (st.key == "sigma_x") { current.sigma_x = v; have_sigmas[0] = true; }
                if (st.key == "sigma_u") { current.sigma_u = v; have_sigmas[1] = true; }
                if (st.key == "sigma_w") { current.sigma_w = v; have_sigmas[2] = true; }
            } else if (st.key == "A") {
                current.a = parse_matrix(st, source_name);
                have_a = true;
            } else if (st.key == "B") {
                current.b = parse_matrix(st, source_name);
                have_b = true;
            } else {
                fail(source_name, st.line, "unknown cluster key '" + st.key + "'");
            }
            continue;
        }

        if (st.key == "mode") {
            if (have_mode) fail(source_name, st.line, "mode: declared more than once");
            if (!parse_mode(st.value, config.mode)) {
                fail(source_name, st.line, "mode: unknown mode '" + st.value + "'");
            }
            have_mode = true;
        } else if (st.key == "seed") {
            config.master_seed = require_u64(st, source_name);
        } else if (st.key == "K") {
            const long long v = require_int(st, source_name);
            if (v < 1) fail(source_name, st.line, "K: must be >= 1");
            config.num_clusters = static_cast<int>(v);
            have_k = true;
        } else if (st.key == "M") {
            declared_m = require_int(st, source_name);
            declared_m_line = st.line;
        } else if (st.key == "N") {
            const long long v = require_int(st, source_name);
            if (v < 1) fail(source_name, st.line, "N: must be >= 1");
            config.num_rollouts = static_cast<int>(v);
            have_n = true;
        } else if (st.key == "T") {
            const long long v = require_int(st, source_name);
            if (v < 1) fail(source_name, st.line, "T: must be >= 1");
            config.horizon = static_cast<int>(v);
            have_t = true;
        } else if (st.key == "R") {
            const long long v = require_int(st, source_name);
            if (v < 1) fail(source_name, st.line, "R: must be >= 1");
            config.iterations = static_cast<int>(v);
            have_r = true;
        } else if (st.key == "step_rule") {
            if (st.value == "fixed") {
                config.step_rule = StepRule::fixed;
            } else if (st.value == "theoretical") {
                config.step_rule = StepRule::theoretical;
            } else {
                fail(source_name, st.line, "step_rule: expected 'fixed' or 'theoretical'");
            }
        } else if (st.key == "eta") {
            const double v = require_double(st, source_name);
            if (v <= 0.0) fail(source_name, st.line, "eta: must be > 0");
            config.eta = v;
        } else if (st.key == "alpha0") {
            const double v = require_double(st, source_name);
            if (!(v > 0.0 && v < 0.5)) fail(source_name, st.line, "alpha0: must lie in (0, 1/2)");
            config.alpha0 = v;
        } else if (st.key == "seed_count") {
            const long long v = require_int(st, source_name);
            if (v < 1) fail(source_name, st.line, "seed_count: must be >= 1");
            config.seed_count = static_cast<int>(v);
        } else if (st.key == "sweep_N") {
            config.sweep_rollout_counts = parse_int_list(st, source_name);
            for (int v : config.sweep_rollout_counts) {
                if (v < 1) fail(source_name, st.line, "sweep_N: entries must be >= 1");
            }
            if (config.sweep_rollout_counts.empty()) {
                fail(source_name, st.line, "sweep_N: empty list");
            }
        } else if (st.key == "sweep_cluster_sizes") {
            config.sweep_cluster_sizes = parse_int_list(st, source_name);
            for (int v : config.sweep_cluster_sizes) {
                if (v < 1) fail(source_name, st.line, "sweep_cluster_sizes: entries must be >= 1");
            }
            if (config.sweep_cluster_sizes.empty()) {
                fail(source_name, st.line, "sweep_cluster_sizes: empty list");
            }
        } else if (st.key == "out") {
            config.out_dir = st.value;
        } else {
            fail(source_name, st.line, "unknown key '" + st.key + "'");
        }
    }
    if (in_cluster) fail(source_name, cluster_open_line, "unterminated cluster block");

    if (!have_mode) throw ConfigError(source_name + ": missing required key 'mode'");
    if (!have_k) throw ConfigError(source_name + ": missing required key 'K'");
    if (!have_n) throw ConfigError(source_name + ": missing required key 'N'");
    if (!have_t) throw ConfigError(source_name + ": missing required key 'T'");
    if (!have_r) throw ConfigError(source_name + ": missing required key 'R'");
    if (config.clusters.empty()) throw ConfigError(source_name + ": no cluster blocks");
    if (static_cast<int>(config.clusters.size()) != config.num_clusters) {
        throw ConfigError(source_name + ": K = " + std::to_string(config.num_clusters) +
                          " but " + std::to_string(config.clusters.size()) +
                          " cluster blocks were defined");
    }
    if (declared_m >= 0 && declared_m != config.total_systems()) {
        fail(source_name, declared_m_line,
             "M: cluster member counts sum to " + std::to_string(config.total_systems()) +
                 ", expected M = " + std::to_string(declared_m));
    }
    const std::size_t nx = config.clusters[0].a.rows();
    const std::size_t nu = config.clusters[0].b.cols();
    for (std::size_t j = 1; j < config.clusters.size(); ++j) {
        if (config.clusters[j].a.rows() != nx || config.clusters[j].b.cols() != nu) {
            throw ConfigError(source_name + ": cluster " + std::to_string(j + 1) +
                              " dimensions differ from cluster 1");
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

namespace {

std::string matrix_literal(const Matrix& m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += (i == 0) ? "[" : " [";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out += to_decimal_string(m(i, j));
            if (j + 1 < m.cols()) out += ", ";
        }
        out += "]";
        if (i + 1 < m.rows()) out += ",";
    }
    out += "]";
    return out;
}

std::string int_list_literal(const std::vector<int>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(values[i]);
        if (i + 1 < values.size()) out += ", ";
    }
    out += "]";
    return out;
}

} // namespace

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "mode = " << mode_name(config.mode) << "\n";
    out << "seed = " << config.master_seed << "\n";
    out << "K = " << config.num_clusters << "\n";
    out << "M = " << config.total_systems() << "\n";
    out << "N = " << config.num_rollouts << "\n";
    out << "T = " << config.horizon << "\n";
    out << "R = " << config.iterations << "\n";
    out << "step_rule = " << (config.step_rule == StepRule::fixed ? "fixed" : "theoretical")
        << "\n";
    out << "eta = " << to_decimal_string(config.eta) << "\n";
    out << "alpha0 = " << to_decimal_string(config.alpha0) << "\n";
    out << "seed_count = " << config.seed_count << "\n";
    out << "sweep_N = " << int_list_literal(config.sweep_rollout_counts) << "\n";
    out << "sweep_cluster_sizes = " << int_list_literal(config.sweep_cluster_sizes) << "\n";
    out << "out = " << config.out_dir << "\n";
    for (const auto& cluster : config.clusters) {
        out << "\ncluster {\n";
        out << "  members = " << cluster.members << "\n";
        if (cluster.num_rollouts >= 0) out << "  N = " << cluster.num_rollouts << "\n";
        out << "  sigma_x = " << to_decimal_string(cluster.sigma_x) << "\n";
        out << "  sigma_u = " << to_decimal_string(cluster.sigma_u) << "\n";
        out << "  sigma_w = " << to_decimal_string(cluster.sigma_w) << "\n";
        out << "  A = " << matrix_literal(cluster.a) << "\n";
        out << "  B = " << matrix_literal(cluster.b) << "\n";
        out << "}\n";
    }
    return out.str();
}

} // namespace csid
