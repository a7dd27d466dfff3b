#include "thermoformal/model_io.hpp"

#include "thermoformal/errors.hpp"
#include "thermoformal/kms.hpp"
#include "thermoformal/log.hpp"
#include "thermoformal/spectral.hpp"
#include "thermoformal/thermo.hpp"
#include "thermoformal/transfer.hpp"

#include "CLI11.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace thermoformal::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

void check_fields(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) config_fail("unknown field '" + it.key() + "' in " + where);
    }
}

const json& require_field(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end()) config_fail(std::string("missing field '") + key + "' in " + where);
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) config_fail("field " + where + " must be a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) config_fail("field " + where + " must be an integer");
    return j.get<int>();
}

std::vector<std::vector<int>> parse_transitions(const json& j, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        config_fail("'transitions' must be an array of " + std::to_string(d) + " rows");
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            config_fail("'transitions' row " + std::to_string(i) + " must have " +
                        std::to_string(d) + " entries");
        std::vector<int> r(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            int v = as_int(row[static_cast<std::size_t>(c)],
                           "'transitions'[" + std::to_string(i) + "][" + std::to_string(c) + "]");
            if (v != 0 && v != 1) config_fail("'transitions' entries must be 0 or 1");
            r[static_cast<std::size_t>(c)] = v;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<double> parse_number_array(const json& j, const std::string& where) {
    if (!j.is_array()) config_fail("field " + where + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

/// Parses a d x d matrix whose entries on allowed transitions become the
/// values of a depth-2 cylinder function; forbidden entries must be zero.
CylinderFunction parse_pair_matrix(const SubshiftSpec& spec, const json& j, const char* where) {
    const int d = spec.alphabet_size();
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        config_fail(std::string(where) + " must be a " + std::to_string(d) + "x" +
                    std::to_string(d) + " matrix");
    std::vector<std::vector<double>> m;
    for (int i = 0; i < d; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            config_fail(std::string(where) + " row " + std::to_string(i) + " must have " +
                        std::to_string(d) + " entries");
        std::vector<double> r;
        for (int c = 0; c < d; ++c)
            r.push_back(as_number(row[static_cast<std::size_t>(c)],
                                  std::string(where) + "[" + std::to_string(i) + "][" +
                                      std::to_string(c) + "]"));
        m.push_back(std::move(r));
    }
    WordTable pairs(spec, 2);
    std::vector<double> vals(pairs.size());
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        auto w = pairs.word(t);
        vals[t] = m[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])];
    }
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < d; ++c)
            if (!spec.allowed(i, c) && m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] != 0.0)
                config_fail(std::string(where) + " has a nonzero entry on the forbidden transition " +
                            std::to_string(i) + "->" + std::to_string(c));
    return CylinderFunction(spec, 2, std::move(vals));
}

json matrix_to_json(const std::vector<std::vector<double>>& m) {
    json rows = json::array();
    for (const auto& r : m) rows.push_back(r);
    return rows;
}

/// Parses the inner H description of a from_H potential (kinds: constant,
/// two_coordinate, table; values are H itself, not log-weights).
CylinderFunction parse_H_function(const SubshiftSpec& spec, const json& j, json& canon) {
    if (!j.is_object()) config_fail("'H' must be an object");
    const std::string kind = require_field(j, "kind", "H").get<std::string>();
    if (kind == "constant") {
        check_fields(j, "H", {"kind", "value"});
        double v = as_number(require_field(j, "value", "H"), "'H.value'");
        canon = json{{"kind", "constant"}, {"value", v}};
        return CylinderFunction::constant(spec, 1, v);
    }
    if (kind == "two_coordinate") {
        check_fields(j, "H", {"kind", "weights"});
        CylinderFunction f = parse_pair_matrix(spec, require_field(j, "weights", "H"), "'H.weights'");
        std::vector<std::vector<double>> m(static_cast<std::size_t>(spec.alphabet_size()),
                                           std::vector<double>(static_cast<std::size_t>(spec.alphabet_size()), 0.0));
        WordTable pairs(spec, 2);
        for (std::size_t t = 0; t < pairs.size(); ++t) {
            auto w = pairs.word(t);
            m[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])] = f.values()[t];
        }
        canon = json{{"kind", "two_coordinate"}, {"weights", matrix_to_json(m)}};
        return f;
    }
    if (kind == "table") {
        check_fields(j, "H", {"kind", "depth", "values", "log_space"});
        int depth = as_int(require_field(j, "depth", "H"), "'H.depth'");
        if (depth < 1) config_fail("'H.depth' must be at least 1");
        std::vector<double> vals = parse_number_array(require_field(j, "values", "H"), "'H.values'");
        bool log_space = false;
        if (auto it = j.find("log_space"); it != j.end()) {
            if (!it->is_boolean()) config_fail("'H.log_space' must be a boolean");
            log_space = it->get<bool>();
        }
        WordTable words(spec, depth);
        if (vals.size() != words.size())
            config_fail("'H.values' must list " + std::to_string(words.size()) +
                        " values (one per admissible depth-" + std::to_string(depth) +
                        " word in lexicographic order)");
        canon = json{{"kind", "table"}, {"depth", depth}, {"values", vals}, {"log_space", log_space}};
        if (log_space)
            for (double& v : vals) v = std::exp(v);
        return CylinderFunction(spec, depth, std::move(vals));
    }
    config_fail("unknown 'H.kind' \"" + kind + "\" (expected constant, two_coordinate, or table)");
}

struct ParsedPotential {
    CylinderPotential pot;
    std::optional<CylinderFunction> H;
    double beta = 1.0;
    json canonical;
};

ParsedPotential parse_potential(const SubshiftSpec& spec, const json& j) {
    if (!j.is_object()) config_fail("'potential' must be an object");
    const std::string kind = require_field(j, "kind", "potential").get<std::string>();
    try {
        if (kind == "constant") {
            check_fields(j, "potential", {"kind", "value"});
            double v = as_number(require_field(j, "value", "potential"), "'potential.value'");
            return ParsedPotential{CylinderPotential::constant_log(spec, v), std::nullopt, 1.0,
                                   json{{"kind", "constant"}, {"value", v}}};
        }
        if (kind == "two_coordinate") {
            check_fields(j, "potential", {"kind", "weights"});
            CylinderFunction f =
                parse_pair_matrix(spec, require_field(j, "weights", "potential"), "'potential.weights'");
            json canon_h;
            {
                const int d = spec.alphabet_size();
                std::vector<std::vector<double>> m(static_cast<std::size_t>(d),
                                                   std::vector<double>(static_cast<std::size_t>(d), 0.0));
                WordTable pairs(spec, 2);
                for (std::size_t t = 0; t < pairs.size(); ++t) {
                    auto w = pairs.word(t);
                    m[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])] = f.values()[t];
                }
                canon_h = matrix_to_json(m);
            }
            return ParsedPotential{CylinderPotential::from_weights(std::move(f)), std::nullopt, 1.0,
                                   json{{"kind", "two_coordinate"}, {"weights", canon_h}}};
        }
        if (kind == "table") {
            check_fields(j, "potential", {"kind", "depth", "values", "log_space"});
            int depth = as_int(require_field(j, "depth", "potential"), "'potential.depth'");
            if (depth < 1) config_fail("'potential.depth' must be at least 1");
            std::vector<double> vals =
                parse_number_array(require_field(j, "values", "potential"), "'potential.values'");
            bool log_space = false;
            if (auto it = j.find("log_space"); it != j.end()) {
                if (!it->is_boolean()) config_fail("'potential.log_space' must be a boolean");
                log_space = it->get<bool>();
            }
            WordTable words(spec, depth);
            if (vals.size() != words.size())
                config_fail("'potential.values' must list " + std::to_string(words.size()) +
                            " values (one per admissible depth-" + std::to_string(depth) +
                            " word in lexicographic order)");
            json canon = json{{"kind", "table"}, {"depth", depth}, {"values", vals},
                              {"log_space", log_space}};
            CylinderFunction f(spec, depth, std::move(vals));
            CylinderPotential pot =
                log_space ? CylinderPotential::from_log_weights(std::move(f))
                          : CylinderPotential::from_weights(std::move(f));
            return ParsedPotential{std::move(pot), std::nullopt, 1.0, std::move(canon)};
        }
        if (kind == "from_H") {
            check_fields(j, "potential", {"kind", "H", "beta"});
            json canon_h;
            CylinderFunction h = parse_H_function(spec, require_field(j, "H", "potential"), canon_h);
            double beta = as_number(require_field(j, "beta", "potential"), "'potential.beta'");
            CylinderPotential pot = CylinderPotential::from_H(h, beta);
            return ParsedPotential{std::move(pot), std::move(h), beta,
                                   json{{"kind", "from_H"}, {"H", canon_h}, {"beta", beta}}};
        }
    } catch (const std::invalid_argument& e) {
        config_fail(std::string("invalid potential: ") + e.what());
    }
    config_fail("unknown 'potential.kind' \"" + kind +
                "\" (expected constant, two_coordinate, table, or from_H)");
}

std::string format_double_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void escape_to(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void dump_rec(std::string& out, const json& j, int level) {
    const std::string indent(static_cast<std::size_t>(level) * 2, ' ');
    const std::string indent1(static_cast<std::size_t>(level + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += indent1;
                escape_to(out, it.key());
                out += ": ";
                dump_rec(out, it.value(), level + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += indent;
            out += '}';
            return;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                dump_rec(out, j[i], level);
            }
            out += ']';
            return;
        }
        case json::value_t::string:
            escape_to(out, j.get<std::string>());
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            return;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            return;
        case json::value_t::number_float:
            out += format_double_str(j.get<double>());
            return;
        default:
            out += "null";
            return;
    }
}

struct Flags {
    std::string model_path;
    std::string format = "json";
    int depth = 1;
    int restarts = 4;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::string out_path;
    bool oracle = false;
    int n = -1;  // resolved per command after parsing
    std::string method = "oracle";
    std::string measure_path;
};

double pick_tol(const ModelConfig& cfg, const Flags& flags, const std::string& key,
                double fallback) {
    if (flags.tol) return *flags.tol;
    auto it = cfg.tolerances.find(key);
    if (it != cfg.tolerances.end()) return it->second;
    return fallback;
}

std::uint64_t pick_seed(const ModelConfig& cfg, const Flags& flags) {
    if (flags.seed) return *flags.seed;
    return cfg.seed.value_or(0);
}

/// The generator data for kms commands: the explicit (H, beta) of a from_H
/// potential, or H = rho^{-1} with beta = 1 so that H^{-beta} reproduces rho.
std::pair<CylinderPotential, double> generator_of(const ModelConfig& cfg) {
    if (cfg.H) return {CylinderPotential::from_weights(*cfg.H), cfg.H_beta};
    return {CylinderPotential::from_weights(reciprocal(cfg.potential.weights())), 1.0};
}

json p_vector_json(const MarkovMeasure& mu) { return json(mu.p()); }

json P_matrix_json(const MarkovMeasure& mu) {
    const int d = mu.spec().alphabet_size();
    std::vector<std::vector<double>> m;
    for (int i = 0; i < d; ++i) {
        std::vector<double> row;
        for (int c = 0; c < d; ++c) row.push_back(mu.P(i, c));
        m.push_back(std::move(row));
    }
    return matrix_to_json(m);
}

double dense_perron_radius(const TransferOperator& op) {
    const int d = op.spec().alphabet_size();
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < d; ++c) M(i, c) = op.matrix(i, c);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    double r = 0.0;
    for (int i = 0; i < d; ++i) r = std::max(r, std::abs(es.eigenvalues()[i]));
    return r;
}

json handle_spectral(const ModelConfig& cfg, const Flags& flags) {
    TransferOperator op = TransferOperator::build(cfg.potential);
    SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
    json o;
    o["lambda"] = sd.lambda;
    o["log_lambda"] = std::log(sd.lambda);
    o["phi"] = json(sd.phi.values());
    o["nu"] = json(sd.nu.weights());
    o["iterations"] = sd.iterations;
    o["phi_residual"] = sd.phi_residual;
    o["nu_residual"] = sd.nu_residual;
    o["alphabet_size"] = op.spec().alphabet_size();
    o["recoded"] = op.recoding().has_value();
    return o;
}

json handle_pressure(const ModelConfig& cfg, const Flags& flags) {
    TransferOperator op = TransferOperator::build(cfg.potential);
    SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
    json o;
    o["pressure"] = std::log(sd.lambda);
    o["lambda"] = sd.lambda;
    if (flags.oracle) {
        double r = dense_perron_radius(op);
        o["oracle"] = json{{"pressure", std::log(r)},
                           {"difference", std::abs(std::log(sd.lambda) - std::log(r))}};
    }
    return o;
}

json handle_gibbs(const ModelConfig& cfg, const Flags& flags, std::string* csv) {
    TransferOperator op = TransferOperator::build(cfg.potential);
    SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
    GibbsMeasure gm = gibbs_measure(sd, op);
    const int depth = flags.depth;
    CylinderMeasure table = gm.chain.at_depth(depth);
    WordTable words(op.spec(), depth);
    json o;
    o["lambda"] = sd.lambda;
    o["pressure"] = std::log(sd.lambda);
    o["entropy"] = entropy_oracle(gm.chain);
    o["p"] = p_vector_json(gm.chain);
    o["P"] = P_matrix_json(gm.chain);
    o["depth"] = depth;
    json names = json::array();
    for (std::size_t i = 0; i < words.size(); ++i) names.push_back(format_word(words.word(i)));
    o["words"] = names;
    o["weights"] = json(table.weights());
    if (csv) {
        std::string s = "word,weight\n";
        for (std::size_t i = 0; i < words.size(); ++i) {
            s += format_word(words.word(i));
            s += ',';
            s += format_double_str(table.weights()[i]);
            s += '\n';
        }
        *csv = std::move(s);
    }
    return o;
}

MarkovMeasure load_measure_file(const SubshiftSpec& spec, const std::string& path) {
    std::ifstream in(path);
    if (!in) config_fail("cannot open measure file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        config_fail("measure file '" + path + "': " + e.what());
    }
    const json& node = j.contains("outputs") ? j["outputs"] : j;
    if (!node.contains("p") || !node.contains("P"))
        config_fail("measure file must provide 'p' and 'P'");
    std::vector<double> p = parse_number_array(node["p"], "'p'");
    const json& Pj = node["P"];
    const int d = spec.alphabet_size();
    if (!Pj.is_array() || static_cast<int>(Pj.size()) != d)
        config_fail("'P' must be a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    std::vector<double> P(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        std::vector<double> row = parse_number_array(Pj[static_cast<std::size_t>(i)], "'P' row");
        if (static_cast<int>(row.size()) != d) config_fail("'P' rows must have " + std::to_string(d) + " entries");
        for (int c = 0; c < d; ++c) P[static_cast<std::size_t>(i) * d + c] = row[static_cast<std::size_t>(c)];
    }
    try {
        return MarkovMeasure(spec, std::move(p), std::move(P));
    } catch (const std::invalid_argument& e) {
        config_fail("invalid measure file: " + std::string(e.what()));
    }
}

json handle_entropy(const ModelConfig& cfg, const Flags& flags) {
    TransferOperator op = TransferOperator::build(cfg.potential);
    std::optional<MarkovMeasure> mu;
    if (!flags.measure_path.empty()) {
        mu = load_measure_file(op.spec(), flags.measure_path);
    } else {
        SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
        mu = gibbs_measure(sd, op).chain;
    }
    json o;
    double value;
    if (flags.method == "oracle") {
        value = entropy_oracle(*mu);
        o["method"] = "oracle";
        o["entropy"] = value;
    } else if (flags.method == "variational") {
        VariationalResult vr = entropy_variational(*mu, op.rho(), flags.depth);
        value = vr.value;
        o["method"] = "variational";
        o["entropy"] = vr.value;
        o["depth"] = vr.depth;
        o["iterations"] = vr.diagnostics.iterations;
        o["final_grad_norm"] = vr.diagnostics.final_grad_norm;
        o["evaluations"] = vr.diagnostics.evaluations;
    } else {
        config_fail("--method must be 'oracle' or 'variational'");
    }
    if (flags.oracle) {
        double h = entropy_oracle(*mu);
        o["oracle"] = h;
        o["difference"] = std::abs(value - h);
    }
    return o;
}

json handle_minmax(const ModelConfig& cfg, const Flags& flags) {
    VariationalResult vr =
        pressure_minmax(cfg.potential, flags.depth, flags.restarts, pick_seed(cfg, flags));
    json o;
    o["value"] = vr.value;
    o["depth"] = vr.depth;
    o["restarts"] = vr.diagnostics.restarts;
    o["seed"] = pick_seed(cfg, flags);
    o["max_intermediate_value"] = vr.max_intermediate_value;
    o["iterations"] = vr.diagnostics.iterations;
    o["final_grad_norm"] = vr.diagnostics.final_grad_norm;
    o["evaluations"] = vr.diagnostics.evaluations;
    o["converged"] = vr.diagnostics.converged;
    if (vr.maximizer) {
        o["p"] = p_vector_json(*vr.maximizer);
        o["P"] = P_matrix_json(*vr.maximizer);
    }
    return o;
}

json handle_bowen(const ModelConfig& cfg, const Flags& flags) {
    if (!cfg.H) config_fail("bowen-root requires a 'from_H' potential (the model must give H)");
    double tol = pick_tol(cfg, flags, "bowen", 1e-10);
    BowenResult br = bowen_root(*cfg.H, tol);
    json o;
    o["beta"] = br.beta;
    o["iterations"] = br.iterations;
    o["pressure_at_beta"] = br.pressure_at_beta;
    o["used_log_space"] = br.used_log_space;
    o["tol"] = tol;
    return o;
}

json handle_kms_measure(const ModelConfig& cfg, const Flags& flags, std::string* csv) {
    auto [Hpot, beta] = generator_of(cfg);
    CylinderPotential rho = CylinderPotential::from_H(Hpot.weights(), beta);
    TransferOperator op = TransferOperator::build(rho);
    SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
    KmsState state = KmsState::eigen(op, sd);
    const int depth = flags.depth;
    CylinderMeasure table = state.at_depth(depth);
    WordTable words(op.spec(), depth);
    json o;
    o["beta"] = beta;
    o["lambda"] = sd.lambda;
    o["depth"] = depth;
    json names = json::array();
    for (std::size_t i = 0; i < words.size(); ++i) names.push_back(format_word(words.word(i)));
    o["words"] = names;
    o["weights"] = json(table.weights());
    o["total"] = table.total();
    if (csv) {
        std::string s = "word,weight\n";
        for (std::size_t i = 0; i < words.size(); ++i) {
            s += format_word(words.word(i));
            s += ',';
            s += format_double_str(table.weights()[i]);
            s += '\n';
        }
        *csv = std::move(s);
    }
    return o;
}

json handle_kms_check(const ModelConfig& cfg, const Flags& flags) {
    auto [Hpot, beta] = generator_of(cfg);
    KmsInstance inst = make_kms_instance(Hpot, beta);
    KmsState state = kms_measure(inst);
    const SubshiftSpec& spec = inst.op.spec();
    const int n_max = flags.n;
    if (n_max < 1) config_fail("--n must be at least 1 for kms-check");
    std::vector<CylinderFunction> basis = cylinder_basis(spec, 2);

    double max_r1 = 0.0, max_r2 = 0.0, max_dis = 0.0, max_crossed = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        for (const CylinderFunction& b : basis) {
            KmsResidualPair pr = approx_proper_residual(inst, state, b, n);
            max_r1 = std::max(max_r1, pr.residual);
            max_r2 = std::max(max_r2, pr.simplified_residual);
            max_dis = std::max(max_dis, std::abs(pr.residual - pr.simplified_residual));
        }
    }
    for (const CylinderFunction& b : basis)
        max_crossed = std::max(max_crossed, crossed_product_residual(inst, state, b));

    double cocycle_err = 0.0;
    for (int n = 0; n <= std::min(n_max, 5); ++n) {
        CylinderFunction prod = lambda_n(inst, n);
        CylinderFunction closed = lambda_n_closed(inst, n);
        double scale = std::max(1.0, closed.sup_norm());
        cocycle_err = std::max(cocycle_err, sup_distance(prod, closed) / scale);
    }

    json o;
    o["lambda"] = inst.spectral.lambda;
    o["lambda_defect"] = std::abs(1.0 - inst.spectral.lambda);
    o["beta"] = beta;
    o["n"] = n_max;
    o["basis_size"] = basis.size();
    o["max_residual"] = max_r1;
    o["max_simplified_residual"] = max_r2;
    o["max_route_disagreement"] = max_dis;
    o["crossed_product_max_residual"] = max_crossed;
    o["cocycle_max_error"] = cocycle_err;
    return o;
}

json handle_convergence(const ModelConfig& cfg, const Flags& flags, std::string* csv) {
    TransferOperator op = TransferOperator::build(cfg.potential);
    SpectralData sd = rpf_solve(op, pick_tol(cfg, flags, "spectral", 1e-12));
    TransferOperator op_t = normalize(op, sd);
    std::vector<int> w{0};
    CylinderFunction a = CylinderFunction::indicator(op.spec(), w);
    const int steps = flags.n;
    if (steps < 1) config_fail("--n must be at least 1 for convergence");
    ConvergenceReport rep = convergence_report(op_t, a, steps);
    json o;
    o["steps"] = steps;
    o["gap"] = rep.gap;
    o["mean"] = rep.mean_value;
    o["rate_constant"] = rep.rate_constant;
    o["sup_distances"] = json(rep.sup_distances);
    if (csv) {
        std::string s = "n,sup_distance\n";
        for (std::size_t i = 0; i < rep.sup_distances.size(); ++i) {
            s += std::to_string(i);
            s += ',';
            s += format_double_str(rep.sup_distances[i]);
            s += '\n';
        }
        *csv = std::move(s);
    }
    return o;
}

void flatten_text(std::string& out, const std::string& prefix, const json& j) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten_text(out, prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
        return;
    }
    out += prefix;
    out += ": ";
    std::string tmp;
    dump_rec(tmp, j, 0);
    out += tmp;
    out += '\n';
}

int emit_error(const std::string& cmd, const std::string& code, const std::string& message) {
    json err;
    if (!cmd.empty()) err["command"] = cmd;
    err["error"] = json{{"code", code}, {"message", message}};
    std::fputs(dump_json(err).c_str(), stdout);
    std::fputc('\n', stdout);
    return code == "config" ? 2 : 3;
}

} // namespace

ModelConfig ModelConfig::from_json(const json& j) {
    if (!j.is_object()) config_fail("model must be a JSON object");
    check_fields(j, "model", {"alphabet_size", "transitions", "potential", "seed", "tolerances"});
    int d = as_int(require_field(j, "alphabet_size", "model"), "'alphabet_size'");
    if (d < 1) config_fail("'alphabet_size' must be at least 1");
    auto rows = parse_transitions(require_field(j, "transitions", "model"), d);
    SubshiftSpec spec = [&]() {
        try {
            return SubshiftSpec(d, rows);
        } catch (const std::invalid_argument& e) {
            config_fail(std::string("invalid transitions: ") + e.what());
        }
    }();
    ParsedPotential pp = parse_potential(spec, require_field(j, "potential", "model"));

    ModelConfig cfg(spec, std::move(pp.pot));
    cfg.H = std::move(pp.H);
    cfg.H_beta = pp.beta;
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned() && !it->is_number_integer())
            config_fail("'seed' must be a nonnegative integer");
        if (it->is_number_integer() && it->get<std::int64_t>() < 0)
            config_fail("'seed' must be a nonnegative integer");
        cfg.seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("tolerances"); it != j.end()) {
        if (!it->is_object()) config_fail("'tolerances' must be an object");
        check_fields(*it, "tolerances", {"spectral", "entropy", "minmax", "bowen"});
        for (auto t = it->begin(); t != it->end(); ++t) {
            double v = as_number(t.value(), "'tolerances." + t.key() + "'");
            if (!(v > 0.0)) config_fail("'tolerances." + t.key() + "' must be positive");
            cfg.tolerances[t.key()] = v;
        }
    }

    json canon;
    canon["alphabet_size"] = d;
    json trows = json::array();
    for (const auto& r : rows) trows.push_back(r);
    canon["transitions"] = trows;
    canon["potential"] = pp.canonical;
    if (cfg.seed) canon["seed"] = *cfg.seed;
    if (!cfg.tolerances.empty()) {
        json t;
        for (const auto& [k, v] : cfg.tolerances) t[k] = v;
        canon["tolerances"] = t;
    }
    cfg.canonical = std::move(canon);
    return cfg;
}

ModelConfig ModelConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_fail("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        config_fail("model file '" + path + "' line " + std::to_string(line) + ": " + e.what());
    }
    return from_json(j);
}

std::string dump_json(const json& j) {
    std::string out;
    dump_rec(out, j, 0);
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int run_main(int argc, char** argv) {
    CLI::App app{"thermoformal: transfer operators, Gibbs states, and KMS conditions on subshifts of finite type"};
    app.require_subcommand(1);
    Flags flags;
    static const char* kCommands[] = {"spectral",   "pressure",  "gibbs",
                                      "entropy",    "minmax",    "bowen-root",
                                      "kms-measure", "kms-check", "convergence"};
    static const char* kDescriptions[] = {
        "Perron eigendata (lambda, phi, nu) of the transfer operator",
        "Topological pressure log lambda",
        "Gibbs/equilibrium measure and its cylinder weights",
        "Entropy of a Markov measure (chain oracle or variational inf-formula)",
        "Min-max pressure over Markov measures and positive test functions",
        "Root of beta -> P(-beta log H) (requires a from_H model)",
        "Eigen-measure KMS state weights",
        "KMS condition residuals for the constructed state",
        "Iterate convergence of the normalized operator toward the Gibbs mean"};
    for (std::size_t c = 0; c < 9; ++c) {
        CLI::App* sc = app.add_subcommand(kCommands[c], kDescriptions[c]);
        sc->add_option("--model", flags.model_path, "Path to the JSON model file")->required();
        sc->add_option("--format", flags.format, "Output format: json, csv, or text")
            ->check(CLI::IsMember({"json", "csv", "text"}));
        sc->add_option("--depth", flags.depth, "Cylinder depth (where applicable)");
        sc->add_option("--restarts", flags.restarts, "Optimizer restarts (minmax)");
        sc->add_option("--seed", flags.seed, "Seed override for randomized restarts");
        sc->add_option("--tol", flags.tol, "Tolerance override");
        sc->add_option("--out", flags.out_path, "Persist the JSON envelope to this path");
        sc->add_flag("--oracle", flags.oracle, "Also run the brute-force oracle and report the difference");
        sc->add_option("--n", flags.n, "Iteration/level count (kms-check, convergence)");
        sc->add_option("--method", flags.method, "Entropy method: oracle or variational");
        sc->add_option("--measure", flags.measure_path, "Measure file (entropy round-trip)");
    }

    std::string cmd;
    try {
        app.parse(argc, argv);
        for (std::size_t c = 0; c < 9; ++c)
            if (app.get_subcommand(kCommands[c])->parsed()) cmd = kCommands[c];
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("", "config", e.what());
    }
    if (flags.n < 0) flags.n = (cmd == "kms-check") ? 3 : 20;
    if (flags.depth < 1) return emit_error(cmd, "config", "--depth must be at least 1");

    try {
        const auto t0 = std::chrono::steady_clock::now();
        ModelConfig cfg = ModelConfig::load(flags.model_path);

        json outputs;
        std::string csv;
        std::string* csv_ptr = (flags.format == "csv") ? &csv : nullptr;
        if (cmd == "spectral") outputs = handle_spectral(cfg, flags);
        else if (cmd == "pressure") outputs = handle_pressure(cfg, flags);
        else if (cmd == "gibbs") outputs = handle_gibbs(cfg, flags, csv_ptr);
        else if (cmd == "entropy") outputs = handle_entropy(cfg, flags);
        else if (cmd == "minmax") outputs = handle_minmax(cfg, flags);
        else if (cmd == "bowen-root") outputs = handle_bowen(cfg, flags);
        else if (cmd == "kms-measure") outputs = handle_kms_measure(cfg, flags, csv_ptr);
        else if (cmd == "kms-check") outputs = handle_kms_check(cfg, flags);
        else if (cmd == "convergence") outputs = handle_convergence(cfg, flags, csv_ptr);
        if (csv_ptr && csv.empty())
            config_fail("--format csv is only available for tabular outputs (gibbs, kms-measure, convergence)");

        json flagsj;
        flagsj["format"] = flags.format;
        flagsj["depth"] = flags.depth;
        flagsj["restarts"] = flags.restarts;
        flagsj["seed"] = pick_seed(cfg, flags);
        if (flags.tol) flagsj["tol"] = *flags.tol;
        flagsj["oracle"] = flags.oracle;
        flagsj["n"] = flags.n;
        flagsj["method"] = flags.method;
        const std::string canon_text = dump_json(cfg.canonical) + "\n" + cmd + "\n" + dump_json(flagsj);
        char digest[32];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canon_text)));

        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        json env;
        env["command"] = cmd;
        env["digest"] = std::string(digest);
        env["outputs"] = outputs;
        env["diagnostics"] = flagsj;
        env["wall_time_ms"] = ms;

        if (!flags.out_path.empty()) {
            std::ofstream out(flags.out_path);
            if (!out) config_fail("cannot write to '" + flags.out_path + "'");
            out << dump_json(env) << "\n";
        }
        if (flags.format == "csv") {
            std::fputs(csv.c_str(), stdout);
        } else if (flags.format == "text") {
            std::string text;
            text += "command: " + cmd + "\n";
            text += "digest: " + std::string(digest) + "\n";
            flatten_text(text, "outputs", outputs);
            text += "wall_time_ms: " + format_double_str(ms) + "\n";
            std::fputs(text.c_str(), stdout);
        } else {
            std::fputs(dump_json(env).c_str(), stdout);
            std::fputc('\n', stdout);
        }
        return 0;
    } catch (const ConfigError& e) {
        return emit_error(cmd, "config", e.what());
    } catch (const Error& e) {
        return emit_error(cmd, e.code(), e.what());
    } catch (const json::exception& e) {
        return emit_error(cmd, "config", e.what());
    } catch (const std::invalid_argument& e) {
        return emit_error(cmd, "config", e.what());
    } catch (const std::exception& e) {
        return emit_error(cmd, "internal", e.what());
    }
}

} // namespace thermoformal::cli
