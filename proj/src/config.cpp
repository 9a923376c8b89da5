#include "tsgame/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace tsgame {

namespace {

struct SuiteName {
    Suite suite;
    const char* name;
};

constexpr SuiteName kSuites[] = {
    {Suite::RegretBaseline, "regret_baseline"},
    {Suite::LongHorizon, "long_horizon"},
    {Suite::VsCe, "vs_ce"},
    {Suite::VsBlind, "vs_blind"},
    {Suite::DimSweep, "dim_sweep"},
    {Suite::PriorRobustness, "prior_robustness"},
    {Suite::AblationMu, "ablation_mu"},
    {Suite::AblationSigmaScale, "ablation_sigma_scale"},
    {Suite::AblationSigmaStructure, "ablation_sigma_structure"},
    {Suite::NashConvergence, "nash_convergence"},
    {Suite::Validate, "validate"},
};

}  // namespace

std::string to_string(Suite suite) {
    for (const auto& s : kSuites) {
        if (s.suite == suite) return s.name;
    }
    return "regret_baseline";
}

Suite parse_suite(const std::string& name) {
    for (const auto& s : kSuites) {
        if (name == s.name) return s.suite;
    }
    throw std::invalid_argument("unknown suite '" + name + "'");
}

bool is_slow(Suite suite) { return suite == Suite::LongHorizon || suite == Suite::NashConvergence; }

bool is_strict(Suite suite) { return suite == Suite::Validate || suite == Suite::RegretBaseline; }

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& raw) {
    const std::string s = trim(raw);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ",";
        out += fmt(v[k]);
    }
    return out;
}

std::string str(const std::string& s) { return s; }
std::string num(double v) { return format_double(v); }
std::string unum(std::uint64_t v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string to_string(PriorMean m) {
    switch (m) {
        case PriorMean::Zero: return "zero";
        case PriorMean::ATrue: return "a_true";
        case PriorMean::Constant: return "constant";
    }
    return "zero";
}

PriorMean parse_prior_mean(const std::string& s) {
    if (s == "zero") return PriorMean::Zero;
    if (s == "a_true") return PriorMean::ATrue;
    if (s == "constant") return PriorMean::Constant;
    throw std::invalid_argument("unknown prior mean '" + s + "' (zero, a_true, constant)");
}

std::string to_string(PriorCov c) {
    switch (c) {
        case PriorCov::Isotropic: return "isotropic";
        case PriorCov::Correlated: return "correlated";
        case PriorCov::RankOne: return "rank_one";
    }
    return "isotropic";
}

PriorCov parse_prior_cov(const std::string& s) {
    if (s == "isotropic") return PriorCov::Isotropic;
    if (s == "correlated") return PriorCov::Correlated;
    if (s == "rank_one") return PriorCov::RankOne;
    throw std::invalid_argument("unknown prior covariance '" + s + "' (isotropic, correlated, rank_one)");
}

namespace {

using Cfg = ExperimentConfig;

struct Field {
    const char* section;
    const char* key;
    std::function<std::string(const Cfg&)> get;
    std::function<void(Cfg&, const std::string&)> set;
    bool runtime = false;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"experiment", "suite", [](const Cfg& c) { return to_string(c.suite); },
         [](Cfg& c, const std::string& v) { c.suite = parse_suite(trim(v)); }},
        {"experiment", "out", [](const Cfg& c) { return c.out.string(); },
         [](Cfg& c, const std::string& v) { c.out = trim(v); }, true},

        {"game", "n_players", [](const Cfg& c) { return unum(c.game.n_players); },
         [](Cfg& c, const std::string& v) { c.game.n_players = to_u64(v); }},
        {"game", "dim", [](const Cfg& c) { return unum(c.game.dim); },
         [](Cfg& c, const std::string& v) { c.game.dim = to_u64(v); }},
        {"game", "a_diag", [](const Cfg& c) { return num(c.game.a_diag); },
         [](Cfg& c, const std::string& v) { c.game.a_diag = to_double(v); }},
        {"game", "sigma_base", [](const Cfg& c) { return num(c.game.sigma_base); },
         [](Cfg& c, const std::string& v) { c.game.sigma_base = to_double(v); }},
        {"game", "sigma_noise", [](const Cfg& c) { return num(c.game.sigma_noise); },
         [](Cfg& c, const std::string& v) { c.game.sigma_noise = to_double(v); }},
        {"game", "epsilon", [](const Cfg& c) { return num(c.game.epsilon); },
         [](Cfg& c, const std::string& v) { c.game.epsilon = to_double(v); }},
        {"game", "epsilon_reference_dim", [](const Cfg& c) { return num(c.game.epsilon_reference_dim); },
         [](Cfg& c, const std::string& v) { c.game.epsilon_reference_dim = to_double(v); }},
        {"game", "xbar_scale", [](const Cfg& c) { return num(c.game.xbar_scale); },
         [](Cfg& c, const std::string& v) { c.game.xbar_scale = to_double(v); }},
        {"game", "x0_offset", [](const Cfg& c) { return num(c.game.x0_offset); },
         [](Cfg& c, const std::string& v) { c.game.x0_offset = to_double(v); }},
        {"game", "tracked_player", [](const Cfg& c) { return unum(c.game.tracked_player); },
         [](Cfg& c, const std::string& v) { c.game.tracked_player = to_u64(v); }},
        {"game", "spec_seed", [](const Cfg& c) { return unum(c.game.spec_seed); },
         [](Cfg& c, const std::string& v) { c.game.spec_seed = to_u64(v); }},

        {"prior", "mean", [](const Cfg& c) { return to_string(c.prior.mean); },
         [](Cfg& c, const std::string& v) { c.prior.mean = parse_prior_mean(trim(v)); }},
        {"prior", "mean_value", [](const Cfg& c) { return num(c.prior.mean_value); },
         [](Cfg& c, const std::string& v) { c.prior.mean_value = to_double(v); }},
        {"prior", "cov", [](const Cfg& c) { return to_string(c.prior.cov); },
         [](Cfg& c, const std::string& v) { c.prior.cov = parse_prior_cov(trim(v)); }},
        {"prior", "scale", [](const Cfg& c) { return num(c.prior.scale); },
         [](Cfg& c, const std::string& v) { c.prior.scale = to_double(v); }},
        {"prior", "correlated_diag", [](const Cfg& c) { return num(c.prior.correlated_diag); },
         [](Cfg& c, const std::string& v) { c.prior.correlated_diag = to_double(v); }},
        {"prior", "correlated_offdiag", [](const Cfg& c) { return num(c.prior.correlated_offdiag); },
         [](Cfg& c, const std::string& v) { c.prior.correlated_offdiag = to_double(v); }},
        {"prior", "rank_one_scale", [](const Cfg& c) { return num(c.prior.rank_one_scale); },
         [](Cfg& c, const std::string& v) { c.prior.rank_one_scale = to_double(v); }},
        {"prior", "family", [](const Cfg& c) { return to_string(c.prior.family.kind); },
         [](Cfg& c, const std::string& v) { c.prior.family.kind = parse_prior_kind(trim(v)); }},
        {"prior", "dof", [](const Cfg& c) { return num(c.prior.family.dof); },
         [](Cfg& c, const std::string& v) { c.prior.family.dof = to_double(v); }},
        {"prior", "beta_a", [](const Cfg& c) { return num(c.prior.family.beta_a); },
         [](Cfg& c, const std::string& v) { c.prior.family.beta_a = to_double(v); }},
        {"prior", "beta_b", [](const Cfg& c) { return num(c.prior.family.beta_b); },
         [](Cfg& c, const std::string& v) { c.prior.family.beta_b = to_double(v); }},
        {"prior", "truncated", [](const Cfg& c) { return flag(c.prior.family.truncated); },
         [](Cfg& c, const std::string& v) { c.prior.family.truncated = to_bool(v); }},

        {"truncation", "max_norm", [](const Cfg& c) { return num(c.truncation.max_norm); },
         [](Cfg& c, const std::string& v) { c.truncation.max_norm = to_double(v); }},
        {"truncation", "decay_margin", [](const Cfg& c) { return num(c.truncation.decay_margin); },
         [](Cfg& c, const std::string& v) { c.truncation.decay_margin = to_double(v); }},
        {"truncation", "max_rejects", [](const Cfg& c) { return unum(static_cast<std::uint64_t>(c.truncation.max_rejects)); },
         [](Cfg& c, const std::string& v) { c.truncation.max_rejects = static_cast<int>(to_u64(v)); }},

        {"sim", "dt", [](const Cfg& c) { return num(c.sim.dt); },
         [](Cfg& c, const std::string& v) { c.sim.dt = to_double(v); }},
        {"sim", "steps", [](const Cfg& c) { return unum(c.sim.steps); },
         [](Cfg& c, const std::string& v) { c.sim.steps = to_u64(v); }},
        {"sim", "paths", [](const Cfg& c) { return unum(c.sim.paths); },
         [](Cfg& c, const std::string& v) { c.sim.paths = to_u64(v); }},
        {"sim", "seed", [](const Cfg& c) { return unum(c.sim.seed); },
         [](Cfg& c, const std::string& v) { c.sim.seed = to_u64(v); }},
        {"sim", "record_every", [](const Cfg& c) { return unum(c.sim.record_every); },
         [](Cfg& c, const std::string& v) { c.sim.record_every = to_u64(v); }},
        {"sim", "abort_norm", [](const Cfg& c) { return num(c.sim.abort_norm); },
         [](Cfg& c, const std::string& v) { c.sim.abort_norm = to_double(v); }},
        {"sim", "threads", [](const Cfg& c) { return unum(c.threads); },
         [](Cfg& c, const std::string& v) { c.threads = to_u64(v); }, true},

        {"policy", "ce_cadence", [](const Cfg& c) { return num(c.policy.ce_cadence); },
         [](Cfg& c, const std::string& v) { c.policy.ce_cadence = to_double(v); }},

        {"output", "band_scale", [](const Cfg& c) { return num(c.band_scale); },
         [](Cfg& c, const std::string& v) { c.band_scale = to_double(v); }},

        {"sweep", "path_counts", [](const Cfg& c) { return join(c.sweep.path_counts, unum); },
         [](Cfg& c, const std::string& v) {
             c.sweep.path_counts.clear();
             for (const auto& s : split_list(v)) c.sweep.path_counts.push_back(to_u64(s));
         }},
        {"sweep", "dims", [](const Cfg& c) { return join(c.sweep.dims, unum); },
         [](Cfg& c, const std::string& v) {
             c.sweep.dims.clear();
             for (const auto& s : split_list(v)) c.sweep.dims.push_back(to_u64(s));
         }},
        {"sweep", "families", [](const Cfg& c) { return join(c.sweep.families, str); },
         [](Cfg& c, const std::string& v) { c.sweep.families = split_list(v); }},
        {"sweep", "mean_variants", [](const Cfg& c) { return join(c.sweep.mean_variants, str); },
         [](Cfg& c, const std::string& v) { c.sweep.mean_variants = split_list(v); }},
        {"sweep", "scales", [](const Cfg& c) { return join(c.sweep.scales, num); },
         [](Cfg& c, const std::string& v) {
             c.sweep.scales.clear();
             for (const auto& s : split_list(v)) c.sweep.scales.push_back(to_double(s));
         }},
        {"sweep", "structures", [](const Cfg& c) { return join(c.sweep.structures, str); },
         [](Cfg& c, const std::string& v) { c.sweep.structures = split_list(v); }},
    };
    return table;
}

}  // namespace

void apply_suite_defaults(ExperimentConfig& cfg) {
    switch (cfg.suite) {
        case Suite::RegretBaseline: cfg.sim.paths = 100; break;
        case Suite::LongHorizon:
            cfg.sim.dt = 0.01;
            cfg.sim.steps = 100000;
            cfg.sim.paths = 10;
            cfg.sim.record_every = 100;
            break;
        case Suite::NashConvergence:
            cfg.sim.steps = 200000;
            cfg.sim.paths = 10;
            cfg.sim.record_every = 100;
            break;
        case Suite::DimSweep: cfg.sim.paths = 20; break;
        case Suite::AblationSigmaScale: cfg.prior.mean = PriorMean::Constant; break;
        case Suite::AblationSigmaStructure:
            cfg.prior.mean = PriorMean::Constant;
            cfg.prior.scale = 0.3;
            break;
        case Suite::Validate:
            cfg.sim.steps = 1000;
            cfg.sim.paths = 4;
            break;
        default: break;
    }
}

std::vector<std::string> check_config(const ExperimentConfig& c) {
    std::vector<std::string> v;
    auto need = [&v](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    need(c.game.n_players >= 1, "[game] n_players must be at least 1");
    need(c.game.dim >= 1, "[game] dim must be at least 1");
    need(c.game.tracked_player < c.game.n_players, "[game] tracked_player must be below n_players");
    need(c.game.sigma_base > 0, "[game] sigma_base must be positive");
    need(c.game.sigma_noise >= 0, "[game] sigma_noise must be non-negative");
    need(c.game.epsilon >= 0, "[game] epsilon must be non-negative");
    need(c.game.epsilon_reference_dim > 0, "[game] epsilon_reference_dim must be positive");
    need(c.prior.scale > 0, "[prior] scale must be positive");
    need(c.prior.correlated_diag > 0, "[prior] correlated_diag must be positive");
    need(c.prior.rank_one_scale >= 0, "[prior] rank_one_scale must be non-negative");
    need(c.prior.family.dof > 2, "[prior] dof must exceed 2");
    need(c.prior.family.beta_a > 0 && c.prior.family.beta_b > 0, "[prior] beta shapes must be positive");
    need(c.truncation.max_norm > 0, "[truncation] max_norm must be positive");
    need(c.truncation.decay_margin > 0, "[truncation] decay_margin must be positive");
    need(c.truncation.max_rejects >= 1, "[truncation] max_rejects must be at least 1");
    need(c.sim.dt > 0, "[sim] dt must be positive");
    need(c.sim.steps >= 1, "[sim] steps must be at least 1");
    need(c.sim.paths >= 1, "[sim] paths must be at least 1");
    need(c.sim.record_every >= 1, "[sim] record_every must be at least 1");
    need(c.sim.abort_norm > 0, "[sim] abort_norm must be positive");
    need(c.threads >= 1, "[sim] threads must be at least 1");
    need(c.policy.ce_cadence > 0, "[policy] ce_cadence must be positive");
    need(c.band_scale >= 0, "[output] band_scale must be non-negative");
    need(!c.sweep.path_counts.empty(), "[sweep] path_counts must not be empty");
    for (auto n : c.sweep.path_counts) need(n >= 1, "[sweep] path_counts entries must be positive");
    need(!c.sweep.dims.empty(), "[sweep] dims must not be empty");
    for (auto d : c.sweep.dims) need(d >= 1, "[sweep] dims entries must be positive");
    for (const auto& f : c.sweep.families) {
        try {
            parse_prior_kind(f);
        } catch (const std::exception& e) {
            v.push_back(std::string("[sweep] families: ") + e.what());
        }
    }
    for (const auto& m : c.sweep.mean_variants) {
        try {
            parse_prior_mean(m);
        } catch (const std::exception& e) {
            v.push_back(std::string("[sweep] mean_variants: ") + e.what());
        }
    }
    for (auto s : c.sweep.scales) need(s > 0, "[sweep] scales entries must be positive");
    for (const auto& s : c.sweep.structures) {
        try {
            parse_prior_cov(s);
        } catch (const std::exception& e) {
            v.push_back(std::string("[sweep] structures: ") + e.what());
        }
    }
    return v;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin, std::optional<Suite> suite_override) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentConfig cfg;
    std::vector<std::string> errors;
    std::set<std::pair<std::string, std::string>> known;
    for (const auto& f : fields()) known.emplace(f.section, f.key);

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            errors.push_back("key '" + section + "' outside of any section");
            continue;
        }
        for (const auto& [key, value] : body) {
            if (!known.count({section, key})) errors.push_back("unknown key [" + section + "] " + key);
        }
    }
    const auto suite = tree.get_optional<std::string>("experiment.suite");
    if (suite_override) {
        cfg.suite = *suite_override;
        apply_suite_defaults(cfg);
    } else if (!suite) {
        errors.push_back("missing required key [experiment] suite");
    } else {
        try {
            cfg.suite = parse_suite(trim(*suite));
            apply_suite_defaults(cfg);
        } catch (const std::exception& e) {
            errors.push_back(std::string("[experiment] suite: ") + e.what());
        }
    }
    for (const auto& f : fields()) {
        if (std::string(f.section) == "experiment" && std::string(f.key) == "suite") continue;
        const auto value = tree.get_optional<std::string>(pt::ptree::path_type(std::string(f.section) + "." + f.key));
        if (!value) continue;
        try {
            f.set(cfg, *value);
        } catch (const std::exception& e) {
            errors.push_back("[" + std::string(f.section) + "] " + f.key + ": " + e.what());
        }
    }
    for (auto& v : check_config(cfg)) errors.push_back(std::move(v));
    if (!errors.empty()) {
        std::string msg = origin + ": invalid configuration";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Suite> suite_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), suite_override);
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.runtime) continue;
        if (section != f.section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::pair<Vec, Mat> build_prior(const PriorSection& prior, const Mat& a_true) {
    const Eigen::Index n = a_true.size();
    Vec mu;
    switch (prior.mean) {
        case PriorMean::Zero: mu = Vec::Zero(n); break;
        case PriorMean::ATrue: mu = vectorize(a_true); break;
        case PriorMean::Constant: mu = Vec::Constant(n, prior.mean_value); break;
    }
    Mat cov;
    const double s2 = prior.scale * prior.scale;
    switch (prior.cov) {
        case PriorCov::Isotropic: cov = s2 * Mat::Identity(n, n); break;
        case PriorCov::Correlated:
            cov = Mat::Constant(n, n, prior.correlated_offdiag);
            cov.diagonal().setConstant(prior.correlated_diag);
            break;
        case PriorCov::RankOne: {
            const Vec v = Vec::Ones(n);
            cov = s2 * Mat::Identity(n, n) + prior.rank_one_scale * prior.rank_one_scale * v * v.transpose();
            break;
        }
    }
    if (!is_positive_definite(cov)) throw ConfigError("[prior] covariance is not positive definite");
    return {mu, cov};
}

GameSpec build_spec(const ExperimentConfig& cfg) {
    BaselineParams bp;
    bp.n_players = cfg.game.n_players;
    bp.dim = cfg.game.dim;
    bp.a_diag = cfg.game.a_diag;
    bp.sigma_base = cfg.game.sigma_base;
    bp.sigma_noise = cfg.game.sigma_noise;
    bp.epsilon = cfg.game.epsilon * std::min(1.0, cfg.game.epsilon_reference_dim / static_cast<double>(cfg.game.dim));
    bp.xbar_scale = cfg.game.xbar_scale;
    bp.x0_offset = cfg.game.x0_offset;
    bp.truncation = cfg.truncation;
    auto rng = make_stream(cfg.game.spec_seed, 0, 0, StreamPurpose::Spec);
    GameSpec spec = make_baseline_spec(bp, rng);
    const auto [mu, cov] = build_prior(cfg.prior, spec.a_true);
    set_prior(spec, mu, cov);
    return spec;
}

SimConfig sim_config(const ExperimentConfig& cfg) {
    SimConfig s;
    s.dt = cfg.sim.dt;
    s.steps = cfg.sim.steps;
    s.n_paths = cfg.sim.paths;
    s.seed = cfg.sim.seed;
    s.record_every = cfg.sim.record_every;
    s.players = {cfg.game.tracked_player};
    s.threads = cfg.threads;
    s.abort_norm = cfg.sim.abort_norm;
    return s;
}

}  // namespace tsgame
