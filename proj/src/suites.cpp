#include "tsgame/suites.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace tsgame {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<const RunRecord*> ArmRun::completed() const {
    std::vector<const RunRecord*> out;
    for (const auto& r : records) {
        if (!r.aborted) out.push_back(&r);
    }
    return out;
}

std::size_t ArmRun::aborted() const { return records.size() - completed().size(); }

ArmRun run_arm(const Arm& arm) {
    ArmRun run{arm, equilibrium(arm.spec, arm.spec.a_true), {}};
    run.records = run_paths(arm.spec, {arm.policy}, arm.sim, arm.coupled);
    return run;
}

namespace {

std::size_t tracked(const ArmRun& run) { return run.arm.sim.players.front(); }

Arm base_arm(const ExperimentConfig& cfg, std::string label, PolicyKind kind = PolicyKind::TS) {
    Arm a;
    a.label = std::move(label);
    a.spec = build_spec(cfg);
    a.policy.kind = kind;
    a.policy.ce_cadence = cfg.policy.ce_cadence;
    a.policy.prior = cfg.prior.family;
    a.sim = sim_config(cfg);
    return a;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ArmSeries arm_series(const ArmRun& run) {
    ArmSeries s;
    for (const RunRecord* rec : run.completed()) {
        const auto rs = regret_series(*rec, rec->trace_for(tracked(run)), run.arm.spec, run.eq_true);
        if (s.times.size() == 0) s.times = rs.times;
        s.cumulative.push_back(rs.cumulative);
        s.normalized.push_back(rs.normalized);
        s.dim_normalized.push_back(rs.dim_normalized);
    }
    return s;
}

std::vector<Arm> suite_arms(const ExperimentConfig& cfg) {
    std::vector<Arm> arms;
    switch (cfg.suite) {
        case Suite::RegretBaseline: {
            Arm a = base_arm(cfg, "ts");
            a.sim.n_paths = *std::max_element(cfg.sweep.path_counts.begin(), cfg.sweep.path_counts.end());
            arms.push_back(std::move(a));
            break;
        }
        case Suite::LongHorizon: arms.push_back(base_arm(cfg, "ts")); break;
        case Suite::VsCe:
            arms.push_back(base_arm(cfg, "ts"));
            arms.push_back(base_arm(cfg, "ce", PolicyKind::CE));
            break;
        case Suite::VsBlind:
            arms.push_back(base_arm(cfg, "ts"));
            arms.push_back(base_arm(cfg, "ce", PolicyKind::CE));
            arms.push_back(base_arm(cfg, "blind", PolicyKind::Blind));
            break;
        case Suite::DimSweep:
            for (auto d : cfg.sweep.dims) {
                ExperimentConfig c = cfg;
                c.game.dim = d;
                arms.push_back(base_arm(c, "d" + std::to_string(d)));
            }
            break;
        case Suite::PriorRobustness:
            for (const auto& fam : cfg.sweep.families) {
                for (bool truncated : {true, false}) {
                    ExperimentConfig c = cfg;
                    c.prior.family.kind = parse_prior_kind(fam);
                    c.prior.family.truncated = truncated;
                    arms.push_back(base_arm(c, fam + (truncated ? "_truncated" : "_untruncated")));
                }
            }
            break;
        case Suite::AblationMu:
            for (const auto& m : cfg.sweep.mean_variants) {
                ExperimentConfig c = cfg;
                c.prior.mean = parse_prior_mean(m);
                arms.push_back(base_arm(c, "mu_" + m));
            }
            break;
        case Suite::AblationSigmaScale:
            for (double s : cfg.sweep.scales) {
                ExperimentConfig c = cfg;
                c.prior.cov = PriorCov::Isotropic;
                c.prior.scale = s;
                arms.push_back(base_arm(c, "s0_" + format_double(s)));
            }
            break;
        case Suite::AblationSigmaStructure:
            for (const auto& st : cfg.sweep.structures) {
                ExperimentConfig c = cfg;
                c.prior.cov = parse_prior_cov(st);
                arms.push_back(base_arm(c, st));
            }
            break;
        case Suite::NashConvergence: {
            Arm a = base_arm(cfg, "ts");
            a.coupled = true;
            arms.push_back(std::move(a));
            break;
        }
        case Suite::Validate: arms.push_back(base_arm(cfg, "ts")); break;
    }
    return arms;
}

CsvTable regret_table(const ArmSeries& s, double band_scale) {
    CsvTable t(s.times);
    auto add = [&](const std::string& q, const std::vector<Vec>& series) {
        const Band b = aggregate(series, band_scale);
        t.add("mean_" + q, b.mean);
        t.add("std_" + q, b.std);
        t.add("lower_" + q, b.lower);
        t.add("upper_" + q, b.upper);
    };
    add("regret", s.cumulative);
    add("normalized", s.normalized);
    add("dim_normalized", s.dim_normalized);
    return t;
}

namespace {

struct Writer {
    fs::path dir;
    std::size_t every;
    std::vector<fs::path> files;

    void csv(const std::string& name, const CsvTable& t) {
        t.write(dir / name, every);
        files.push_back(name);
    }
    void svg(const std::string& name, const PlotSpec& p) {
        emit_svg(dir / name, p);
        files.push_back(name);
    }
    void text(const std::string& name, const std::string& body) {
        write_text(dir / name, body);
        files.push_back(name);
    }
};

/// Keeps every `every`-th grid point plus the last, so SVGs stay small.
PlotSeries thinned(std::string label, const Vec& x, const Vec& y, const Vec& lo, const Vec& hi, std::size_t every) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (static_cast<std::size_t>(k) % every == 0 || k + 1 == x.size()) keep.push_back(k);
    }
    auto pick = [&](const Vec& v) {
        if (v.size() == 0) return Vec();
        Vec out(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) out(static_cast<Eigen::Index>(j)) = v(keep[j]);
        return out;
    };
    return PlotSeries{std::move(label), pick(x), pick(y), pick(lo), pick(hi), false};
}

PlotSeries band_series(const std::string& label, const Vec& x, const Band& b, std::size_t every) {
    return thinned(label, x, b.mean, b.lower, b.upper, every);
}

CsvTable paths_table(const ArmSeries& s) {
    CsvTable t(s.times);
    for (std::size_t p = 0; p < s.cumulative.size(); ++p) t.add("path_" + std::to_string(p), s.cumulative[p]);
    return t;
}

json arm_manifest(const ArmRun& run, double horizon) {
    json j;
    j["label"] = run.arm.label;
    j["policy"] = to_string(run.arm.policy.kind);
    j["prior_family"] = to_string(run.arm.policy.prior.kind);
    j["prior_truncated"] = run.arm.policy.prior.truncated;
    j["dim"] = run.arm.spec.dim;
    j["paths"] = run.records.size();
    j["aborted"] = run.aborted();
    json reasons = json::array();
    for (const auto& r : run.records) {
        if (r.aborted) reasons.push_back({{"path", r.path}, {"step", r.abort_step}, {"reason", r.abort_reason}});
    }
    j["aborts"] = reasons;
    const auto done = run.completed();
    double episodes = 0, fallbacks = 0, rejects = 0, macro = 0, failures = 0, final_r = 0;
    for (const RunRecord* rec : done) {
        const auto& tr = rec->trace_for(tracked(run));
        episodes += static_cast<double>(episode_count(tr, horizon, rec->dt));
        for (const auto& s : tr.segments) {
            fallbacks += s.fallback ? 1 : 0;
            rejects += s.rejects;
        }
        macro += static_cast<double>(tr.macro_boundaries.size());
        failures += tr.kind == PolicyKind::CE ? tr.ce_failures : 0;
        final_r += cumulative(tr.regret_increments)(static_cast<Eigen::Index>(rec->steps));
    }
    const double n = std::max<double>(1.0, static_cast<double>(done.size()));
    j["mean_episodes"] = episodes / n;
    j["mean_sampling_fallbacks"] = fallbacks / n;
    j["mean_rejected_draws"] = rejects / n;
    j["mean_macro_boundaries"] = macro / n;
    j["mean_ce_failures"] = failures / n;
    j["mean_final_regret"] = done.empty() ? json(nullptr) : json(final_r / n);
    return j;
}

/// c * shape(t) matched to `target` at the final time; NaN before t = 3.
Vec reference_curve(const Vec& t, double target, const std::function<double(double)>& shape) {
    Vec out(t.size());
    const double c = target / shape(std::max(t(t.size() - 1), kNormalizedFrom));
    for (Eigen::Index k = 0; k < t.size(); ++k) out(k) = t(k) < kNormalizedFrom - 1e-9 ? nan() : c * shape(t(k));
    return out;
}

void write_common(Writer& w, const std::vector<ArmRun>& runs, double band_scale, const std::string& title) {
    PlotSpec cum{title + ": cumulative regret", "t", "R(t)", {}};
    PlotSpec norm{title + ": normalized regret", "t", "R(t) / sqrt(t log t)", {}};
    PlotSpec dnorm{title + ": dimension-normalized regret", "t", "R(t) / (d sqrt(t log t))", {}};
    for (const auto& run : runs) {
        const auto s = arm_series(run);
        if (s.cumulative.empty()) continue;
        const auto table = regret_table(s, band_scale);
        w.csv(run.arm.label + "_regret.csv", table);
        w.csv(run.arm.label + "_paths.csv", paths_table(s));
        cum.series.push_back(band_series(run.arm.label, s.times, aggregate(s.cumulative, band_scale), w.every));
        norm.series.push_back(band_series(run.arm.label, s.times, aggregate(s.normalized, band_scale), w.every));
        dnorm.series.push_back(band_series(run.arm.label, s.times, aggregate(s.dim_normalized, band_scale), w.every));
    }
    if (cum.series.empty()) return;
    w.svg("regret.svg", cum);
    w.svg("normalized.svg", norm);
    if (runs.size() > 1 && runs.front().arm.spec.dim != runs.back().arm.spec.dim) w.svg("dim_normalized.svg", dnorm);
}

void write_regret_baseline(Writer& w, const ArmRun& run, const ExperimentConfig& cfg) {
    const auto s = arm_series(run);
    if (s.cumulative.empty()) return;
    PlotSpec cum{"Thompson sampling: cumulative regret", "t", "R(t)", {}};
    PlotSpec norm{"Thompson sampling: normalized regret", "t", "R(t) / sqrt(t log t)", {}};
    for (auto n : cfg.sweep.path_counts) {
        const auto m = static_cast<std::ptrdiff_t>(std::min(n, s.cumulative.size()));
        ArmSeries sub{s.times,
                      {s.cumulative.begin(), s.cumulative.begin() + m},
                      {s.normalized.begin(), s.normalized.begin() + m},
                      {s.dim_normalized.begin(), s.dim_normalized.begin() + m}};
        w.csv("regret_n" + std::to_string(n) + ".csv", regret_table(sub, cfg.band_scale));
        const std::string label = "n=" + std::to_string(n);
        cum.series.push_back(band_series(label, s.times, aggregate(sub.cumulative, cfg.band_scale), w.every));
        norm.series.push_back(band_series(label, s.times, aggregate(sub.normalized, cfg.band_scale), w.every));
    }
    w.csv("paths.csv", paths_table(s));
    w.svg("regret.svg", cum);
    w.svg("normalized.svg", norm);

    std::vector<Vec> r, r0, r1, r2, sum, jumps;
    for (const RunRecord* rec : run.completed()) {
        const auto& tr = rec->trace_for(tracked(run));
        const auto dec = decompose_regret(*rec, tr, run.arm.spec, run.eq_true);
        r.push_back(cumulative(tr.regret_increments));
        r0.push_back(dec.r0);
        r1.push_back(dec.r1);
        r2.push_back(dec.r2);
        sum.push_back(dec.sum());
        jumps.push_back(dec.switch_jumps);
    }
    CsvTable t(s.times);
    PlotSpec dp{"Regret decomposition (path mean)", "t", "regret", {}};
    const std::pair<const char*, const std::vector<Vec>*> parts[] = {
        {"regret", &r}, {"r0", &r0}, {"r1", &r1}, {"r2", &r2}, {"r0_r1_r2", &sum}, {"switch_jumps", &jumps}};
    for (const auto& [name, series] : parts) {
        const Band b = aggregate(*series, cfg.band_scale);
        t.add(std::string("mean_") + name, b.mean);
        t.add(std::string("std_") + name, b.std);
        dp.series.push_back(thinned(name, s.times, b.mean, Vec(), Vec(), w.every));
    }
    w.csv("decomposition.csv", t);
    w.svg("decomposition.svg", dp);
}

void write_nash_convergence(Writer& w, const ArmRun& run, double band_scale) {
    std::vector<Vec> pe, se, qe, rg;
    for (const RunRecord* rec : run.completed()) {
        const auto& tr = rec->trace_for(tracked(run));
        const auto cs = convergence_series(*rec, tr, run.arm.spec, run.eq_true);
        pe.push_back(cs.param_err);
        se.push_back(cs.state_err);
        qe.push_back(cs.policy_err);
        rg.push_back(cumulative(tr.regret_increments));
    }
    if (pe.empty()) return;
    const Vec t = run.completed().front() ? time_grid(*run.completed().front()) : Vec();
    auto log_c = [](double x) { return std::log(std::max(x, std::numbers::e)); };
    struct Quantity {
        const char* name;
        const char* title;
        const std::vector<Vec>* series;
        std::function<double(double)> shape;
        const char* shape_label;
    };
    const Quantity qs[] = {
        {"param_err", "Parameter error", &pe, [&](double x) { return log_c(x); }, "c log t"},
        {"state_err", "State deviation", &se, [&](double x) { return std::sqrt(x * log_c(x)); }, "c sqrt(t log t)"},
        {"policy_err", "Policy error", &qe, [&](double x) { return std::pow(x, 0.75) * std::sqrt(log_c(x)); },
         "c t^(3/4) (log t)^(1/2)"},
        {"regret", "Cumulative regret", &rg, [&](double x) { return std::sqrt(x * log_c(x)); }, "c sqrt(t log t)"},
    };
    CsvTable table(t);
    for (const auto& q : qs) {
        const Band b = aggregate(*q.series, band_scale);
        const Vec ref = reference_curve(t, b.mean(b.mean.size() - 1), q.shape);
        table.add(std::string("mean_") + q.name, b.mean);
        table.add(std::string("std_") + q.name, b.std);
        table.add(std::string("lower_") + q.name, b.lower);
        table.add(std::string("upper_") + q.name, b.upper);
        table.add(std::string("ref_") + q.name, ref);
        PlotSpec p{q.title, "t", q.name, {}};
        p.series.push_back(band_series("TS mean", t, b, w.every));
        auto rs = thinned(q.shape_label, t, ref, Vec(), Vec(), w.every);
        rs.dashed = true;
        p.series.push_back(std::move(rs));
        w.svg(std::string(q.name) + ".svg", p);
    }
    w.csv("convergence.csv", table);
}

std::string suite_title(Suite s) {
    switch (s) {
        case Suite::LongHorizon: return "Long horizon";
        case Suite::VsCe: return "TS vs CE";
        case Suite::VsBlind: return "TS vs CE vs blind";
        case Suite::DimSweep: return "Dimension sweep";
        case Suite::PriorRobustness: return "Prior families";
        case Suite::AblationMu: return "Prior mean";
        case Suite::AblationSigmaScale: return "Prior scale";
        case Suite::AblationSigmaStructure: return "Prior covariance structure";
        default: return to_string(s);
    }
}

}  // namespace

SuiteResult run_suite(const ExperimentConfig& cfg) {
    SuiteResult result;
    result.strict = is_strict(cfg.suite);
    fs::create_directories(cfg.out);
    Writer w{cfg.out, std::max<std::size_t>(1, cfg.sim.record_every), {}};

    std::vector<ArmRun> runs;
    for (const auto& arm : suite_arms(cfg)) {
        Arm a = arm;
        a.sim.threads = cfg.threads;
        runs.push_back(run_arm(a));
        result.aborted += runs.back().aborted();
    }

    json manifest;
    if (cfg.suite == Suite::Validate) {
        const auto checks = validation_battery(build_spec(cfg), cfg.sim.seed);
        std::string report;
        json jc = json::array();
        for (const auto& c : checks) {
            report += std::string(c.passed ? "PASS " : "FAIL ") + c.name + "  " + c.detail + "\n";
            result.failed_checks += c.passed ? 0 : 1;
            jc.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        }
        report += "abort check: " + std::to_string(result.aborted) + " aborted paths\n";
        w.text("validate_report.txt", report);
        manifest["checks"] = jc;
    } else if (cfg.suite == Suite::RegretBaseline) {
        write_regret_baseline(w, runs.front(), cfg);
    } else if (cfg.suite == Suite::NashConvergence) {
        write_nash_convergence(w, runs.front(), cfg.band_scale);
        write_common(w, runs, cfg.band_scale, "Nash convergence");
    } else {
        write_common(w, runs, cfg.band_scale, suite_title(cfg.suite));
    }

    w.text("config.ini", canonical_text(cfg));
    manifest["suite"] = to_string(cfg.suite);
    manifest["slow"] = is_slow(cfg.suite);
    manifest["config_hash"] = config_hash(cfg);
    manifest["config"] = canonical_text(cfg);
    manifest["seed"] = cfg.sim.seed;
    manifest["spec_seed"] = cfg.game.spec_seed;
    manifest["horizon"] = cfg.sim.dt * static_cast<double>(cfg.sim.steps);
    manifest["band_scale"] = cfg.band_scale;
    manifest["std_convention"] = "population";
    manifest["aborted_paths"] = result.aborted;
    json arms = json::array();
    for (const auto& run : runs) arms.push_back(arm_manifest(run, run.arm.sim.horizon()));
    manifest["arms"] = arms;
    json notes = json::array();
    notes.push_back("regret normalizations use natural log with t clamped to at least e; reported from t >= 3");
    if (cfg.suite == Suite::PriorRobustness) {
        notes.push_back("non-Gaussian families change only the episode-0 draw; posterior updates use the Gaussian "
                        "filter with the moment-matched (mu0, Sigma0); untruncated arms skip the membership test");
    }
    if (cfg.suite == Suite::DimSweep) {
        notes.push_back("epsilon scaled by min(1, epsilon_reference_dim / d) so diagonal dominance of Q stays feasible");
    }
    manifest["notes"] = notes;
    std::vector<std::string> names;
    for (const auto& f : w.files) names.push_back(f.generic_string());
    names.push_back("manifest.json");
    manifest["files"] = names;
    write_text(cfg.out / "manifest.json", manifest.dump(2) + "\n");
    w.files.push_back("manifest.json");
    for (const auto& f : w.files) result.files.push_back(cfg.out / f);
    return result;
}

}  // namespace tsgame
