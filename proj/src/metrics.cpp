#include "tsgame/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tsgame {

double regret_normalizer(double t) {
    const double tc = std::max(t, std::numbers::e);
    return std::sqrt(tc * std::log(tc));
}

Vec time_grid(const RunRecord& rec) {
    Vec t(static_cast<Eigen::Index>(rec.steps) + 1);
    for (Eigen::Index n = 0; n < t.size(); ++n) t(n) = rec.dt * static_cast<double>(n);
    return t;
}

Vec regret_increments(const PlayerTrace& trace, const GameSpec& spec, const EquilibriumSolution& eq_true, double dt) {
    const auto cost = running_cost(spec, eq_true, trace.player);
    const double lambda = eq_true.players[trace.player].value;
    Vec out(trace.controls.cols());
    for (Eigen::Index n = 0; n < out.size(); ++n) {
        out(n) = regret_increment(cost, lambda, trace.states.col(n), trace.controls.col(n), dt);
    }
    return out;
}

Vec cumulative(const Vec& increments) {
    Vec out(increments.size() + 1);
    out(0) = 0.0;
    double acc = 0.0;
    for (Eigen::Index n = 0; n < increments.size(); ++n) {
        acc += increments(n);
        out(n + 1) = acc;
    }
    return out;
}

RegretSeries regret_series(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                           const EquilibriumSolution& eq_true) {
    RegretSeries s;
    s.times = time_grid(rec);
    s.cumulative = cumulative(regret_increments(trace, spec, eq_true, rec.dt));
    s.normalized.resize(s.times.size());
    s.dim_normalized.resize(s.times.size());
    const double d = static_cast<double>(spec.dim);
    for (Eigen::Index n = 0; n < s.times.size(); ++n) {
        if (s.times(n) < kNormalizedFrom - 0.5 * rec.dt) {
            s.normalized(n) = std::numeric_limits<double>::quiet_NaN();
            s.dim_normalized(n) = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        s.normalized(n) = s.cumulative(n) / regret_normalizer(s.times(n));
        s.dim_normalized(n) = s.normalized(n) / d;
    }
    return s;
}

namespace {

struct SegmentModel {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive step index
    Mat a_hat;
    double lambda = 0;
    Mat lambda_mat;
    Vec rho;
};

// lambda, Lambda and rho of player i's own problem under the segment's drift,
// against the true stationary opponents that the regret integrand uses.
std::vector<SegmentModel> segment_models(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                                         const EquilibriumSolution& eq_true) {
    std::vector<SegmentModel> out;
    const auto i = trace.player;
    for (std::size_t k = 0; k < trace.segments.size(); ++k) {
        const auto& seg = trace.segments[k];
        const auto br = best_response(spec, seg.a_hat, eq_true, i);
        SegmentModel m;
        m.start = seg.start_step;
        m.end = k + 1 < trace.segments.size() ? std::min(trace.segments[k + 1].start_step, rec.steps) : rec.steps;
        m.a_hat = seg.a_hat;
        m.lambda = br.value;
        m.lambda_mat = br.lambda_mat;
        m.rho = br.rho;
        out.push_back(std::move(m));
    }
    return out;
}

double value_fn(const SegmentModel& m, const Vec& x) { return 0.5 * x.dot(m.lambda_mat * x) + m.rho.dot(x); }

}  // namespace

Decomposition decompose_regret(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                               const EquilibriumSolution& eq_true) {
    const auto n_steps = static_cast<Eigen::Index>(rec.steps);
    const auto models = segment_models(rec, trace, spec, eq_true);
    const double lambda_true = eq_true.players[trace.player].value;

    Decomposition out;
    out.r0 = Vec::Zero(n_steps + 1);
    out.r1 = Vec::Zero(n_steps + 1);
    out.r2 = Vec::Zero(n_steps + 1);
    out.switch_jumps = Vec::Zero(n_steps + 1);
    if (models.empty()) return out;

    const double v0 = value_fn(models.front(), trace.states.col(0));
    double r0 = 0, r2 = 0, jumps = 0;
    std::size_t k = 0;
    for (Eigen::Index n = 0; n < n_steps; ++n) {
        while (k + 1 < models.size() && static_cast<std::size_t>(n) >= models[k + 1].start) {
            const Vec xs = trace.states.col(n);
            jumps += value_fn(models[k], xs) - value_fn(models[k + 1], xs);
            ++k;
        }
        const auto& m = models[k];
        const Vec x = trace.states.col(n);
        r0 += (m.lambda - lambda_true) * rec.dt;
        r2 += (m.lambda_mat * x + m.rho).dot((spec.a_true - m.a_hat) * x) * rec.dt;
        out.r0(n + 1) = r0;
        out.r2(n + 1) = r2;
        out.switch_jumps(n + 1) = jumps;
        // active parameters at t_{n+1}
        const std::size_t kk = (k + 1 < models.size() && static_cast<std::size_t>(n + 1) >= models[k + 1].start) ? k + 1 : k;
        out.r1(n + 1) = v0 - value_fn(models[kk], trace.states.col(n + 1));
    }
    return out;
}

ConvergenceSeries convergence_series(const RunRecord& rec, const PlayerTrace& trace, const GameSpec& spec,
                                     const EquilibriumSolution& eq_true) {
    const auto n_steps = static_cast<Eigen::Index>(rec.steps);
    ConvergenceSeries out;
    out.param_err = Vec::Zero(n_steps + 1);
    const bool coupled = trace.coupled();
    if (coupled) {
        out.state_err = Vec::Zero(n_steps + 1);
        out.policy_err = Vec::Zero(n_steps + 1);
    }
    const auto& pl = eq_true.players[trace.player];
    double pe = 0, se = 0, qe = 0;
    std::size_t k = 0;
    for (Eigen::Index n = 0; n < n_steps; ++n) {
        while (k + 1 < trace.segments.size() && static_cast<std::size_t>(n) >= trace.segments[k + 1].start_step) ++k;
        pe += (spec.a_true - trace.segments[k].a_hat).squaredNorm() * rec.dt;
        out.param_err(n + 1) = pe;
        if (!coupled) continue;
        const Vec xo = trace.oracle_states.col(n);
        se += (trace.states.col(n) - xo).squaredNorm() * rec.dt;
        qe += (trace.controls.col(n) - pl.feedback(xo)).squaredNorm() * rec.dt;
        out.state_err(n + 1) = se;
        out.policy_err(n + 1) = qe;
    }
    return out;
}

Band aggregate(std::span<const Vec> series, double band_scale) {
    if (series.empty()) throw std::invalid_argument("aggregate: no series");
    const Eigen::Index len = series.front().size();
    for (const auto& s : series) {
        if (s.size() != len) throw std::invalid_argument("aggregate: misaligned series");
    }
    const double n = static_cast<double>(series.size());
    Band b;
    b.mean = Vec::Zero(len);
    for (const auto& s : series) b.mean += s;
    b.mean /= n;
    b.std = Vec::Zero(len);
    for (const auto& s : series) b.std += (s - b.mean).cwiseAbs2();
    b.std = (b.std / n).cwiseSqrt();
    b.lower = b.mean - band_scale * b.std;
    b.upper = b.mean + band_scale * b.std;
    return b;
}

std::size_t step_at(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

std::size_t episode_count(const PlayerTrace& trace, double t, double dt) {
    const std::size_t last = step_at(t, dt);
    std::size_t count = 0;
    for (const auto& s : trace.segments) {
        if (s.start_step <= last) ++count;
    }
    return count;
}

double max_state_norm(const PlayerTrace& trace, double t, double dt) {
    const auto last = std::min<Eigen::Index>(static_cast<Eigen::Index>(step_at(t, dt)), trace.states.cols() - 1);
    double m = 0;
    for (Eigen::Index n = 0; n <= last; ++n) m = std::max(m, trace.states.col(n).norm());
    return m;
}

}  // namespace tsgame
