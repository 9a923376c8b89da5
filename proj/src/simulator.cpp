#include "tsgame/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace tsgame {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::TS: return "ts";
        case PolicyKind::Oracle: return "oracle";
        case PolicyKind::CE: return "ce";
        case PolicyKind::Blind: return "blind";
    }
    return "ts";
}

PolicyKind parse_policy_kind(const std::string& name) {
    if (name == "ts") return PolicyKind::TS;
    if (name == "oracle") return PolicyKind::Oracle;
    if (name == "ce") return PolicyKind::CE;
    if (name == "blind") return PolicyKind::Blind;
    throw std::invalid_argument("unknown policy '" + name + "'");
}

const PlayerTrace& RunRecord::trace_for(std::size_t player) const {
    for (const auto& t : players) {
        if (t.player == player) return t;
    }
    throw std::out_of_range("RunRecord: player " + std::to_string(player) + " was not recorded");
}

Vec step_dynamics(const Vec& x, const Vec& alpha, const Mat& a, const Mat& sigma, double dt, const Vec& dw) {
    return x + (a * x - alpha) * dt + sigma * dw;
}

std::optional<EpisodeState> ce_gains(const PosteriorState& posterior, const GameSpec& spec, std::size_t i) {
    const Mat a_ce = project_frobenius_ball(unvectorize(posterior.mu), spec.truncation.max_norm);
    try {
        SampleResult s;
        s.a_hat = a_ce;
        s.eq = equilibrium(spec, a_ce);
        return make_episode(s, spec, i, 0, 0.0, 0.0);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Vec ce_control(const PosteriorState& posterior, const GameSpec& spec, std::size_t i, const Vec& x) {
    const auto es = ce_gains(posterior, spec, i);
    if (!es) throw GameError("ce_control: no equilibrium for the posterior-mean drift");
    return control(*es, x);
}

namespace {

Segment segment_from(const EpisodeState& es, std::size_t start, EpisodeEnd reason) {
    return Segment{start, es.a_hat, reason, es.rejects, es.fallback};
}

std::optional<PriorSampler> initial_sampler(const PolicyConfig& cfg, const GameSpec& spec, std::size_t i) {
    if (cfg.prior.kind == PriorKind::Gaussian) return std::nullopt;
    return PriorSampler(cfg.prior, spec.prior_mu0[i], spec.prior_sigma0[i]);
}

class OraclePolicy final : public Policy {
public:
    OraclePolicy(const EquilibriumSolution& eq_true, std::size_t i) : player_(eq_true.players[i]) {
        segments_.push_back(Segment{0, eq_true.drift, EpisodeEnd::None, 0, false});
    }
    Vec act(const Vec& x) const override { return player_.feedback(x); }
    void observe(const FilterStep&, std::size_t, double, double) override {}
    const std::vector<Segment>& segments() const override { return segments_; }

private:
    PlayerEquilibrium player_;
    std::vector<Segment> segments_;
};

class TsPolicy final : public Policy {
public:
    TsPolicy(const PolicyConfig& cfg, std::shared_ptr<const GameSpec> spec, std::size_t i, Rng rng)
        : spec_(std::move(spec)), sampler_(*spec_, i, std::move(rng), initial_sampler(cfg, *spec_, i)) {
        if (cfg.forced_drift) sampler_.force_parameter(*cfg.forced_drift);
        segments_.push_back(segment_from(sampler_.episode(), 0, EpisodeEnd::None));
    }
    Vec act(const Vec& x) const override { return sampler_.act(x); }
    void observe(const FilterStep& step, std::size_t n, double now, double tol) override {
        const EpisodeEnd reason = sampler_.observe(step, now, tol);
        if (reason != EpisodeEnd::None) segments_.push_back(segment_from(sampler_.episode(), n + 1, reason));
    }
    const PosteriorState* posterior() const override { return &sampler_.posterior(); }
    const std::vector<Segment>& segments() const override { return segments_; }
    std::vector<int> macro_boundaries() const override { return sampler_.macro_log().boundaries; }
    int failures() const override {
        int n = 0;
        for (const auto& s : segments_) n += s.fallback ? 1 : 0;
        return n;
    }

private:
    std::shared_ptr<const GameSpec> spec_;  // sampler_ keeps a pointer into it
    ThompsonSampler sampler_;
    std::vector<Segment> segments_;
};

class CePolicy final : public Policy {
public:
    CePolicy(const PolicyConfig& cfg, const GameSpec& spec, std::size_t i)
        : spec_(&spec),
          player_(i),
          cadence_(cfg.ce_cadence),
          noise_prec_(noise_precision(spec.sigma[i])),
          posterior_(PosteriorState::from_prior(spec.prior_mu0[i], spec.prior_sigma0[i])) {
        if (!(cadence_ > 0)) throw std::invalid_argument("CePolicy: cadence must be positive");
        auto es = ce_gains(posterior_, spec, i);
        if (!es) throw GameError("CePolicy: prior mean drift has no equilibrium");
        gains_ = *es;
        segments_.push_back(segment_from(gains_, 0, EpisodeEnd::None));
    }
    Vec act(const Vec& x) const override { return control(gains_, x); }
    void observe(const FilterStep& step, std::size_t n, double now, double tol) override {
        filter_update_inplace(posterior_, step, noise_prec_);
        if (now - last_ < cadence_ - tol) return;
        last_ = now;
        if (auto es = ce_gains(posterior_, *spec_, player_)) {
            gains_ = *es;
            segments_.push_back(segment_from(gains_, n + 1, EpisodeEnd::Length));
        } else {
            ++failures_;
        }
    }
    const PosteriorState* posterior() const override { return &posterior_; }
    const std::vector<Segment>& segments() const override { return segments_; }
    int failures() const override { return failures_; }

private:
    const GameSpec* spec_;
    std::size_t player_;
    double cadence_;
    double last_ = 0.0;
    Mat noise_prec_;
    PosteriorState posterior_;
    EpisodeState gains_;
    std::vector<Segment> segments_;
    int failures_ = 0;
};

/// Prior draws on the deterministic schedule 2, 3, 4, ... (the TS length
/// rule with the determinant rule switched off).
class BlindPolicy final : public Policy {
public:
    BlindPolicy(const PolicyConfig& cfg, std::shared_ptr<const GameSpec> spec, std::size_t i, Rng rng)
        : spec_(std::move(spec)),
          player_(i),
          rng_(std::move(rng)),
          sampler_(cfg.prior, spec_->prior_mu0[i], spec_->prior_sigma0[i]),
          posterior_(PosteriorState::from_prior(spec_->prior_mu0[i], spec_->prior_sigma0[i])) {
        draw(0, 0.0);
        length_ = 2.0;
    }
    Vec act(const Vec& x) const override { return control(episode_, x); }
    void observe(const FilterStep&, std::size_t n, double now, double tol) override {
        if (now - episode_.t_k < length_ - tol) return;
        draw(n + 1, now);
        length_ += 1.0;
    }
    const PosteriorState* posterior() const override { return &posterior_; }
    const std::vector<Segment>& segments() const override { return segments_; }
    int failures() const override {
        int n = 0;
        for (const auto& s : segments_) n += s.fallback ? 1 : 0;
        return n;
    }

private:
    void draw(std::size_t step, double now) {
        const PriorSampler& ps = sampler_;
        DrawFn fn = [&ps](Rng& g) { return ps.sample(g); };
        const auto s = sample_truncated(fn, unvectorize(ps.mean()), ps.mean(), *spec_, player_, rng_);
        const int k = segments_.empty() ? 0 : episode_.k + 1;
        episode_ = make_episode(s, *spec_, player_, k, now, now - episode_.t_k);
        segments_.push_back(segment_from(episode_, step, k == 0 ? EpisodeEnd::None : EpisodeEnd::Length));
    }

    std::shared_ptr<const GameSpec> spec_;
    std::size_t player_;
    Rng rng_;
    PriorSampler sampler_;
    PosteriorState posterior_;  // never updated
    EpisodeState episode_;
    double length_ = 2.0;
    std::vector<Segment> segments_;
};

std::shared_ptr<const GameSpec> policy_spec(const PolicyConfig& cfg, const GameSpec& spec) {
    auto copy = std::make_shared<GameSpec>(spec);
    if (!cfg.prior.truncated) copy->truncation.enabled = false;
    return copy;
}

const PolicyConfig& policy_for(const std::vector<PolicyConfig>& policies, std::size_t player) {
    if (policies.empty()) throw std::invalid_argument("run_game: no policy given");
    if (policies.size() == 1) return policies.front();
    return policies.at(player);
}

std::vector<std::size_t> simulated_players(const GameSpec& spec, const SimConfig& cfg) {
    std::vector<std::size_t> out = cfg.players;
    if (out.empty()) {
        for (std::size_t i = 0; i < spec.n_players; ++i) out.push_back(i);
    }
    for (auto p : out) {
        if (p >= spec.n_players) throw std::out_of_range("SimConfig: player index out of range");
    }
    return out;
}

void validate_sim_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (cfg.steps == 0) throw std::invalid_argument("SimConfig: steps must be positive");
    if (cfg.record_every == 0) throw std::invalid_argument("SimConfig: record_every must be positive");
}

void truncate_trace(PlayerTrace& t, std::size_t steps) {
    const auto n = static_cast<Eigen::Index>(steps);
    t.states.conservativeResize(Eigen::NoChange, n + 1);
    t.controls.conservativeResize(Eigen::NoChange, n);
    if (t.coupled()) t.oracle_states.conservativeResize(Eigen::NoChange, n + 1);
    t.regret_increments.conservativeResize(n);
    t.det_ratio.conservativeResize(n + 1);
    t.trace_sigma.conservativeResize(n + 1);
    if (t.posterior_mean.cols() > 0) t.posterior_mean.conservativeResize(Eigen::NoChange, n + 1);
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const GameSpec& spec, const EquilibriumSolution& eq_true,
                                    std::size_t player, Rng sampling_rng) {
    switch (cfg.kind) {
        case PolicyKind::Oracle: return std::make_unique<OraclePolicy>(eq_true, player);
        case PolicyKind::TS: return std::make_unique<TsPolicy>(cfg, policy_spec(cfg, spec), player, std::move(sampling_rng));
        case PolicyKind::CE: return std::make_unique<CePolicy>(cfg, spec, player);
        case PolicyKind::Blind:
            return std::make_unique<BlindPolicy>(cfg, policy_spec(cfg, spec), player, std::move(sampling_rng));
    }
    throw std::invalid_argument("make_policy: unknown kind");
}

RunRecord run_game(const GameSpec& spec, const EquilibriumSolution& eq_true, const std::vector<PolicyConfig>& policies,
                   const SimConfig& cfg, bool couple_oracle, std::size_t path_index) {
    validate_sim_config(cfg);
    const auto players = simulated_players(spec, cfg);
    const auto d = static_cast<Eigen::Index>(spec.dim);
    const auto steps = static_cast<Eigen::Index>(cfg.steps);
    const double tol = 0.5 * cfg.dt;
    const double sqdt = std::sqrt(cfg.dt);

    RunRecord rec;
    rec.dt = cfg.dt;
    rec.steps = cfg.steps;
    rec.path = path_index;
    rec.seed = cfg.seed;

    struct Lane {
        std::size_t i;
        std::unique_ptr<Policy> policy;
        Rng noise;
        RunningCost cost;
        double lambda;
        Vec x;
        Vec x_or;
    };
    std::vector<Lane> lanes;
    lanes.reserve(players.size());
    rec.players.reserve(players.size());
    for (auto i : players) {
        const auto& pc = policy_for(policies, i);
        Lane lane{i,
                  make_policy(pc, spec, eq_true, i, make_stream(cfg.seed, path_index, i, StreamPurpose::Sampling)),
                  make_stream(cfg.seed, path_index, i, StreamPurpose::Noise),
                  running_cost(spec, eq_true, i),
                  eq_true.players[i].value,
                  spec.x0[i],
                  spec.x0[i]};
        PlayerTrace t;
        t.player = i;
        t.kind = pc.kind;
        t.states.resize(d, steps + 1);
        t.controls.resize(d, steps);
        if (couple_oracle) t.oracle_states.resize(d, steps + 1);
        t.regret_increments.resize(steps);
        t.det_ratio.resize(steps + 1);
        t.trace_sigma.resize(steps + 1);
        if (cfg.record_posterior_mean) t.posterior_mean.resize(d * d, steps + 1);
        lanes.push_back(std::move(lane));
        rec.players.push_back(std::move(t));
    }

    auto record_filter = [&](std::size_t li, Eigen::Index col) {
        auto& t = rec.players[li];
        const PosteriorState* post = lanes[li].policy->posterior();
        t.det_ratio(col) = post ? det_ratio(*post) : 1.0;
        t.trace_sigma(col) = post ? post->sigma.trace() : 0.0;
        if (t.posterior_mean.cols() > 0) {
            t.posterior_mean.col(col) = post ? post->mu : Vec::Zero(d * d);
        }
    };

    for (std::size_t li = 0; li < lanes.size(); ++li) {
        rec.players[li].states.col(0) = lanes[li].x;
        if (couple_oracle) rec.players[li].oracle_states.col(0) = lanes[li].x_or;
        record_filter(li, 0);
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    Vec dw(d);
    for (Eigen::Index n = 0; n < steps && !rec.aborted; ++n) {
        const double now = cfg.dt * static_cast<double>(n + 1);
        for (std::size_t li = 0; li < lanes.size(); ++li) {
            auto& lane = lanes[li];
            auto& t = rec.players[li];
            const Mat& sigma = spec.sigma[lane.i];
            const Vec alpha = lane.policy->act(lane.x);
            for (Eigen::Index k = 0; k < d; ++k) dw(k) = sqdt * normal(lane.noise);
            const Vec x_next = step_dynamics(lane.x, alpha, spec.a_true, sigma, cfg.dt, dw);
            t.controls.col(n) = alpha;
            t.regret_increments(n) = regret_increment(lane.cost, lane.lambda, lane.x, alpha, cfg.dt);
            if (couple_oracle) {
                const Vec alpha_or = eq_true.players[lane.i].feedback(lane.x_or);
                lane.x_or = step_dynamics(lane.x_or, alpha_or, spec.a_true, sigma, cfg.dt, dw);
                t.oracle_states.col(n + 1) = lane.x_or;
            }
            try {
                lane.policy->observe(FilterStep{lane.x, x_next - lane.x, alpha, cfg.dt}, static_cast<std::size_t>(n),
                                     now, tol);
            } catch (const std::exception& e) {
                rec.aborted = true;
                rec.abort_reason = "player " + std::to_string(lane.i) + ": " + e.what();
            }
            lane.x = x_next;
            t.states.col(n + 1) = x_next;
            record_filter(li, n + 1);
            if (!rec.aborted && (!x_next.allFinite() || x_next.norm() > cfg.abort_norm)) {
                rec.aborted = true;
                rec.abort_reason = "player " + std::to_string(lane.i) + ": state norm exceeded guard";
            }
            if (rec.aborted) {
                rec.abort_step = static_cast<std::size_t>(n + 1);
                break;
            }
        }
    }

    for (std::size_t li = 0; li < lanes.size(); ++li) {
        auto& t = rec.players[li];
        t.segments = lanes[li].policy->segments();
        t.macro_boundaries = lanes[li].policy->macro_boundaries();
        t.ce_failures = lanes[li].policy->failures();
        const PosteriorState* post = lanes[li].policy->posterior();
        t.final_posterior_mean = post ? post->mu : Vec::Zero(d * d);
    }
    if (rec.aborted) {
        rec.steps = rec.abort_step;
        for (auto& t : rec.players) truncate_trace(t, rec.steps);
    }
    return rec;
}

RunRecord run_game(const GameSpec& spec, const std::vector<PolicyConfig>& policies, const SimConfig& cfg,
                   bool couple_oracle, std::size_t path_index) {
    const auto eq_true = equilibrium(spec, spec.a_true);
    return run_game(spec, eq_true, policies, cfg, couple_oracle, path_index);
}

std::vector<RunRecord> run_paths(const GameSpec& spec, const std::vector<PolicyConfig>& policies,
                                 const SimConfig& cfg, bool couple_oracle) {
    validate_sim_config(cfg);
    const auto eq_true = equilibrium(spec, spec.a_true);
    std::vector<RunRecord> out(cfg.n_paths);
    std::vector<std::exception_ptr> errors(cfg.n_paths);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t p = next++; p < cfg.n_paths; p = next++) {
            try {
                out[p] = run_game(spec, eq_true, policies, cfg, couple_oracle, p);
            } catch (...) {
                errors[p] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(1, cfg.n_paths));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace tsgame
