#include "doctest.h"
#include "oracles.hpp"

#include "tsgame/rng.hpp"
#include "tsgame/ts_controller.hpp"

using namespace tsgame;

namespace {

GameSpec baseline() {
    auto rng = make_stream(42, 0, 0, StreamPurpose::Spec);
    return make_baseline_spec(BaselineParams{}, rng);
}

EpisodeState episode(int k, double t_k, double t_prev) {
    EpisodeState es;
    es.k = k;
    es.t_k = t_k;
    es.t_prev = t_prev;
    return es;
}

struct EpisodeLog {
    std::vector<double> starts;
    std::vector<EpisodeEnd> reasons;
    std::vector<double> fire_ratios;
};

/// Single tracked TS player against the true dynamics of its own state.
EpisodeLog run_sampler(const GameSpec& spec, std::size_t i, double horizon, double dt, std::uint64_t seed) {
    ThompsonSampler ts(spec, i, make_stream(seed, 0, i, StreamPurpose::Sampling));
    auto noise = make_stream(seed, 0, i, StreamPurpose::Noise);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Mat prec = noise_precision(spec.sigma[i]);
    const auto d = Eigen::Index(spec.dim);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    EpisodeLog log;
    log.starts.push_back(0.0);
    Vec x = spec.x0[i];
    for (std::size_t n = 0; n < steps; ++n) {
        const Vec alpha = ts.act(x);
        const Vec dw = std::sqrt(dt) * Vec::NullaryExpr(d, [&] { return normal(noise); });
        const Vec next = x + (spec.a_true * x - alpha) * dt + spec.sigma[i] * dw;
        const FilterStep step{x, next - x, alpha, dt};
        auto probe = ts.posterior();
        filter_update_inplace(probe, step, prec);
        const double ratio = det_ratio(probe);
        const double now = double(n + 1) * dt;
        const auto reason = ts.observe(step, now, 0.5 * dt);
        if (reason != EpisodeEnd::None) {
            log.starts.push_back(now);
            log.reasons.push_back(reason);
            if (reason == EpisodeEnd::Determinant) log.fire_ratios.push_back(ratio);
        }
        x = next;
    }
    return log;
}

}  // namespace

TEST_CASE("degenerate posterior at the true drift returns it") {
    const auto spec = baseline();
    const auto st = PosteriorState::from_prior(vectorize(spec.a_true), 1e-24 * Mat::Identity(4, 4));
    Rng rng(1);
    const auto s = sample_parameter(st, spec, 3, rng);
    CHECK_FALSE(s.fallback);
    CHECK((s.a_hat - spec.a_true).norm() < 1e-9);
}

TEST_CASE("membership test rejects large drifts") {
    const auto spec = baseline();
    const Mat big = 6.0 * Mat::Identity(2, 2);
    const Mat ups = equilibrium(spec, spec.a_true).players[0].upsilon;
    CHECK_FALSE(in_truncation_set(big, spec.a_true, ups, spec, 0));
    CHECK(in_truncation_set(spec.a_true, spec.a_true, ups, spec, 0));
}

TEST_CASE("fallback after exhausting the reject budget is logged") {
    const auto spec = baseline();
    Rng rng(2);
    const DrawFn draw = [](Rng&) { return Vec(Vec::Constant(4, 100.0)); };
    const auto s = sample_truncated(draw, spec.a_true, Vec::Constant(4, 100.0), spec, 0, rng);
    CHECK(s.fallback);
    CHECK(s.rejects == spec.truncation.max_rejects);
    CHECK(s.a_hat.norm() == doctest::Approx(spec.truncation.max_norm));
    const auto es = make_episode(s, spec, 0, 0, 0.0, 0.0);
    CHECK(es.fallback);
}

TEST_CASE("accepted scalar draws match the truncated-normal mean") {
    auto spec = make_scalar_spec();
    spec.truncation.max_norm = 0.1;
    const double mu = 0.05, var = 0.01;
    const auto st = PosteriorState::from_prior(Vec::Constant(1, mu), Mat::Constant(1, 1, var));
    const Mat ref = Mat::Constant(1, 1, mu);
    auto accept = [&](double a) {
        const Mat am = Mat::Constant(1, 1, a);
        return in_truncation_set(am, ref, equilibrium(spec, am).players[0].upsilon, spec, 0);
    };
    const double expected = oracle::truncated_normal_mean(mu, std::sqrt(var), -0.2, 0.2, accept, 4000);
    Rng rng(3);
    const int n = 10000;
    double sum = 0;
    int fallbacks = 0;
    for (int k = 0; k < n; ++k) {
        const auto s = sample_parameter(st, spec, 0, rng);
        fallbacks += s.fallback;
        CHECK(std::abs(s.a_hat(0, 0)) <= 0.1);
        sum += s.a_hat(0, 0);
    }
    CHECK(fallbacks == 0);
    // truncated sd is below the untruncated one, so this bound is conservative
    CHECK(std::abs(sum / n - expected) <= 3 * std::sqrt(var) / std::sqrt(double(n)));
}

TEST_CASE("stopping rule cases") {
    const double dt = 0.05, tol = 0.5 * dt;
    // k >= 1, previous length 2, started at 5, determinant never halves
    const auto es = episode(3, 5.0, 2.0);
    double fired = -1;
    for (int n = 101; n <= 200 && fired < 0; ++n) {
        if (should_end_episode(n * dt, es, 0.9, tol)) fired = n * dt;
    }
    CHECK(fired == doctest::Approx(8.0));
    CHECK(episode_end_reason(8.0, es, 0.9, tol) == EpisodeEnd::Length);

    CHECK_FALSE(should_end_episode(5.7, es, 0.3));
    CHECK(episode_end_reason(6.0, es, 0.3) == EpisodeEnd::Determinant);

    const auto e0 = episode(0, 0.0, 0.0);
    CHECK_FALSE(should_end_episode(1.5, e0, 0.6));
    CHECK(should_end_episode(2.0, e0, 0.6));
    CHECK(episode_end_reason(1.5, e0, 0.4) == EpisodeEnd::Determinant);
    CHECK_FALSE(should_end_episode(1.0, e0, 0.1, tol));
}

TEST_CASE("initial episode") {
    const auto spec = baseline();
    auto post = PosteriorState::from_prior(spec.prior_mu0[3], spec.prior_sigma0[3]);
    Rng rng(4);
    const auto es = start_episode(post, spec, 3, 0.0, std::nullopt, rng);
    CHECK(es.k == 0);
    CHECK(es.t_k == 0.0);
    CHECK(es.t_prev == 0.0);
}

TEST_CASE("episode schedule properties along trajectories") {
    const auto spec = baseline();
    const double dt = 0.05, tol = 0.5 * dt;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto log = run_sampler(spec, 3, 200.0, dt, seed);
        REQUIRE(log.starts.size() >= 3);
        CHECK(log.starts[1] <= 2.0 + tol);
        for (std::size_t k = 1; k < log.starts.size(); ++k) {
            const double len = log.starts[k] - log.starts[k - 1];
            CHECK(len >= 1.0 - tol);
            if (k >= 2) CHECK(len <= (log.starts[k - 1] - log.starts[k - 2]) + 1.0 + tol);
        }
        for (double r : log.fire_ratios) CHECK(r < 0.5);
    }
}

TEST_CASE("episode count grows sublinearly") {
    const auto spec = baseline();
    for (double t : {50.0, 100.0}) {
        double k1 = 0, k4 = 0;
        for (std::uint64_t seed = 10; seed < 18; ++seed) {
            const auto log = run_sampler(spec, 3, 4 * t, 0.05, seed);
            for (double s : log.starts) {
                k1 += s <= t + 1e-9;
                k4 += 1;
            }
        }
        CHECK(k4 <= 3 * k1);
    }
}

TEST_CASE("episode feedback") {
    const auto spec = baseline();
    const auto eq = equilibrium(spec, spec.a_true);
    SampleResult s{spec.a_true, eq, 0, false};
    const auto es = make_episode(s, spec, 3, 0, 0.0, 0.0);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 10; ++k) {
        const Vec x = oracle::random_matrix(rng, 2, 1);
        const Vec y = oracle::random_matrix(rng, 2, 1);
        CHECK((control(es, x) - eq.players[3].feedback(x)).norm() < 1e-14);
        CHECK((control(es, x + y) - control(es, y) - es.gain_k * x).norm() < 1e-12);
    }
    SampleResult off{spec.a_true + 0.1 * Mat::Ones(2, 2), {}, 0, false};
    off.eq = equilibrium(spec, off.a_hat);
    const auto eo = make_episode(off, spec, 3, 1, 1.0, 1.0);
    CHECK((control(eo, eo.eta_k) - off.a_hat * eo.eta_k).norm() < 1e-12);
}

TEST_CASE("forced parameter replaces every draw") {
    const auto spec = baseline();
    ThompsonSampler ts(spec, 3, Rng(7));
    ts.force_parameter(spec.a_true);
    CHECK((ts.episode().a_hat - spec.a_true).norm() == 0.0);
    CHECK(ts.history().size() == 1);
}
