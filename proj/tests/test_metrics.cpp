#include "doctest.h"
#include "oracles.hpp"

#include "tsgame/metrics.hpp"
#include "tsgame/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace tsgame;

namespace {

GameSpec baseline() {
    auto rng = make_stream(42, 0, 0, StreamPurpose::Spec);
    return make_baseline_spec(BaselineParams{}, rng);
}

SimConfig sim(std::size_t steps, std::size_t paths = 1) {
    SimConfig c;
    c.steps = steps;
    c.n_paths = paths;
    c.seed = 21;
    c.players = {3};
    return c;
}

}  // namespace

TEST_CASE("normalizer clamps below e") {
    CHECK(regret_normalizer(0.5) == doctest::Approx(std::sqrt(std::numbers::e)));
    CHECK(regret_normalizer(10.0) == doctest::Approx(std::sqrt(10.0 * std::log(10.0))));
}

TEST_CASE("regret series: start at zero, NaN before t = 3, bit-exact recomputation") {
    const auto spec = baseline();
    const auto eq = equilibrium(spec, spec.a_true);
    for (auto kind : {PolicyKind::TS, PolicyKind::CE, PolicyKind::Blind, PolicyKind::Oracle}) {
        PolicyConfig pc;
        pc.kind = kind;
        const auto rec = run_game(spec, eq, {pc}, sim(500), true, 0);
        const auto& tr = rec.trace_for(3);
        const Vec again = regret_increments(tr, spec, eq, rec.dt);
        CHECK(again.size() == tr.regret_increments.size());
        CHECK((again.array() == tr.regret_increments.array()).all());
        const auto rs = regret_series(rec, tr, spec, eq);
        CHECK(rs.cumulative(0) == 0.0);
        CHECK(std::isnan(rs.normalized(59)));
        CHECK(std::isfinite(rs.normalized(60)));
        CHECK(rs.dim_normalized(500) == doctest::Approx(rs.normalized(500) / 2.0));
        CHECK(rs.times(500) == doctest::Approx(25.0));
        // convergence integrals never decrease
        const auto cs = convergence_series(rec, tr, spec, eq);
        for (const Vec* v : {&cs.param_err, &cs.state_err, &cs.policy_err}) {
            REQUIRE(v->size() == 501);
            CHECK(((v->tail(500) - v->head(500)).array() >= 0).all());
        }
    }
}

TEST_CASE("scalar instance subtracts the value exactly") {
    const auto spec = make_scalar_spec();
    const auto eq = equilibrium(spec, spec.a_true);
    PolicyConfig pc;
    pc.kind = PolicyKind::Oracle;
    SimConfig c = sim(50);
    c.players = {0};
    const auto rec = run_game(spec, eq, {pc}, c, false, 0);
    const auto& tr = rec.trace_for(0);
    for (Eigen::Index n : {0, 10, 49}) {
        const double x = tr.states(0, n), a = tr.controls(0, n);
        CHECK(tr.regret_increments(n) == doctest::Approx((0.375 * x * x + 0.5 * a * a - 0.25) * rec.dt));
    }
}

TEST_CASE("forced true drift: sampling and mismatch terms and errors vanish") {
    const auto spec = baseline();
    const auto eq = equilibrium(spec, spec.a_true);
    PolicyConfig pc;
    pc.forced_drift = spec.a_true;
    const auto rec = run_game(spec, eq, {pc}, sim(400), true, 0);
    const auto& tr = rec.trace_for(3);
    const auto dec = decompose_regret(rec, tr, spec, eq);
    CHECK(dec.r0.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dec.r2.cwiseAbs().maxCoeff() < 1e-12);
    const auto cs = convergence_series(rec, tr, spec, eq);
    CHECK(cs.param_err.cwiseAbs().maxCoeff() == 0.0);
    CHECK(cs.state_err.cwiseAbs().maxCoeff() == 0.0);
    CHECK(cs.policy_err.cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("sampling term equals per-episode length times value gap") {
    const auto spec = baseline();
    const auto eq = equilibrium(spec, spec.a_true);
    const auto rec = run_game(spec, eq, {PolicyConfig{}}, sim(2000), false, 0);
    const auto& tr = rec.trace_for(3);
    const auto dec = decompose_regret(rec, tr, spec, eq);
    double direct = 0;
    for (std::size_t k = 0; k < tr.segments.size(); ++k) {
        const std::size_t end = k + 1 < tr.segments.size() ? tr.segments[k + 1].start_step : rec.steps;
        const double len = double(end - tr.segments[k].start_step) * rec.dt;
        direct += len * (best_response(spec, tr.segments[k].a_hat, eq, 3).value - eq.players[3].value);
    }
    CHECK(dec.r0(Eigen::Index(rec.steps)) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("aggregate") {
    const Vec a = Vec::LinSpaced(5, 0, 4);
    const std::vector<Vec> one{a};
    const auto b1 = aggregate(one);
    CHECK(b1.mean == a);
    CHECK(b1.std.cwiseAbs().maxCoeff() == 0.0);

    const std::vector<Vec> two{Vec::Constant(3, 1.0), Vec::Constant(3, 3.0)};
    const auto b2 = aggregate(two, 0.2);
    CHECK((b2.mean.array() == 2.0).all());
    CHECK(b2.std(0) == doctest::Approx(1.0));
    CHECK(b2.lower(0) == doctest::Approx(1.8));
    CHECK(b2.upper(0) == doctest::Approx(2.2));

    std::mt19937_64 rng(1);
    std::vector<Vec> many;
    for (int k = 0; k < 7; ++k) many.push_back(oracle::random_matrix(rng, 10, 1));
    const auto b3 = aggregate(many);
    std::reverse(many.begin(), many.end());
    std::swap(many[1], many[4]);
    const auto b4 = aggregate(many);
    CHECK((b3.mean - b4.mean).norm() < 1e-14);
    CHECK((b3.std - b4.std).norm() < 1e-14);

    const std::vector<Vec> bad{Vec::Zero(3), Vec::Zero(4)};
    CHECK_THROWS(aggregate(bad));
    CHECK_THROWS(aggregate(std::vector<Vec>{}));
}

TEST_CASE("episode count and max norm") {
    PlayerTrace tr;
    tr.segments = {Segment{0, {}, EpisodeEnd::None, 0, false}, Segment{40, {}, EpisodeEnd::Length, 0, false},
                   Segment{70, {}, EpisodeEnd::Determinant, 0, false}};
    CHECK(episode_count(tr, 0.0, 0.05) == 1);
    CHECK(episode_count(tr, 2.0, 0.05) == 2);
    CHECK(episode_count(tr, 3.49, 0.05) == 3);
    tr.states = Mat::Zero(2, 5);
    tr.states(0, 2) = 3;
    tr.states(1, 4) = 7;
    CHECK(max_state_norm(tr, 0.1, 0.05) == doctest::Approx(3.0));
    CHECK(max_state_norm(tr, 0.2, 0.05) == doctest::Approx(7.0));
    CHECK(step_at(0.15, 0.05) == 3);
}
