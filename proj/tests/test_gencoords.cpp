#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aif/gencoords.hpp"
#include "helpers.hpp"

using namespace aif;

TEST_CASE("shift returns the first-order slot") {
    GeneralizedBelief gb(BeliefLayout{});
    gb.mu[0] = 1;
    gb.mu[1] = 2;
    gb.mu_prime[0] = 0.5;
    auto d = shift(gb);
    CHECK(d[0] == 0.5);
    CHECK(d[1] == 0.0);

    GeneralizedBelief still(BeliefLayout{});
    for (double x : shift(still)) CHECK(x == 0.0);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (double& x : gb.mu_prime) x = n(rng);
    CHECK(shift(gb) == gb.mu_prime);
}

TEST_CASE("weighted squared error") {
    DiagonalPrecision I2(std::vector<double>{1.0, 1.0});
    CHECK(weighted_sq_error(std::vector<double>{0.0, 0.0}, I2) == 0.0);
    CHECK(weighted_sq_error(std::vector<double>{1.0, 1.0}, DiagonalPrecision({2.0, 3.0})) == doctest::Approx(5.0));
    CHECK_THROWS_AS(weighted_sq_error(std::vector<double>{1.0}, I2), std::invalid_argument);

    // dense-matrix oracle
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1), p(0.01, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 9;
        std::vector<double> e(n), d(n);
        for (int i = 0; i < n; ++i) { e[i] = u(rng); d[i] = p(rng); }
        std::vector<double> dense(n * n, 0.0);
        for (int i = 0; i < n; ++i) dense[i * n + i] = d[i];
        double ref = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ref += e[i] * dense[i * n + j] * e[j];
        const double got = weighted_sq_error(e, DiagonalPrecision(d));
        CHECK(got == doctest::Approx(ref).epsilon(1e-12));
        CHECK(got >= 0.0);
    }
}

TEST_CASE("weighted squared error is zero only for zero error") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    DiagonalPrecision pi(std::vector<double>(6, 0.5));
    for (int t = 0; t < 50; ++t) {
        std::vector<double> e(6, 0.0);
        e[t % 6] = u(rng);
        if (e[t % 6] == 0.0) continue;
        CHECK(weighted_sq_error(e, pi) > 0.0);
    }
}

TEST_CASE("precision floor") {
    DiagonalPrecision p({0.0, -1.0, 2.0}, 1e-3);
    CHECK(p.diag[0] == 1e-3);
    CHECK(p.diag[1] == 1e-3);
    CHECK(p.diag[2] == 2.0);
    CHECK_THROWS(DiagonalPrecision({1.0}, 0.0));
}

namespace {
PredictionError zero_errors(const BeliefLayout& L) {
    PredictionError pe;
    pe.e_cue.assign(2, 0.0);
    pe.e_proprio.assign(2, 0.0);
    pe.e_visual.assign(kVisualLen, 0.0);
    pe.e_mu.assign(L.size(), 0.0);
    return pe;
}
}  // namespace

TEST_CASE("free energy") {
    BeliefLayout L;
    GeneralizedBelief gb(L);
    SensoryBundle s;
    DiagonalPrecision I2(std::vector<double>(2, 1.0)), IL(std::vector<double>(kVisualLen, 1.0)),
        IM(std::vector<double>(L.size(), 1.0));
    PredictionError pe = zero_errors(L);
    CHECK(free_energy(gb, s, I2, I2, IL, IM, pe) == doctest::Approx(0.0));

    // doubling one precision entry with error e adds 1/2 * pi * e^2 and subtracts 1/2 ln 2
    pe.e_proprio = {0.3, -0.2};
    DiagonalPrecision P({1.5, 2.0});
    const double F1 = free_energy(gb, s, I2, P, IL, IM, pe);
    DiagonalPrecision P2({3.0, 2.0});
    const double F2 = free_energy(gb, s, I2, P2, IL, IM, pe);
    CHECK(F2 - F1 == doctest::Approx(0.5 * 1.5 * 0.09 - 0.5 * std::log(2.0)));

    gb.mu[3] = std::nan("");
    CHECK_THROWS_AS(free_energy(gb, s, I2, I2, IL, IM, pe), NumericError);
}

TEST_CASE("belief layout") {
    BeliefLayout L;
    CHECK(L.size() == 10);
    CHECK(L.vis_u() == 4);
    CHECK(L.vis_v() == 5);
    CHECK(L.presence() == 6);
    CHECK(L.amp() == 7);
    CHECK(L.foc_u() == 8);
    CHECK(L.foc_v() == 9);
    BeliefLayout W(5);
    CHECK(W.size() == 12);
    CHECK(W.presence() == 6);
    CHECK(W.amp() == 9);
    CHECK_THROWS(BeliefLayout(2));

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (const BeliefLayout& lay : {L, W}) {
        std::vector<double> mu(lay.size());
        for (double& x : mu) x = n(rng);
        CHECK(lay.join(lay.split(mu)) == mu);
    }
}

TEST_CASE("bounds are enforced") {
    GeneralizedBelief gb(BeliefLayout{});
    auto& L = gb.layout;
    gb.mu[L.presence()] = 1.3;
    gb.mu[L.amp()] = -0.2;
    gb.mu[L.foc_u()] = -1.4;
    gb.mu[L.vis_v()] = 2.0;
    gb.enforce_bounds();
    CHECK(gb.mu[L.presence()] == 1.0);
    CHECK(gb.mu[L.amp()] == 0.0);
    CHECK(gb.mu[L.foc_u()] == -1.0);
    CHECK(gb.mu[L.vis_v()] == 1.0);
    CHECK(gb.finite());
}
