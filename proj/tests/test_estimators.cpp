#include "monolab/estimators.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace monolab;

namespace {

const double kA = 0.5;

// OU(rate 1) from z: Z_t ~ N(z e^{-t}, (1 - e^{-2t})/2).
double ou_mean(double z, double t) { return z * std::exp(-t); }
double ou_var(double t) { return (1.0 - std::exp(-2.0 * t)) / 2.0; }

}  // namespace

TEST_CASE("estimate and merge") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(2.0, 3.0);
  std::vector<double> x(1001);
  for (auto& v : x) v = g(rng);
  const auto all = Estimate::from_samples(x);
  const auto a = Estimate::from_samples(std::span<const double>(x).first(400));
  const auto b = Estimate::from_samples(std::span<const double>(x).subspan(400));
  const auto m = a.merge(b);
  CHECK(m.n == all.n);
  CHECK(m.mean == doctest::Approx(all.mean).epsilon(1e-13));
  CHECK(m.std_error == doctest::Approx(all.std_error).epsilon(1e-12));
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  CHECK(all.std_error == doctest::Approx(std::sqrt(ss / 1000.0 / 1001.0)).epsilon(1e-12));
  CHECK(Estimate::exact(3.0).std_error == 0.0);
}

TEST_CASE("one-sided verdicts") {
  CHECK(one_sided_verdict(1.0, 2.0, 0.1, 0.5) == Verdict::Pass);
  CHECK(one_sided_verdict(2.05, 2.0, 0.1, 0.5) == Verdict::Pass);
  CHECK(one_sided_verdict(2.05, 2.0, 0.6, 0.5) == Verdict::Inconclusive);
  CHECK(one_sided_verdict(2.2, 2.0, 0.1, 0.5) == Verdict::Fail);
  CHECK(worst(Verdict::Pass, Verdict::Inconclusive) == Verdict::Inconclusive);
  CHECK(worst(Verdict::Fail, Verdict::Inconclusive) == Verdict::Fail);
}

TEST_CASE("effective sample size") {
  const std::vector<double> w(10, 0.3);
  CHECK(effective_sample_size(w) == doctest::Approx(10.0));
  const std::vector<double> one = {1.0, 0.0, 0.0};
  CHECK(effective_sample_size(one) == 1.0);
}

TEST_CASE("semigroup estimates") {
  const auto m = build_ou_oracle(1, 1.0);
  const auto one = TestFunction::bounded(m.space, Vec::Zero(1), 1.0);
  const auto e1 = semigroup_estimate(m, Vec::Constant(1, 1.0), 1.0, 0.01, one, 500, 1, false);
  CHECK(e1.mean == 1.0);
  CHECK(e1.std_error == 0.0);
  const auto e0 = semigroup_estimate(m, Vec::Constant(1, 1.0), 1.0, 0.01, one, 500, 1, true);
  CHECK(e0.mean == 0.0);
  CHECK(e0.std_error == 0.0);

  const auto f = TestFunction::exp_linear(m.space, Vec::Constant(1, kA));
  const auto at0 = semigroup_estimate(m, Vec::Constant(1, 1.0), 0.0, 0.01, f, 10, 1, false);
  CHECK(at0.mean == std::exp(kA));
  CHECK(at0.std_error == 0.0);
  CHECK_THROWS(semigroup_estimate(m, Vec::Constant(1, 1.0), 1.0, 0.01, f, 0, 1, false));

  const auto lg = semigroup_estimate(m, Vec::Constant(1, 1.0), 1.0, 1e-3, f, 20000, 2, true);
  CHECK(std::abs(lg.mean - kA * std::exp(-1.0)) <= 3.0 * lg.std_error);
  CHECK(kA * std::exp(-1.0) == doctest::Approx(0.18394).epsilon(1e-4));
  const auto pf = semigroup_estimate(m, Vec::Constant(1, 1.0), 1.0, 1e-3, f, 20000, 2, false);
  const double log_pf = kA * ou_mean(1.0, 1.0) + kA * kA * ou_var(1.0) / 2.0;
  CHECK(log_pf == doctest::Approx(0.23798).epsilon(1e-4));
  CHECK(std::abs(std::log(pf.mean) - log_pf) <= 3.0 * pf.std_error / pf.mean);
}

TEST_CASE("Harnack check") {
  const auto dw = build_double_well();
  const auto setup = CouplingSetup::make(dw, 2.0, Frame::UnderQ);
  const Vec a = (Vec(2) << 0.5, 0.5).finished();
  const auto f = TestFunction::bounded(dw.space, a, 1.0);

  SUBCASE("z = zbar reduces to Jensen on the sample") {
    const Vec z = Vec::Ones(2);
    const auto r = harnack_check(dw, setup, z, z, 1.0, 0.01, f, 2000, 3);
    CHECK(r.terms[1].second >= r.lhs.mean);
    CHECK(r.pass());
  }
  SUBCASE("constant f") {
    const auto one = TestFunction::bounded(dw.space, a, 0.0);
    const auto r = harnack_check(dw, setup, Vec::Ones(2), Vec::Zero(2), 1.0, 0.01, one, 100, 3);
    CHECK(r.lhs.mean == 0.0);
    CHECK(r.slack == 0.0);
    CHECK(r.pass());
    CHECK(r.trivial);
  }
  SUBCASE("double-well defaults decompose into Phi and Psi") {
    const auto r = harnack_check(dw, setup, Vec::Ones(2), Vec::Zero(2), 1.0, 0.01, f, 2000, 4);
    CHECK(r.pass());
    CHECK(r.terms[2].first == "Phi");
    CHECK(r.terms[2].second == doctest::Approx(2.0));
    CHECK(r.terms[3].first == "Psi");
    CHECK(r.terms[3].second == doctest::Approx(std::exp(-1.0) * std::sqrt(0.5) * std::sqrt(2.0)));
  }
  SUBCASE("the oracle family needs an override") {
    const auto ou = build_ou_oracle(1, 1.0);
    const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
    const auto g = TestFunction::exp_linear(ou.space, Vec::Constant(1, kA));
    CHECK_THROWS(harnack_check(ou, s, Vec::Constant(1, 1.0), Vec::Zero(1), 1.0, 0.01, g, 10, 1));
  }
}

TEST_CASE("OU Harnack oracle") {
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const auto g = TestFunction::exp_linear(ou.space, Vec::Constant(1, kA));
  const double lhs = kA * std::exp(-1.0);
  const double log_pf_zbar = kA * kA * ou_var(1.0) / 2.0;
  const double phi = 1.0 / 8.0;
  const double psi = std::exp(-2.0) * kA;
  const double rhs = log_pf_zbar + phi + psi;
  CHECK(lhs <= rhs);
  CHECK(rhs == doctest::Approx(0.24671).epsilon(1e-4));
  const auto r = harnack_check(ou, s, Vec::Constant(1, 1.0), Vec::Zero(1), 1.0, 1e-3, g, 20000, 5,
                               IntegratorConfig{}, HarnackOptions{true});
  CHECK(r.pass());
  CHECK(r.terms[2].second == doctest::Approx(phi).epsilon(1e-14));
  CHECK(r.terms[3].second == doctest::Approx(psi).epsilon(1e-14));
  CHECK(std::abs(r.lhs.mean - lhs) <= 3.0 * r.lhs.std_error);
  CHECK(std::abs(r.rhs.mean - rhs) <= 3.0 * r.rhs.std_error);
}

TEST_CASE("entropy, martingale and contraction on the OU pair") {
  const auto ou = build_ou_oracle(1, 1.0);
  const double dt = 1e-3;
  const auto grid = TimeGrid::make(2.0, dt, {0.0, 0.25, 0.5, 1.0, 1.5, 2.0});
  const auto q = simulate_coupled(CouplingSetup::make(ou, 1.0, Frame::UnderQ), ou, Vec::Constant(1, 1.0),
                                  Vec::Zero(1), grid, 64, 6);

  SUBCASE("entropy matches the discrete and continuous closed forms") {
    const auto reps = entropy_check(q, ou);
    const double rho = (1.0 - dt) / (1.0 + dt);
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const auto steps = grid.obs_steps[k];
      // half of the left Riemann sum of lambda^2 rho^{2j} dt
      const double discrete = 0.5 * dt * (1.0 - std::pow(rho, 2.0 * steps)) / (1.0 - rho * rho);
      const double t = grid.time(steps);
      CHECK(reps[k].lhs.mean == doctest::Approx(discrete).epsilon(1e-9));
      CHECK(std::abs(discrete - (1.0 - std::exp(-4.0 * t)) / 8.0) <= 2.0 * dt);
      CHECK(reps[k].rhs.mean == doctest::Approx(0.125));
    }
    CHECK(reps.front().pass());
  }
  SUBCASE("contraction is the equality case with slope -gamma") {
    const auto c = contraction_check(q, 0.2);
    CHECK(std::abs(c.slope + 4.0) <= 0.05);
    CHECK(c.slope_pass);
  }
  SUBCASE("martingale at t = 0 is exactly one") {
    const auto p = simulate_coupled(CouplingSetup::make(ou, 1.0, Frame::UnderP), ou, Vec::Constant(1, 1.0),
                                    Vec::Zero(1), grid, 2000, 7);
    const auto reps = martingale_check(p);
    CHECK(reps.front().lhs.mean == 1.0);
    CHECK(reps.front().lhs.std_error == 0.0);
    for (const auto& r : reps) CHECK(r.verdict != Verdict::Fail);
    CHECK_THROWS(martingale_check(q));
  }
}

TEST_CASE("coincident starting points") {
  const auto dw = build_double_well();
  const Vec z = Vec::Ones(2);
  const auto grid = TimeGrid::uniform(1.0, 0.01, 5);
  const auto q = simulate_coupled(CouplingSetup::make(dw, 2.0, Frame::UnderQ), dw, z, z, grid, 50, 1);
  for (const auto& r : entropy_check(q, dw)) {
    CHECK(r.lhs.mean == 0.0);
    CHECK(r.pass());
  }
  const auto c = contraction_check(q);
  CHECK(c.trivial);
  CHECK(c.verdict == Verdict::Pass);

  const auto p = simulate_coupled(CouplingSetup::make(dw, 2.0, Frame::UnderP), dw, z, z, grid, 50, 1);
  for (const auto& r : martingale_check(p)) {
    CHECK(r.lhs.mean == 1.0);
    CHECK(r.pass());
  }
  const auto f = TestFunction::bounded(dw.space, (Vec(2) << 0.5, 0.5).finished(), 1.0);
  CHECK(young_decomposition_check(p, grid.n_obs() - 1, f).pass());
}

TEST_CASE("gradient estimate") {
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const Vec d = Vec::Ones(1);
  SUBCASE("constant f") {
    const auto one = TestFunction::bounded(ou.space, Vec::Zero(1), 2.0);
    const auto r = gradient_check(ou, s, Vec::Constant(1, 1.0), d, 1.0, 0.01, one, 100, 1);
    CHECK(r.lhs.mean == 0.0);
    CHECK(r.pass());
  }
  SUBCASE("t = 0") {
    const auto f = TestFunction::bounded(ou.space, Vec::Constant(1, 0.7), 1.2);
    const Vec z = Vec::Constant(1, 0.4);
    const auto r = gradient_check(ou, s, z, d, 0.0, 0.01, f, 10, 1);
    CHECK(r.lhs.mean == doctest::Approx(std::abs(f.gradient(z)[0])).epsilon(1e-5));
    CHECK(r.lhs.mean <= f.grad_bound());
    CHECK(r.pass());
  }
  SUBCASE("OU oracle derivative a e^{-t} P_t f") {
    const auto f = TestFunction::exp_linear(ou.space, Vec::Constant(1, kA));
    const double t = 1.0;
    const auto r = gradient_check(ou, s, Vec::Constant(1, 1.0), d, t, 1e-3, f, 20000, 2);
    const double pf = std::exp(kA * ou_mean(1.0, t) + kA * kA * ou_var(t) / 2.0);
    const double oracle = kA * std::exp(-t) * pf;
    CHECK(std::abs(r.lhs.mean - oracle) <= 3.0 * r.lhs.std_error + 1e-3 * oracle);
    CHECK(r.pass());
  }
  SUBCASE("direction must be a unit vector") {
    const auto f = TestFunction::bounded(ou.space, Vec::Constant(1, 0.7), 1.2);
    CHECK_THROWS(gradient_check(ou, s, Vec::Zero(1), 2.0 * d, 1.0, 0.01, f, 10, 1));
  }
}

TEST_CASE("irreducibility probe") {
  const auto dw = build_double_well();
  const std::vector<Vec> starts = {(Vec(2) << 0, 2).finished(), (Vec(2) << 0, -2).finished()};
  const auto big = irreducibility_probe(dw, starts, Vec::Zero(2), 1e3, 0.5, {1.0, 2.0}, 0.01, 100, 1);
  for (const auto& row : big.rows) CHECK(row.frequency.mean == 1.0);
  CHECK(big.all_positive);
  CHECK_THROWS(irreducibility_probe(dw, starts, Vec::Zero(2), 1.0, 0.5, {1.0}, 0.01, 0, 1));
}

TEST_CASE("ergodicity probe with a constant observable") {
  const auto ou = build_ou_oracle(1, 1.0);
  const Observable one{"one", [](VecCRef) { return 1.0; }};
  const auto r = ergodicity_probe(ou, Vec::Constant(1, 2.0), Vec::Constant(1, -2.0), one, 2.0, 0.01, 50, 1);
  CHECK(r.time_average.mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.ensemble_z.mean == 1.0);
  CHECK(r.ensemble_zbar.mean == 1.0);
  CHECK(r.chains_agree);
}

TEST_CASE("Young decomposition on the double-well") {
  const auto dw = build_double_well();
  const auto grid = TimeGrid::uniform(1.0, 0.01, 4);
  const auto p = simulate_coupled(CouplingSetup::make(dw, 2.0, Frame::UnderP), dw, Vec::Ones(2), Vec::Zero(2), grid,
                                  2000, 2);
  const auto f = TestFunction::bounded(dw.space, (Vec(2) << 0.5, 0.5).finished(), 1.0);
  CHECK(young_decomposition_check(p, grid.n_obs() - 1, f).pass());
  const auto one = TestFunction::bounded(dw.space, (Vec(2) << 0.5, 0.5).finished(), 0.0);
  CHECK(young_decomposition_check(p, grid.n_obs() - 1, one).pass());
}
