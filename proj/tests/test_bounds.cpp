#include "doctest.h"
#include "strobe/bounds.hpp"

#include <cmath>
#include <random>

using namespace strobe;

TEST_CASE("d_numeric: trivial limits") {
  for (double c : {0.3, 1.0})
    for (double x : {-3.0, 0.0, 2.0}) CHECK(std::abs(d_numeric(c, x, 0.1, 1.0)) < 1e-14);
  CHECK(std::abs(d_numeric(0.0, 1.0, 0.1, 0.2)) == 0.0);
  CHECK_THROWS(d_numeric(0.5, 1.0, 0.1, 0.0));
}

TEST_CASE("d_numeric converges to d0_closed as R shrinks") {
  for (double x : {-4.0, 0.5, 7.5}) {
    const cplx limit = d0_closed(0.8, x, 0.15);
    double prev = kInfinity;
    for (double R : {1e-3, 1e-4, 1e-5, 1e-6}) {
      const double err = std::abs(d_numeric(0.8, x, 0.15, R) - limit);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev <= 1e-6);
  }
}

TEST_CASE("d0_closed: zeros and removable points") {
  CHECK(std::abs(d0_closed(0.6, 1.3, 0.0)) < 1e-15);
  CHECK(std::abs(d0_closed(0.0, 1.3, 0.1)) < 1e-15);
  // d_numeric carries an O(R eps) offset from the limit, so R = 1e-9 is the reference here
  for (double x : {0.1 + 1e-6, 0.1, 0.1 - 3e-5, 0.0, 2e-5})
    CHECK(std::abs(d0_closed(0.7, x, 0.1) - d_numeric(0.7, x, 0.1, 1e-9)) <= 1e-8);
}

TEST_CASE("d0_regime") {
  CHECK(std::abs(d0_regime(1.0, 0.01, 0.2, Regime::I) - cplx(0, 0.1)) < 1e-15);
  CHECK(std::abs(d0_regime(1.0, 0.3, 0.2, Regime::II) - cplx(0, 0.1)) < 1e-15);
  CHECK(std::abs(d0_regime(1.0, 20.0, 0.2, Regime::III) - cplx(-0.01, 0)) < 1e-15);
  CHECK(d0_regime(0.4, 0.01, 0.2, Regime::I) == d0_regime(0.4, 0.05, 0.2, Regime::I));
  const cplx exact = d0_closed(0.7, 0.05, 1e-4);
  CHECK(std::abs(d0_regime(0.7, 0.05, 1e-4, Regime::II) - exact) <= 0.05 * std::abs(exact));
}

TEST_CASE("classify_regime") {
  CHECK(classify_regime(0.1, 0.0, 0.02).regime == Regime::I);
  const RegimeCheck iii = classify_regime(4e-4, 0.0, 8.0, 0.2, true);
  CHECK(iii.regime == Regime::III);
  CHECK(iii.one_sided_caveat);
  CHECK_FALSE(classify_regime(4e-4, 0.0, 8.0, 0.2, false).one_sided_caveat);
  CHECK(classify_regime(0.005, 0.0, 1.0).regime == Regime::none);
  CHECK(classify_regime(1e-4, 0.0, 0.05).regime == Regime::II);
  const RegimeCheck r = classify_regime(0.1, 0.0, 0.02);
  CHECK(r.scale_over_eps == doctest::Approx(0.2));
  CHECK(r.eps_over_scale == doctest::Approx(5.0));
  // stricter margin drops the same point out of regime I
  CHECK(classify_regime(0.1, 0.0, 0.02, 0.1).regime == Regime::none);
}

TEST_CASE("table_bound: stroboscopic term") {
  RegimeParams p;
  p.eps_max = 0.1;
  p.x_c = 0.02;
  p.N = 10;
  p.C = 9;
  p.f0 = 8e-6;
  p.sup_pos = p.sup_all = 8e-6;
  p.a_B = 50;
  const BoundReport b = table_bound(p);
  CHECK(b.regime == Regime::I);
  CHECK(b.total == doctest::Approx(7.2e-4).epsilon(1e-12));
  CHECK(b.multi_gate == 0.0);
  CHECK(b.total == b.stroboscopic + b.multi_gate);

  p.R_M = 0.1;
  const BoundReport m = table_bound(p);
  CHECK(m.multi_gate == doctest::Approx(100 * 8 * 0.1 * 8e-6));
  CHECK(m.total == doctest::Approx(m.stroboscopic + m.multi_gate));

  RegimeParams q = p;
  q.eps_max = 4e-4;
  q.x_c = 8;
  q.a_B = 1.0 / 8;
  q.R_M = 0;
  const BoundReport iii = table_bound(q);
  CHECK(iii.regime == Regime::III);
  CHECK(iii.total == doctest::Approx(100 * 9 * 4e-4 * (1.0 / 8) * 8e-6 / 10));

  q.x_c = 1;
  q.eps_max = 0.005;
  CHECK_THROWS(table_bound(q));
  CHECK_NOTHROW(table_bound(q, 0.2, false, Regime::II));
  p.C = 0;
  CHECK_THROWS(table_bound(p));
}

TEST_CASE("table_bound is monotone in N, R_M and eps_max") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    RegimeParams p;
    p.x_c = 1e-3;
    p.eps_max = 0.01 + 0.18 * u(rng);
    p.N = 1 + std::floor(100 * u(rng));
    p.R_M = u(rng);
    p.C = 9;
    p.f0 = 1e-5 * u(rng);
    p.sup_pos = p.sup_all = p.f0;
    const double base = table_bound(p).total;
    RegimeParams q = p;
    q.N += 1;
    CHECK(table_bound(q).total >= base);
    q = p;
    q.R_M += 0.1;
    CHECK(table_bound(q).total >= base);
    q = p;
    q.eps_max = std::min(0.2, q.eps_max * 1.05);
    CHECK(table_bound(q).total >= base);
  }
}

TEST_CASE("regime parameters for the weak-coupling toric configuration") {
  const ModelSpec m = toric_vertex_model(0.1);
  const BathSpec b = ohmic_bath(0.02, 0.02, 40.0);
  const RegimeParams p = regime_params(m, b, 1.0, 10, 0.01);
  CHECK(p.C == 9);
  CHECK(p.eps_max == doctest::Approx(0.1));
  CHECK(p.x_c == doctest::Approx(0.02));
  CHECK(p.f0 == doctest::Approx(correlation(0.0, b).real()));
  CHECK(table_bound(p, 0.2, true).regime == Regime::I);
}

TEST_CASE("zero-temperature Ohmic: J D0 integral against its first-order form") {
  const double eta = 0.02;
  for (double xc : {0.02, 0.5, 1.0}) {
    const cplx a = jd_integral(1e-3, eta, xc);
    CHECK(std::abs(a - jd_integral_direct(1e-3, eta, xc)) <= 1e-10);
    CHECK(std::abs(a - jd_first_order(1e-3, eta, xc)) <= 1e-8);
  }
  for (double xc : {0.5, 1.0, 2.0}) CHECK(std::abs(jd_integral(0.005, 5e-4, xc) - jd_first_order(0.005, 5e-4, xc)) <= 1e-8);
  CHECK(std::abs(jd_integral(0.1, eta, 0.02) - jd_integral_direct(0.1, eta, 0.02)) <= 1e-10);
}

TEST_CASE("perturbative difference map: structure") {
  const ModelSpec m = toric_vertex_model(0.1);
  const BathSpec b = ohmic_bath(0.02, 0.02, 40.0);
  const PulseSchedule s = gate_schedule(m, 1.0, 0.1);
  const PerturbativeMap P = perturbative_difference(3, m, s, nullptr, b);
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  Operator X(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) X(i, j) = cplx(n(rng), n(rng));
  const double scale = P.norm() * X.norm();
  CHECK((strobe::apply(P.delta3, X) - strobe::apply(P.delta2, X.adjoint()).adjoint()).norm() <= 1e-10 * scale);
  CHECK(std::abs(strobe::apply(P.total(), X).trace()) <= 1e-8 * scale);
  CHECK(P.norm() > 0);

  const PerturbativeMap same = perturbative_difference_pair(3, m, &s, &s, b, 1.0);
  CHECK(same.norm() <= 1e-15);
  const PerturbativeMap tar = perturbative_difference_pair(2, m, nullptr, nullptr, b, 1.0);
  CHECK(tar.norm() <= 1e-15);
}

TEST_CASE("perturbative Delta1 against its regime II approximation") {
  const ModelSpec m = toric_vertex_model(1e-3);
  const BathSpec b = ohmic_bath(1e-3, 0.05, kInfinity);
  const PulseSchedule s1 = single_gate_schedule(m, 1.0);
  const PerturbativeMap P = perturbative_difference_pair(2, m, nullptr, &s1, b, 1.0);
  const SuperOperator A = delta1_regime_approx(2, m, b, 1.0);
  CHECK((P.delta1 - A).norm() <= 0.05 * A.norm());
}
