#include "doctest.h"
#include "strobe/oracle.hpp"
#include "strobe/tcl2.hpp"

#include <algorithm>
#include <cmath>

using namespace strobe;

namespace {

double max_deviation(const std::vector<Operator>& a, const std::vector<Operator>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, trace_distance(a[i], b[i]));
  return d;
}

JointSpec one_mode(const ModelSpec& m, cplx g, int levels = 4) {
  JointSpec js;
  js.model = &m;
  js.modes = {{0.4, g}};
  js.n_max = levels;
  return js;
}

}  // namespace

TEST_CASE("truncated annihilation operator") {
  const Operator b = annihilation(2);
  Eigen::SelfAdjointEigenSolver<Operator> es(b.adjoint() * b);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
  const Operator b4 = annihilation(4);
  CHECK(std::abs(b4(2, 3) - std::sqrt(3.0)) < 1e-15);
  CHECK_THROWS(annihilation(0));
}

TEST_CASE("joint Hamiltonian") {
  const ModelSpec m = toric_vertex_model(0.5);
  JointSpec js = one_mode(m, cplx(0.01, 0.02));
  CHECK(js.dim() == 64);
  const Operator H = joint_hamiltonian(js, true);
  CHECK(is_hermitian(H));
  CHECK(is_hermitian(joint_hamiltonian(js, false)));

  js.modes[0].g = 0;
  Eigen::SelfAdjointEigenSolver<Operator> es(joint_hamiltonian(js, true));
  std::vector<double> expect;
  for (int s = 0; s < 16; ++s)
    for (int n = 0; n < 4; ++n) expect.push_back((s < 8 ? -0.25 : 0.25) + 0.4 * n);
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 64; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("zero coupling reproduces closed evolution") {
  const ModelSpec m = toric_vertex_model(0.5);
  const PulseSchedule s = gate_schedule(m, 1.0, 0.1);
  const Operator rho0 = initial_state(m);
  const JointSpec js = one_mode(m, 0.0);
  for (Picture mu : {Picture::tar, Picture::sim}) {
    const auto rec = exact_reduced_evolution(rho0, js, &s, mu, 1.0, 5);
    REQUIRE(rec.samples.size() == 6);
    for (const auto& r : rec.samples) CHECK((r - rho0).norm() < 1e-12);
  }
}

TEST_CASE("reduced states are physical and the joint norm is kept") {
  const ModelSpec m = toric_vertex_model(0.5);
  const PulseSchedule s = gate_schedule(m, 1.0, 0.1);
  JointSpec js = one_mode(m, 0.05);
  js.beta = 2.0;
  const auto rec = exact_reduced_evolution(initial_state(m), js, &s, Picture::sim, 1.0, 10);
  for (double n : rec.norm_dev) CHECK(n <= 1e-10);
  for (const auto& r : rec.samples) {
    CHECK(std::abs(r.trace() - 1.0) <= 1e-10);
    CHECK(hermiticity_deviation(r) <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (r + r.adjoint()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("truncation converges at weak coupling") {
  const ModelSpec m = toric_vertex_model(0.5);
  const PulseSchedule s = gate_schedule(m, 1.0, 0.1);
  const Operator rho0 = initial_state(m);
  const auto r4 = exact_reduced_evolution(rho0, one_mode(m, 0.006, 4), &s, Picture::sim, 1.0, 20);
  const auto r8 = exact_reduced_evolution(rho0, one_mode(m, 0.006, 8), &s, Picture::sim, 1.0, 20);
  CHECK(max_deviation(r4.samples, r8.samples) <= 1e-6);
  CHECK_FALSE(r4.leakage_flag);
}

TEST_CASE("TCL-2 agrees with the exact reduced dynamics to fourth order in g") {
  const ModelSpec m = toric_vertex_model(0.5);
  const PulseSchedule s = gate_schedule(m, 1.0, 0.1);
  const Operator rho0 = initial_state(m);
  const std::vector<double> gs{0.0015, 0.003, 0.006, 0.012};
  for (Picture mu : {Picture::tar, Picture::sim}) {
    std::vector<double> lx, ly;
    for (double g : gs) {
      const JointSpec js = one_mode(m, g);
      const PulseSchedule* sch = mu == Picture::sim ? &s : nullptr;
      const auto exact = exact_reduced_evolution(rho0, js, sch, mu, 1.0, 20);
      const auto tcl = evolve(rho0, mu, m, sch, js.equivalent_bath(), 1.0, 1.0 / 40, 20);
      const double d = max_deviation(exact.samples, tcl.samples);
      CHECK(d <= 5e-3);
      lx.push_back(std::log(g));
      ly.push_back(std::log(d));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    CHECK(sxy / sxx >= 3.5);
  }
}

TEST_CASE("equivalent bath reproduces the mode correlation") {
  const ModelSpec m = toric_vertex_model(0.5);
  const JointSpec js = one_mode(m, cplx(0.003, 0.004));
  const BathSpec b = js.equivalent_bath();
  CHECK_FALSE(b.independent);
  CHECK(std::abs(correlation(0.0, b) - 2.5e-5) < 1e-18);
  CHECK(std::abs(correlation(1.0, b) - 2.5e-5 * std::exp(cplx(0, -0.4))) < 1e-18);
}

TEST_CASE("oracle input checks") {
  const ModelSpec m = toric_vertex_model(0.5);
  const Operator rho0 = initial_state(m);
  JointSpec js = one_mode(m, 0.01, 8);
  js.modes = {{0.4, 0.01}, {0.7, 0.01}, {1.1, 0.01}};
  CHECK(js.dim() == 16 * 512);
  CHECK_THROWS(exact_reduced_evolution(rho0, js, nullptr, Picture::tar, 1.0, 1));
  CHECK_THROWS(exact_reduced_evolution(rho0, one_mode(m, 0.01, 1), nullptr, Picture::tar, 1.0, 1));
  CHECK_THROWS(exact_reduced_evolution(rho0, one_mode(m, 0.01), nullptr, Picture::sim, 1.0, 1));
  JointSpec neg = one_mode(m, 0.01);
  neg.modes[0].omega = -1;
  CHECK_THROWS(exact_reduced_evolution(rho0, neg, nullptr, Picture::tar, 1.0, 1));
}
