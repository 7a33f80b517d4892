#include "doctest.h"
#include "strobe/operators.hpp"

#include <random>

using namespace strobe;

namespace {

Operator random_density(int d, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Operator G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = cplx(n(rng), n(rng));
  Operator rho = G * G.adjoint();
  return rho / rho.trace();
}

Operator random_hermitian(int d, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Operator G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = cplx(n(rng), n(rng));
  return G + G.adjoint();
}

Operator random_unitary(int d, std::mt19937& rng) { return unitary_exp(random_hermitian(d, rng), 1.0); }

}  // namespace

TEST_CASE("pauli_string: X1 X2 maps |00> to |11>") {
  const Operator P = pauli_string({{1, Axis::X}, {2, Axis::X}}, 2);
  CHECK(std::abs(P(3, 0) - 1.0) < 1e-15);
  CHECK(P.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("pauli_string: empty list is the identity") {
  CHECK((pauli_string({}, 3) - Operator::Identity(8, 8)).norm() == 0.0);
}

TEST_CASE("pauli_string: X1 Z2 Z3 X4 on five qubits is an involution with a ±1 spectrum of 16 each") {
  const Operator S = pauli_string({{1, Axis::X}, {2, Axis::Z}, {3, Axis::Z}, {4, Axis::X}}, 5);
  CHECK((S * S - Operator::Identity(32, 32)).norm() < 1e-13);
  Eigen::SelfAdjointEigenSolver<Operator> es(S);
  int plus = 0, minus = 0;
  for (int i = 0; i < 32; ++i) (es.eigenvalues()(i) > 0 ? plus : minus)++;
  CHECK(plus == 16);
  CHECK(minus == 16);
}

TEST_CASE("pauli_string rejects duplicate or out-of-range sites") {
  CHECK_THROWS(pauli_string({{1, Axis::X}, {1, Axis::Z}}, 2));
  CHECK_THROWS(pauli_string({{3, Axis::X}}, 2));
  CHECK_THROWS(pauli_string({{0, Axis::X}}, 2));
}

TEST_CASE("unitary_exp") {
  const Operator X = pauli_string({{1, Axis::X}}, 1);
  CHECK((unitary_exp(X, 0.0) - Operator::Identity(2, 2)).norm() < 1e-15);
  CHECK((unitary_exp(X, M_PI / 2) - cplx(0, 1) * X).norm() < 1e-14);
  const Operator G = pauli_string({{3, Axis::Y}, {4, Axis::X}}, 4);
  const Operator U = unitary_exp(G, M_PI / 4);
  CHECK((U * U - unitary_exp(G, M_PI / 2)).norm() < 1e-13);
  CHECK_THROWS(unitary_exp(Operator::Identity(2, 2) * cplx(0, 1), 1.0));
}

TEST_CASE("unitary_exp output is unitary up to d = 32") {
  std::mt19937 rng(1);
  for (int d : {2, 4, 16, 32}) {
    const Operator U = unitary_exp(random_hermitian(d, rng), 0.7);
    CHECK((U.adjoint() * U - Operator::Identity(d, d)).norm() <= 1e-12);
  }
}

TEST_CASE("hermitian_eig: toric vertex Hamiltonian has two rank-8 levels") {
  const double w = 1.3;
  const Operator H = -(w / 2) * pauli_string({{1, Axis::X}, {2, Axis::X}, {3, Axis::X}, {4, Axis::X}}, 4);
  const auto sd = hermitian_eig(H);
  REQUIRE(sd.eigenvalues.size() == 2);
  CHECK(sd.eigenvalues[0] == doctest::Approx(-w / 2));
  CHECK(sd.eigenvalues[1] == doctest::Approx(w / 2));
  for (const auto& P : sd.projectors) CHECK(std::abs(P.trace().real() - 8.0) < 1e-10);
  CHECK((sd.reconstruct() - H).norm() <= 1e-10 * H.norm());
}

TEST_CASE("hermitian_eig: identity") {
  const auto sd = hermitian_eig(Operator::Identity(4, 4));
  REQUIRE(sd.eigenvalues.size() == 1);
  CHECK(sd.eigenvalues[0] == doctest::Approx(1.0));
  CHECK((sd.projectors[0] - Operator::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("hermitian_eig: projector algebra on a random matrix") {
  std::mt19937 rng(2);
  const Operator H = random_hermitian(16, rng);
  const auto sd = hermitian_eig(H);
  Operator sum = Operator::Zero(16, 16);
  for (std::size_t i = 0; i < sd.projectors.size(); ++i) {
    sum += sd.projectors[i];
    for (std::size_t j = 0; j < sd.projectors.size(); ++j) {
      const Operator prod = sd.projectors[i] * sd.projectors[j];
      const Operator expect = i == j ? sd.projectors[i] : Operator::Zero(16, 16);
      CHECK((prod - expect).norm() <= 1e-10);
    }
  }
  CHECK((sum - Operator::Identity(16, 16)).norm() <= 1e-10);
  CHECK((sd.reconstruct() - H).norm() <= 1e-10 * H.norm());
  Operator skewed = H;
  skewed(0, 1) += 1.0;
  CHECK_THROWS(hermitian_eig(skewed));
}

TEST_CASE("trace_distance") {
  Operator a = Operator::Zero(2, 2), b = Operator::Zero(2, 2);
  a(0, 0) = 1;
  b(1, 1) = 1;
  CHECK(trace_distance(a, a) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));
  CHECK_THROWS(trace_distance(a, Operator::Identity(4, 4)));

  std::mt19937 rng(3);
  const Operator r = random_density(16, rng), s = random_density(16, rng), t = random_density(16, rng);
  Eigen::SelfAdjointEigenSolver<Operator> es(r - s);
  CHECK(trace_distance(r, s) == doctest::Approx(0.5 * es.eigenvalues().cwiseAbs().sum()).epsilon(1e-12));
  CHECK(trace_distance(r, s) == doctest::Approx(trace_distance(s, r)).epsilon(1e-14));
  CHECK(trace_distance(r, t) <= trace_distance(r, s) + trace_distance(s, t) + 1e-14);
  const Operator U = random_unitary(16, rng);
  CHECK(std::abs(trace_distance(U * r * U.adjoint(), U * s * U.adjoint()) - trace_distance(r, s)) <= 1e-10);
}

TEST_CASE("partial_trace") {
  std::mt19937 rng(4);
  const Operator rs = random_density(4, rng), rb = random_density(3, rng);
  CHECK((partial_trace(kron(rs, rb), {4, 3}, {0}) - rs).norm() < 1e-13);
  CHECK((partial_trace(kron(rs, rb), {4, 3}, {1}) - rb).norm() < 1e-13);

  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell(0) = bell(3) = 1 / std::sqrt(2.0);
  const Operator reduced = partial_trace(bell * bell.adjoint(), {2, 2}, {0});
  CHECK((reduced - 0.5 * Operator::Identity(2, 2)).norm() < 1e-15);

  const Operator joint = random_density(64, rng);
  const Operator sys = partial_trace(joint, {16, 4}, {0});
  CHECK(sys.rows() == 16);
  CHECK(std::abs(sys.trace() - 1.0) < 1e-13);
  CHECK(hermiticity_deviation(sys) < 1e-14);

  CHECK_THROWS(partial_trace(joint, {16, 3}, {0}));
  CHECK_THROWS(partial_trace(joint, {16, 4}, {}));
}

TEST_CASE("superop_norm") {
  CHECK(superop_norm(SuperOperator::Zero(4, 4)) == 0.0);
  CHECK(superop_norm(SuperOperator::Identity(16, 16)) == doctest::Approx(1.0));
  // X -> 2X, other Pauli directions -> 0, on one qubit
  const Eigen::MatrixXcd B = pauli_basis(1);
  SuperOperator diag = SuperOperator::Zero(4, 4);
  diag(1, 1) = 2.0;
  CHECK(superop_norm(B * diag * B.adjoint()) == doctest::Approx(2.0));
}

TEST_CASE("vec convention: vec(L X R) = (R^T ⊗ L) vec(X)") {
  std::mt19937 rng(5);
  const Operator L = random_hermitian(4, rng), R = random_unitary(4, rng), X = random_density(4, rng);
  CHECK((strobe::apply(sandwich(L, R), X) - L * X * R).norm() < 1e-12);
  CHECK((unvec(vec(X), 4) - X).norm() == 0.0);
  const Eigen::MatrixXcd B = pauli_basis(2);
  CHECK((B.adjoint() * B - Eigen::MatrixXcd::Identity(16, 16)).norm() < 1e-13);
}
