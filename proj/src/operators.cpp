#include "strobe/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace strobe {

namespace {

Eigen::Matrix2cd single_pauli(Axis a) {
  Eigen::Matrix2cd m;
  switch (a) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

bool is_power_of_two(Eigen::Index d) { return d > 0 && (d & (d - 1)) == 0; }

}  // namespace

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Operator pauli_string(const std::vector<PauliFactor>& factors, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("pauli_string: n_qubits must be positive");
  std::vector<int> axis_at(n_qubits + 1, -1);
  for (const auto& f : factors) {
    if (f.site < 1 || f.site > n_qubits)
      throw std::invalid_argument("pauli_string: site " + std::to_string(f.site) + " out of range");
    if (axis_at[f.site] >= 0)
      throw std::invalid_argument("pauli_string: duplicate site " + std::to_string(f.site));
    axis_at[f.site] = static_cast<int>(f.axis);
  }
  Operator out = Operator::Identity(1, 1);
  for (int q = 1; q <= n_qubits; ++q) {
    Operator factor = axis_at[q] < 0 ? Operator(Eigen::Matrix2cd::Identity())
                                     : Operator(single_pauli(static_cast<Axis>(axis_at[q])));
    out = kron(out, factor);
  }
  return out;
}

double hermiticity_deviation(const Operator& X) { return (X - X.adjoint()).norm(); }

bool is_hermitian(const Operator& X, double tol) {
  const double scale = std::max(1.0, X.norm());
  return hermiticity_deviation(X) <= tol * scale;
}

Operator unitary_exp(const Operator& G, double theta) {
  if (G.rows() != G.cols()) throw std::invalid_argument("unitary_exp: generator must be square");
  if (!is_hermitian(G, 1e-10)) throw std::invalid_argument("unitary_exp: generator is not Hermitian");
  Operator Gh = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(Gh);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases(i) = std::exp(cplx(0, theta * es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator SpectralDecomposition::reconstruct() const {
  Operator out = Operator::Zero(basis.rows(), basis.rows());
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) out += eigenvalues[i] * projectors[i];
  return out;
}

SpectralDecomposition hermitian_eig(const Operator& H, double rel_tol) {
  if (H.rows() != H.cols()) throw std::invalid_argument("hermitian_eig: matrix must be square");
  if (!is_hermitian(H, 1e-10)) throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (H + H.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = rel_tol * scale;

  SpectralDecomposition sd;
  sd.basis = es.eigenvectors();
  sd.level.resize(ev.size());
  // eigenvalues arrive ascending; cluster consecutive ones
  Eigen::Index start = 0;
  while (start < ev.size()) {
    Eigen::Index end = start + 1;
    while (end < ev.size() && ev(end) - ev(end - 1) <= tol) ++end;
    const Eigen::Index count = end - start;
    sd.eigenvalues.push_back(ev.segment(start, count).mean());
    Eigen::MatrixXcd V = sd.basis.middleCols(start, count);
    sd.projectors.push_back(V * V.adjoint());
    for (Eigen::Index i = start; i < end; ++i) sd.level[i] = static_cast<int>(sd.eigenvalues.size()) - 1;
    start = end;
  }
  return sd;
}

double trace_distance(const Operator& rho, const Operator& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::JacobiSVD<Operator> svd(rho - sigma);
  return 0.5 * svd.singularValues().sum();
}

Operator partial_trace(const Operator& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("partial_trace: subsystem dims must be positive");
    total *= d;
  }
  if (total != rho.rows() || rho.rows() != rho.cols())
    throw std::invalid_argument("partial_trace: dims do not match the operator");
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n || kept[k]) throw std::invalid_argument("partial_trace: bad keep index");
    kept[k] = true;
  }

  long d_keep = 1, d_trace = 1;
  for (int i = 0; i < n; ++i) (kept[i] ? d_keep : d_trace) *= dims[i];

  // full index for each (kept multi-index, traced multi-index)
  std::vector<long> full(d_keep * d_trace);
  std::vector<int> digit(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      digit[i] = static_cast<int>(rem % dims[i]);
      rem /= dims[i];
    }
    long a = 0, t = 0;
    for (int i = 0; i < n; ++i) {
      if (kept[i]) a = a * dims[i] + digit[i];
      else t = t * dims[i] + digit[i];
    }
    full[a * d_trace + t] = idx;
  }

  Operator out = Operator::Zero(d_keep, d_keep);
  for (long a = 0; a < d_keep; ++a)
    for (long b = 0; b < d_keep; ++b) {
      cplx acc = 0;
      for (long t = 0; t < d_trace; ++t) acc += rho(full[a * d_trace + t], full[b * d_trace + t]);
      out(a, b) = acc;
    }
  return out;
}

Eigen::VectorXcd vec(const Operator& X) {
  return Eigen::Map<const Eigen::VectorXcd>(X.data(), X.size());
}

Operator unvec(const Eigen::VectorXcd& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Operator>(v.data(), dim, dim);
}

Operator apply(const SuperOperator& S, const Operator& X) {
  if (S.cols() != X.size()) throw std::invalid_argument("apply: dimension mismatch");
  return unvec(S * vec(X), X.rows());
}

SuperOperator sandwich(const Operator& L, const Operator& R) { return kron(R.transpose(), L); }

Eigen::MatrixXcd pauli_basis(int n_qubits) {
  const Eigen::Index d = Eigen::Index(1) << n_qubits;
  const Eigen::Index count = d * d;
  Eigen::MatrixXcd B(count, count);
  const std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  for (Eigen::Index c = 0; c < count; ++c) {
    std::vector<PauliFactor> f;
    Eigen::Index rem = c;
    for (int q = n_qubits; q >= 1; --q) {
      const int code = static_cast<int>(rem % 4);
      rem /= 4;
      if (code > 0) f.push_back({q, axes[code - 1]});
    }
    B.col(c) = vec(pauli_string(f, n_qubits)) / std::sqrt(static_cast<double>(d));
  }
  return B;
}

SuperOperator to_pauli_basis(const SuperOperator& S) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(S.rows()))));
  if (d * d != S.rows() || S.rows() != S.cols() || !is_power_of_two(d))
    throw std::invalid_argument("to_pauli_basis: superoperator is not on a qubit register");
  int n = 0;
  while ((Eigen::Index(1) << n) < d) ++n;
  const Eigen::MatrixXcd B = pauli_basis(n);
  return B.adjoint() * S * B;
}

double superop_norm(const SuperOperator& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("superop_norm: matrix must be square");
  if (S.size() == 0) return 0.0;
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(S.rows()))));
  // the Pauli change of basis is unitary, so large registers skip it
  const SuperOperator M = (d * d == S.rows() && is_power_of_two(d) && d <= 16) ? to_pauli_basis(S) : S;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace strobe
