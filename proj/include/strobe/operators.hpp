// operators.hpp — dense multi-qubit operators, spectra, distances, superoperators.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace strobe {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;

// Matrix acting on column-stacked vec(X); vec(L X R) = (R^T ⊗ L) vec(X).
using SuperOperator = Eigen::MatrixXcd;

enum class Axis { X, Y, Z };

struct PauliFactor {
  int site;  // 1-based qubit index; site 1 is the leftmost tensor factor
  Axis axis;
};

Operator kron(const Operator& a, const Operator& b);

Operator pauli_string(const std::vector<PauliFactor>& factors, int n_qubits);

// exp(i θ G) for Hermitian G, through its eigendecomposition.
Operator unitary_exp(const Operator& G, double theta);

struct SpectralDecomposition {
  std::vector<double> eigenvalues;   // distinct, ascending
  std::vector<Operator> projectors;  // one per distinct eigenvalue
  Eigen::MatrixXcd basis;            // orthonormal eigenvectors, grouped by level
  std::vector<int> level;            // level index of each basis column

  Operator reconstruct() const;
};

SpectralDecomposition hermitian_eig(const Operator& H, double rel_tol = 1e-8);

double trace_distance(const Operator& rho, const Operator& sigma);

Operator partial_trace(const Operator& rho, const std::vector<int>& dims,
                       const std::vector<int>& keep);

// Spectral norm in the normalized Pauli-string operator basis.
double superop_norm(const SuperOperator& S);

Eigen::VectorXcd vec(const Operator& X);
Operator unvec(const Eigen::VectorXcd& v, Eigen::Index dim);
Operator apply(const SuperOperator& S, const Operator& X);

// X -> L X R
SuperOperator sandwich(const Operator& L, const Operator& R);

// Columns are vec(P)/sqrt(d) for the 4^n Pauli strings, in base-4 order (I,X,Y,Z).
Eigen::MatrixXcd pauli_basis(int n_qubits);
SuperOperator to_pauli_basis(const SuperOperator& S);

double hermiticity_deviation(const Operator& X);
bool is_hermitian(const Operator& X, double tol = 1e-10);

}  // namespace strobe
