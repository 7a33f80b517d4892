// bath.hpp — oscillator-bath spectral densities, correlation functions and kernel tables.
#pragma once

#include "strobe/operators.hpp"

#include <limits>
#include <string>
#include <vector>

namespace strobe {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct DiscreteMode {
  double omega;  // mode frequency, > 0
  cplx g;        // coupling amplitude
};

struct BathSpec {
  // ohmic: J(ν) = η ν^w e^{-ν/ν_c} for ν ≥ 0.
  // shifted: J(ν) = η |ν-ν̄|^w e^{-|ν-ν̄|/ν_c} on the whole line, zero temperature only.
  enum class Family { ohmic, shifted, discrete };

  Family family = Family::ohmic;
  double eta = 0.0;
  double w = 1.0;
  double nu_c = 1.0;
  double center = 0.0;  // ν̄, shifted family only
  std::vector<DiscreteMode> modes;
  double beta = kInfinity;
  bool independent = true;  // f_kl = δ_kl f; otherwise f_kl = f for every pair

  // Largest frequency the correlation function oscillates or decays with.
  double frequency_scale() const;
};

BathSpec ohmic_bath(double eta, double nu_c, double beta, double w = 1.0);
BathSpec discrete_bath(std::vector<DiscreteMode> modes, double beta, bool independent);
void validate(const BathSpec& spec);

double thermal_occupation(double nu, double beta);
double spectral_density(double nu, const BathSpec& spec);

enum class CorrelationMethod { automatic, closed_form, quadrature };

// f(s) = ∫ J(ν) {[1+N(ν)] e^{-iνs} + N(ν) e^{iνs}} dν, or the mode sum.
cplx correlation(double s, const BathSpec& spec, CorrelationMethod method = CorrelationMethod::automatic);

// Σ_{n≥0} (a+n)^{-s} for Re a > 0 and real s > 1.
cplx hurwitz_zeta(double s, cplx a);

// f(0), which bounds |f(s)| for every family here since all spectral functions are nonnegative.
double correlation_sup(const BathSpec& spec);

struct CorrelationKernel {
  double delta = 0.0;
  std::vector<cplx> values;      // f(mΔ)
  std::vector<cplx> cumulative;  // F(mΔ) = ∫_0^{mΔ} f
  BathSpec spec;

  void write_csv(const std::string& path) const;
};

CorrelationKernel kernel_table(const BathSpec& spec, double delta, int n_max);

// ∫_a^b f(u) e^{iωu} du by composite 8-point Gauss–Legendre, pieces no longer than h_max.
cplx weighted_integral(const BathSpec& spec, double a, double b, double omega, double h_max);

// Piece length that keeps composite Gauss–Legendre at roundoff for this bath.
double quadrature_piece(const BathSpec& spec, double T, double extra_frequency = 0.0);

// Streams H_ω(p) = ∫_0^p f(u) e^{iωu} du over lattice points p = mT + o.
class LatticeIntegrals {
 public:
  LatticeIntegrals(const BathSpec& spec, double T, std::vector<double> offsets, std::vector<double> freqs);

  // values at cycle row m, indexed [offset * n_freq + freq]; rows must be requested
  // in nondecreasing order of m, and only the three most recent rows stay valid
  const std::vector<cplx>& row(long m);
  std::size_t offset_count() const { return offsets_.size(); }
  std::size_t freq_count() const { return freqs_.size(); }
  const std::vector<double>& offsets() const { return offsets_; }

 private:
  void advance();

  BathSpec spec_;
  double T_;
  double h_max_;
  std::vector<double> offsets_;
  std::vector<double> freqs_;
  long next_row_ = 0;
  double cursor_ = 0.0;
  std::vector<cplx> running_;
  std::vector<std::vector<cplx>> rows_;  // ring of three
};

enum class UnitDirection { to_dimensionless, to_dimensional };

struct UnitParams {
  double frequency = 0;  // ω or γ  <->  ε
  double cutoff = 0;     // ν_c     <->  x_c
  double beta = kInfinity;  // β    <->  β̃
  double eta = 0;        // η       <->  η̃
  double w = 1;
  double tau_g = 0;      // τ_g     <->  R
};

UnitParams convert_units(const UnitParams& p, UnitDirection direction, double T);

}  // namespace strobe
