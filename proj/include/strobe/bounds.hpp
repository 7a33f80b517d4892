// bounds.hpp — D(c;x) integrals, regime classification, error bounds and the second-order channel difference.
#pragma once

#include "strobe/bath.hpp"
#include "strobe/models.hpp"

#include <string>

namespace strobe {

// ∫_0^c e^{ixa} [e^{iε(1-a)} - e^{iε[1-a/R]_+}] da by adaptive Gauss–Kronrod.
cplx d_numeric(double c, double x, double eps, double R);

// R → 0 limit of d_numeric, with series evaluation near x = 0 and x = ε.
cplx d0_closed(double c, double x, double eps);

enum class Regime { I, II, III, none };
std::string regime_name(Regime r);

// I & II: iεc(1 - c/2);  III: -(ε/x)[1 - (1-c) e^{ixc}]
cplx d0_regime(double c, double x, double eps, Regime regime);

struct RegimeCheck {
  Regime regime = Regime::none;
  double scale = 0;  // max(|x̄|, x_c)
  // raw ratios, so stricter margins can be applied by the reader
  double scale_over_eps = 0;
  double eps_over_scale = 0;
  bool regime_I = false;
  bool regime_II = false;
  bool regime_III = false;
  bool one_sided_caveat = false;  // III claimed for a spectrum with weight near x = 0
};

RegimeCheck classify_regime(double eps_max, double x_bar, double x_c, double margin = 0.2, bool one_sided = false);

struct RegimeParams {
  double eps_max = 0;
  double x_bar = 0;
  double x_c = 0;
  double N = 0;
  double R_M = 0;
  double C = 1;         // number of transition-frequency pairs
  double f0 = 0;        // f̃(0)
  double sup_pos = 0;   // sup_{a≥0} |f̃(a)|
  double sup_all = 0;   // sup_{a∈ℝ} |f̃(a)|
  double a_B = 0;       // 1/x_c
};

RegimeParams regime_params(const ModelSpec& model, const BathSpec& bath, double T, double N, double R_M);

struct BoundReport {
  Regime regime = Regime::none;
  double stroboscopic = 0;
  double multi_gate = 0;
  double total = 0;
  RegimeCheck check;
};

// Regime I/II: N²[C ε f̃(0) + 8 R_M sup⁺];  regime III: N²[C ε a_B sup / N + 8 R_M sup⁺].
// The regime is classified from the parameters unless `forced` is given.
BoundReport table_bound(const RegimeParams& p, double margin = 0.2, bool one_sided = false,
                        Regime forced = Regime::none);

// ∫ J̃(x) D_0(1;x) dx for the zero-temperature Ohmic spectral function η̃ x e^{-x/x_c}:
// through the a-representation η̃ x_c² ∫_0^1 (e^{iε(1-a)} - 1)/(1 - i a x_c)² da ...
cplx jd_integral(double eps, double eta_t, double x_c);
// ... by direct quadrature over x of J̃(x) d0_closed(1, x, ε) ...
cplx jd_integral_direct(double eps, double eta_t, double x_c);
// ... and its first-order form η̃ ε [-x_c + i ln(1 - i x_c)].
cplx jd_first_order(double eps, double eta_t, double x_c);

struct PerturbativeMap {
  SuperOperator delta1;
  SuperOperator delta2;
  SuperOperator delta3;
  SuperOperator total() const { return delta1 + delta2 + delta3; }
  double norm() const;
};

struct PerturbativeOptions {
  int points_per_piece = 8;  // Gauss–Legendre order (1..8 uses the fixed 8-point rule)
  double max_piece = 0;      // 0 picks a bath-dependent length
};

// Second-order E_first - E_second for two pictures over N cycles; a null schedule means the target.
PerturbativeMap perturbative_difference_pair(long N, const ModelSpec& model, const PulseSchedule* first,
                                             const PulseSchedule* second, const BathSpec& bath, double T,
                                             PerturbativeOptions options = {});

// Target (or S_1 when given) against the simulator schedule.
PerturbativeMap perturbative_difference(long N, const ModelSpec& model, const PulseSchedule& schedule_sim,
                                        const PulseSchedule* schedule_s1, const BathSpec& bath,
                                        PerturbativeOptions options = {});

// Regime I/II closed approximation of Δ1 for S_1 against the target:
// (i/2) N² f̃(0) Σ_{εε'} (ε+ε') Ã(ε)(·)Ã(ε'), summed over couplings.
SuperOperator delta1_regime_approx(long N, const ModelSpec& model, const BathSpec& bath, double T);

}  // namespace strobe
