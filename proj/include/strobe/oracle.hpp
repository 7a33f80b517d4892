// oracle.hpp — exact system ⊗ truncated-oscillator evolution for validating TCL-2.
#pragma once

#include "strobe/bath.hpp"
#include "strobe/models.hpp"

#include <vector>

namespace strobe {

struct OracleMode {
  double omega;
  cplx g;  // same coupling for every system coupling index
};

struct JointSpec {
  const ModelSpec* model = nullptr;
  std::vector<OracleMode> modes;
  int n_max = 4;  // levels kept per mode
  double beta = kInfinity;
  long cap = 4096;

  long dim() const;
  // Correlation function the joint model reproduces: equal couplings give f_kl = f for every pair.
  BathSpec equivalent_bath() const;
};

// Truncated annihilation operator on `levels` levels.
Operator annihilation(int levels);

// H = H_sys ⊗ 1 + 1 ⊗ Σ ω_m b_m†b_m + Σ_k A_k ⊗ B_k with B_k = Σ_m (g b_m + g* b_m†).
// `system_on` switches H_sys = H_tar on (target) or off (simulator between gates).
Operator joint_hamiltonian(const JointSpec& spec, bool system_on);

struct OracleRecord {
  std::vector<Operator> samples;  // interaction-picture reduced states at t = NT
  std::vector<double> leakage;    // top-level population summed over modes
  std::vector<double> norm_dev;   // max |1 - ‖ψ‖²| over the evolved pure components
  bool leakage_flag = false;      // some sample above 1e-3
};

// Exact joint evolution from ρ_sys ⊗ (thermal or vacuum modes), sampled at N = 0..n_max.
OracleRecord exact_reduced_evolution(const Operator& rho_sys, const JointSpec& spec, const PulseSchedule* schedule,
                                     Picture mu, double T, long n_max);

}  // namespace strobe
