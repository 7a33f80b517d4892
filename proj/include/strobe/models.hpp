// models.hpp — built-in target models, gate schedules and interaction-picture couplings.
#pragma once

#include "strobe/operators.hpp"

#include <string>
#include <vector>

namespace strobe {

enum class Picture { tar, sim };

enum class ModelKind { toric, five_qubit };

struct ModelSpec {
  ModelKind kind;
  int n_qubits;
  double frequency;  // ω for the toric vertex, γ for the five-qubit code
  Operator H_tar;
  std::vector<Operator> couplings;  // A_k
  SpectralDecomposition spectral;
  std::vector<double> transition_frequencies;  // ascending, contains 0
  double omega_max;

  const Operator& ground_projector() const { return spectral.projectors.front(); }
  std::string name() const;
  Eigen::Index dim() const { return H_tar.rows(); }
};

ModelSpec toric_vertex_model(double omega);
ModelSpec five_qubit_model(double gamma);

// span: gate i at (i-1)·τ_g/(M-1); cells: gate i at (i-1)·τ_g/M
enum class GateSpacing { span, cells };

struct PulseSchedule {
  double T = 1.0;
  double tau_g = 0.0;
  std::vector<double> gate_times;  // offsets within the cycle, nondecreasing
  std::vector<Operator> gates;
  std::vector<Operator> partial;   // partial[j] = g_j···g_1, partial[0] = 1

  int M() const { return static_cast<int>(gates.size()); }
  double R() const { return tau_g / T; }
  const Operator& cycle_unitary() const { return partial.back(); }
  // number of gates already applied at cycle offset τ ∈ (0, T]
  int fired(double offset) const;
};

struct GateSpec {
  double angle;                      // exp(i·angle·P)
  std::vector<PauliFactor> pauli;
  int inverse_of = -1;               // 0-based index of the gate this one undoes
};

// Gate list with φ filled in; φ = ωT/2 (toric) or γT (five-qubit).
std::vector<GateSpec> gate_sequence(const ModelSpec& model, double T);

PulseSchedule gate_schedule(const ModelSpec& model, double T, double tau_g,
                            GateSpacing spacing = GateSpacing::span);

// One instantaneous gate exp(-i H_tar T) at the start of every cycle.
PulseSchedule single_gate_schedule(const ModelSpec& model, double T);

PulseSchedule build_schedule(double T, double tau_g, std::vector<double> gate_times,
                             std::vector<Operator> gates);

// Split t > 0 into cycle n and offset τ ∈ (0, T]; t = 0 gives (0, 0).
void cycle_split(double t, double T, long& n, double& offset);

Operator propagator(const ModelSpec& model, const PulseSchedule* schedule, Picture mu, double t);

std::vector<Operator> interaction_A(const ModelSpec& model, const PulseSchedule* schedule,
                                    Picture mu, double t);

struct FrequencyComponent {
  double omega;
  Operator op;
};

// Nonzero A_k(ω) = Σ_{ε'-ε=ω} P_ε A_k P_ε', ascending in ω.
std::vector<FrequencyComponent> frequency_components(const ModelSpec& model, int k);

// "ghz" (toric) or "logical0" (five-qubit); "default" picks the model's own.
Operator initial_state(const ModelSpec& model, const std::string& id = "default");

Operator matrix_power(const Operator& U, long n);

}  // namespace strobe
