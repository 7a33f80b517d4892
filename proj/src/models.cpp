#include "strobe/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace strobe {

namespace {

constexpr double kQuarter = std::numbers::pi / 4.0;

std::vector<PauliFactor> P(std::initializer_list<PauliFactor> f) { return f; }

std::vector<std::vector<PauliFactor>> five_qubit_stabilizers() {
  return {
      P({{1, Axis::X}, {2, Axis::Z}, {3, Axis::Z}, {4, Axis::X}}),
      P({{2, Axis::X}, {3, Axis::Z}, {4, Axis::Z}, {5, Axis::X}}),
      P({{1, Axis::X}, {3, Axis::X}, {4, Axis::Z}, {5, Axis::Z}}),
      P({{1, Axis::Z}, {2, Axis::X}, {4, Axis::X}, {5, Axis::Z}}),
  };
}

void finish_spectrum(ModelSpec& m) {
  m.spectral = hermitian_eig(m.H_tar);
  const auto& ev = m.spectral.eigenvalues;
  const double scale = std::max(1.0, std::abs(ev.back() - ev.front()));
  std::vector<double> w;
  for (double a : ev)
    for (double b : ev) w.push_back(b - a);
  std::sort(w.begin(), w.end());
  std::vector<double> grouped;
  for (double x : w) {
    if (grouped.empty() || x - grouped.back() > 1e-9 * scale) grouped.push_back(x);
  }
  for (double& x : grouped)
    if (std::abs(x) <= 1e-9 * scale) x = 0.0;
  m.transition_frequencies = grouped;
  m.omega_max = std::max(std::abs(grouped.front()), std::abs(grouped.back()));
}

}  // namespace

std::string ModelSpec::name() const { return kind == ModelKind::toric ? "toric" : "five_qubit"; }

ModelSpec toric_vertex_model(double omega) {
  if (!(omega > 0)) throw std::invalid_argument("toric_vertex_model: ω must be positive");
  ModelSpec m;
  m.kind = ModelKind::toric;
  m.n_qubits = 4;
  m.frequency = omega;
  m.H_tar = -(omega / 2) * pauli_string(P({{1, Axis::X}, {2, Axis::X}, {3, Axis::X}, {4, Axis::X}}), 4);
  for (int k = 1; k <= 4; ++k) m.couplings.push_back(pauli_string({{k, Axis::Z}}, 4));
  finish_spectrum(m);
  return m;
}

ModelSpec five_qubit_model(double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("five_qubit_model: γ must be positive");
  ModelSpec m;
  m.kind = ModelKind::five_qubit;
  m.n_qubits = 5;
  m.frequency = gamma;
  m.H_tar = Operator::Zero(32, 32);
  for (const auto& s : five_qubit_stabilizers()) m.H_tar -= gamma * pauli_string(s, 5);
  for (int k = 1; k <= 5; ++k) m.couplings.push_back(pauli_string({{k, Axis::Z}}, 5));
  finish_spectrum(m);
  return m;
}

std::vector<GateSpec> gate_sequence(const ModelSpec& model, double T) {
  if (model.kind == ModelKind::toric) {
    const double phi = model.frequency * T / 2;
    return {
        {kQuarter, P({{3, Axis::Y}, {4, Axis::X}})},
        {kQuarter, P({{3, Axis::Z}, {2, Axis::Y}})},
        {phi, P({{1, Axis::X}, {2, Axis::Z}})},
        {0, {}, 1},
        {0, {}, 0},
    };
  }
  const double phi = model.frequency * T;
  // one conjugated rotation per stabilizer: g5 g4 g3 g2 g1 = exp(iφ S_1), and so on.
  // The second block's middle gate is Z4 X5; Z4 Z5 would rotate about X2 Z3 Z4 Z5 instead of S_2.
  const std::vector<std::array<std::vector<PauliFactor>, 3>> blocks{
      {P({{1, Axis::X}, {2, Axis::X}}), P({{2, Axis::Y}, {3, Axis::X}}), P({{3, Axis::Y}, {4, Axis::X}})},
      {P({{3, Axis::Z}, {5, Axis::Y}}), P({{4, Axis::Z}, {5, Axis::X}}), P({{2, Axis::X}, {5, Axis::Y}})},
      {P({{1, Axis::X}, {3, Axis::Y}}), P({{3, Axis::Z}, {4, Axis::X}}), P({{4, Axis::Y}, {5, Axis::Z}})},
      {P({{4, Axis::X}, {5, Axis::X}}), P({{2, Axis::Y}, {5, Axis::Y}}), P({{1, Axis::Z}, {2, Axis::Z}})},
  };
  std::vector<GateSpec> seq;
  for (const auto& b : blocks) {
    const int base = static_cast<int>(seq.size());
    seq.push_back({kQuarter, b[0]});
    seq.push_back({kQuarter, b[1]});
    seq.push_back({phi, b[2]});
    seq.push_back({0, {}, base + 1});
    seq.push_back({0, {}, base});
  }
  return seq;
}

PulseSchedule build_schedule(double T, double tau_g, std::vector<double> gate_times,
                             std::vector<Operator> gates) {
  if (!(T > 0)) throw std::invalid_argument("schedule: T must be positive");
  if (tau_g < 0 || tau_g > T * (1 + 1e-12)) throw std::invalid_argument("schedule: need 0 ≤ τ_g ≤ T");
  if (gate_times.size() != gates.size() || gates.empty())
    throw std::invalid_argument("schedule: gate times and gates must match and be nonempty");
  for (std::size_t i = 0; i < gate_times.size(); ++i) {
    if (gate_times[i] < 0 || gate_times[i] > tau_g * (1 + 1e-12) + 1e-15)
      throw std::invalid_argument("schedule: gate time outside [0, τ_g]");
    if (i > 0 && gate_times[i] < gate_times[i - 1])
      throw std::invalid_argument("schedule: gate times must be nondecreasing");
  }
  PulseSchedule s;
  s.T = T;
  s.tau_g = tau_g;
  s.gate_times = std::move(gate_times);
  s.gates = std::move(gates);
  const auto d = s.gates.front().rows();
  s.partial.push_back(Operator::Identity(d, d));
  for (const auto& g : s.gates) s.partial.push_back(g * s.partial.back());
  return s;
}

PulseSchedule gate_schedule(const ModelSpec& model, double T, double tau_g, GateSpacing spacing) {
  if (!(T > 0)) throw std::invalid_argument("gate_schedule: T must be positive");
  if (tau_g < 0 || tau_g > T) throw std::invalid_argument("gate_schedule: need 0 ≤ τ_g ≤ T");
  const auto seq = gate_sequence(model, T);
  std::vector<Operator> gates;
  for (const auto& g : seq) {
    if (g.inverse_of >= 0) gates.push_back(gates[g.inverse_of].adjoint());
    else gates.push_back(unitary_exp(pauli_string(g.pauli, model.n_qubits), g.angle));
  }
  const int M = static_cast<int>(gates.size());
  std::vector<double> times(M, 0.0);
  for (int i = 0; i < M; ++i) {
    if (spacing == GateSpacing::span) times[i] = M > 1 ? i * tau_g / (M - 1) : 0.0;
    else times[i] = i * tau_g / M;
  }
  return build_schedule(T, tau_g, std::move(times), std::move(gates));
}

PulseSchedule single_gate_schedule(const ModelSpec& model, double T) {
  return build_schedule(T, 0.0, {0.0}, {unitary_exp(model.H_tar, -T)});
}

int PulseSchedule::fired(double offset) const {
  const double tol = 1e-12 * T;
  int n = 0;
  for (double t : gate_times)
    if (t <= offset + tol) ++n;
  return n;
}

void cycle_split(double t, double T, long& n, double& offset) {
  if (t <= 0) {
    n = 0;
    offset = 0;
    return;
  }
  n = static_cast<long>(std::ceil(t / T - 1e-12)) - 1;
  if (n < 0) n = 0;
  offset = t - static_cast<double>(n) * T;
}

Operator matrix_power(const Operator& U, long n) {
  Operator result = Operator::Identity(U.rows(), U.cols());
  Operator base = U;
  while (n > 0) {
    if (n & 1) result = base * result;
    base = base * base;
    n >>= 1;
  }
  return result;
}

Operator propagator(const ModelSpec& model, const PulseSchedule* schedule, Picture mu, double t) {
  if (t < 0) throw std::invalid_argument("propagator: negative time");
  if (mu == Picture::tar) return unitary_exp(model.H_tar, -t);
  if (!schedule) throw std::invalid_argument("propagator: simulator picture needs a schedule");
  if (t == 0) return Operator::Identity(model.dim(), model.dim());
  long n;
  double offset;
  cycle_split(t, schedule->T, n, offset);
  return schedule->partial[schedule->fired(offset)] * matrix_power(schedule->cycle_unitary(), n);
}

std::vector<Operator> interaction_A(const ModelSpec& model, const PulseSchedule* schedule, Picture mu,
                                    double t) {
  const Operator U = propagator(model, schedule, mu, t);
  std::vector<Operator> out;
  for (const auto& A : model.couplings) out.push_back(U.adjoint() * A * U);
  return out;
}

std::vector<FrequencyComponent> frequency_components(const ModelSpec& model, int k) {
  if (k < 0 || k >= static_cast<int>(model.couplings.size()))
    throw std::invalid_argument("frequency_components: coupling index out of range");
  const auto& sd = model.spectral;
  const Operator& A = model.couplings[k];
  const double scale = std::max(1.0, model.omega_max);
  std::vector<FrequencyComponent> out;
  for (double w : model.transition_frequencies) {
    Operator C = Operator::Zero(A.rows(), A.cols());
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i)
      for (std::size_t j = 0; j < sd.eigenvalues.size(); ++j)
        if (std::abs(sd.eigenvalues[j] - sd.eigenvalues[i] - w) <= 1e-9 * scale)
          C += sd.projectors[i] * A * sd.projectors[j];
    if (C.norm() > 1e-12) out.push_back({w, C});
  }
  return out;
}

Operator initial_state(const ModelSpec& model, const std::string& id) {
  const auto d = model.dim();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
  std::string which = id;
  if (which == "default") which = model.kind == ModelKind::toric ? "ghz" : "logical0";
  if (which == "ghz") {
    psi(0) = 1;
    psi(d - 1) = 1;
  } else if (which == "logical0" && model.kind == ModelKind::five_qubit) {
    psi(0) = 1;
    const auto seq = five_qubit_stabilizers();
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) psi = psi + pauli_string(*it, 5) * psi;
  } else {
    throw std::invalid_argument("initial_state: unknown state '" + id + "' for model " + model.name());
  }
  psi.normalize();
  return psi * psi.adjoint();
}

}  // namespace strobe
