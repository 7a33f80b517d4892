// tcl2.hpp — second-order time-convolutionless integrator for target and simulator pictures.
#pragma once

#include "strobe/bath.hpp"
#include "strobe/models.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace strobe {

// Generator used throughout:
//   dρ/dt = Σ_k [Q_k ρ, A_k(t)] + [A_k(t), ρ Q_k†],   Q_k(t) = Σ_l ∫_0^t f_kl(t-s) A_l(s) ds.
// K_k = Q_k - Q_k† = ∫_0^t (f(t-s) - f(s-t)) A_k(s) ds is exposed for inspection.

// Step boundaries within one cycle: {0, gate times, T}, each interval cut into equal steps ≤ Δt.
std::vector<double> step_nodes(const PulseSchedule* schedule, double T, double dt);

// Streams Q_k at increasing stage times. Everything is expressed in the eigenbasis of H_tar.
class MemoryEngine {
 public:
  // stage offsets lie in (0, T]; the simulator picture needs a schedule, the target ignores it
  MemoryEngine(const ModelSpec& model, const PulseSchedule* schedule, Picture mu, const BathSpec& bath,
               double T, std::vector<double> offsets);

  // Q at time nT + offsets[i], one per coupling, or a single entry for the summed coupling of a
  // collective bath; calls must be nondecreasing in time
  void memory(long n, std::size_t i, std::vector<Operator>& Q);
  // A_k(t) for the target, or the simulator's constant value on segment j of cycle n
  void coupling_tar(double t, std::vector<Operator>& A) const;
  void coupling_sim(long n, int j, std::vector<Operator>& A) const;

  const Operator& basis() const { return V_; }
  Picture picture() const { return mu_; }

 private:
  void phases(double t, Eigen::VectorXcd& out) const;
  cplx lattice_F(long row, std::size_t offset_index);

  const ModelSpec& model_;
  Picture mu_;
  BathSpec bath_;
  double T_;
  bool collective_;
  Operator V_;
  Eigen::VectorXd energies_;
  std::vector<Operator> A_eig_;                 // target couplings, eigenbasis
  std::vector<std::vector<Operator>> B_;        // [k][j] simulator segment couplings, eigenbasis
  std::vector<double> freqs_;                   // distinct ω_ab
  Eigen::MatrixXi fidx_;                        // (a, b) -> index into freqs_
  std::vector<double> offsets_;
  std::vector<double> bounds_;                  // t_0 = 0, gate times, t_{M+1} = T
  std::vector<std::vector<std::size_t>> lat_;   // [i][j] lattice index of (offset_i - t_j) mod T
  std::vector<std::vector<int>> lat_shift_;     // row shift for that lattice point
  std::vector<long> last_n_;
  std::vector<std::vector<cplx>> S_;            // [i][j * n_freq + f] running sums
  std::optional<LatticeIntegrals> lattice_;
};

// Q_k(t) in the computational basis, one per coupling.
std::vector<Operator> memory_integral(double t, Picture mu, const ModelSpec& model,
                                      const PulseSchedule* schedule, const BathSpec& bath, double T);

// K_k(t) = Q_k - Q_k†.
std::vector<Operator> memory_operator(double t, Picture mu, const ModelSpec& model,
                                      const PulseSchedule* schedule, const BathSpec& bath, double T);

// Reference path: trapezoid rule with `panels` per cycle, split at gate times, A from full propagators.
std::vector<Operator> memory_integral_trapezoid(double t, Picture mu, const ModelSpec& model,
                                                const PulseSchedule* schedule, const BathSpec& bath,
                                                double T, int panels);

// Generator for given couplings and memory operators in any common basis.
Operator tcl2_rhs(const std::vector<Operator>& A, const std::vector<Operator>& Q, const Operator& rho);

// Generator at time t in the computational basis, built from scratch.
Operator rhs(double t, const Operator& rho, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
             const BathSpec& bath, double T);

struct TrajectoryRecord {
  std::string model_id;
  Picture picture = Picture::tar;
  double T = 1.0;
  double dt = 0.0;
  long n_max = 0;
  Operator rho0;
  std::vector<Operator> samples;  // interaction-picture ρ(NT), computational basis
  std::vector<double> trace_dev;
  std::vector<double> herm_dev;
  std::vector<double> min_eig;
};

struct NumericalAbort : std::runtime_error {
  NumericalAbort(const std::string& what, long cycle, double trace_dev, double herm_dev)
      : std::runtime_error(what), cycle(cycle), trace_dev(trace_dev), herm_dev(herm_dev) {}
  long cycle;
  double trace_dev;
  double herm_dev;
};

struct EvolveOptions {
  double drift_limit = 1e-6;
};

// RK4 on the gate-aligned grid; samples at t = NT for N = 0..n_max.
TrajectoryRecord evolve(const Operator& rho0, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
                        const BathSpec& bath, double T, double dt, long n_max, EvolveOptions options = {});

struct MetricRow {
  long N;
  double t;
  double P_g;
  double d_init;
  double trace_dev;
  double herm_dev;
  double min_eig;
  double d_cross;  // NaN when unpaired
};

// Per-sample metrics; `partner` adds d_cross against a record of the other picture.
std::vector<MetricRow> metrics(const TrajectoryRecord& record, const ModelSpec& model,
                               const TrajectoryRecord* partner = nullptr);

// N, t, P_g, d_init, trace_dev, herm_dev, min_eig [, d_cross]
std::string metrics_csv(const std::vector<MetricRow>& rows, bool paired);

}  // namespace strobe
