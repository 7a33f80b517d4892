#include "strobe/tcl2.hpp"

#include "strobe/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace strobe {

namespace {

constexpr cplx I{0.0, 1.0};

// Sorted values merged within tol; `index` maps each input to its merged slot.
std::vector<double> merge_values(const std::vector<double>& values, double tol, std::vector<std::size_t>& index) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> merged;
  index.assign(values.size(), 0);
  for (std::size_t i : order) {
    if (merged.empty() || values[i] - merged.back() > tol) merged.push_back(values[i]);
    index[i] = merged.size() - 1;
  }
  return merged;
}

std::vector<double> cycle_breakpoints(const PulseSchedule* schedule, double T) {
  std::vector<double> b{0.0, T};
  if (schedule)
    for (double t : schedule->gate_times) b.push_back(t);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b)
    if (out.empty() || x - out.back() > 1e-12 * T) out.push_back(x);
  out.back() = T;
  return out;
}

}  // namespace

std::vector<double> step_nodes(const PulseSchedule* schedule, double T, double dt) {
  if (!(dt > 0) || !(T > 0)) throw std::invalid_argument("step_nodes: T and Δt must be positive");
  const auto b = cycle_breakpoints(schedule, T);
  std::vector<double> nodes{0.0};
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double len = b[i + 1] - b[i];
    const int steps = std::max(1, static_cast<int>(std::ceil(len / dt - 1e-9)));
    for (int s = 1; s < steps; ++s) nodes.push_back(b[i] + len * s / steps);
    nodes.push_back(b[i + 1]);
  }
  return nodes;
}

MemoryEngine::MemoryEngine(const ModelSpec& model, const PulseSchedule* schedule, Picture mu,
                           const BathSpec& bath, double T, std::vector<double> offsets)
    : model_(model), mu_(mu), bath_(bath), T_(T), collective_(!bath.independent), offsets_(std::move(offsets)) {
  validate(bath_);
  if (!(T_ > 0)) throw std::invalid_argument("MemoryEngine: T must be positive");
  if (mu_ == Picture::sim && !schedule) throw std::invalid_argument("MemoryEngine: simulator picture needs a schedule");
  if (offsets_.empty()) throw std::invalid_argument("MemoryEngine: no stage offsets");
  const double tol = 1e-12 * T_;
  for (double o : offsets_)
    if (o <= tol || o > T_ + tol) throw std::invalid_argument("MemoryEngine: stage offsets must lie in (0, T]");

  const auto& sd = model_.spectral;
  V_ = sd.basis;
  const auto d = model_.dim();
  energies_.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) energies_(c) = sd.eigenvalues[sd.level[c]];

  freqs_ = model_.transition_frequencies;
  fidx_.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double w = energies_(b) - energies_(a);
      const auto it = std::min_element(freqs_.begin(), freqs_.end(),
                                       [&](double x, double y) { return std::abs(x - w) < std::abs(y - w); });
      fidx_(a, b) = static_cast<int>(it - freqs_.begin());
    }

  std::vector<Operator> couplings = model_.couplings;
  if (collective_) {
    Operator sum = Operator::Zero(d, d);
    for (const auto& A : couplings) sum += A;
    couplings = {sum};
  }
  for (const auto& A : couplings) A_eig_.push_back(V_.adjoint() * A * V_);

  if (mu_ == Picture::tar) {
    std::vector<double> wrapped;
    for (double o : offsets_) wrapped.push_back(o >= T_ - tol ? 0.0 : o);
    std::vector<std::size_t> idx;
    auto lattice_offsets = merge_values(wrapped, tol, idx);
    lat_.resize(offsets_.size());
    lat_shift_.resize(offsets_.size());
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      lat_[i] = {idx[i]};
      lat_shift_[i] = {offsets_[i] >= T_ - tol ? 1 : 0};
    }
    lattice_.emplace(bath_, T_, std::move(lattice_offsets), freqs_);
    return;
  }

  bounds_.push_back(0.0);
  for (double t : schedule->gate_times) bounds_.push_back(t);
  bounds_.push_back(T_);
  const int M = schedule->M();
  B_.resize(A_eig_.size());
  for (std::size_t k = 0; k < couplings.size(); ++k)
    for (int j = 0; j <= M; ++j) {
      const Operator W = schedule->partial[j] * V_;
      B_[k].push_back(W.adjoint() * couplings[k] * W);
    }

  std::vector<double> raw;
  std::vector<int> shift;
  for (double o : offsets_)
    for (double tj : bounds_) {
      double v = o - tj;
      int s = 0;
      if (std::abs(v) <= tol) v = 0.0;
      if (v < 0) {
        v += T_;
        s = -1;
      } else if (v >= T_ - tol) {
        v = 0.0;
        s = 1;
      }
      if (v >= T_ - tol) v = 0.0;  // o - t_j just below zero
      raw.push_back(v);
      shift.push_back(s);
    }
  std::vector<std::size_t> idx;
  auto lattice_offsets = merge_values(raw, tol, idx);
  const std::size_t nb = bounds_.size();
  lat_.assign(offsets_.size(), std::vector<std::size_t>(nb));
  lat_shift_.assign(offsets_.size(), std::vector<int>(nb));
  for (std::size_t i = 0; i < offsets_.size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      lat_[i][j] = idx[i * nb + j];
      lat_shift_[i][j] = shift[i * nb + j];
    }
  last_n_.assign(offsets_.size(), -1);
  S_.assign(offsets_.size(), std::vector<cplx>((M + 1) * freqs_.size(), 0.0));
  lattice_.emplace(bath_, T_, std::move(lattice_offsets), std::vector<double>{0.0});
}

void MemoryEngine::phases(double t, Eigen::VectorXcd& out) const {
  out.resize(energies_.size());
  for (Eigen::Index a = 0; a < energies_.size(); ++a) out(a) = std::exp(I * (energies_(a) * t));
}

cplx MemoryEngine::lattice_F(long row, std::size_t offset_index) {
  if (row < 0) return 0.0;
  return lattice_->row(row)[offset_index];
}

void MemoryEngine::memory(long n, std::size_t i, std::vector<Operator>& Q) {
  if (i >= offsets_.size()) throw std::invalid_argument("MemoryEngine: stage index out of range");
  const auto d = model_.dim();
  const std::size_t nf = freqs_.size();
  Q.resize(A_eig_.size());
  Eigen::VectorXcd p;

  if (mu_ == Picture::tar) {
    const double t = static_cast<double>(n) * T_ + offsets_[i];
    const auto& row = lattice_->row(n + lat_shift_[i][0]);
    const std::size_t base = lat_[i][0] * nf;
    phases(t, p);
    Operator G(d, d);
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index a = 0; a < d; ++a) G(a, b) = p(a) * std::conj(p(b)) * row[base + fidx_(a, b)];
    for (std::size_t k = 0; k < A_eig_.size(); ++k) Q[k] = A_eig_[k].cwiseProduct(G);
    return;
  }

  if (n < last_n_[i]) throw std::logic_error("MemoryEngine: memory requested out of order");
  const std::size_t segments = bounds_.size() - 1;
  auto& S = S_[i];
  for (long m = last_n_[i] + 1; m <= n; ++m) {
    for (std::size_t j = 0; j < segments; ++j) {
      const cplx w = lattice_F(m + lat_shift_[i][j], lat_[i][j]) - lattice_F(m + lat_shift_[i][j + 1], lat_[i][j + 1]);
      if (w == 0.0) continue;
      for (std::size_t f = 0; f < nf; ++f)
        S[j * nf + f] += std::exp(I * (freqs_[f] * static_cast<double>(m) * T_)) * w;
    }
  }
  last_n_[i] = std::max(last_n_[i], n);

  phases(static_cast<double>(n) * T_, p);
  Operator C(d, d);
  for (std::size_t k = 0; k < A_eig_.size(); ++k) Q[k] = Operator::Zero(d, d);
  for (std::size_t j = 0; j < segments; ++j) {
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index a = 0; a < d; ++a) C(a, b) = S[j * nf + fidx_(a, b)];
    for (std::size_t k = 0; k < A_eig_.size(); ++k) Q[k] += B_[k][j].cwiseProduct(C);
  }
  const Operator P = p * p.adjoint();
  for (auto& q : Q) q = q.cwiseProduct(P);
}

void MemoryEngine::coupling_tar(double t, std::vector<Operator>& A) const {
  Eigen::VectorXcd p;
  phases(t, p);
  const Operator P = p * p.adjoint();
  A.resize(A_eig_.size());
  for (std::size_t k = 0; k < A_eig_.size(); ++k) A[k] = A_eig_[k].cwiseProduct(P);
}

void MemoryEngine::coupling_sim(long n, int j, std::vector<Operator>& A) const {
  if (mu_ != Picture::sim) throw std::logic_error("MemoryEngine: simulator couplings need the simulator picture");
  Eigen::VectorXcd p;
  phases(static_cast<double>(n) * T_, p);
  const Operator P = p * p.adjoint();
  A.resize(B_.size());
  for (std::size_t k = 0; k < B_.size(); ++k) A[k] = B_[k][j].cwiseProduct(P);
}

std::vector<Operator> memory_integral(double t, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
                                      const BathSpec& bath, double T) {
  const auto d = model.dim();
  const std::size_t K = model.couplings.size();
  if (t < 0) throw std::invalid_argument("memory_integral: negative time");
  if (t == 0) return std::vector<Operator>(K, Operator::Zero(d, d));
  long n;
  double offset;
  cycle_split(t, T, n, offset);
  MemoryEngine engine(model, schedule, mu, bath, T, {offset});
  std::vector<Operator> Q;
  engine.memory(n, 0, Q);
  const Operator& V = engine.basis();
  std::vector<Operator> out;
  for (std::size_t k = 0; k < K; ++k) out.push_back(V * Q[Q.size() == 1 ? 0 : k] * V.adjoint());
  return out;
}

std::vector<Operator> memory_operator(double t, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
                                      const BathSpec& bath, double T) {
  auto Q = memory_integral(t, mu, model, schedule, bath, T);
  for (auto& q : Q) q = (q - q.adjoint()).eval();
  return Q;
}

std::vector<Operator> memory_integral_trapezoid(double t, Picture mu, const ModelSpec& model,
                                                const PulseSchedule* schedule, const BathSpec& bath, double T,
                                                int panels) {
  if (panels < 1) throw std::invalid_argument("memory_integral_trapezoid: need at least one panel");
  const auto d = model.dim();
  const std::size_t K = model.couplings.size();
  std::vector<Operator> out(K, Operator::Zero(d, d));
  if (t <= 0) return out;

  std::vector<double> cuts;
  const long cycles = static_cast<long>(std::ceil(t / T)) + 1;
  for (long m = 0; m < cycles; ++m) {
    for (int p = 0; p < panels; ++p) cuts.push_back(m * T + p * T / panels);
    if (mu == Picture::sim && schedule)
      for (double g : schedule->gate_times) cuts.push_back(m * T + g);
  }
  cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts;
  for (double c : cuts)
    if (c <= t && (pts.empty() || c - pts.back() > 1e-12 * T)) pts.push_back(c);
  if (pts.back() < t) pts.push_back(t);
  pts.back() = t;

  Operator sum = Operator::Zero(d, d);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double s0 = pts[i], s1 = pts[i + 1];
    const cplx f0 = correlation(t - s0, bath), f1 = correlation(t - s1, bath);
    std::vector<Operator> A0, A1;
    if (mu == Picture::sim) {
      A0 = interaction_A(model, schedule, mu, 0.5 * (s0 + s1));
      A1 = A0;
    } else {
      A0 = interaction_A(model, schedule, mu, s0);
      A1 = interaction_A(model, schedule, mu, s1);
    }
    for (std::size_t k = 0; k < K; ++k) out[k] += 0.5 * (s1 - s0) * (f0 * A0[k] + f1 * A1[k]);
  }
  if (!bath.independent) {
    for (const auto& q : out) sum += q;
    for (auto& q : out) q = sum;
  }
  return out;
}

Operator tcl2_rhs(const std::vector<Operator>& A, const std::vector<Operator>& Q, const Operator& rho) {
  if (A.size() != Q.size()) throw std::invalid_argument("tcl2_rhs: couplings and memory operators differ in count");
  Operator X = Operator::Zero(rho.rows(), rho.cols());
  Operator Y;
  for (std::size_t k = 0; k < A.size(); ++k) {
    Y.noalias() = Q[k] * rho;
    X.noalias() += Y * A[k];
    X.noalias() -= A[k] * Y;
  }
  return X + X.adjoint();
}

Operator rhs(double t, const Operator& rho, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
             const BathSpec& bath, double T) {
  return tcl2_rhs(interaction_A(model, schedule, mu, t), memory_integral(t, mu, model, schedule, bath, T), rho);
}

TrajectoryRecord evolve(const Operator& rho0, Picture mu, const ModelSpec& model, const PulseSchedule* schedule,
                        const BathSpec& bath, double T, double dt, long n_max, EvolveOptions options) {
  if (rho0.rows() != model.dim() || rho0.cols() != model.dim())
    throw std::invalid_argument("evolve: initial state has the wrong dimension");
  if (!is_hermitian(rho0, 1e-10) || std::abs(rho0.trace() - 1.0) > 1e-10)
    throw std::invalid_argument("evolve: initial state must be Hermitian with unit trace");
  if (n_max < 0) throw std::invalid_argument("evolve: N_max must be nonnegative");
  if (!(dt > 0)) throw std::invalid_argument("evolve: Δt must be positive");
  const double ratio = T / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw std::invalid_argument("evolve: Δt must divide T");
  if (std::round(ratio) < 20) throw std::invalid_argument("evolve: need T/Δt ≥ 20");
  if (mu == Picture::sim) {
    if (!schedule) throw std::invalid_argument("evolve: simulator picture needs a schedule");
    if (std::abs(schedule->T - T) > 1e-12 * T) throw std::invalid_argument("evolve: schedule period differs from T");
  }

  const auto nodes = step_nodes(mu == Picture::sim ? schedule : nullptr, T, dt);
  const std::size_t steps = nodes.size() - 1;
  std::vector<double> offsets;
  std::vector<int> segment(steps, 0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double mid = 0.5 * (nodes[s] + nodes[s + 1]);
    offsets.push_back(mid);
    offsets.push_back(nodes[s + 1]);
    if (mu == Picture::sim) segment[s] = schedule->fired(mid);
  }
  MemoryEngine engine(model, schedule, mu, bath, T, offsets);
  const Operator& V = engine.basis();

  TrajectoryRecord rec;
  rec.model_id = model.name();
  rec.picture = mu;
  rec.T = T;
  rec.dt = dt;
  rec.n_max = n_max;
  rec.rho0 = rho0;

  auto record = [&](const Operator& rho_eig, long N) {
    const Operator rho = V * rho_eig * V.adjoint();
    const double tr = std::abs(rho.trace() - 1.0);
    const double herm = hermiticity_deviation(rho);
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    rec.samples.push_back(rho);
    rec.trace_dev.push_back(tr);
    rec.herm_dev.push_back(herm);
    rec.min_eig.push_back(es.eigenvalues()(0));
    if (!(tr <= options.drift_limit) || !(herm <= options.drift_limit))
      throw NumericalAbort("evolve: trace or Hermiticity drift beyond limit at cycle " + std::to_string(N), N, tr,
                           herm);
  };

  Operator rho = V.adjoint() * rho0 * V;
  record(rho, 0);
  const auto d = model.dim();
  const std::size_t nQ = bath.independent ? model.couplings.size() : 1;
  std::vector<Operator> Q0(nQ, Operator::Zero(d, d)), Qm, Q1, A0, Am, A1;
  if (mu == Picture::tar) engine.coupling_tar(0.0, A0);
  Operator k1, k2, k3, k4;
  for (long n = 0; n < n_max; ++n) {
    for (std::size_t s = 0; s < steps; ++s) {
      const double h = nodes[s + 1] - nodes[s];
      const double t0 = static_cast<double>(n) * T + nodes[s];
      engine.memory(n, 2 * s, Qm);
      engine.memory(n, 2 * s + 1, Q1);
      if (mu == Picture::sim) {
        engine.coupling_sim(n, segment[s], A0);
        Am = A0;
        A1 = A0;
      } else {
        engine.coupling_tar(t0 + 0.5 * h, Am);
        engine.coupling_tar(t0 + h, A1);
      }
      k1 = tcl2_rhs(A0, Q0, rho);
      k2 = tcl2_rhs(Am, Qm, rho + 0.5 * h * k1);
      k3 = tcl2_rhs(Am, Qm, rho + 0.5 * h * k2);
      k4 = tcl2_rhs(A1, Q1, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      std::swap(Q0, Q1);
      if (mu == Picture::tar) std::swap(A0, A1);
    }
    record(rho, n + 1);
  }
  return rec;
}

std::vector<MetricRow> metrics(const TrajectoryRecord& record, const ModelSpec& model,
                               const TrajectoryRecord* partner) {
  if (record.samples.size() != static_cast<std::size_t>(record.n_max + 1))
    throw std::invalid_argument("metrics: incomplete record");
  if (partner) {
    if (partner->n_max != record.n_max || partner->dt != record.dt || partner->T != record.T ||
        partner->model_id != record.model_id || partner->samples.size() != record.samples.size())
      throw std::invalid_argument("metrics: paired records differ in model, T, Δt or N_max");
  }
  const auto& sd = model.spectral;
  const Operator& V = sd.basis;
  const Operator& Pg = model.ground_projector();
  const auto d = model.dim();
  std::vector<MetricRow> rows;
  for (long N = 0; N <= record.n_max; ++N) {
    const Operator& rho = record.samples[N];
    const double t = static_cast<double>(N) * record.T;
    Eigen::VectorXcd ph(d);
    for (Eigen::Index c = 0; c < d; ++c) ph(c) = std::exp(-I * (sd.eigenvalues[sd.level[c]] * t));
    const Operator U = V * ph.asDiagonal() * V.adjoint();
    MetricRow r;
    r.N = N;
    r.t = t;
    r.P_g = (Pg * rho).trace().real();
    r.d_init = trace_distance(U * rho * U.adjoint(), record.rho0);
    r.trace_dev = record.trace_dev[N];
    r.herm_dev = record.herm_dev[N];
    r.min_eig = record.min_eig[N];
    r.d_cross = partner ? trace_distance(rho, partner->samples[N]) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(r);
  }
  return rows;
}

std::string metrics_csv(const std::vector<MetricRow>& rows, bool paired) {
  std::vector<std::string> header{"N", "t", "P_g", "d_init", "trace_dev", "herm_dev", "min_eig"};
  if (paired) header.push_back("d_cross");
  CsvWriter csv(header);
  for (const auto& r : rows) {
    std::vector<double> v{static_cast<double>(r.N), r.t, r.P_g, r.d_init, r.trace_dev, r.herm_dev, r.min_eig};
    if (paired) v.push_back(r.d_cross);
    csv.add_row(v);
  }
  return csv.str();
}

}  // namespace strobe
