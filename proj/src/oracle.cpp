#include "strobe/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace strobe {

long JointSpec::dim() const {
  if (!model) throw std::invalid_argument("JointSpec: no model");
  long d = model->dim();
  for (std::size_t m = 0; m < modes.size(); ++m) d *= n_max;
  return d;
}

BathSpec JointSpec::equivalent_bath() const {
  std::vector<DiscreteMode> dm;
  for (const auto& m : modes) dm.push_back({m.omega, m.g});
  return discrete_bath(dm, beta, false);
}

Operator annihilation(int levels) {
  if (levels < 1) throw std::invalid_argument("annihilation: need at least one level");
  Operator b = Operator::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

namespace {

void check(const JointSpec& spec) {
  if (!spec.model) throw std::invalid_argument("oracle: no model");
  if (spec.n_max < 2) throw std::invalid_argument("oracle: need at least two levels per mode");
  if (spec.modes.empty()) throw std::invalid_argument("oracle: need at least one mode");
  for (const auto& m : spec.modes)
    if (!(m.omega > 0)) throw std::invalid_argument("oracle: mode frequencies must be positive");
  if (spec.dim() > spec.cap) throw std::invalid_argument("oracle: joint dimension exceeds the cap");
}

// Operator acting as `op` on mode m and identity elsewhere in the mode register.
Operator mode_operator(const Operator& op, std::size_t m, std::size_t count, int levels) {
  Operator out = Operator::Identity(1, 1);
  for (std::size_t i = 0; i < count; ++i) out = kron(out, i == m ? op : Operator::Identity(levels, levels));
  return out;
}

}  // namespace

Operator joint_hamiltonian(const JointSpec& spec, bool system_on) {
  check(spec);
  const auto& model = *spec.model;
  const std::size_t M = spec.modes.size();
  const Operator b = annihilation(spec.n_max);
  const Operator num = b.adjoint() * b;
  long dB = 1;
  for (std::size_t m = 0; m < M; ++m) dB *= spec.n_max;
  const Operator IdB = Operator::Identity(dB, dB);
  const Operator IdS = Operator::Identity(model.dim(), model.dim());

  Operator HB = Operator::Zero(dB, dB), B = Operator::Zero(dB, dB);
  for (std::size_t m = 0; m < M; ++m) {
    HB += spec.modes[m].omega * mode_operator(num, m, M, spec.n_max);
    const Operator bm = mode_operator(b, m, M, spec.n_max);
    B += spec.modes[m].g * bm + std::conj(spec.modes[m].g) * bm.adjoint();
  }
  Operator H = kron(IdS, HB);
  if (system_on) H += kron(model.H_tar, IdB);
  for (const auto& A : model.couplings) H += kron(A, B);
  return H;
}

OracleRecord exact_reduced_evolution(const Operator& rho_sys, const JointSpec& spec, const PulseSchedule* schedule,
                                     Picture mu, double T, long n_max) {
  check(spec);
  const auto& model = *spec.model;
  if (mu == Picture::sim && !schedule) throw std::invalid_argument("oracle: simulator picture needs a schedule");
  if (n_max < 0) throw std::invalid_argument("oracle: N_max must be nonnegative");
  const long dS = model.dim();
  const long D = spec.dim();
  const long dB = D / dS;
  const std::size_t M = spec.modes.size();
  const Operator IdB = Operator::Identity(dB, dB);

  // one-cycle joint propagator
  Operator W;
  if (mu == Picture::tar) {
    W = unitary_exp(joint_hamiltonian(spec, true), -T);
  } else {
    const Operator Hf = joint_hamiltonian(spec, false);
    const SpectralDecomposition sd = hermitian_eig(Hf, 1e-12);
    const Eigen::MatrixXcd& Vb = sd.basis;
    Eigen::VectorXd ev(D);
    for (long c = 0; c < D; ++c) ev(c) = sd.eigenvalues[sd.level[c]];
    auto free_step = [&](double tau) {
      Eigen::VectorXcd ph(D);
      for (long c = 0; c < D; ++c) ph(c) = std::exp(cplx(0, -ev(c) * tau));
      return Operator(Vb * ph.asDiagonal() * Vb.adjoint());
    };
    W = Operator::Identity(D, D);
    double last = 0.0;
    for (int i = 0; i < schedule->M(); ++i) {
      W = kron(schedule->gates[i], IdB) * free_step(schedule->gate_times[i] - last) * W;
      last = schedule->gate_times[i];
    }
    W = free_step(T - last) * W;
  }

  // initial joint mixture: system eigenvectors ⊗ mode number states
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho_sys + rho_sys.adjoint()));
  // Boltzmann weights of every mode-register basis state, renormalized on the truncated space
  std::vector<double> pB(dB, 0.0);
  double total = 0;
  for (long s = 0; s < dB; ++s) {
    long rest = s;
    double energy = 0;
    bool ground = true;
    for (std::size_t m = M; m-- > 0;) {
      const int n = static_cast<int>(rest % spec.n_max);
      rest /= spec.n_max;
      energy += n * spec.modes[m].omega;
      if (n) ground = false;
    }
    pB[s] = std::isinf(spec.beta) ? (ground ? 1.0 : 0.0) : std::exp(-spec.beta * energy);
    total += pB[s];
  }
  for (auto& p : pB) p /= total;

  std::vector<Eigen::VectorXcd> states;
  std::vector<double> weights;
  for (long i = 0; i < dS; ++i) {
    const double ps = es.eigenvalues()(i);
    if (ps <= 1e-15) continue;
    for (long s = 0; s < dB; ++s) {
      if (pB[s] <= 1e-15) continue;
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dB);
      e(s) = 1.0;
      states.push_back(kron(es.eigenvectors().col(i), e));
      weights.push_back(ps * pB[s]);
    }
  }

  const auto& sd = model.spectral;
  const Operator& V = sd.basis;
  OracleRecord rec;
  for (long N = 0; N <= n_max; ++N) {
    if (N > 0)
      for (auto& psi : states) psi = W * psi;
    Operator rho = Operator::Zero(dS, dS);
    double leak = 0, norm_dev = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const Eigen::Map<const Eigen::MatrixXcd> block(states[i].data(), dB, dS);  // block(s, a) = ψ[a·dB + s]
      rho += weights[i] * (block.transpose() * block.conjugate());
      for (long s = 0; s < dB; ++s) {
        long rest = s;
        bool top = false;
        for (std::size_t m = 0; m < M; ++m) {
          if (rest % spec.n_max == spec.n_max - 1) top = true;
          rest /= spec.n_max;
        }
        if (top) leak += weights[i] * block.row(s).squaredNorm();
      }
      norm_dev = std::max(norm_dev, std::abs(states[i].squaredNorm() - 1.0));
    }
    // back to the interaction picture of the system; U_sim(NT) = U_tar(NT)
    const double t = static_cast<double>(N) * T;
    Eigen::VectorXcd ph(dS);
    for (long c = 0; c < dS; ++c) ph(c) = std::exp(cplx(0, -sd.eigenvalues[sd.level[c]] * t));
    const Operator U = V * ph.asDiagonal() * V.adjoint();
    rec.samples.push_back(U.adjoint() * rho * U);
    rec.leakage.push_back(leak);
    rec.norm_dev.push_back(norm_dev);
    if (leak > 1e-3) rec.leakage_flag = true;
  }
  return rec;
}

}  // namespace strobe
