#include "strobe/bounds.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace strobe {

namespace {

constexpr cplx I{0.0, 1.0};

// (e^z - 1)/z
cplx phi(cplx z) {
  if (std::abs(z) < 1e-2) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 2; k <= 8; ++k) {
      term *= z / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// adaptive bisection on a 31-point Kronrod rule with an absolute error target
template <class F>
cplx gk_complex(F f, double a, double b, double tol = 1e-12, int depth = 30) {
  if (b <= a) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err_re = 0, err_im = 0;
  const double re = GK::integrate([&](double u) { return f(u).real(); }, a, b, 0, 0.0, &err_re);
  const double im = GK::integrate([&](double u) { return f(u).imag(); }, a, b, 0, 0.0, &err_im);
  if (std::max(err_re, err_im) <= tol || depth == 0) return {re, im};
  const double mid = 0.5 * (a + b);
  return gk_complex(f, a, mid, 0.5 * tol, depth - 1) + gk_complex(f, mid, b, 0.5 * tol, depth - 1);
}

struct GaussNodes {
  std::array<double, 8> x{};
  std::array<double, 8> w{};
  GaussNodes() {
    using G = boost::math::quadrature::gauss<double, 8>;
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] = -G::abscissa()[i];
      x[7 - i] = G::abscissa()[i];
      w[i] = w[7 - i] = G::weights()[i];
    }
  }
};

const GaussNodes& gl8() {
  static const GaussNodes g;
  return g;
}

bool within(double lhs, double rhs) { return lhs <= rhs * (1 + 1e-12) + 1e-300; }

}  // namespace

cplx d_numeric(double c, double x, double eps, double R) {
  if (!(R > 0) || R > 1) throw std::invalid_argument("d_numeric: need 0 < R ≤ 1");
  if (c < 0 || c > 1) throw std::invalid_argument("d_numeric: need 0 ≤ c ≤ 1");
  auto integrand = [&](double a) {
    const double clipped = std::max(0.0, 1.0 - a / R);
    return std::exp(I * (x * a)) * (std::exp(I * (eps * (1.0 - a))) - std::exp(I * (eps * clipped)));
  };
  const double kink = std::min(c, R);
  return gk_complex(integrand, 0.0, kink) + gk_complex(integrand, kink, c);
}

cplx d0_closed(double c, double x, double eps) {
  if (c < 0 || c > 1) throw std::invalid_argument("d0_closed: need 0 ≤ c ≤ 1");
  if (std::abs(x) < 1e-4 || std::abs(x - eps) < 1e-4)
    return std::exp(I * eps) * c * phi(I * ((x - eps) * c)) - c * phi(I * (x * c));
  const cplx exc = std::exp(I * (x * c));
  return I * (eps * (1.0 - exc) - x * (1.0 - std::exp(I * eps)) + exc * x * (1.0 - std::exp(I * (eps * (1 - c))))) /
         (x * (x - eps));
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    case Regime::none: return "none";
  }
  return "none";
}

cplx d0_regime(double c, double x, double eps, Regime regime) {
  switch (regime) {
    case Regime::I:
    case Regime::II: return I * (eps * c * (1.0 - 0.5 * c));
    case Regime::III:
      if (x == 0) throw std::invalid_argument("d0_regime: regime III needs x ≠ 0");
      return -(eps / x) * (1.0 - (1.0 - c) * std::exp(I * (x * c)));
    case Regime::none: break;
  }
  throw std::invalid_argument("d0_regime: no approximation outside regimes I, II and III");
}

RegimeCheck classify_regime(double eps_max, double x_bar, double x_c, double margin, bool one_sided) {
  if (eps_max < 0 || x_c < 0 || !(margin > 0)) throw std::invalid_argument("classify_regime: inputs must be nonnegative");
  RegimeCheck r;
  const double m = margin;
  r.scale = std::max(std::abs(x_bar), x_c);
  r.scale_over_eps = eps_max > 0 ? r.scale / eps_max : kInfinity;
  r.eps_over_scale = r.scale > 0 ? eps_max / r.scale : kInfinity;
  r.regime_I = within(r.scale, m * eps_max) && within(eps_max, m);
  r.regime_II = within(eps_max, m * r.scale) && within(r.scale, m);
  r.regime_III = within(eps_max, m) && within(1.0 / m, r.scale);
  if (r.regime_I) r.regime = Regime::I;
  else if (r.regime_II) r.regime = Regime::II;
  else if (r.regime_III) r.regime = Regime::III;
  r.one_sided_caveat = r.regime_III && one_sided;
  return r;
}

RegimeParams regime_params(const ModelSpec& model, const BathSpec& bath, double T, double N, double R_M) {
  if (!(T > 0)) throw std::invalid_argument("regime_params: T must be positive");
  RegimeParams p;
  p.eps_max = model.omega_max * T;
  p.x_bar = bath.family == BathSpec::Family::shifted ? bath.center * T : 0.0;
  p.x_c = bath.family == BathSpec::Family::discrete ? bath.frequency_scale() * T : bath.nu_c * T;
  p.N = N;
  p.R_M = R_M;
  const double n = static_cast<double>(model.transition_frequencies.size());
  p.C = n * n;
  p.f0 = T * T * correlation(0.0, bath).real();
  p.sup_pos = T * T * correlation_sup(bath);
  p.sup_all = p.sup_pos;
  p.a_B = p.x_c > 0 ? 1.0 / p.x_c : kInfinity;
  return p;
}

BoundReport table_bound(const RegimeParams& p, double margin, bool one_sided, Regime forced) {
  if (p.N < 0 || p.R_M < 0 || p.eps_max < 0 || p.f0 < 0 || p.sup_pos < 0 || p.sup_all < 0 || p.C < 1)
    throw std::invalid_argument("table_bound: parameters must be nonnegative with C ≥ 1");
  BoundReport b;
  b.check = classify_regime(p.eps_max, p.x_bar, p.x_c, margin, one_sided);
  b.regime = forced == Regime::none ? b.check.regime : forced;
  const double N2 = p.N * p.N;
  b.multi_gate = N2 * 8.0 * p.R_M * p.sup_pos;
  switch (b.regime) {
    case Regime::I:
    case Regime::II: b.stroboscopic = N2 * p.C * p.eps_max * p.f0; break;
    case Regime::III: b.stroboscopic = p.N > 0 ? N2 * p.C * p.eps_max * p.a_B * p.sup_all / p.N : 0.0; break;
    case Regime::none: throw std::invalid_argument("table_bound: parameters fall outside regimes I, II and III");
  }
  b.total = b.stroboscopic + b.multi_gate;
  return b;
}

cplx jd_integral(double eps, double eta_t, double x_c) {
  auto g = [&](double a) { return (std::exp(I * (eps * (1 - a))) - 1.0) / std::pow(cplx(1.0, -a * x_c), 2); };
  return eta_t * x_c * x_c * gk_complex(g, 0.0, 1.0);
}

cplx jd_integral_direct(double eps, double eta_t, double x_c) {
  auto g = [&](double x) { return eta_t * x * std::exp(-x / x_c) * d0_closed(1.0, x, eps); };
  const double top = 60.0 * x_c;
  cplx sum = 0;
  const int chunks = 16;
  for (int i = 0; i < chunks; ++i) sum += gk_complex(g, top * i / chunks, top * (i + 1) / chunks);
  return sum;
}

cplx jd_first_order(double eps, double eta_t, double x_c) {
  return eta_t * eps * (-x_c + I * std::log(cplx(1.0, -x_c)));
}

double PerturbativeMap::norm() const { return superop_norm(total()); }

namespace {

// One picture of the coupling: target (phase time a) or a schedule (phase time nT, segment coupling).
struct Side {
  const PulseSchedule* schedule = nullptr;
  std::vector<std::vector<Operator>> C;  // [k][segment], eigenbasis

  void locate(double a, double T, int& segment, double& phase_time) const {
    if (!schedule) {
      segment = 0;
      phase_time = a;
      return;
    }
    long n;
    double offset;
    cycle_split(a, T, n, offset);
    segment = schedule->fired(offset);
    phase_time = static_cast<double>(n) * T;
  }
  std::size_t segments() const { return C.front().size(); }
};

struct Node {
  double a;
  double w;
  int seg[2];
  std::vector<cplx> phase[2];  // e^{-iω_f τ(a)} per side
};

}  // namespace

PerturbativeMap perturbative_difference_pair(long N, const ModelSpec& model, const PulseSchedule* first,
                                             const PulseSchedule* second, const BathSpec& bath, double T,
                                             PerturbativeOptions options) {
  if (N < 1) throw std::invalid_argument("perturbative_difference: need N ≥ 1");
  if (N > 200) throw std::invalid_argument("perturbative_difference: quadrature budget exceeded (N > 200)");
  validate(bath);
  const auto& sd = model.spectral;
  const Operator& V = sd.basis;
  const auto d = model.dim();
  Eigen::VectorXd E(d);
  for (Eigen::Index c = 0; c < d; ++c) E(c) = sd.eigenvalues[sd.level[c]];
  const auto& freqs = model.transition_frequencies;
  const std::size_t nf = freqs.size();
  Eigen::MatrixXi fidx(d, d);
  for (Eigen::Index x = 0; x < d; ++x)
    for (Eigen::Index y = 0; y < d; ++y) {
      const double w = E(y) - E(x);
      fidx(x, y) = static_cast<int>(std::min_element(freqs.begin(), freqs.end(),
                                                     [&](double p, double q) { return std::abs(p - w) < std::abs(q - w); }) -
                                    freqs.begin());
    }

  std::vector<Operator> couplings = model.couplings;
  if (!bath.independent) {
    Operator sum = Operator::Zero(d, d);
    for (const auto& A : couplings) sum += A;
    couplings = {sum};
  }
  const std::size_t K = couplings.size();

  std::array<Side, 2> sides;
  sides[0].schedule = first;
  sides[1].schedule = second;
  for (auto& s : sides) {
    s.C.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (!s.schedule) {
        s.C[k].push_back(V.adjoint() * couplings[k] * V);
      } else {
        for (const auto& W : s.schedule->partial) s.C[k].push_back((W * V).adjoint() * couplings[k] * (W * V));
      }
    }
  }

  // pieces: cycle boundaries, gate times of both pictures, no longer than the bath-resolved length
  const double h_max = options.max_piece > 0 ? options.max_piece : quadrature_piece(bath, T, model.omega_max);
  std::vector<double> cuts;
  for (long m = 0; m <= N; ++m) {
    cuts.push_back(m * T);
    if (m == N) break;
    for (const auto& s : sides)
      if (s.schedule)
        for (double g : s.schedule->gate_times) cuts.push_back(m * T + g);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> edges;
  for (double c : cuts)
    if (edges.empty() || c - edges.back() > 1e-12 * T) edges.push_back(c);
  std::vector<double> pieces{edges.front()};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double len = edges[i + 1] - edges[i];
    const int parts = std::max(1, static_cast<int>(std::ceil(len / h_max - 1e-9)));
    for (int p = 1; p <= parts; ++p) pieces.push_back(edges[i] + len * p / parts);
  }

  const auto& g = gl8();
  auto make_node = [&](double a, double w) {
    Node n;
    n.a = a;
    n.w = w;
    for (int s = 0; s < 2; ++s) {
      double tau;
      sides[s].locate(a, T, n.seg[s], tau);
      n.phase[s].resize(nf);
      for (std::size_t f = 0; f < nf; ++f) n.phase[s][f] = std::exp(-I * (freqs[f] * tau));
    }
    return n;
  };
  auto piece_nodes = [&](double lo, double hi) {
    std::vector<Node> out;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < 8; ++q) out.push_back(make_node(mid + half * g.x[q], half * g.w[q]));
    return out;
  };
  const std::size_t P = pieces.size() - 1;
  std::vector<std::vector<Node>> nodes(P);
  for (std::size_t p = 0; p < P; ++p) nodes[p] = piece_nodes(pieces[p], pieces[p + 1]);

  const std::size_t d2 = static_cast<std::size_t>(d * d);
  SuperOperator D1 = SuperOperator::Zero(d2, d2);
  Operator G2 = Operator::Zero(d, d), G3 = Operator::Zero(d, d);

  // accumulators [side][lo/hi][segment * nf + f]
  std::array<std::array<std::vector<cplx>, 2>, 2> S;
  auto add = [&](const Node& a, double b, int part) {
    const cplx fw = a.w * correlation(b - a.a, bath);
    for (int s = 0; s < 2; ++s) {
      auto& acc = S[s][part];
      const std::size_t base = static_cast<std::size_t>(a.seg[s]) * nf;
      for (std::size_t f = 0; f < nf; ++f) acc[base + f] += fw * a.phase[s][f];
    }
  };
  auto assemble = [&](int part, std::size_t k) {
    Operator L = Operator::Zero(d, d);
    for (int s = 0; s < 2; ++s) {
      const double sign = s == 0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < sides[s].segments(); ++j) {
        const Operator& Cj = sides[s].C[k][j];
        for (Eigen::Index y = 0; y < d; ++y)
          for (Eigen::Index x = 0; x < d; ++x) L(x, y) += sign * Cj(x, y) * S[s][part][j * nf + fidx(x, y)];
      }
    }
    return L;
  };

  for (std::size_t pb = 0; pb < P; ++pb) {
    for (const Node& bn : nodes[pb]) {
      const double b = bn.a;
      for (int s = 0; s < 2; ++s)
        for (int part = 0; part < 2; ++part) S[s][part].assign(sides[s].segments() * nf, 0.0);
      for (std::size_t pa = 0; pa < P; ++pa) {
        if (pa == pb) continue;
        for (const Node& an : nodes[pa]) add(an, b, pa < pb ? 0 : 1);
      }
      for (const Node& an : piece_nodes(pieces[pb], b)) add(an, b, 0);
      for (const Node& an : piece_nodes(b, pieces[pb + 1])) add(an, b, 1);

      Eigen::VectorXcd p(d);
      std::array<Operator, 2> Pm;
      for (int s = 0; s < 2; ++s) {
        double tau;
        int seg;
        sides[s].locate(b, T, seg, tau);
        for (Eigen::Index c = 0; c < d; ++c) p(c) = std::exp(I * (E(c) * tau));
        Pm[s] = p * p.adjoint();
      }
      for (std::size_t k = 0; k < K; ++k) {
        const Operator Lam = assemble(0, k);
        const Operator LamBar = assemble(1, k);
        const Operator A1 = sides[0].C[k][bn.seg[0]].cwiseProduct(Pm[0]);
        const Operator A2 = sides[1].C[k][bn.seg[1]].cwiseProduct(Pm[1]);
        const Operator Lsum = Lam + LamBar;
        D1 += bn.w * (kron(A1.transpose(), Lsum) + kron(Lsum.conjugate(), A2));
        G2 -= bn.w * (A1 * Lam + LamBar.adjoint() * A2);
        G3 -= bn.w * (Lam.adjoint() * A1 + A2 * LamBar);
      }
    }
  }

  const Operator Id = Operator::Identity(d, d);
  const SuperOperator W = kron(V.conjugate(), V);
  PerturbativeMap out;
  out.delta1 = W * D1 * W.adjoint();
  out.delta2 = W * kron(Id, G2) * W.adjoint();
  out.delta3 = W * kron(G3.transpose(), Id) * W.adjoint();
  return out;
}

PerturbativeMap perturbative_difference(long N, const ModelSpec& model, const PulseSchedule& schedule_sim,
                                        const PulseSchedule* schedule_s1, const BathSpec& bath,
                                        PerturbativeOptions options) {
  return perturbative_difference_pair(N, model, schedule_s1, &schedule_sim, bath, schedule_sim.T, options);
}

SuperOperator delta1_regime_approx(long N, const ModelSpec& model, const BathSpec& bath, double T) {
  const auto d = model.dim();
  const std::size_t d2 = static_cast<std::size_t>(d * d);
  SuperOperator out = SuperOperator::Zero(d2, d2);
  const double f0 = T * T * correlation(0.0, bath).real();
  const double N2 = static_cast<double>(N) * static_cast<double>(N);
  const int K = static_cast<int>(model.couplings.size());
  std::vector<std::vector<FrequencyComponent>> comps;
  for (int k = 0; k < K; ++k) comps.push_back(frequency_components(model, k));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      if (bath.independent && k != l) continue;
      for (const auto& e : comps[l])
        for (const auto& ep : comps[k]) {
          const double sum = (e.omega + ep.omega) * T;
          // Ã_l(ε) X Ã_k(ε')
          out += (0.5 * I * N2 * f0 * sum) * kron(ep.op.transpose(), e.op);
        }
    }
  return out;
}

}  // namespace strobe
