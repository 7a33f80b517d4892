#include "strobe/bath.hpp"

#include "strobe/csv.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace strobe {

namespace {

constexpr cplx I{0.0, 1.0};

// 8-point Gauss–Legendre nodes and weights on [-1, 1]
struct GaussRule {
  std::array<double, 8> x{};
  std::array<double, 8> w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, 8>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] = -a[i];
      w[i] = wt[i];
      x[7 - i] = a[i];
      w[7 - i] = wt[i];
    }
  }
};

const GaussRule& gauss8() {
  static const GaussRule rule;
  return rule;
}

cplx inverse_power(cplx z, double s) {
  const double r = std::round(s);
  if (std::abs(s - r) < 1e-14 && r >= 1 && r <= 8) {
    const cplx inv = 1.0 / z;
    cplx out = inv;
    for (int k = 1; k < static_cast<int>(r); ++k) out *= inv;
    return out;
  }
  return std::exp(-s * std::log(z));
}

double coth_half(double beta, double nu) {
  if (std::isinf(beta)) return 1.0;
  return 1.0 / std::tanh(0.5 * beta * nu);
}

// ∫_a^b of a real integrand, split into chunks short enough to resolve the oscillation
template <class F>
double oscillatory_integral(F f, double a, double b, double s) {
  const double period = std::abs(s) > 0 ? 2 * std::numbers::pi / std::abs(s) : (b - a);
  const int chunks = std::max(1, static_cast<int>(std::ceil((b - a) / period)));
  const double h = (b - a) / chunks;
  double total = 0.0;
  for (int c = 0; c < chunks; ++c) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a + c * h, a + (c + 1) * h, 12,
                                                                             1e-13, &err);
  }
  return total;
}

cplx ohmic_quadrature(double s, const BathSpec& b) {
  const double cut = b.nu_c * (40.0 + 3.0 * b.w);
  auto density = [&](double nu) { return b.eta * std::pow(nu, b.w) * std::exp(-nu / b.nu_c); };
  auto re = [&](double nu) { return density(nu) * coth_half(b.beta, nu) * std::cos(nu * s); };
  auto im = [&](double nu) { return -density(nu) * std::sin(nu * s); };
  return {oscillatory_integral(re, 0.0, cut, s), oscillatory_integral(im, 0.0, cut, s)};
}

cplx shifted_quadrature(double s, const BathSpec& b) {
  const double cut = b.nu_c * (40.0 + 3.0 * b.w);
  auto density = [&](double u) { return b.eta * std::pow(std::abs(u), b.w) * std::exp(-std::abs(u) / b.nu_c); };
  // J is even about ν̄, so ∫ J(ν̄+u) e^{-i(ν̄+u)s} du = e^{-iν̄s} · 2∫_0 J cos(us) du
  auto re = [&](double u) { return 2.0 * density(u) * std::cos(u * s); };
  return std::exp(-I * (b.center * s)) * oscillatory_integral(re, 0.0, cut, s);
}

cplx discrete_sum(double s, const BathSpec& b) {
  cplx out = 0;
  for (const auto& m : b.modes) {
    const double n = thermal_occupation(m.omega, b.beta);
    out += std::norm(m.g) * ((1.0 + n) * std::exp(-I * (m.omega * s)) + n * std::exp(I * (m.omega * s)));
  }
  return out;
}

cplx ohmic_closed(double s, const BathSpec& b) {
  const double sigma = b.w + 1.0;
  const double pref = b.eta * std::tgamma(sigma);
  const double c = 1.0 / b.nu_c;
  if (std::isinf(b.beta)) return pref * inverse_power(cplx(c, s), sigma);
  const double scale = std::pow(b.beta, -sigma);
  return pref * scale *
         (hurwitz_zeta(sigma, cplx(c, s) / b.beta) + hurwitz_zeta(sigma, cplx(c, -s) / b.beta + 1.0));
}

cplx shifted_closed(double s, const BathSpec& b) {
  const double sigma = b.w + 1.0;
  const double pref = b.eta * std::tgamma(sigma);
  const double c = 1.0 / b.nu_c;
  return std::exp(-I * (b.center * s)) * pref *
         (inverse_power(cplx(c, s), sigma) + inverse_power(cplx(c, -s), sigma));
}

}  // namespace

double BathSpec::frequency_scale() const {
  switch (family) {
    case Family::ohmic: return nu_c;
    case Family::shifted: return nu_c + std::abs(center);
    case Family::discrete: {
      double m = 0;
      for (const auto& mode : modes) m = std::max(m, mode.omega);
      return m;
    }
  }
  return nu_c;
}

BathSpec ohmic_bath(double eta, double nu_c, double beta, double w) {
  BathSpec b;
  b.family = BathSpec::Family::ohmic;
  b.eta = eta;
  b.nu_c = nu_c;
  b.beta = beta;
  b.w = w;
  validate(b);
  return b;
}

BathSpec discrete_bath(std::vector<DiscreteMode> modes, double beta, bool independent) {
  BathSpec b;
  b.family = BathSpec::Family::discrete;
  b.modes = std::move(modes);
  b.beta = beta;
  b.independent = independent;
  validate(b);
  return b;
}

void validate(const BathSpec& b) {
  if (!(b.beta > 0)) throw std::invalid_argument("bath: β must be positive or infinite");
  if (b.family == BathSpec::Family::discrete) {
    if (b.modes.empty()) throw std::invalid_argument("bath: discrete family needs at least one mode");
    for (const auto& m : b.modes)
      if (!(m.omega > 0)) throw std::invalid_argument("bath: discrete mode frequencies must be positive");
    return;
  }
  if (!(b.eta >= 0)) throw std::invalid_argument("bath: η must be nonnegative");
  if (!(b.nu_c > 0)) throw std::invalid_argument("bath: ν_c must be positive");
  if (!(b.w > 0)) throw std::invalid_argument("bath: power w must be positive");
  if (b.family == BathSpec::Family::shifted && !std::isinf(b.beta))
    throw std::invalid_argument("bath: the shifted family is zero-temperature only");
}

double thermal_occupation(double nu, double beta) {
  if (!(nu > 0)) throw std::invalid_argument("thermal_occupation: ν must be positive");
  if (std::isinf(beta)) return 0.0;
  return 1.0 / std::expm1(beta * nu);
}

double spectral_density(double nu, const BathSpec& b) {
  switch (b.family) {
    case BathSpec::Family::ohmic:
      return nu < 0 ? 0.0 : b.eta * std::pow(nu, b.w) * std::exp(-nu / b.nu_c);
    case BathSpec::Family::shifted: {
      const double u = std::abs(nu - b.center);
      return b.eta * std::pow(u, b.w) * std::exp(-u / b.nu_c);
    }
    case BathSpec::Family::discrete: break;
  }
  throw std::invalid_argument("spectral_density: discrete-mode baths have no density");
}

cplx hurwitz_zeta(double s, cplx a) {
  if (!(s > 1)) throw std::invalid_argument("hurwitz_zeta: order must exceed 1");
  if (!(a.real() > 0)) throw std::invalid_argument("hurwitz_zeta: Re a must be positive");
  static constexpr std::array<double, 10> bernoulli{1.0 / 6,         -1.0 / 30,     1.0 / 42,
                                                    -1.0 / 30,       5.0 / 66,      -691.0 / 2730,
                                                    7.0 / 6,         -3617.0 / 510, 43867.0 / 798,
                                                    -174611.0 / 330};
  const int shift = std::max(0, static_cast<int>(std::ceil(12.0 - std::abs(a))));
  cplx sum = 0;
  for (int n = 0; n < shift; ++n) sum += inverse_power(a + static_cast<double>(n), s);
  const cplx z = a + static_cast<double>(shift);
  const cplx zs = inverse_power(z, s);
  sum += zs * z / (s - 1.0) + 0.5 * zs;
  // Euler–Maclaurin tail: B_2k/(2k)! · s(s+1)…(s+2k-2) · z^{-s-2k+1}
  const cplx inv_z2 = 1.0 / (z * z);
  cplx zpow = zs / z;
  double rising = s;
  double factorial = 2.0;
  for (std::size_t k = 1; k <= bernoulli.size(); ++k) {
    sum += bernoulli[k - 1] / factorial * rising * zpow;
    zpow *= inv_z2;
    const double m = static_cast<double>(2 * k);
    rising *= (s + m - 1) * (s + m);
    factorial *= (m + 1) * (m + 2);
  }
  return sum;
}

cplx correlation(double s, const BathSpec& b, CorrelationMethod method) {
  switch (b.family) {
    case BathSpec::Family::discrete: return discrete_sum(s, b);
    case BathSpec::Family::ohmic:
      return method == CorrelationMethod::quadrature ? ohmic_quadrature(s, b) : ohmic_closed(s, b);
    case BathSpec::Family::shifted:
      return method == CorrelationMethod::quadrature ? shifted_quadrature(s, b) : shifted_closed(s, b);
  }
  return 0.0;
}

double correlation_sup(const BathSpec& b) { return correlation(0.0, b).real(); }

double quadrature_piece(const BathSpec& spec, double T, double extra_frequency) {
  double h = T;
  const double scale = spec.family == BathSpec::Family::discrete ? 2.0 * spec.frequency_scale()
                                                                 : 3.0 * spec.frequency_scale();
  if (scale > 0) h = std::min(h, 1.0 / scale);
  if (std::abs(extra_frequency) > 0) h = std::min(h, 0.5 / std::abs(extra_frequency));
  return h;
}

cplx weighted_integral(const BathSpec& spec, double a, double b, double omega, double h_max) {
  if (b <= a) return 0.0;
  const auto& g = gauss8();
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / h_max - 1e-12)));
  const double h = (b - a) / pieces;
  cplx total = 0;
  for (int p = 0; p < pieces; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < 8; ++i) {
      const double u = mid + 0.5 * h * g.x[i];
      total += g.w[i] * correlation(u, spec) * std::exp(I * (omega * u));
    }
  }
  return 0.5 * h * total;
}

CorrelationKernel kernel_table(const BathSpec& spec, double delta, int n_max) {
  if (!(delta > 0)) throw std::invalid_argument("kernel_table: Δ must be positive");
  if (n_max < 1) throw std::invalid_argument("kernel_table: n_max must be at least 1");
  validate(spec);
  CorrelationKernel k;
  k.delta = delta;
  k.spec = spec;
  const double h = quadrature_piece(spec, delta);
  k.values.reserve(n_max + 1);
  k.cumulative.reserve(n_max + 1);
  k.values.push_back(correlation(0.0, spec));
  k.cumulative.push_back(0.0);
  for (int m = 1; m <= n_max; ++m) {
    k.values.push_back(correlation(m * delta, spec));
    k.cumulative.push_back(k.cumulative.back() + weighted_integral(spec, (m - 1) * delta, m * delta, 0.0, h));
  }
  return k;
}

void CorrelationKernel::write_csv(const std::string& path) const {
  CsvWriter csv({"m", "re_f", "im_f", "re_F", "im_F"});
  for (std::size_t m = 0; m < values.size(); ++m)
    csv.add_row({static_cast<double>(m), values[m].real(), values[m].imag(), cumulative[m].real(),
                 cumulative[m].imag()});
  csv.save(path);
}

LatticeIntegrals::LatticeIntegrals(const BathSpec& spec, double T, std::vector<double> offsets,
                                   std::vector<double> freqs)
    : spec_(spec), T_(T), offsets_(std::move(offsets)), freqs_(std::move(freqs)) {
  if (offsets_.empty()) throw std::invalid_argument("LatticeIntegrals: no offsets");
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (offsets_[i] < 0 || offsets_[i] >= T_ || (i > 0 && offsets_[i] <= offsets_[i - 1]))
      throw std::invalid_argument("LatticeIntegrals: offsets must be increasing within [0, T)");
  }
  double wmax = 0;
  for (double w : freqs_) wmax = std::max(wmax, std::abs(w));
  h_max_ = quadrature_piece(spec_, T_, wmax);
  running_.assign(freqs_.size(), 0.0);
  rows_.assign(3, std::vector<cplx>(offsets_.size() * freqs_.size()));
}

void LatticeIntegrals::advance() {
  const auto& g = gauss8();
  auto& row = rows_[next_row_ % 3];
  const std::size_t nf = freqs_.size();
  std::vector<cplx> nodes(8);
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    const double target = static_cast<double>(next_row_) * T_ + offsets_[i];
    if (target > cursor_) {
      const int pieces = std::max(1, static_cast<int>(std::ceil((target - cursor_) / h_max_ - 1e-12)));
      const double h = (target - cursor_) / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double mid = cursor_ + (p + 0.5) * h;
        for (std::size_t q = 0; q < 8; ++q) nodes[q] = 0.5 * h * g.w[q] * correlation(mid + 0.5 * h * g.x[q], spec_);
        for (std::size_t j = 0; j < nf; ++j) {
          cplx acc = 0;
          for (std::size_t q = 0; q < 8; ++q)
            acc += nodes[q] * std::exp(I * (freqs_[j] * (mid + 0.5 * h * g.x[q])));
          running_[j] += acc;
        }
      }
      cursor_ = target;
    }
    for (std::size_t j = 0; j < nf; ++j) row[i * nf + j] = running_[j];
  }
  ++next_row_;
}

const std::vector<cplx>& LatticeIntegrals::row(long m) {
  if (m < 0) throw std::invalid_argument("LatticeIntegrals: negative row");
  if (m < next_row_ - 3) throw std::logic_error("LatticeIntegrals: row requested out of order");
  while (next_row_ <= m) advance();
  return rows_[m % 3];
}

UnitParams convert_units(const UnitParams& p, UnitDirection direction, double T) {
  if (!(T > 0)) throw std::invalid_argument("convert_units: T must be positive");
  UnitParams out = p;
  if (direction == UnitDirection::to_dimensionless) {
    out.frequency = p.frequency * T;
    out.cutoff = p.cutoff * T;
    out.beta = p.beta / T;
    out.eta = p.eta * std::pow(T, 1.0 - p.w);
    out.tau_g = p.tau_g / T;
  } else {
    out.frequency = p.frequency / T;
    out.cutoff = p.cutoff / T;
    out.beta = p.beta * T;
    out.eta = p.eta / std::pow(T, 1.0 - p.w);
    out.tau_g = p.tau_g * T;
  }
  return out;
}

}  // namespace strobe
