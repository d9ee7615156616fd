#include "dipolar/emission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "dipolar/errors.hpp"

namespace dipolar {

namespace {

constexpr double kPoleThreshold = 1e-12;
constexpr double kResidueStep = 1e-5;
constexpr double kResidueTolerance = 1e-6;
constexpr double kTailTolerance = 1e-9;
constexpr int kMaxTailSegments = 200;
constexpr std::size_t kPoleScanPoints = 4000;
constexpr double kDegree = std::numbers::pi / 180.0;

// Component layout of the vector integrand.
enum Component : std::size_t { kV, kHs, kHp, kDownV, kDownHs, kDownHp, kUpV, kUpHs, kUpHp, kCount };
using Vec = std::array<double, kCount>;

const complex kI(0.0, 1.0);

struct PolarisationTerms {
  complex r_up, r_down, t_up, t_down;
  complex phi_up, phi_down;  // round-trip phases to each boundary
  complex denominator;
};

struct Evaluation {
  SpectralSample sample;
  double pole_strength = 0.0;  // max |N/D| over polarisations, for pole searches
  std::array<complex, 3> raw{};  // V, Hs, Hp densities before taking the real part
  std::array<complex, 2> round_trip{};  // r_up r_down phi_up phi_down for p and s
};

Evaluation evaluate(const OpticalContext& ctx, double s, bool check_pole) {
  const std::size_t n = ctx.size();
  const std::size_t e = ctx.stack().emitter_layer();
  const double ne = ctx.emitter_index();
  const double k0 = ctx.k0();
  const double u = ne * s;

  std::array<complex, 16> kz_inline;
  std::vector<complex> kz_heap;
  complex* kz = kz_inline.data();
  if (n > kz_inline.size()) {
    kz_heap.resize(n);
    kz = kz_heap.data();
  }
  for (std::size_t j = 0; j < n; ++j) kz[j] = ctx.kz(j, u);
  const std::span<const complex> kz_span(kz, n);

  const complex kze = kz[e];
  const complex sz = kze / (k0 * ne);
  const double sz2 = std::norm(sz);
  const double below = ctx.stack().distance_below();
  const double above = ctx.stack().distance_above();

  auto terms = [&](Polarization pol) {
    PolarisationTerms t;
    const auto dn = substack_response(ctx, Side::below_emitter, pol, kz_span);
    const auto up = substack_response(ctx, Side::above_emitter, pol, kz_span);
    t.r_down = dn.r;
    t.t_down = dn.t;
    t.r_up = up.r;
    t.t_up = up.t;
    t.phi_down = std::isinf(below) ? complex(0.0) : std::exp(2.0 * kI * kze * below);
    t.phi_up = std::isinf(above) ? complex(0.0) : std::exp(2.0 * kI * kze * above);
    t.denominator = 1.0 - t.r_up * t.r_down * t.phi_up * t.phi_down;
    return t;
  };
  const PolarisationTerms p = terms(Polarization::p);
  const PolarisationTerms sp = terms(Polarization::s);

  if (check_pole && (std::abs(p.denominator) < kPoleThreshold ||
                     std::abs(sp.denominator) < kPoleThreshold)) {
    std::ostringstream msg;
    msg << "Fabry-Perot pole at s = " << s;
    throw PoleError(s, msg.str());
  }

  Evaluation out;
  SpectralSample& r = out.sample;
  r.s = s;

  const complex vp = (1.0 + p.r_up * p.phi_up) * (1.0 + p.r_down * p.phi_down) / p.denominator;
  const complex hp = (1.0 - p.r_up * p.phi_up) * (1.0 - p.r_down * p.phi_down) / p.denominator;
  const complex hs = (1.0 + sp.r_up * sp.phi_up) * (1.0 + sp.r_down * sp.phi_down) / sp.denominator;
  out.raw = {1.5 * s * s * s / sz * vp, 0.75 * s / sz * hs, 0.75 * s * sz * hp};
  r.total.vertical = out.raw[0].real();
  r.total.horizontal_s = out.raw[1].real();
  r.total.horizontal_p = out.raw[2].real();
  out.pole_strength = std::max({std::abs(vp), std::abs(hp), std::abs(hs)});
  out.round_trip = {1.0 - p.denominator, 1.0 - sp.denominator};

  // Source strengths |a|^2 (s Jacobian included), continued analytically past s = 1.
  const double weight_v = 0.75 * s * s * s / sz2;
  const double weight_hs = 0.375 * s / sz2;
  const double weight_hp = 0.375 * s;

  // Downward amplitude at the lower emitter-layer boundary, up to the source amplitude:
  // (1 + sigma r_up phi_up) / D with sigma = +1 (V p, H s) or -1 (H p).
  const complex half_down = std::isinf(below) ? complex(1.0) : std::exp(kI * kze * below);
  const complex half_up = std::isinf(above) ? complex(1.0) : std::exp(kI * kze * above);
  const double to_density = 1.0 / (k0 * ne);

  const std::size_t bottom = 0;
  const std::size_t top = n - 1;
  const double flux_down_p = flux_weight(ctx.eps(bottom), kz[bottom], Polarization::p) * to_density;
  const double flux_down_s = flux_weight(ctx.eps(bottom), kz[bottom], Polarization::s) * to_density;
  const double flux_up_p = flux_weight(ctx.eps(top), kz[top], Polarization::p) * to_density;
  const double flux_up_s = flux_weight(ctx.eps(top), kz[top], Polarization::s) * to_density;

  auto down_power = [&](const PolarisationTerms& t, double sigma, double flux) {
    if (flux == 0.0) return 0.0;
    const complex amplitude =
        t.t_down * half_down * (1.0 + sigma * t.r_up * t.phi_up) / t.denominator;
    return std::norm(amplitude) * flux;
  };
  auto up_power = [&](const PolarisationTerms& t, double sigma, double flux) {
    if (flux == 0.0) return 0.0;
    const complex amplitude =
        t.t_up * half_up * (1.0 + sigma * t.r_down * t.phi_down) / t.denominator;
    return std::norm(amplitude) * flux;
  };

  r.down.vertical = weight_v * down_power(p, 1.0, flux_down_p);
  r.down.horizontal_s = weight_hs * down_power(sp, 1.0, flux_down_s);
  r.down.horizontal_p = weight_hp * down_power(p, -1.0, flux_down_p);
  r.up.vertical = weight_v * up_power(p, 1.0, flux_up_p);
  r.up.horizontal_s = weight_hs * up_power(sp, 1.0, flux_up_s);
  r.up.horizontal_p = weight_hp * up_power(p, -1.0, flux_up_p);
  return out;
}

// Integrable end-point behaviour at s = 1 exactly evaluates to 0/0; step off it.
double nudge_branch_point(double s) {
  if (std::abs(s - 1.0) < 1e-12) return s < 1.0 || s == 1.0 ? 1.0 - 1e-12 : 1.0 + 1e-12;
  return s;
}

Vec to_vec(const SpectralSample& x, bool down_counts, bool up_counts) {
  Vec v{};
  v[kV] = x.total.vertical;
  v[kHs] = x.total.horizontal_s;
  v[kHp] = x.total.horizontal_p;
  if (down_counts) {
    v[kDownV] = x.down.vertical;
    v[kDownHs] = x.down.horizontal_s;
    v[kDownHp] = x.down.horizontal_p;
  }
  if (up_counts) {
    v[kUpV] = x.up.vertical;
    v[kUpHs] = x.up.horizontal_s;
    v[kUpHp] = x.up.horizontal_p;
  }
  return v;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Golden-section maximisation of a unimodal function on [a, b].
template <class F>
double golden_max(F&& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 4e-16 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

// The maximum of |N/D| is only located to about sqrt(eps). A lossless guided mode is where
// the round-trip factor r_up r_down phi_up phi_down passes through 1, so its phase changes
// sign there and bisection pins the pole to the last bit.
double refine_pole(const OpticalContext& ctx, double peak, double step) {
  const auto at_peak = evaluate(ctx, peak, false).round_trip;
  const std::size_t pol = std::abs(1.0 - at_peak[0]) < std::abs(1.0 - at_peak[1]) ? 0 : 1;
  auto phase = [&](double s) { return std::arg(evaluate(ctx, s, false).round_trip[pol]); };
  double a = peak - 1e-3 * step;
  double b = peak + 1e-3 * step;
  double fa = phase(a);
  if ((fa < 0.0) == (phase(b) < 0.0)) return peak;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = phase(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

PowerTotals finish(const Vec& full, const Vec& allowed, const Vec& forbidden, const Vec& window) {
  PowerTotals t;
  t.total = {full[kV], full[kHs] + full[kHp]};
  t.down_allowed = {allowed[kDownV], allowed[kDownHs] + allowed[kDownHp]};
  t.down_forbidden = {forbidden[kDownV], forbidden[kDownHs] + forbidden[kDownHp]};
  t.up = {full[kUpV], full[kUpHs] + full[kUpHp]};
  t.spp_window_loss = {window[kV] - window[kDownV] - window[kUpV],
                       window[kHs] + window[kHp] - window[kDownHs] - window[kDownHp] -
                           window[kUpHs] - window[kUpHp]};
  return t;
}

}  // namespace

double DensityTriple::for_orientation(Orientation o) const noexcept {
  switch (o) {
    case Orientation::vertical: return vertical;
    case Orientation::horizontal: return horizontal();
    case Orientation::isotropic: return (vertical + 2.0 * horizontal()) / 3.0;
  }
  return 0.0;
}

double OrientationPowers::for_orientation(Orientation o) const noexcept {
  switch (o) {
    case Orientation::vertical: return vertical;
    case Orientation::horizontal: return horizontal;
    case Orientation::isotropic: return (vertical + 2.0 * horizontal) / 3.0;
  }
  return 0.0;
}

double Efficiencies::for_orientation(Orientation o) const noexcept {
  switch (o) {
    case Orientation::vertical: return vertical;
    case Orientation::horizontal: return horizontal;
    case Orientation::isotropic: return isotropic;
  }
  return 0.0;
}

PowerBudget PowerTotals::budget(Orientation o) const {
  PowerBudget b;
  b.total = total.for_orientation(o);
  b.down_allowed = down_allowed.for_orientation(o);
  b.down_forbidden = down_forbidden.for_orientation(o);
  b.up = up.for_orientation(o);
  b.loss = b.total - b.down() - b.up;
  b.spp_estimate = spp_window_loss.for_orientation(o);
  return b;
}

EmissionModel::EmissionModel(const Stack& stack, double wavelength_nm, QuadratureOptions options)
    : context_(stack, wavelength_nm), options_(options) {
  const std::size_t n = context_.size();
  const std::size_t e = stack.emitter_layer();
  const double ne = context_.emitter_index();
  bottom_index_ = context_.index(0).real();

  for (std::size_t j = 0; j < n; ++j) {
    const double line = context_.index(j).real() / ne;
    if (line > 0.0) light_lines_.push_back(line);
  }
  std::sort(light_lines_.begin(), light_lines_.end());
  light_lines_.erase(std::unique(light_lines_.begin(), light_lines_.end()), light_lines_.end());

  // Metal nearest to the emitter, and the dielectric it faces on the emitter side.
  auto is_metal = [&](std::size_t j) { return context_.eps(j).real() < 0.0; };
  std::optional<std::size_t> below_metal, above_metal;
  for (std::size_t j = e; j-- > 0;) {
    if (is_metal(j)) {
      below_metal = j;
      break;
    }
  }
  for (std::size_t j = e + 1; j < n; ++j) {
    if (is_metal(j)) {
      above_metal = j;
      break;
    }
  }
  std::optional<std::size_t> partner;
  if (above_metal && (!below_metal || *above_metal - e <= e - *below_metal)) {
    spp_metal_ = above_metal;
    partner = *above_metal - 1;
  } else if (below_metal) {
    spp_metal_ = below_metal;
    partner = *below_metal + 1;
  }
  if (spp_metal_ && !is_metal(*partner)) {
    try {
      const complex ksp =
          spp_wavevector(context_.eps(*spp_metal_), context_.eps(*partner), wavelength_nm);
      spp_position_ = ksp.real() / (context_.k0() * ne);
      spp_width_ = std::max(ksp.imag() / (context_.k0() * ne), 1e-4);
    } catch (const SingularityError&) {
      spp_position_.reset();
    }
  } else {
    spp_metal_.reset();
  }

  // Guided modes of a lossless stack sit on the real axis beyond both outer light lines.
  if (context_.lossless()) {
    const double lo = std::max(context_.index(0).real(), context_.index(n - 1).real()) / ne;
    const double hi = light_lines_.back();
    if (hi > lo * (1.0 + 1e-9)) {
      const double step = (hi - lo) / static_cast<double>(kPoleScanPoints + 1);
      auto strength = [&](double s) { return evaluate(context_, s, false).pole_strength; };
      std::vector<double> grid(kPoleScanPoints + 2);
      std::vector<double> values(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = lo + step * static_cast<double>(i);
        values[i] = strength(grid[i]);
      }
      for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (values[i] >= values[i - 1] && values[i] >= values[i + 1]) {
          const double peak = golden_max(strength, grid[i - 1], grid[i + 1]);
          if (strength(peak) > 1e8) guided_poles_.push_back(refine_pole(context_, peak, step));
        }
      }
    }
  }

  breakpoints_ = light_lines_;
  if (spp_position_) {
    const double c = *spp_position_;
    for (double x : {c - 3.0 * spp_width_, c, c + 3.0 * spp_width_}) {
      if (x > 0.0) breakpoints_.push_back(x);
    }
  }
  // Each pole gets a symmetric window clear of every other breakpoint and pole.
  for (double pole : guided_poles_) {
    double gap = 0.25 * pole;
    for (double b : breakpoints_) gap = std::min(gap, 0.25 * std::abs(b - pole));
    for (double other : guided_poles_) {
      if (other != pole) gap = std::min(gap, 0.25 * std::abs(other - pole));
    }
    pole_half_widths_.push_back(gap);
  }
  for (std::size_t i = 0; i < guided_poles_.size(); ++i) {
    breakpoints_.push_back(guided_poles_[i] - pole_half_widths_[i]);
    breakpoints_.push_back(guided_poles_[i] + pole_half_widths_[i]);
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end(),
                                 [](double a, double b) { return std::abs(a - b) <= 1e-14 * b; }),
                     breakpoints_.end());
}

SpectralSample EmissionModel::sample(double s) const {
  return evaluate(context_, nudge_branch_point(s), true).sample;
}

double EmissionModel::s_of_angle(double theta_deg) const noexcept {
  return bottom_index_ * std::sin(theta_deg * kDegree) / emitter_index();
}

PowerTotals EmissionModel::integrate_totals(const OpticalContext& ctx) const {
  const bool down_counts = ctx.index(0).imag() == 0.0;
  const bool up_counts = ctx.index(ctx.size() - 1).imag() == 0.0;
  auto integrand = [&](double s) { return to_vec(evaluate(ctx, s, true).sample, down_counts, up_counts); };

  Vec full{}, allowed{}, forbidden{}, window{};
  const double window_lo = spp_position_ ? *spp_position_ - 3.0 * spp_width_ : 0.0;
  const double window_hi = spp_position_ ? *spp_position_ + 3.0 * spp_width_ : 0.0;

  auto accumulate = [&](double a, double b, const Vec& v) {
    const double mid = 0.5 * (a + b);
    for (std::size_t c = 0; c < kCount; ++c) full[c] += v[c];
    auto& bucket = mid <= 1.0 ? allowed : forbidden;
    for (std::size_t c = kDownV; c <= kDownHp; ++c) bucket[c] += v[c];
    if (spp_position_ && mid > window_lo && mid < window_hi) {
      for (std::size_t c = 0; c < kCount; ++c) window[c] += v[c];
    }
  };

  // In a lossless stack nothing is dissipated beyond both outer light lines except by
  // guided modes; integrating the vanishing real part there only accumulates round-off.
  const double guided_from =
      ctx.lossless() ? std::max(ctx.index(0).real(), ctx.index(ctx.size() - 1).real()) /
                           ctx.emitter_index()
                     : std::numeric_limits<double>::infinity();

  double a = 0.0;
  for (double b : breakpoints_) {
    if (b <= a) continue;
    if (a >= guided_from * (1.0 - 1e-12)) {
      const auto pole = pole_window(a, b);
      if (pole) accumulate(a, b, integrate_pole_window(ctx, *pole));
    } else {
      accumulate(a, b, integrate_adaptive<kCount>(integrand, a, b, options_).value);
    }
    a = b;
  }
  if (a >= guided_from * (1.0 - 1e-12)) return finish(full, allowed, forbidden, window);
  // Geometric tail segments [2^k, 2^(k+1)] until one becomes negligible.
  double b = std::exp2(std::floor(std::log2(a)) + 1.0);
  for (int k = 0;; ++k) {
    if (k == kMaxTailSegments) {
      throw QuadratureError("evanescent tail did not decay", max_abs(full), 0.0);
    }
    const Vec part = integrate_adaptive<kCount>(integrand, a, b, options_).value;
    accumulate(a, b, part);
    if (max_abs(part) < kTailTolerance * max_abs(full)) break;
    a = b;
    b *= 2.0;
  }

  return finish(full, allowed, forbidden, window);
}

std::optional<std::size_t> EmissionModel::pole_window(double a, double b) const {
  for (std::size_t i = 0; i < guided_poles_.size(); ++i) {
    const double c = guided_poles_[i];
    if (a < c && c < b) return i;
  }
  return std::nullopt;
}

// A real-axis pole is the lossless limit of a pole just above the axis, so it contributes
// i*pi times its residue. Away from the poles the densities are purely imaginary there (no
// open channel, no absorber), so nothing else survives in the window.
std::array<double, 9> EmissionModel::integrate_pole_window(const OpticalContext& ctx,
                                                          std::size_t pole) const {
  const double c = guided_poles_[pole];
  const double w = pole_half_widths_[pole];
  auto residue = [&](double step) {
    const auto plus = evaluate(ctx, c + step, false).raw;
    const auto minus = evaluate(ctx, c - step, false).raw;
    std::array<complex, 3> r;
    for (std::size_t k = 0; k < 3; ++k) r[k] = 0.5 * step * (plus[k] - minus[k]);
    return r;
  };
  const double step = kResidueStep * w;
  const auto coarse = residue(step);
  const auto fine = residue(0.5 * step);
  double scale = 0.0;
  for (const auto& r : fine) scale = std::max(scale, std::abs(r));
  Vec value{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (std::abs(coarse[k] - fine[k]) > kResidueTolerance * scale) {
      throw QuadratureError("guided-mode residue did not converge", std::abs(fine[k]),
                            std::abs(coarse[k] - fine[k]));
    }
    value[k] = -std::numbers::pi * fine[k].imag();
  }
  return value;
}

PowerTotals EmissionModel::totals() const { return integrate_totals(context_); }

std::vector<OrientationPowers> EmissionModel::collected(std::span<const double> theta_c_deg) const {
  if (context_.index(0).imag() != 0.0) {
    throw UnsupportedConfiguration("collection into an absorbing bottom medium is not supported");
  }
  using Down = std::array<double, 3>;
  auto integrand = [&](double s) {
    const auto x = evaluate(context_, s, true).sample;
    return Down{x.down.vertical, x.down.horizontal_s, x.down.horizontal_p};
  };

  std::vector<OrientationPowers> out;
  out.reserve(theta_c_deg.size());
  Down running{};
  double a = 0.0;
  for (double theta : theta_c_deg) {
    if (theta < 0.0 || theta > 90.0) throw InvalidArgument("collection angle must be in [0, 90]");
    const double cut = s_of_angle(theta);
    if (cut < a) throw InvalidArgument("collection angles must be non-decreasing");
    for (double b : breakpoints_) {
      if (b <= a) continue;
      if (b >= cut) break;
      const auto part = integrate_adaptive<3>(integrand, a, b, options_).value;
      for (std::size_t c = 0; c < 3; ++c) running[c] += part[c];
      a = b;
    }
    if (cut > a) {
      const auto part = integrate_adaptive<3>(integrand, a, cut, options_).value;
      for (std::size_t c = 0; c < 3; ++c) running[c] += part[c];
      a = cut;
    }
    out.push_back({running[0], running[1] + running[2]});
  }
  return out;
}

OrientationPowers EmissionModel::collected(double theta_c_deg) const {
  const double cuts[1] = {theta_c_deg};
  return collected(std::span<const double>(cuts, 1)).front();
}

Efficiencies efficiencies(const PowerTotals& totals, const OrientationPowers& collected) {
  Efficiencies e;
  e.vertical = collected.vertical / totals.total.vertical;
  e.horizontal = collected.horizontal / totals.total.horizontal;
  e.isotropic = (collected.vertical + 2.0 * collected.horizontal) /
                (totals.total.vertical + 2.0 * totals.total.horizontal);
  return e;
}

DensityTriple spectral_density(const Stack& stack, double wavelength_nm, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("s must be >= 0");
  return EmissionModel(stack, wavelength_nm).sample(s).total;
}

DensityTriple downward_spectrum(const Stack& stack, double wavelength_nm, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("s must be >= 0");
  return EmissionModel(stack, wavelength_nm).sample(s).down;
}

SpectralDensity sample_spectral_density(const Stack& stack, double wavelength_nm,
                                        std::span<const double> s_grid) {
  const EmissionModel model(stack, wavelength_nm);
  SpectralDensity out;
  out.boundaries = model.light_lines();
  out.spp_position = model.spp_position();
  out.s.assign(s_grid.begin(), s_grid.end());
  out.total.resize(s_grid.size());
  out.down.resize(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const auto x = model.sample(s_grid[i]);
    out.total[i] = x.total;
    out.down[i] = x.down;
  }
  return out;
}

double total_power(const Stack& stack, double wavelength_nm, Orientation orientation) {
  return EmissionModel(stack, wavelength_nm).totals().total.for_orientation(orientation);
}

PowerBudget power_budget(const Stack& stack, double wavelength_nm, Orientation orientation) {
  return EmissionModel(stack, wavelength_nm).totals().budget(orientation);
}

FarFieldPattern far_field_pattern(const EmissionModel& model, Orientation orientation,
                                  std::span<const double> theta_deg, Execution execution) {
  if (model.context().index(0).imag() != 0.0) {
    throw UnsupportedConfiguration("far-field pattern requires a lossless bottom medium");
  }
  FarFieldPattern out;
  out.orientation = orientation;
  out.theta_deg.assign(theta_deg.begin(), theta_deg.end());
  out.density.resize(theta_deg.size());
  const double ratio = model.bottom_index() / model.emitter_index();
  out.critical_angle_deg = ratio > 1.0 ? std::asin(1.0 / ratio) / kDegree : 90.0;

  for (double t : theta_deg) {
    if (!(t >= 0.0 && t <= 90.0)) throw InvalidArgument("pattern angles must be in [0, 90]");
  }
  // p(theta) = rho_down(s) ds/dtheta with n_e s = n1 sin(theta).
  auto point = [&](std::size_t i) {
    const double theta = theta_deg[i];
    const auto x = model.sample(model.s_of_angle(theta));
    return x.down.for_orientation(orientation) * ratio * std::cos(theta * kDegree);
  };

  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < theta_deg.size(); ++i) out.density[i] = point(i);
    return out;
  }
  const auto count = static_cast<std::ptrdiff_t>(theta_deg.size());
  std::vector<std::string> failures(theta_deg.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out.density[k] = point(k);
    } catch (const std::exception& ex) {
      failures[k] = ex.what();
    }
  }
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (!failures[k].empty()) throw PoleError(model.s_of_angle(theta_deg[k]), failures[k]);
  }
  return out;
}

FarFieldPattern far_field_pattern(const Stack& stack, double wavelength_nm,
                                  Orientation orientation, std::span<const double> theta_deg,
                                  Execution execution) {
  return far_field_pattern(EmissionModel(stack, wavelength_nm), orientation, theta_deg, execution);
}

double collection_efficiency(const Stack& stack, double wavelength_nm, Orientation orientation,
                             double theta_c_deg) {
  const EmissionModel model(stack, wavelength_nm);
  const auto totals = model.totals();
  return efficiencies(totals, model.collected(theta_c_deg)).for_orientation(orientation);
}

double isotropic_efficiency(const Stack& stack, double wavelength_nm, double theta_c_deg) {
  return collection_efficiency(stack, wavelength_nm, Orientation::isotropic, theta_c_deg);
}

}  // namespace dipolar
