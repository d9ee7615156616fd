#include "dipolar/stack.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "dipolar/errors.hpp"

namespace dipolar {

namespace {

constexpr double kQuenchingGuardNm = 1.0;

// The recursions below only need a handful of layers; keep kz on the stack for typical sizes.
constexpr std::size_t kInlineLayers = 16;

}  // namespace

Stack::Stack(std::vector<Layer> layers, std::size_t emitter_layer, double emitter_height_nm)
    : layers_(std::move(layers)), emitter_(emitter_layer), height_(emitter_height_nm) {
  if (layers_.size() < 2) throw InvalidArgument("stack needs at least two layers");
  if (!layers_.front().semi_infinite() || !layers_.back().semi_infinite()) {
    throw InvalidArgument("first and last layers must be semi-infinite");
  }
  for (std::size_t i = 1; i + 1 < layers_.size(); ++i) {
    const double d = layers_[i].thickness_nm;
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw InvalidArgument("interior layer " + std::to_string(i) +
                            " must have finite positive thickness");
    }
  }
  if (emitter_ >= layers_.size()) {
    throw InvalidArgument("emitter layer index " + std::to_string(emitter_) +
                          " out of range for " + std::to_string(layers_.size()) + " layers");
  }
  if (!std::isfinite(height_) || height_ < 0.0) {
    throw InvalidArgument("emitter height must be finite and >= 0");
  }
  const Layer& host = layers_[emitter_];
  if (!host.semi_infinite() && height_ > host.thickness_nm) {
    throw InvalidArgument("emitter height exceeds emitter layer thickness");
  }

  // An emitter touching an absorber has a divergent near-field integral.
  if (emitter_ > 0 && layers_[emitter_ - 1].material.is_absorptive() &&
      distance_below() < kQuenchingGuardNm) {
    throw InvalidArgument("emitter closer than 1 nm to the absorptive layer below");
  }
  if (emitter_ + 1 < layers_.size() && layers_[emitter_ + 1].material.is_absorptive() &&
      distance_above() < kQuenchingGuardNm) {
    throw InvalidArgument("emitter closer than 1 nm to the absorptive layer above");
  }
}

double Stack::distance_below() const noexcept {
  if (emitter_ == 0) return kSemiInfinite;
  return height_;
}

double Stack::distance_above() const noexcept {
  if (emitter_ + 1 == layers_.size()) return kSemiInfinite;
  if (emitter_ == 0) return height_;
  return layers_[emitter_].thickness_nm - height_;
}

Stack Stack::with_thickness(std::size_t layer, double thickness_nm) const {
  auto copy = layers_;
  copy.at(layer).thickness_nm = thickness_nm;
  return Stack(std::move(copy), emitter_, height_);
}

Stack Stack::with_material(std::size_t layer, Material material) const {
  auto copy = layers_;
  copy.at(layer).material = std::move(material);
  return Stack(std::move(copy), emitter_, height_);
}

Stack Stack::with_emitter_height(double height_nm) const {
  return Stack(layers_, emitter_, height_nm);
}

complex axial_wavevector(complex eps, double k0, double u) {
  complex root = std::sqrt(eps - u * u);
  if (root.imag() < 0.0 || (root.imag() == 0.0 && root.real() < 0.0)) root = -root;
  return k0 * root;
}

OpticalContext::OpticalContext(const Stack& stack, double wavelength_nm)
    : stack_(stack), wavelength_(wavelength_nm), k0_(2.0 * std::numbers::pi / wavelength_nm) {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
    throw InvalidArgument("wavelength must be positive");
  }
  eps_.reserve(stack.size());
  index_.reserve(stack.size());
  lossless_ = true;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const complex n = stack.layer(j).material.index(wavelength_nm);
    if (n.imag() != 0.0) lossless_ = false;
    if (j == stack.emitter_layer()) emitter_index_ = n.real();
    index_.push_back(n);
    eps_.push_back(n * n);
  }
  if (!(emitter_index_ > 0.0)) throw InvalidArgument("emitter layer must have Re(n) > 0");
}

InterfaceCoefficients interface_coefficients(complex eps_a, complex eps_b, complex kz_a,
                                             complex kz_b, Polarization pol) {
  if (pol == Polarization::s) {
    const complex den = kz_a + kz_b;
    return {(kz_a - kz_b) / den, 2.0 * kz_a / den};
  }
  complex n_a = std::sqrt(eps_a);
  complex n_b = std::sqrt(eps_b);
  if (n_a.imag() < 0.0) n_a = -n_a;
  if (n_b.imag() < 0.0) n_b = -n_b;
  const complex den = eps_b * kz_a + eps_a * kz_b;
  return {(eps_b * kz_a - eps_a * kz_b) / den, 2.0 * n_a * n_b * kz_a / den};
}

InterfaceCoefficients interface_coefficients(complex n_a, complex n_b, Polarization pol, double u) {
  const complex eps_a = n_a * n_a;
  const complex eps_b = n_b * n_b;
  return interface_coefficients(eps_a, eps_b, axial_wavevector(eps_a, 1.0, u),
                                axial_wavevector(eps_b, 1.0, u), pol);
}

complex interior_axial_wavevector(complex kz, double thickness_nm, double k0) {
  // A finite layer responds evenly in kz, so moving kz off zero by delta changes the result
  // by O((delta d)^2); at exactly zero the two-interface form is 0/0.
  const double floor = 1e-5 * std::min(1.0 / thickness_nm, k0);
  if (std::abs(kz) >= floor) return kz;
  return std::abs(kz) == 0.0 ? complex(floor, 0.0) : kz * (floor / std::abs(kz));
}

SubstackResponse substack_response(const OpticalContext& ctx, Side side, Polarization pol,
                                   std::span<const complex> kz_in) {
  const std::size_t e = ctx.stack().emitter_layer();
  const std::size_t last = ctx.size() - 1;
  const auto& layers = ctx.stack().layers();

  std::array<complex, kInlineLayers> inline_kz;
  std::vector<complex> heap_kz;
  complex* kz = inline_kz.data();
  if (ctx.size() > kInlineLayers) {
    heap_kz.resize(ctx.size());
    kz = heap_kz.data();
  }
  for (std::size_t j = 0; j <= last; ++j) {
    const bool guarded = j != e && !layers[j].semi_infinite();
    kz[j] = guarded ? interior_axial_wavevector(kz_in[j], layers[j].thickness_nm, ctx.k0()) : kz_in[j];
  }

  if (side == Side::below_emitter) {
    if (e == 0) return {0.0, 1.0};
    auto c = interface_coefficients(ctx.eps(1), ctx.eps(0), kz[1], kz[0], pol);
    complex r = c.r;
    complex t = c.t;
    for (std::size_t j = 1; j < e; ++j) {
      const complex phase = std::exp(complex(0.0, 1.0) * kz[j] * layers[j].thickness_nm);
      const complex round_trip = phase * phase;
      c = interface_coefficients(ctx.eps(j + 1), ctx.eps(j), kz[j + 1], kz[j], pol);
      const complex den = 1.0 + c.r * r * round_trip;
      t = c.t * t * phase / den;
      r = (c.r + r * round_trip) / den;
    }
    return {r, t};
  }

  if (e == last) return {0.0, 1.0};
  auto c = interface_coefficients(ctx.eps(last - 1), ctx.eps(last), kz[last - 1], kz[last], pol);
  complex r = c.r;
  complex t = c.t;
  for (std::size_t j = last - 1; j > e; --j) {
    const complex phase = std::exp(complex(0.0, 1.0) * kz[j] * layers[j].thickness_nm);
    const complex round_trip = phase * phase;
    c = interface_coefficients(ctx.eps(j - 1), ctx.eps(j), kz[j - 1], kz[j], pol);
    const complex den = 1.0 + c.r * r * round_trip;
    t = c.t * t * phase / den;
    r = (c.r + r * round_trip) / den;
  }
  return {r, t};
}

SubstackResponse substack_response(const OpticalContext& ctx, Side side, Polarization pol, double u) {
  std::array<complex, kInlineLayers> inline_kz;
  std::vector<complex> heap_kz;
  std::span<complex> kz;
  if (ctx.size() <= kInlineLayers) {
    kz = std::span<complex>(inline_kz.data(), ctx.size());
  } else {
    heap_kz.resize(ctx.size());
    kz = heap_kz;
  }
  for (std::size_t j = 0; j < ctx.size(); ++j) kz[j] = ctx.kz(j, u);
  return substack_response(ctx, side, pol, std::span<const complex>(kz.data(), kz.size()));
}

complex substack_reflection(const Stack& stack, Side side, Polarization pol, double u,
                            double wavelength_nm) {
  return substack_response(OpticalContext(stack, wavelength_nm), side, pol, u).r;
}

complex substack_transmission(const Stack& stack, Polarization pol, double u, double wavelength_nm) {
  return substack_response(OpticalContext(stack, wavelength_nm), Side::below_emitter, pol, u).t;
}

double flux_weight(complex eps, complex kz, Polarization pol) {
  if (pol == Polarization::s) return kz.real();
  return std::abs(eps) * (kz / eps).real();
}

}  // namespace dipolar
