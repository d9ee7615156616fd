#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dipolar/materials.hpp"

namespace dipolar {

enum class Polarization { s, p };

/// Which part of the stack a substack quantity refers to, as seen from the emitter layer.
enum class Side { above_emitter, below_emitter };

inline constexpr double kSemiInfinite = std::numeric_limits<double>::infinity();

struct Layer {
  Material material;
  double thickness_nm = kSemiInfinite;

  bool semi_infinite() const noexcept { return thickness_nm == kSemiInfinite; }
  bool operator==(const Layer&) const = default;
};

/// Planar multilayer ordered bottom to top, with a point emitter in one layer.
///
/// The emitter height is measured from the lower boundary of the emitter layer. For a
/// semi-infinite emitter layer the reference plane is its only interface: for the top
/// layer the height is measured upward from its lower boundary, for the bottom layer it
/// is the depth below its upper boundary.
class Stack {
 public:
  /// Throws InvalidArgument when fewer than two layers, outer layers finite, interior
  /// layers not strictly positive and finite, emitter index out of range, height outside
  /// the emitter layer, or the emitter closer than 1 nm to an absorptive neighbour.
  Stack(std::vector<Layer> layers, std::size_t emitter_layer, double emitter_height_nm);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t size() const noexcept { return layers_.size(); }
  std::size_t emitter_layer() const noexcept { return emitter_; }
  double emitter_height() const noexcept { return height_; }

  /// Distance from the emitter to the interface below / above it, infinite when the
  /// emitter sits in the bottom / top half-space.
  double distance_below() const noexcept;
  double distance_above() const noexcept;

  Stack with_thickness(std::size_t layer, double thickness_nm) const;
  Stack with_material(std::size_t layer, Material material) const;
  Stack with_emitter_height(double height_nm) const;

  bool operator==(const Stack&) const = default;

 private:
  std::vector<Layer> layers_;
  std::size_t emitter_;
  double height_;
};

/// Axial wavevector k0 * sqrt(eps - u^2) on the branch Im >= 0 (Re >= 0 when real).
complex axial_wavevector(complex eps, double k0, double u);

/// kz of a finite layer kept at least 1e-5 min(1/thickness, k0) in magnitude, which the
/// layer recursion needs at the layer's own light line.
complex interior_axial_wavevector(complex kz, double thickness_nm, double k0);

/// Per-wavelength optical constants of a stack.
class OpticalContext {
 public:
  OpticalContext(const Stack& stack, double wavelength_nm);

  const Stack& stack() const noexcept { return stack_; }
  double wavelength() const noexcept { return wavelength_; }
  double k0() const noexcept { return k0_; }
  std::size_t size() const noexcept { return eps_.size(); }
  complex eps(std::size_t j) const noexcept { return eps_[j]; }
  complex index(std::size_t j) const noexcept { return index_[j]; }
  /// Real part of the emitter-layer index; the normalisation for s = u/n_e.
  double emitter_index() const noexcept { return emitter_index_; }
  complex kz(std::size_t j, double u) const { return axial_wavevector(eps_[j], k0_, u); }
  /// True when every layer has a real permittivity.
  bool lossless() const noexcept { return lossless_; }

 private:
  Stack stack_;
  double wavelength_;
  double k0_;
  double emitter_index_;
  bool lossless_;
  std::vector<complex> eps_;
  std::vector<complex> index_;
};

struct InterfaceCoefficients {
  complex r;
  complex t;
};

/// Fresnel coefficients for a wave in medium a incident on medium b at normalized
/// in-plane wavevector u = k_rho/k0. The p coefficients use the convention in which
/// a perfect conductor gives r_p = +1 (and r_s = -1).
InterfaceCoefficients interface_coefficients(complex n_a, complex n_b, Polarization pol, double u);

/// Same, from permittivities and precomputed axial wavevectors.
InterfaceCoefficients interface_coefficients(complex eps_a, complex eps_b, complex kz_a,
                                             complex kz_b, Polarization pol);

/// Reflection and transmission of the substack on one side of the emitter layer, seen
/// from inside the emitter layer at that boundary. Transmission is the amplitude ratio
/// from the emitter-layer boundary into the outer half-space on that side (1 when the
/// emitter layer itself is that half-space).
struct SubstackResponse {
  complex r;
  complex t;
};
SubstackResponse substack_response(const OpticalContext& ctx, Side side, Polarization pol, double u);
/// Overload reusing axial wavevectors already evaluated for every layer at this u.
SubstackResponse substack_response(const OpticalContext& ctx, Side side, Polarization pol,
                                   std::span<const complex> kz);

complex substack_reflection(const Stack& stack, Side side, Polarization pol, double u,
                            double wavelength_nm);
complex substack_transmission(const Stack& stack, Polarization pol, double u, double wavelength_nm);

/// Normal Poynting flux carried by a unit plane-wave amplitude with the given axial
/// wavevector: Re(kz) for s; |eps| Re(kz/eps) for p (equal to Re(kz) in real media).
double flux_weight(complex eps, complex kz, Polarization pol);

}  // namespace dipolar
