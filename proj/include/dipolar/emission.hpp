#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "dipolar/quadrature.hpp"
#include "dipolar/stack.hpp"

namespace dipolar {

enum class Orientation { vertical, horizontal, isotropic };

/// Data-parallel kernels run under OpenMP by default; the serial path is the reference.
enum class Execution { parallel, serial };

/// Dissipated-power densities per unit s, in units of P0 (power of the same dipole in the
/// unbounded emitter medium). s = k_rho / (k0 n_e).
struct DensityTriple {
  double vertical = 0.0;
  double horizontal_s = 0.0;
  double horizontal_p = 0.0;

  double horizontal() const noexcept { return horizontal_s + horizontal_p; }
  /// Isotropic weight is (V + 2H) / 3.
  double for_orientation(Orientation o) const noexcept;
};

struct SpectralSample {
  double s = 0.0;
  DensityTriple total;  // all dissipated power
  DensityTriple down;   // flux into the bottom half-space
  DensityTriple up;     // flux into the top half-space
};

/// Densities sampled on a grid together with the region boundaries of the integrand.
struct SpectralDensity {
  std::vector<double> s;
  std::vector<DensityTriple> total;
  std::vector<DensityTriple> down;
  /// Light lines n_j / n_e of every layer, sorted and unique.
  std::vector<double> boundaries;
  /// Surface-plasmon position Re(k_sp) / (k0 n_e) for the metal nearest the emitter.
  std::optional<double> spp_position;
};

/// Azimuthally integrated angular power density in the bottom medium, P0 per radian,
/// so that its integral over theta is the downward power.
struct FarFieldPattern {
  Orientation orientation = Orientation::vertical;
  std::vector<double> theta_deg;
  std::vector<double> density;
  /// arcsin(n_e / n_bottom) in degrees, or 90 when n_bottom <= n_e.
  double critical_angle_deg = 90.0;
};

/// Partition of the total dissipated power, all in units of P0.
struct PowerBudget {
  double total = 0.0;
  double down_allowed = 0.0;    // s <= 1
  double down_forbidden = 0.0;  // 1 < s <= n_bottom / n_e
  double up = 0.0;              // leaves through a transparent top half-space
  double loss = 0.0;            // total - down - up
  double spp_estimate = 0.0;    // part of loss inside the surface-plasmon window

  double down() const noexcept { return down_allowed + down_forbidden; }
};

/// Integrated densities for the vertical and horizontal dipoles.
struct OrientationPowers {
  double vertical = 0.0;
  double horizontal = 0.0;

  double for_orientation(Orientation o) const noexcept;
};

struct PowerTotals {
  OrientationPowers total;
  OrientationPowers down_allowed;
  OrientationPowers down_forbidden;
  OrientationPowers up;
  OrientationPowers spp_window_loss;

  OrientationPowers down() const noexcept {
    return {down_allowed.vertical + down_forbidden.vertical,
            down_allowed.horizontal + down_forbidden.horizontal};
  }
  PowerBudget budget(Orientation o) const;
};

/// Dipole emission in a planar stack at one wavelength.
///
/// Construction resolves optical constants, integration breakpoints (light lines, the
/// surface-plasmon window and, for fully lossless stacks, guided-mode poles). Sampling
/// and integration are const and may run concurrently.
class EmissionModel {
 public:
  EmissionModel(const Stack& stack, double wavelength_nm, QuadratureOptions options = {});

  const OpticalContext& context() const noexcept { return context_; }
  const Stack& stack() const noexcept { return context_.stack(); }
  double wavelength() const noexcept { return context_.wavelength(); }
  double emitter_index() const noexcept { return context_.emitter_index(); }
  /// Real index of the bottom half-space.
  double bottom_index() const noexcept { return bottom_index_; }
  const QuadratureOptions& options() const noexcept { return options_; }

  /// Throws PoleError when the Fabry-Perot denominator is below 1e-12.
  SpectralSample sample(double s) const;

  const std::vector<double>& light_lines() const noexcept { return light_lines_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& guided_poles() const noexcept { return guided_poles_; }
  std::optional<double> spp_position() const noexcept { return spp_position_; }
  /// Half-width used for the plasmon window, max(Im(k_sp)/(k0 n_e), 1e-4).
  double spp_width() const noexcept { return spp_width_; }

  /// Integrates every density over s in [0, inf). Throws QuadratureError.
  PowerTotals totals() const;

  /// Downward power within polar angle theta_c of the normal in the bottom medium, for
  /// each cut in increasing order (cumulative). Requires a transparent bottom medium.
  std::vector<OrientationPowers> collected(std::span<const double> theta_c_deg) const;
  OrientationPowers collected(double theta_c_deg) const;

  /// s in the emitter medium corresponding to a polar angle in the bottom medium.
  double s_of_angle(double theta_deg) const noexcept;

 private:
  PowerTotals integrate_totals(const OpticalContext& ctx) const;
  std::optional<std::size_t> pole_window(double a, double b) const;
  std::array<double, 9> integrate_pole_window(const OpticalContext& ctx, std::size_t pole) const;

  OpticalContext context_;
  QuadratureOptions options_;
  double bottom_index_ = 1.0;
  std::vector<double> light_lines_;
  std::vector<double> breakpoints_;
  std::vector<double> guided_poles_;
  std::vector<double> pole_half_widths_;
  std::optional<double> spp_position_;
  double spp_width_ = 1e-4;
  std::optional<std::size_t> spp_metal_;
};

/// Samples densities at one s (convenience wrappers over EmissionModel).
DensityTriple spectral_density(const Stack& stack, double wavelength_nm, double s);
DensityTriple downward_spectrum(const Stack& stack, double wavelength_nm, double s);
SpectralDensity sample_spectral_density(const Stack& stack, double wavelength_nm,
                                        std::span<const double> s_grid);

double total_power(const Stack& stack, double wavelength_nm, Orientation orientation);
PowerBudget power_budget(const Stack& stack, double wavelength_nm, Orientation orientation);

/// Throws UnsupportedConfiguration for an absorbing bottom medium.
FarFieldPattern far_field_pattern(const Stack& stack, double wavelength_nm,
                                  Orientation orientation, std::span<const double> theta_deg,
                                  Execution execution = Execution::parallel);
FarFieldPattern far_field_pattern(const EmissionModel& model, Orientation orientation,
                                  std::span<const double> theta_deg,
                                  Execution execution = Execution::parallel);

/// Fraction of the total dissipated power collected within theta_c in the bottom medium.
double collection_efficiency(const Stack& stack, double wavelength_nm, Orientation orientation,
                             double theta_c_deg);
/// (P_coll^V + 2 P_coll^H) / (P_tot^V + 2 P_tot^H).
double isotropic_efficiency(const Stack& stack, double wavelength_nm, double theta_c_deg);

/// Efficiencies of all three orientations from one set of integrals.
struct Efficiencies {
  double vertical = 0.0;
  double horizontal = 0.0;
  double isotropic = 0.0;

  double for_orientation(Orientation o) const noexcept;
};
Efficiencies efficiencies(const PowerTotals& totals, const OrientationPowers& collected);

}  // namespace dipolar
