#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dipolar {

using complex = std::complex<double>;

/// One row of a dispersion table: vacuum wavelength in nm and complex index n + ik.
struct DispersionSample {
  double wavelength_nm;
  double n;
  double k;

  bool operator==(const DispersionSample&) const = default;
};

/// Optical material with relative permeability 1.
///
/// Either a constant complex refractive index, or a table of (wavelength, n, k) samples
/// linearly interpolated in wavelength on n and k. Only passive media are representable
/// (Im n >= 0, k >= 0). Immutable once built.
class Material {
 public:
  enum class Kind { constant, tabulated };

  /// Throws InvalidArgument for Im(index) < 0.
  static Material constant(complex index);
  /// Throws InvalidArgument when fewer than two samples, when wavelengths are not
  /// strictly increasing or when any k is negative.
  static Material tabulated(std::vector<DispersionSample> samples, std::string name = {});

  Kind kind() const noexcept { return kind_; }
  bool is_constant() const noexcept { return kind_ == Kind::constant; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<DispersionSample>& samples() const noexcept { return samples_; }

  /// Valid wavelength interval of a tabulated material; (0, inf) for constants.
  std::pair<double, double> range() const noexcept;

  /// Complex refractive index n + ik at the wavelength. RangeError outside the table.
  complex index(double wavelength_nm) const;
  /// (n + ik)^2.
  complex permittivity(double wavelength_nm) const;

  /// True if k > 0 anywhere (constants: Im n > 0).
  bool is_absorptive() const noexcept;

  bool operator==(const Material&) const = default;

 private:
  Material() = default;

  Kind kind_ = Kind::constant;
  complex constant_index_{1.0, 0.0};
  std::vector<DispersionSample> samples_;
  std::string name_;
};

/// Parses "wavelength_nm,n,k" rows. A single non-numeric header line is allowed as the
/// first content line; blank lines and text after '#' are ignored. Rows must already be
/// sorted by wavelength. Throws ParseError with the 1-based line number.
Material load_dispersion_table(std::string_view source, std::string name = {});

/// Reads a file and forwards to load_dispersion_table. Throws std::runtime_error if the
/// file cannot be opened.
Material load_dispersion_file(const std::filesystem::path& path);

/// Gold optical constants shipped with the library (data/gold_johnson_christy.csv).
const Material& bundled_gold();
std::string_view bundled_gold_csv();

/// Surface-plasmon wavevector k0 * sqrt(em * ed / (em + ed)) in rad/nm, on the branch
/// with Re >= 0 and Im >= 0. Symmetric in the two permittivities. Throws
/// SingularityError when em + ed == 0.
complex spp_wavevector(complex eps_metal, complex eps_dielectric, double wavelength_nm);

}  // namespace dipolar
