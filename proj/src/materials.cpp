#include "dipolar/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "dipolar/errors.hpp"
#include "gold_table.hpp"

namespace dipolar {

namespace {

void validate_samples(const std::vector<DispersionSample>& samples) {
  if (samples.size() < 2) {
    throw InvalidArgument("tabulated material needs at least 2 samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& row = samples[i];
    if (!std::isfinite(row.wavelength_nm) || !std::isfinite(row.n) || !std::isfinite(row.k)) {
      throw InvalidArgument("non-finite value in sample " + std::to_string(i));
    }
    if (row.k < 0.0) {
      throw InvalidArgument("negative extinction coefficient in sample " + std::to_string(i));
    }
    if (i > 0 && !(row.wavelength_nm > samples[i - 1].wavelength_nm)) {
      throw InvalidArgument("wavelengths not strictly increasing at sample " + std::to_string(i));
    }
  }
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

Material Material::constant(complex index) {
  if (!std::isfinite(index.real()) || !std::isfinite(index.imag())) {
    throw InvalidArgument("constant material index must be finite");
  }
  if (index.imag() < 0.0) {
    throw InvalidArgument("constant material must be passive (Im n >= 0)");
  }
  Material m;
  m.kind_ = Kind::constant;
  m.constant_index_ = index;
  return m;
}

Material Material::tabulated(std::vector<DispersionSample> samples, std::string name) {
  validate_samples(samples);
  Material m;
  m.kind_ = Kind::tabulated;
  m.samples_ = std::move(samples);
  m.name_ = std::move(name);
  return m;
}

std::pair<double, double> Material::range() const noexcept {
  if (kind_ == Kind::constant) return {0.0, std::numeric_limits<double>::infinity()};
  return {samples_.front().wavelength_nm, samples_.back().wavelength_nm};
}

complex Material::index(double wavelength_nm) const {
  if (kind_ == Kind::constant) return constant_index_;

  const auto [lo, hi] = range();
  if (!(wavelength_nm >= lo && wavelength_nm <= hi)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_nm << " nm outside tabulated range [" << lo << ", " << hi
        << "] nm";
    if (!name_.empty()) msg << " of " << name_;
    throw RangeError(msg.str());
  }
  auto upper = std::lower_bound(
      samples_.begin(), samples_.end(), wavelength_nm,
      [](const DispersionSample& s, double w) { return s.wavelength_nm < w; });
  if (upper->wavelength_nm == wavelength_nm) return {upper->n, upper->k};
  const auto lower = std::prev(upper);
  const double f =
      (wavelength_nm - lower->wavelength_nm) / (upper->wavelength_nm - lower->wavelength_nm);
  return {lower->n + f * (upper->n - lower->n), lower->k + f * (upper->k - lower->k)};
}

complex Material::permittivity(double wavelength_nm) const {
  const complex n = index(wavelength_nm);
  return n * n;
}

bool Material::is_absorptive() const noexcept {
  if (kind_ == Kind::constant) return constant_index_.imag() > 0.0;
  return std::any_of(samples_.begin(), samples_.end(),
                     [](const DispersionSample& s) { return s.k > 0.0; });
}

Material load_dispersion_table(std::string_view source, std::string name) {
  std::vector<DispersionSample> rows;
  std::size_t line_no = 0;
  bool seen_content = false;

  while (!source.empty()) {
    ++line_no;
    const auto eol = source.find('\n');
    std::string_view line = source.substr(0, eol);
    source = eol == std::string_view::npos ? std::string_view{} : source.substr(eol + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    DispersionSample row{};
    const bool numeric = fields.size() == 3 && parse_double(fields[0], row.wavelength_nm) &&
                         parse_double(fields[1], row.n) && parse_double(fields[2], row.k);
    if (!numeric) {
      bool has_digit = std::any_of(line.begin(), line.end(),
                                   [](char c) { return c >= '0' && c <= '9'; });
      if (!seen_content && !has_digit) {
        seen_content = true;  // header
        continue;
      }
      throw ParseError(line_no, "expected three numbers 'wavelength_nm,n,k'");
    }
    seen_content = true;

    if (!std::isfinite(row.wavelength_nm) || !std::isfinite(row.n) || !std::isfinite(row.k)) {
      throw ParseError(line_no, "non-finite value");
    }
    if (row.wavelength_nm <= 0.0) throw ParseError(line_no, "wavelength must be positive");
    if (row.k < 0.0) throw ParseError(line_no, "negative extinction coefficient k");
    if (!rows.empty() && !(row.wavelength_nm > rows.back().wavelength_nm)) {
      throw ParseError(line_no, "wavelengths must be strictly increasing");
    }
    rows.push_back(row);
  }
  if (rows.size() < 2) {
    throw ParseError(line_no, "dispersion table needs at least 2 rows, found " +
                                  std::to_string(rows.size()));
  }
  return Material::tabulated(std::move(rows), std::move(name));
}

Material load_dispersion_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dispersion table " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_dispersion_table(buffer.str(), path.filename().string());
}

std::string_view bundled_gold_csv() { return detail::kGoldTableCsv; }

const Material& bundled_gold() {
  static const Material gold = load_dispersion_table(detail::kGoldTableCsv, "gold");
  return gold;
}

complex spp_wavevector(complex eps_metal, complex eps_dielectric, double wavelength_nm) {
  const complex sum = eps_metal + eps_dielectric;
  if (std::abs(sum) <= 1e-14 * (std::abs(eps_metal) + std::abs(eps_dielectric))) {
    throw SingularityError("surface-plasmon pole: eps_metal + eps_dielectric = 0");
  }
  const double k0 = 2.0 * std::numbers::pi / wavelength_nm;
  complex root = std::sqrt(eps_metal * eps_dielectric / sum);
  if (root.imag() < 0.0 || (root.imag() == 0.0 && root.real() < 0.0)) root = -root;
  return k0 * root;
}

}  // namespace dipolar
