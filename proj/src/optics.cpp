#include "dsr/optics.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "dsr/errors.hpp"
#include "dsr/fft.hpp"

namespace dsr {

std::string to_string(Orientation o) {
  return o == Orientation::kVertical ? "vertical" : "horizontal";
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "vertical") return Orientation::kVertical;
  if (s == "horizontal") return Orientation::kHorizontal;
  throw ConfigError("orientation", "expected vertical|horizontal, got '" + s + "'");
}

void DefocusSpec::validate() const {
  if (!std::isfinite(blur)) throw ConfigError("blur", "must be finite");
  if (zones < 1) throw ConfigError("zones", "must be >= 1");
  if (focal < 1 || focal > zones) {
    throw ConfigError("focal", "must lie in [1, zones]");
  }
  if (zone_width < 1) throw ConfigError("zone_width", "must be >= 1");
  if (psf_size < 1 || psf_size % 2 == 0) {
    throw ConfigError("psf_size", "must be a positive odd integer");
  }
  if (pupil_grid < 2) throw ConfigError("pupil_grid", "must be >= 2");
}

double DefocusSpec::distance(int zone) const {
  const double d = blur * static_cast<double>(focal - zone);
  return d == 0.0 ? 0.0 : d;  // no negative zero
}

double defocus_zernike(double radius) {
  return std::numbers::sqrt3 * (2.0 * radius * radius - 1.0);
}

double pupil_radius(int grid, int i, int j) {
  const double center = 0.5 * (grid - 1);
  const double half = 0.5 * grid;
  return std::hypot(i - center, j - center) / half;
}

ImageGrid zernike_defocus(int grid) {
  if (grid < 2) throw ConfigError("pupil_grid", "must be >= 2");
  ImageGrid z(grid, grid);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double r = pupil_radius(grid, i, j);
      if (r <= 1.0) z(i, j) = defocus_zernike(r);
    }
  }
  return z;
}

ImageGrid circular_aperture(int grid) {
  if (grid < 2) throw ConfigError("pupil_grid", "must be >= 2");
  ImageGrid a(grid, grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      a(i, j) = pupil_radius(grid, i, j) <= 1.0 ? 1.0 : 0.0;
  return a;
}

ImageGrid psf_for_distance(const DefocusSpec& spec, double distance) {
  spec.validate();
  const int g = spec.pupil_grid;
  const int rho = spec.psf_size;
  if (g < rho) throw ConfigError("pupil_grid", "must be >= psf_size");

  const ImageGrid aperture = circular_aperture(g);
  const ImageGrid zernike = zernike_defocus(g);
  std::vector<fft::Complex> field(static_cast<std::size_t>(g) * g);
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double a = aperture.values()[k];
    if (a != 0.0) field[k] = a * std::polar(1.0, distance * zernike.values()[k]);
  }
  fft::transform_2d(field, g, g, /*inverse=*/false);
  const auto shifted = fft::centered(field, g, g);

  ImageGrid kernel(rho, rho);
  const int h = rho / 2;
  const int origin = g / 2 - h;
  for (int i = 0; i < rho; ++i)
    for (int j = 0; j < rho; ++j)
      kernel(i, j) = std::norm(shifted[(origin + i) * g + (origin + j)]);
  const double total = kernel.sum();
  if (!(total > 0.0)) throw NumericError("psf_for_distance: zero-energy kernel");
  kernel *= 1.0 / total;
  return kernel;
}

PsfStack build_psf_stack(const DefocusSpec& spec) {
  spec.validate();
  PsfStack stack;
  stack.kernels.reserve(spec.zones);
  for (int n = 1; n <= spec.zones; ++n) {
    stack.kernels.push_back(psf_for_distance(spec, spec.distance(n)));
  }
  return stack;
}

ZoneMasks build_zone_masks(std::size_t frame_rows, std::size_t frame_cols,
                           const DefocusSpec& spec) {
  spec.validate();
  const bool vertical = spec.orientation == Orientation::kVertical;
  const std::size_t extent = vertical ? frame_rows : frame_cols;
  const auto width = static_cast<std::size_t>(spec.zone_width);
  if (static_cast<std::size_t>(spec.zones) * width != extent) {
    throw ConfigError("zone_width",
                      "zones * zone_width (" +
                          std::to_string(spec.zones * spec.zone_width) +
                          ") must equal the frame extent along the " +
                          to_string(spec.orientation) + " axis (" +
                          std::to_string(extent) + ")");
  }
  ZoneMasks zm;
  zm.masks.reserve(spec.zones);
  for (int n = 0; n < spec.zones; ++n) {
    ImageGrid mask(frame_rows, frame_cols);
    const std::size_t lo = n * width;
    const std::size_t hi = lo + width;
    for (std::size_t r = 0; r < frame_rows; ++r)
      for (std::size_t c = 0; c < frame_cols; ++c) {
        const std::size_t k = vertical ? r : c;
        if (k >= lo && k < hi) mask(r, c) = 1.0;
      }
    zm.masks.push_back(std::move(mask));
  }
  return zm;
}

}  // namespace dsr
