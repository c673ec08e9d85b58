#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dsr/image.hpp"

namespace dsr {

// Axis along which the defocus distance changes, i.e. the axis that
// indexes the zones. Vertical zones are bands of rows.
enum class Orientation { kVertical, kHorizontal };

std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

// Per-frame nonuniform defocus model: zone n (1-based) sits at defocus
// distance blur * (focal - n) and covers a band of `zone_width` pixels.
struct DefocusSpec {
  double blur = 0.0;
  int zones = 1;
  int focal = 1;
  Orientation orientation = Orientation::kVertical;
  int zone_width = 1;
  int psf_size = 11;   // odd
  int pupil_grid = 64;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
  double distance(int zone) const;  // zone is 1-based
};

// One unit-sum nonnegative psf_size x psf_size kernel per zone.
struct PsfStack {
  std::vector<ImageGrid> kernels;
  std::size_t size() const { return kernels.size(); }
};

// Binary zone indicators on the LR frame; they partition the frame.
struct ZoneMasks {
  std::vector<ImageGrid> masks;
  std::size_t size() const { return masks.size(); }
};

// Noll-normalized defocus term sqrt(3) * (2 r^2 - 1).
double defocus_zernike(double radius);

// Normalized pupil radius of pixel (i, j) on a grid x grid sampling whose
// unit disk spans the whole grid. Pixel centers are sampled, so even grids
// put the disk center between the four central pixels.
double pupil_radius(int grid, int i, int j);

// Defocus term sampled on the pupil grid; zero outside the unit disk.
ImageGrid zernike_defocus(int grid);

// 1 inside the centered disk of diameter `grid`, 0 outside.
ImageGrid circular_aperture(int grid);

// |F(A * exp(j * distance * Z))|^2, centered, cropped to psf_size and
// normalized to unit sum.
ImageGrid psf_for_distance(const DefocusSpec& spec, double distance);

PsfStack build_psf_stack(const DefocusSpec& spec);

ZoneMasks build_zone_masks(std::size_t frame_rows, std::size_t frame_cols,
                           const DefocusSpec& spec);

}  // namespace dsr
