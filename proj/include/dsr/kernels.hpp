#pragma once

// Low-level data-parallel kernels behind the imaging operators.
//
// Each kernel exists twice: `reference::` is the literal serial definition
// kept as a test oracle and benchmark baseline, `parallel::` is the
// OpenMP implementation used in production. The parallel kernels split work
// by output row only, so their results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsr/image.hpp"

namespace dsr::kernels {

// Zone-indexed family of odd square kernels on a fixed frame. Pixel p
// belongs to zone zone_of[p]; the kernel of zone z occupies
// weights[z * size * size, (z + 1) * size * size).
class ZoneKernelSet {
 public:
  enum class Layout { kRowBands, kColumnBands, kGeneral };

  ZoneKernelSet() = default;
  ZoneKernelSet(std::size_t rows, std::size_t cols,
                const std::vector<ImageGrid>& kernels,
                std::vector<std::int32_t> zone_of);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int size() const { return size_; }
  int radius() const { return size_ / 2; }
  std::size_t zones() const { return zones_; }
  Layout layout() const { return layout_; }

  const double* kernel(std::size_t zone) const {
    return weights_.data() + zone * size_ * size_;
  }
  const double* kernel_transposed(std::size_t zone) const {
    return weights_t_.data() + zone * size_ * size_;
  }
  std::int32_t zone_at(std::size_t r, std::size_t c) const {
    return zone_of_[r * cols_ + c];
  }
  // Zone of each row (kRowBands) or column (kColumnBands).
  const std::vector<std::int32_t>& band_zone() const { return band_zone_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int size_ = 1;
  std::size_t zones_ = 0;
  Layout layout_ = Layout::kGeneral;
  std::vector<double> weights_;
  std::vector<double> weights_t_;
  std::vector<std::int32_t> zone_of_;
  std::vector<std::int32_t> band_zone_;
};

namespace reference {

// sum_z conv(mask_z * x, k_z), periodic, evaluated zone by zone.
ImageGrid zone_convolve(const ZoneKernelSet& set, const ImageGrid& x);
// sum_z mask_z * corr(y, k_z): the adjoint of zone_convolve.
ImageGrid zone_correlate(const ZoneKernelSet& set, const ImageGrid& y);
// downsample(translate(x, shift), factor)
ImageGrid shifted_downsample(const ImageGrid& x, PixelShift shift, int factor);
// translate(upsample(x, factor), shift)
ImageGrid upsample_shifted(const ImageGrid& x, PixelShift shift, int factor);

}  // namespace reference

namespace parallel {

ImageGrid zone_convolve(const ZoneKernelSet& set, const ImageGrid& x);
ImageGrid zone_correlate(const ZoneKernelSet& set, const ImageGrid& y);
ImageGrid shifted_downsample(const ImageGrid& x, PixelShift shift, int factor);
ImageGrid upsample_shifted(const ImageGrid& x, PixelShift shift, int factor);

// out = clamp(base - step * direction, 0, 1)
void projected_step(const ImageGrid& base, const ImageGrid& direction,
                    double step, ImageGrid& out);

}  // namespace parallel

}  // namespace dsr::kernels
