#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <boost/rational.hpp>

namespace dsr {

// Dense real-valued 2D intensity array, row-major, (row, col) indexing.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t rows, std::size_t cols, double fill = 0.0);
  ImageGrid(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Builds a grid from nested row literals; all rows must have equal length.
  static ImageGrid from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const ImageGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double sum() const;
  double norm() const;  // Frobenius
  bool all_finite() const;

  ImageGrid& operator+=(const ImageGrid& other);
  ImageGrid& operator-=(const ImageGrid& other);
  ImageGrid& operator*=(double s);

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

ImageGrid operator+(ImageGrid a, const ImageGrid& b);
ImageGrid operator-(ImageGrid a, const ImageGrid& b);
ImageGrid operator*(double s, ImageGrid a);

// Integer displacement in (row, col) pixels.
struct PixelShift {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  PixelShift operator-() const { return {-rows, -cols}; }
  friend bool operator==(const PixelShift&, const PixelShift&) = default;
};

using Fraction = boost::rational<std::int64_t>;

// Subpixel frame offset in LR pixels. `vx` moves along rows, `vy` along
// columns.
struct ShiftVector {
  Fraction vx{0};
  Fraction vy{0};

  // Offset in SR pixels at factor `tau`; throws DimensionError when
  // tau * v is not integral.
  PixelShift scaled(int tau) const;
  friend bool operator==(const ShiftVector&, const ShiftVector&) = default;
};

// output(r, c) = input(r - shift.rows, c - shift.cols), periodic.
ImageGrid translate(const ImageGrid& image, PixelShift shift);

// Clamp every value to [0, 1].
ImageGrid project_unit_interval(const ImageGrid& image);
void project_unit_interval_inplace(ImageGrid& image);

// ||estimate - reference|| / ||reference||.
double relative_rms(const ImageGrid& estimate, const ImageGrid& reference);

double inner_product(const ImageGrid& a, const ImageGrid& b);

// Crop the window starting at (r0, c0) with the given extent.
ImageGrid crop(const ImageGrid& image, std::size_t r0, std::size_t c0,
               std::size_t rows, std::size_t cols);

ImageGrid transpose(const ImageGrid& image);

}  // namespace dsr
