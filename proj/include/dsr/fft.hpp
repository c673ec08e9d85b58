#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dsr::fft {

using Complex = std::complex<double>;

// In-place unnormalized 2D DFT of a row-major rows x cols array.
// The inverse transform is not scaled by 1/(rows*cols).
void transform_2d(std::vector<Complex>& data, std::size_t rows,
                  std::size_t cols, bool inverse);

// Move the zero-frequency sample from (0,0) to (rows/2, cols/2).
std::vector<Complex> centered(const std::vector<Complex>& data,
                              std::size_t rows, std::size_t cols);

}  // namespace dsr::fft
