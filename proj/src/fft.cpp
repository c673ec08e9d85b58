#include "dsr/fft.hpp"

#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace dsr::fft {
namespace {
// FFTW's planner is not re-entrant.
std::mutex planner_mutex;
}  // namespace

void transform_2d(std::vector<Complex>& data, std::size_t rows,
                  std::size_t cols, bool inverse) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("fft::transform_2d: size mismatch");
  }
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence rounding,
    // identical from run to run.
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                            buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fftw planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(plan);
}

std::vector<Complex> centered(const std::vector<Complex>& data,
                              std::size_t rows, std::size_t cols) {
  std::vector<Complex> out(data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t rr = (r + rows / 2) % rows;
    for (std::size_t c = 0; c < cols; ++c) {
      out[rr * cols + (c + cols / 2) % cols] = data[r * cols + c];
    }
  }
  return out;
}

}  // namespace dsr::fft
