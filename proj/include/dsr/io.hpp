#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsr/harness.hpp"
#include "dsr/image.hpp"
#include "dsr/simulation.hpp"
#include "dsr/solvers.hpp"

namespace dsr::io {

inline constexpr int kSchemaVersion = 1;

enum class ImageFormat { kPgm8, kPgm16, kPng8, kPng16 };

// Picks PGM or PNG from the extension (.pgm/.pnm or .png) at the given
// bit depth (8 or 16).
ImageFormat format_for_path(const std::filesystem::path& path, int bit_depth);

// Samples map linearly to [0, 1]. Throws IoError on unreadable, corrupt or
// unsupported files.
ImageGrid read_image(const std::filesystem::path& path);

// Values are clamped to [0, 1] and scaled to the full integer range with
// round-half-up.
void write_image(const std::filesystem::path& path, const ImageGrid& image,
                 ImageFormat format);

struct ManifestFrame {
  std::string file;  // relative to the manifest's directory
  ShiftVector shift;
  DefocusSpec defocus;
  std::uint64_t noise_seed = 0;
};

// Everything needed to rebuild the frame models without the truth.
struct Manifest {
  int factor = 2;
  std::size_t sr_rows = 0;
  std::size_t sr_cols = 0;
  std::uint64_t seed = 0;
  NoiseSpec noise;
  std::vector<ManifestFrame> frames;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

// Reads the frame images next to the manifest and builds their models.
std::vector<Frame> load_frames(const std::filesystem::path& manifest_path,
                               const Manifest& manifest);

// Columns: schema_version, iteration, grad_norm_sum, [rms], [seconds].
void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace,
                     bool with_rms, bool with_time);

// Columns: schema_version, variable, value, seed, solver, rms, iterations,
// [seconds].
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep,
                     bool with_time);

// Columns: schema_version, variable, value, solver, count, min, q1, median,
// q3, max, mean, std.
void write_summary_csv(const std::filesystem::path& path, const std::string& variable,
                       const std::vector<SummaryRow>& rows);

// Columns: schema_version, solver, full_rms, central_rms.
void write_cropping_csv(const std::filesystem::path& path, const CroppingResult& result);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace dsr::io
