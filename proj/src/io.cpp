#include "dsr/io.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "dsr/errors.hpp"

namespace dsr::io {

namespace fs = std::filesystem;

namespace {

std::uint32_t quantize(double v, std::uint32_t max) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint32_t>(std::floor(c * max + 0.5));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// PGM ------------------------------------------------------------------

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_header_number(std::istream& in, const fs::path& path) {
  skip_space_and_comments(in);
  long long v = -1;
  if (!(in >> v) || v <= 0) throw IoError("corrupt PGM header in '" + path.string() + "'");
  return static_cast<std::size_t>(v);
}

ImageGrid read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw IoError("'" + path.string() + "' is not a binary PGM");
  }
  const std::size_t cols = read_header_number(in, path);
  const std::size_t rows = read_header_number(in, path);
  const std::size_t maxval = read_header_number(in, path);
  if (maxval > 65535) throw IoError("unsupported PGM maxval in '" + path.string() + "'");
  in.get();  // single whitespace after maxval
  const std::size_t bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(rows * cols * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError("truncated PGM data in '" + path.string() + "'");
  }
  ImageGrid out(rows, cols);
  auto v = out.values();
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t p = 0; p < v.size(); ++p) {
    const std::uint32_t s =
        bytes == 1 ? raw[p] : (static_cast<std::uint32_t>(raw[2 * p]) << 8) | raw[2 * p + 1];
    if (s > maxval) throw IoError("PGM sample exceeds maxval in '" + path.string() + "'");
    v[p] = s * scale;
  }
  return out;
}

void write_pgm(const fs::path& path, const ImageGrid& image, int depth) {
  const std::uint32_t max = depth == 8 ? 255 : 65535;
  std::vector<unsigned char> raw;
  raw.reserve(image.size() * (depth / 8));
  for (double v : image.values()) {
    const std::uint32_t s = quantize(v, max);
    if (depth == 16) raw.push_back(static_cast<unsigned char>(s >> 8));
    raw.push_back(static_cast<unsigned char>(s & 0xff));
  }
  auto out = open_out(path, std::ios::binary);
  out << "P5\n" << image.cols() << ' ' << image.rows() << '\n' << max << '\n';
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  finish(out, path);
}

// PNG ------------------------------------------------------------------

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = message;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

ImageGrid read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open '" + path.string() + "'");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<unsigned char> raw;
  std::vector<png_bytep> row_ptrs;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path.string() + "' is not a grayscale PNG");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = std::max(depth, 8);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw.resize(row_bytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = raw.data() + r * row_bytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (width == 0 || height == 0) throw IoError("empty PNG '" + path.string() + "'");
  ImageGrid out(height, width);
  const double max = depth == 16 ? 65535.0 : 255.0;
  for (std::size_t r = 0; r < height; ++r) {
    const unsigned char* row = raw.data() + r * row_bytes;
    for (std::size_t c = 0; c < width; ++c) {
      const std::uint32_t s = depth == 16 ? (static_cast<std::uint32_t>(row[2 * c]) << 8) | row[2 * c + 1]
                                          : row[c];
      out(r, c) = s / max;
    }
  }
  return out;
}

void write_png(const fs::path& path, const ImageGrid& image, int depth) {
  const std::uint32_t max = depth == 8 ? 255 : 65535;
  const std::size_t row_bytes = image.cols() * (depth / 8);
  std::vector<unsigned char> raw(row_bytes * image.rows());
  for (std::size_t r = 0; r < image.rows(); ++r)
    for (std::size_t c = 0; c < image.cols(); ++c) {
      const std::uint32_t s = quantize(image(r, c), max);
      unsigned char* px = raw.data() + r * row_bytes + c * (depth / 8);
      if (depth == 16) {
        px[0] = static_cast<unsigned char>(s >> 8);
        px[1] = static_cast<unsigned char>(s & 0xff);
      } else {
        px[0] = static_cast<unsigned char>(s);
      }
    }
  std::vector<png_bytep> rows(image.rows());
  for (std::size_t r = 0; r < image.rows(); ++r) rows[r] = raw.data() + r * row_bytes;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()),
               static_cast<png_uint_32>(image.rows()), depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("write failed for '" + path.string() + "'");
}

// Manifest ---------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_fraction(const Fraction& f) {
  if (f.denominator() == 1) return std::to_string(f.numerator());
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

using Section = std::map<std::string, std::string>;

const std::string& require(const Section& s, const std::string& key, const std::string& where) {
  auto it = s.find(key);
  if (it == s.end()) throw ConfigError(key, "missing from " + where);
  return it->second;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(key, "cannot parse '" + text + "'");
  }
  return value;
}

Fraction parse_fraction(const std::string& text, const std::string& key) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Fraction(parse_number<std::int64_t>(text, key));
  const auto num = parse_number<std::int64_t>(trim(text.substr(0, slash)), key);
  const auto den = parse_number<std::int64_t>(trim(text.substr(slash + 1)), key);
  if (den == 0) throw ConfigError(key, "zero denominator");
  return Fraction(num, den);
}

ShiftVector parse_shift(const std::string& text) {
  std::istringstream in(text);
  std::string a;
  std::string b;
  std::string extra;
  if (!(in >> a >> b) || (in >> extra)) throw ConfigError("shift", "expected two fractions");
  return {parse_fraction(a, "shift"), parse_fraction(b, "shift")};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ImageFormat format_for_path(const fs::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ConfigError("bit_depth", "must be 8 or 16");
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".pnm") {
    return bit_depth == 8 ? ImageFormat::kPgm8 : ImageFormat::kPgm16;
  }
  if (ext == ".png") return bit_depth == 8 ? ImageFormat::kPng8 : ImageFormat::kPng16;
  throw IoError("unsupported image format '" + ext + "' for '" + path.string() + "'");
}

ImageGrid read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file '" + path.string() + "'");
  std::ifstream probe(path, std::ios::binary);
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), 8);
  if (probe.gcount() >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  throw IoError("unsupported image format in '" + path.string() + "'");
}

void write_image(const fs::path& path, const ImageGrid& image, ImageFormat format) {
  switch (format) {
    case ImageFormat::kPgm8: return write_pgm(path, image, 8);
    case ImageFormat::kPgm16: return write_pgm(path, image, 16);
    case ImageFormat::kPng8: return write_png(path, image, 8);
    case ImageFormat::kPng16: return write_png(path, image, 16);
  }
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::ostringstream out;
  out << "# superresolution frame manifest\n";
  out << "version = " << kSchemaVersion << "\n";
  out << "factor = " << m.factor << "\n";
  out << "sr_rows = " << m.sr_rows << "\n";
  out << "sr_cols = " << m.sr_cols << "\n";
  out << "seed = " << m.seed << "\n";
  out << "noise = " << to_string(m.noise.kind) << "\n";
  out << "photon_budget = " << format_double(m.noise.photon_budget) << "\n";
  out << "snr_db = " << format_double(m.noise.snr_db) << "\n";
  out << "noise_seed = " << m.noise.seed << "\n";
  out << "frames = " << m.frames.size() << "\n";
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const ManifestFrame& f = m.frames[i];
    out << "\n[frame " << i << "]\n";
    out << "file = " << f.file << "\n";
    out << "shift = " << format_fraction(f.shift.vx) << " " << format_fraction(f.shift.vy)
        << "\n";
    out << "blur = " << format_double(f.defocus.blur) << "\n";
    out << "zones = " << f.defocus.zones << "\n";
    out << "focal = " << f.defocus.focal << "\n";
    out << "orientation = " << to_string(f.defocus.orientation) << "\n";
    out << "zone_width = " << f.defocus.zone_width << "\n";
    out << "psf_size = " << f.defocus.psf_size << "\n";
    out << "pupil_grid = " << f.defocus.pupil_grid << "\n";
    out << "noise_seed = " << f.noise_seed << "\n";
  }
  auto file = open_out(path);
  file << out.str();
  finish(file, path);
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  Section header;
  std::vector<Section> frames;
  Section* current = &header;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.rfind("[frame", 0) != 0) {
        throw ConfigError("manifest", "bad section header on line " + std::to_string(line_no));
      }
      frames.emplace_back();
      current = &frames.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("manifest", "expected key = value on line " + std::to_string(line_no));
    }
    (*current)[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  Manifest m;
  const int version = parse_number<int>(require(header, "version", "manifest"), "version");
  if (version != kSchemaVersion) {
    throw ConfigError("version", "unsupported manifest version " + std::to_string(version));
  }
  m.factor = parse_number<int>(require(header, "factor", "manifest"), "factor");
  m.sr_rows = parse_number<std::size_t>(require(header, "sr_rows", "manifest"), "sr_rows");
  m.sr_cols = parse_number<std::size_t>(require(header, "sr_cols", "manifest"), "sr_cols");
  m.seed = parse_number<std::uint64_t>(require(header, "seed", "manifest"), "seed");
  m.noise.kind = noise_kind_from_string(require(header, "noise", "manifest"));
  m.noise.photon_budget =
      parse_number<double>(require(header, "photon_budget", "manifest"), "photon_budget");
  m.noise.snr_db = parse_number<double>(require(header, "snr_db", "manifest"), "snr_db");
  m.noise.seed =
      parse_number<std::uint64_t>(require(header, "noise_seed", "manifest"), "noise_seed");
  const auto count = parse_number<std::size_t>(require(header, "frames", "manifest"), "frames");
  if (count != frames.size()) {
    throw ConfigError("frames", "manifest declares " + std::to_string(count) + " frames but has " +
                                    std::to_string(frames.size()) + " frame blocks");
  }
  if (m.factor < 1) throw ConfigError("factor", "must be >= 1");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Section& s = frames[i];
    const std::string where = "frame " + std::to_string(i);
    ManifestFrame f;
    f.file = require(s, "file", where);
    f.shift = parse_shift(require(s, "shift", where));
    f.defocus.blur = parse_number<double>(require(s, "blur", where), "blur");
    f.defocus.zones = parse_number<int>(require(s, "zones", where), "zones");
    f.defocus.focal = parse_number<int>(require(s, "focal", where), "focal");
    f.defocus.orientation = orientation_from_string(require(s, "orientation", where));
    f.defocus.zone_width = parse_number<int>(require(s, "zone_width", where), "zone_width");
    f.defocus.psf_size = parse_number<int>(require(s, "psf_size", where), "psf_size");
    f.defocus.pupil_grid = parse_number<int>(require(s, "pupil_grid", where), "pupil_grid");
    f.noise_seed = parse_number<std::uint64_t>(require(s, "noise_seed", where), "noise_seed");
    f.defocus.validate();
    m.frames.push_back(std::move(f));
  }
  return m;
}

std::vector<Frame> load_frames(const fs::path& manifest_path, const Manifest& m) {
  if (m.frames.empty()) throw ConfigError("frames", "manifest lists no frames");
  if (m.sr_rows % m.factor != 0 || m.sr_cols % m.factor != 0) {
    throw ConfigError("sr_rows", "SR dimensions must be divisible by the factor");
  }
  const std::size_t lr_rows = m.sr_rows / m.factor;
  const std::size_t lr_cols = m.sr_cols / m.factor;
  const fs::path dir = manifest_path.parent_path();
  std::vector<Frame> frames;
  for (const ManifestFrame& f : m.frames) {
    ImageGrid data = read_image(dir / f.file);
    if (data.rows() != lr_rows || data.cols() != lr_cols) {
      throw ConfigError("file", "frame '" + f.file + "' is " + std::to_string(data.rows()) +
                                    "x" + std::to_string(data.cols()) + ", manifest expects " +
                                    std::to_string(lr_rows) + "x" + std::to_string(lr_cols));
    }
    auto blur = std::make_shared<const BlurOperator>(
        BlurOperator::from_spec(lr_rows, lr_cols, f.defocus));
    frames.push_back({FrameModel(blur, f.shift, m.factor), std::move(data)});
  }
  return frames;
}

void write_trace_csv(const fs::path& path, const IterationTrace& trace, bool with_rms,
                     bool with_time) {
  std::ostringstream out;
  out << "schema_version,iteration,grad_norm_sum";
  if (with_rms) out << ",rms";
  if (with_time) out << ",seconds";
  out << "\n";
  for (const IterationRecord& r : trace.records) {
    out << kSchemaVersion << "," << r.iteration << ","
        << (r.grad_norm_sum ? format_double(*r.grad_norm_sum) : "");
    if (with_rms) out << "," << (r.rms ? format_double(*r.rms) : "");
    if (with_time) out << "," << format_double(r.seconds);
    out << "\n";
  }
  auto file = open_out(path);
  file << out.str();
  finish(file, path);
}

void write_sweep_csv(const fs::path& path, const SweepResult& sweep, bool with_time) {
  std::ostringstream out;
  out << "schema_version,variable,value,seed,solver,rms,iterations";
  if (with_time) out << ",seconds";
  out << "\n";
  for (const SweepRecord& r : sweep.records) {
    out << kSchemaVersion << "," << sweep.variable << "," << format_double(r.value) << ","
        << r.seed << "," << to_string(r.solver) << "," << format_double(r.rms) << ","
        << r.iterations;
    if (with_time) out << "," << format_double(r.seconds);
    out << "\n";
  }
  auto file = open_out(path);
  file << out.str();
  finish(file, path);
}

void write_summary_csv(const fs::path& path, const std::string& variable,
                       const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "schema_version,variable,value,solver,count,min,q1,median,q3,max,mean,std\n";
  for (const SummaryRow& r : rows) {
    out << kSchemaVersion << "," << variable << "," << format_double(r.value) << ","
        << to_string(r.solver) << "," << r.count << "," << format_double(r.min) << ","
        << format_double(r.q1) << "," << format_double(r.median) << "," << format_double(r.q3)
        << "," << format_double(r.max) << "," << format_double(r.mean) << ","
        << format_double(r.stddev) << "\n";
  }
  auto file = open_out(path);
  file << out.str();
  finish(file, path);
}

void write_cropping_csv(const fs::path& path, const CroppingResult& result) {
  std::ostringstream out;
  out << "schema_version,solver,full_rms,central_rms\n";
  for (const CroppedReconstruction& r : result.reconstructions) {
    out << kSchemaVersion << "," << to_string(r.solver) << "," << format_double(r.full_rms)
        << "," << format_double(r.central_rms) << "\n";
  }
  auto file = open_out(path);
  file << out.str();
  finish(file, path);
}

}  // namespace dsr::io
