#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "dsr/errors.hpp"
#include "dsr/io.hpp"
#include "test_util.hpp"

namespace dsr {
namespace {

namespace fs = std::filesystem;
using testing::max_abs_diff;
using testing::random_image;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("dsr_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

using ImageIo = TempDir;

TEST_F(ImageIo, SixteenBitRoundTripWithinHalfStep) {
  const ImageGrid img = random_image(23, 17, 1);
  for (const char* name : {"a.pgm", "a.png"}) {
    const fs::path p = dir_ / name;
    io::write_image(p, img, io::format_for_path(p, 16));
    const ImageGrid back = io::read_image(p);
    ASSERT_TRUE(back.same_shape(img));
    EXPECT_LE(max_abs_diff(back, img), 1.0 / (2.0 * 65535.0) + 1e-15) << name;
  }
}

TEST_F(ImageIo, EightBitRoundTripWithinHalfStep) {
  const ImageGrid img = random_image(9, 12, 2);
  for (const char* name : {"b.pgm", "b.png"}) {
    const fs::path p = dir_ / name;
    io::write_image(p, img, io::format_for_path(p, 8));
    EXPECT_LE(max_abs_diff(io::read_image(p), img), 1.0 / (2.0 * 255.0) + 1e-15) << name;
  }
}

TEST_F(ImageIo, EndpointsAreExact) {
  for (double v : {0.0, 1.0}) {
    const ImageGrid img(5, 6, v);
    for (const char* name : {"c.pgm", "c.png"}) {
      for (int depth : {8, 16}) {
        const fs::path p = dir_ / name;
        io::write_image(p, img, io::format_for_path(p, depth));
        EXPECT_EQ(io::read_image(p), img);
      }
    }
  }
}

TEST_F(ImageIo, OutOfRangeValuesAreClamped) {
  const ImageGrid img = ImageGrid::from_rows({{-0.5, 2.0}});
  io::write_image(dir_ / "d.pgm", img, io::ImageFormat::kPgm8);
  EXPECT_EQ(io::read_image(dir_ / "d.pgm"), ImageGrid::from_rows({{0.0, 1.0}}));
}

TEST_F(ImageIo, BadFilesAreIoErrors) {
  EXPECT_THROW(io::read_image(dir_ / "missing.pgm"), IoError);
  std::ofstream(dir_ / "junk.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
  EXPECT_THROW(io::read_image(dir_ / "junk.pgm"), IoError);
  std::ofstream(dir_ / "short.pgm", std::ios::binary) << "P5\n4 4\n255\nab";
  EXPECT_THROW(io::read_image(dir_ / "short.pgm"), IoError);
  std::ofstream(dir_ / "trunc.png", std::ios::binary) << "\x89PNG\r\n\x1a\nxx";
  EXPECT_THROW(io::read_image(dir_ / "trunc.png"), IoError);
  EXPECT_THROW(io::format_for_path("x.tif", 8), IoError);
  EXPECT_THROW(io::format_for_path("x.pgm", 12), ConfigError);
}

using Manifests = TempDir;

TEST_F(Manifests, RoundTrip) {
  io::Manifest m;
  m.factor = 2;
  m.sr_rows = 32;
  m.sr_cols = 32;
  m.seed = 123456789012345ULL;
  m.noise = {NoiseKind::kGaussianSnr, 1e12, 47.5, 99};
  DefocusSpec d;
  d.blur = 0.1 / 3.0;
  d.zones = 4;
  d.focal = 2;
  d.zone_width = 4;
  d.psf_size = 5;
  d.pupil_grid = 32;
  d.orientation = Orientation::kHorizontal;
  m.frames.push_back({"f0.pgm", {Fraction(1, 2), Fraction(0)}, d, 7});
  d.orientation = Orientation::kVertical;
  m.frames.push_back({"f1.pgm", {Fraction(0), Fraction(1, 2)}, d, 8});
  io::write_manifest(dir_ / "manifest.txt", m);
  const io::Manifest r = io::read_manifest(dir_ / "manifest.txt");
  EXPECT_EQ(r.seed, m.seed);
  EXPECT_EQ(r.noise.kind, m.noise.kind);
  EXPECT_EQ(r.noise.snr_db, 47.5);
  ASSERT_EQ(r.frames.size(), 2u);
  EXPECT_EQ(r.frames[0].shift, m.frames[0].shift);
  EXPECT_EQ(r.frames[0].defocus.blur, d.blur);
  EXPECT_EQ(r.frames[0].defocus.orientation, Orientation::kHorizontal);
  EXPECT_EQ(r.frames[1].noise_seed, 8u);
  EXPECT_EQ(r.frames[1].file, "f1.pgm");
}

TEST_F(Manifests, MalformedIsRejected) {
  std::ofstream(dir_ / "bad.txt") << "version = 1\nfactor = two\n";
  EXPECT_ANY_THROW(io::read_manifest(dir_ / "bad.txt"));
  EXPECT_THROW(io::read_manifest(dir_ / "none.txt"), IoError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

// CLI ------------------------------------------------------------------------------

class Cli : public TempDir {
 protected:
  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "dsr");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }
  // A small scene: 16 x 16 LR frames, 4 zones.
  std::vector<std::string> small() {
    return {"--lr-size", "16", "--zones", "4", "--focal", "2", "--psf-size", "5",
            "--pupil-grid", "32"};
  }
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), cli::kUsageError);
  EXPECT_EQ(run({"frobnicate"}), cli::kUsageError);
  EXPECT_EQ(run({"sweep", "--kind", "nonsense", "--out", dir_.string()}), cli::kUsageError);
  EXPECT_NE(err_.str().find("kind"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--help"}), cli::kSuccess);
}

TEST_F(Cli, SimulateReconstructIsDeterministic) {
  auto sim = [&](const fs::path& out) {
    std::vector<std::string> args{"simulate", "--out", out.string(), "--seed", "5"};
    for (auto& a : small()) args.push_back(a);
    return run(args);
  };
  ASSERT_EQ(sim(dir_ / "a"), cli::kSuccess) << err_.str();
  ASSERT_EQ(sim(dir_ / "b"), cli::kSuccess) << err_.str();
  for (const char* f : {"frame_000.pgm", "frame_003.pgm", "manifest.txt", "truth.pgm"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(io::read_image(dir_ / "a" / "frame_000.pgm").rows(), 16u);

  auto rec = [&](const std::string& solver, const fs::path& out, bool truth) {
    std::vector<std::string> args{"reconstruct", "--manifest",
                                  (dir_ / "a" / "manifest.txt").string(), "--solver", solver,
                                  "--iterations", "5", "--out", out.string()};
    if (truth) {
      args.push_back("--truth");
      args.push_back((dir_ / "a" / "truth.pgm").string());
    }
    return run(args);
  };
  ASSERT_EQ(rec("sandr", dir_ / "r1", true), cli::kSuccess) << err_.str();
  ASSERT_EQ(rec("sandr", dir_ / "r2", true), cli::kSuccess) << err_.str();
  EXPECT_EQ(slurp(dir_ / "r1" / "sandr.pgm"), slurp(dir_ / "r2" / "sandr.pgm"));
  EXPECT_EQ(slurp(dir_ / "r1" / "sandr_trace.csv"), slurp(dir_ / "r2" / "sandr_trace.csv"));
  EXPECT_NE(slurp(dir_ / "r1" / "sandr_trace.csv").find("rms"), std::string::npos);

  ASSERT_EQ(rec("pg", dir_ / "r3", false), cli::kSuccess) << err_.str();
  const std::string trace = slurp(dir_ / "r3" / "pg_trace.csv");
  EXPECT_EQ(trace.find("rms"), std::string::npos);
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 7);  // header + iterations 0..5

  EXPECT_EQ(run({"evaluate", (dir_ / "r1" / "sandr.pgm").string(),
                 (dir_ / "a" / "truth.pgm").string()}),
            cli::kSuccess);
  EXPECT_EQ(out_.str().rfind("rms=", 0), 0u);
  EXPECT_EQ(rec("admm", dir_ / "r4", false), cli::kUsageError);
}

TEST_F(Cli, MissingTruthIsIoErrorWithoutOutput) {
  const fs::path out = dir_ / "never";
  EXPECT_EQ(run({"simulate", "--truth", (dir_ / "nope.pgm").string(), "--out", out.string()}),
            cli::kIoError);
  EXPECT_NE(err_.str().find("nope.pgm"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, MalformedConfigNamesField) {
  std::ofstream(dir_ / "bad.ini") << "zones=7\nlr-size=16\n";
  std::vector<std::string> args{"simulate", "--config", (dir_ / "bad.ini").string(), "--out",
                                (dir_ / "o").string()};
  EXPECT_EQ(run(args), cli::kUsageError);
  EXPECT_NE(err_.str().find("zones"), std::string::npos) << err_.str();

  std::ofstream(dir_ / "worse.ini") << "iterations=many\n";
  EXPECT_EQ(run({"sweep", "--kind", "solvability", "--config", (dir_ / "worse.ini").string()}),
            cli::kUsageError);
  EXPECT_NE(err_.str().find("iterations"), std::string::npos) << err_.str();
}

TEST_F(Cli, SolvabilitySweepWritesRawAndSummary) {
  std::vector<std::string> args{"sweep",  "--kind",       "solvability", "--values",
                                "0.06,0.12", "--trials",  "2",           "--iterations",
                                "3",      "--deblur-iterations", "2",    "--out",
                                dir_.string()};
  for (auto& a : small()) args.push_back(a);
  ASSERT_EQ(run(args), cli::kSuccess) << err_.str();
  const std::string raw = slurp(dir_ / "solvability_raw.csv");
  EXPECT_EQ(std::count(raw.begin(), raw.end(), '\n'), 13);  // header + 2 x 2 x 3
  EXPECT_EQ(raw.rfind("schema_version", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "solvability_summary.csv"));
}

TEST_F(Cli, ConvergenceWritesOneTracePerSolver) {
  std::vector<std::string> args{"sweep", "--kind", "convergence", "--iterations", "2",
                                "--deblur-iterations", "1", "--out", dir_.string()};
  for (auto& a : small()) args.push_back(a);
  ASSERT_EQ(run(args), cli::kSuccess) << err_.str();
  for (const char* s : {"pg", "sm", "sandr"}) {
    EXPECT_TRUE(fs::exists(dir_ / ("convergence_" + std::string(s) + ".csv"))) << s;
  }
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const fs::path target = dir_ / "env_out";
  ::setenv(cli::kOutputDirEnv, target.string().c_str(), 1);
  std::vector<std::string> args{"simulate"};
  for (auto& a : small()) args.push_back(a);
  const int code = run(args);
  ::unsetenv(cli::kOutputDirEnv);
  ASSERT_EQ(code, cli::kSuccess) << err_.str();
  EXPECT_TRUE(fs::exists(target / "manifest.txt"));
}

}  // namespace
}  // namespace dsr
