// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N]...
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dsr/harness.hpp"
#include "dsr/image.hpp"
#include "dsr/operators.hpp"
#include "dsr/optics.hpp"
#include "dsr/simulation.hpp"
#include "dsr/solvers.hpp"

namespace {

using namespace dsr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ImageGrid random_image(std::size_t rows, std::size_t cols, std::uint64_t seed,
                       double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageGrid out(rows, cols);
  for (double& v : out.values()) v = dist(rng);
  return out;
}

// Products are sorted before summation so that permuted sums agree exactly.
double order_free_inner(const ImageGrid& a, const ImageGrid& b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a.values()[i] * b.values()[i];
  std::sort(p.begin(), p.end());
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

std::map<SolverKind, std::map<double, double>> medians(const SweepResult& s) {
  std::map<SolverKind, std::map<double, double>> out;
  for (const SummaryRow& r : summarize(s)) out[r.solver][r.value] = r.median;
  return out;
}

std::string describe(const std::map<SolverKind, std::map<double, double>>& m) {
  std::string s;
  for (const auto& [solver, row] : m) {
    s += " " + to_string(solver) + "[";
    bool first = true;
    for (const auto& [value, med] : row) {
      s += (first ? "" : " ") + fmt("%g", value) + ":" + fmt("%.4g", med);
      first = false;
    }
    s += "]";
  }
  return s;
}

// 1 ---------------------------------------------------------------------------

Outcome operator_identities() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;

  for (int tau = 1; tau <= 4; ++tau) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ImageGrid u = random_image(12 + seed, 15 - seed, 1000 * tau + seed);
      if (downsample(upsample(u, tau), tau) != u) {
        ok = false;
        detail += " D(U(u))!=u at tau=" + std::to_string(tau);
      }
    }
  }

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> shift(-40, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const ImageGrid x = random_image(24, 31, 2000 + trial, -1.0, 1.0);
    const ImageGrid y = random_image(24, 31, 3000 + trial, -1.0, 1.0);
    const PixelShift s{shift(rng), shift(rng)};
    if (order_free_inner(translate(x, s), y) != order_free_inner(x, translate(y, -s))) {
      ok = false;
      detail += " translate adjoint mismatch";
    }
  }

  double worst = 0.0;
  std::uniform_real_distribution<double> blur(0.0, 0.3);
  for (int zones : {1, 4, 16}) {
    for (int trial = 0; trial < 50; ++trial) {
      DefocusSpec spec;
      spec.blur = blur(rng);
      spec.zones = zones;
      spec.focal = (zones + 1) / 2;
      spec.zone_width = 48 / zones;
      spec.orientation = trial % 2 == 0 ? Orientation::kVertical : Orientation::kHorizontal;
      const BlurOperator op = BlurOperator::from_spec(48, 48, spec);
      const ImageGrid x = random_image(48, 48, 4000 + 100 * zones + trial, -1.0, 1.0);
      const ImageGrid y = random_image(48, 48, 5000 + 100 * zones + trial, -1.0, 1.0);
      const double gap = std::abs(inner_product(op.apply(x), y) - inner_product(x, op.adjoint(y)));
      worst = std::max(worst, gap / (x.norm() * y.norm()));
    }
  }
  if (!(worst <= 1e-10)) ok = false;
  const double elapsed = seconds_since(t0);
  if (elapsed >= 10.0) ok = false;
  return {ok, "worst blur dot-product gap " + fmt("%.2e", worst) + " (limit 1e-10), " +
                  fmt("%.2f", elapsed) + " s (limit 10 s)" + detail};
}

// 2 ---------------------------------------------------------------------------

double half_residual(const FrameModel& m, const ImageGrid& o, const ImageGrid& obs) {
  const ImageGrid r = frame_forward(m, o) - obs;
  return 0.5 * inner_product(r, r);
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int checks = 0;
  struct Case {
    int tau;
    int psf;
    int zones;
    ShiftVector shift;
  };
  const std::vector<Case> cases{
      {1, 5, 4, {Fraction(0), Fraction(0)}},
      {2, 3, 2, {Fraction(1, 2), Fraction(0)}},
      {2, 3, 4, {Fraction(1, 2), Fraction(1, 2)}},
  };
  std::uint64_t seed = 0;
  for (const Case& c : cases) {
    const std::size_t lr = 8 / static_cast<std::size_t>(c.tau);
    DefocusSpec spec;
    spec.blur = 0.3;
    spec.zones = c.zones;
    spec.focal = 1;
    spec.zone_width = static_cast<int>(lr) / c.zones;
    spec.psf_size = c.psf;
    spec.pupil_grid = 32;
    const FrameModel model(std::make_shared<const BlurOperator>(BlurOperator::from_spec(lr, lr, spec)),
                           c.shift, c.tau);
    const ImageGrid o = random_image(8, 8, 100 + seed);
    const ImageGrid obs = random_image(lr, lr, 200 + seed);
    ImageGrid g = frame_gradient(model, o, obs);
    g *= 1.0 / (c.tau * c.tau);
    for (int d = 0; d < 20; ++d, ++checks) {
      const ImageGrid h = random_image(8, 8, 300 + 50 * seed + d, -1.0, 1.0);
      const double eps = 1e-3;
      const double fd =
          (half_residual(model, o + eps * h, obs) - half_residual(model, o - eps * h, obs)) /
          (2.0 * eps);
      const double exact = inner_product(g, h);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    ++seed;
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-5 && elapsed < 10.0,
          std::to_string(checks) + " directions, worst relative error " + fmt("%.2e", worst) +
              " (limit 1e-5), " + fmt("%.2f", elapsed) + " s (limit 10 s)"};
}

// 3 ---------------------------------------------------------------------------

Outcome psf_and_masks() {
  const ExperimentConfig t2 = preset("table2");
  bool ok = true;
  double worst_sum = 0.0;
  double min_value = 0.0;
  for (double blur : {0.0, 0.001, 0.03, 0.06, 0.12, 0.24}) {
    DefocusSpec spec;
    spec.blur = blur;
    spec.zones = t2.zones;
    spec.focal = t2.focal;
    spec.zone_width = static_cast<int>(t2.lr_size) / t2.zones;
    spec.psf_size = t2.psf_size;
    spec.pupil_grid = t2.pupil_grid;
    const PsfStack stack = build_psf_stack(spec);
    if (stack.size() != static_cast<std::size_t>(t2.zones)) ok = false;
    for (const ImageGrid& k : stack.kernels) {
      worst_sum = std::max(worst_sum, std::abs(k.sum() - 1.0));
      for (double v : k.values()) min_value = std::min(min_value, v);
    }
    if (blur == 0.0) {
      for (const ImageGrid& k : stack.kernels) {
        if (k != stack.kernels.front()) ok = false;
      }
    }
    for (Orientation o : {Orientation::kVertical, Orientation::kHorizontal}) {
      spec.orientation = o;
      const ZoneMasks masks = build_zone_masks(t2.lr_size, t2.lr_size, spec);
      if (masks.size() != static_cast<std::size_t>(t2.zones)) ok = false;
      ImageGrid total(t2.lr_size, t2.lr_size);
      for (const ImageGrid& m : masks.masks) {
        for (double v : m.values()) {
          if (v != 0.0 && v != 1.0) ok = false;
        }
        total += m;
      }
      if (total != ImageGrid(t2.lr_size, t2.lr_size, 1.0)) ok = false;
    }
  }
  ok = ok && worst_sum <= 1e-10 && min_value >= 0.0;
  return {ok, "165 = 55 x 3 masks partition exactly, worst |sum - 1| " + fmt("%.1e", worst_sum) +
                  ", min weight " + fmt("%.1e", min_value)};
}

// 4 ---------------------------------------------------------------------------

Outcome closure() {
  const auto t0 = Clock::now();
  const ImageGrid truth = smooth_random_scene(64, 64, derive_seed(1, 4), 16);
  std::vector<Frame> frames;
  for (const ShiftVector& v : default_shifts(2, 4)) {
    FrameModel model(std::make_shared<const BlurOperator>(BlurOperator::identity(32, 32)), v, 2);
    ImageGrid data = frame_forward(model, truth);
    frames.push_back({std::move(model), std::move(data)});
  }
  SolverConfig config;
  config.iterations = 100;
  const SolveResult r = sandr(frames, config, &truth);
  int first = -1;
  for (const IterationRecord& rec : r.trace.records) {
    if (first < 0 && *rec.rms < 1e-3) first = rec.iteration;
  }
  const double elapsed = seconds_since(t0);
  return {first >= 0 && elapsed < 30.0,
          "relative RMS " + fmt("%.2e", *r.trace.final_rms()) + " after 100 iterations, below 1e-3 from iteration " +
              std::to_string(first) + ", " + fmt("%.2f", elapsed) + " s (limit 30 s)"};
}

// 5 ---------------------------------------------------------------------------

double rms_at(const IterationTrace& t, int k) { return *t.records.at(static_cast<std::size_t>(k)).rms; }

Outcome acceleration_ordering() {
  ExperimentConfig c = preset("table2");
  c.iterations = 150;
  const ImageGrid truth = experiment_truth(c);
  std::vector<double> s30, s50, p50, p150;
  for (int t = 0; t < c.trials; ++t) {
    const Problem problem = make_problem(c, truth, trial_seed(c, t));
    SolverConfig sc = c.solver_config();
    sc.iterations = 50;
    const IterationTrace st = sandr(problem.frames, sc, &truth).trace;
    sc.iterations = 150;
    const IterationTrace pt = pg(problem.frames, sc, &truth).trace;
    s30.push_back(rms_at(st, 30));
    s50.push_back(rms_at(st, 50));
    p50.push_back(rms_at(pt, 50));
    p150.push_back(rms_at(pt, 150));
  }
  const double ms30 = median(s30), ms50 = median(s50), mp50 = median(p50), mp150 = median(p150);
  int single_wins = 0;
  for (std::size_t t = 0; t < s30.size(); ++t) single_wins += s30[t] <= p150[t] ? 1 : 0;
  return {ms30 <= mp150 && ms50 < mp50,
          "medians over " + std::to_string(c.trials) + " problems: sandr@30 " + fmt("%.4e", ms30) +
              " vs pg@150 " + fmt("%.4e", mp150) + ", sandr@50 " + fmt("%.4e", ms50) +
              " vs pg@50 " + fmt("%.4e", mp50) + "; first problem alone: sandr@30 " +
              fmt("%.4e", s30[0]) + " vs pg@150 " + fmt("%.4e", p150[0]) + "; sandr@30 <= pg@150 in " +
              std::to_string(single_wins) + "/" + std::to_string(s30.size()) + " problems"};
}

// 6 ---------------------------------------------------------------------------

bool non_decreasing(const std::map<double, double>& row) {
  double last = -1.0;
  for (const auto& [v, m] : row) {
    if (m < last) return false;
    last = m;
  }
  return true;
}

bool non_increasing(const std::map<double, double>& row) {
  double last = INFINITY;
  for (const auto& [v, m] : row) {
    if (m > last) return false;
    last = m;
  }
  return true;
}

Outcome solvability() {
  const auto t0 = Clock::now();
  const ExperimentConfig c = preset("table2");
  const auto m = medians(run_solvability_sweep({0.06, 0.12, 0.24}, c));
  bool ok = true;
  for (const auto& [solver, row] : m) ok = ok && non_decreasing(row);
  for (double d : {0.12, 0.24}) {
    ok = ok && m.at(SolverKind::kSandr).at(d) < m.at(SolverKind::kSm).at(d);
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 900.0;
  return {ok, "median RMS by d_max:" + describe(m) + ", " + fmt("%.0f", elapsed) + " s (limit 900 s)"};
}

// 7 ---------------------------------------------------------------------------

Outcome noise_ordering() {
  ExperimentConfig c = preset("table2");
  const double blur_max = 0.09;
  const std::vector<double> snrs{45.0, 55.0, 65.0};
  const auto m = medians(run_noise_sweep(snrs, blur_max, c));
  bool ok = true;
  for (const auto& [solver, row] : m) ok = ok && non_increasing(row);

  // Injected noise level, frame by frame, on the sweep's own draws.
  double worst = 0.0;
  c.blur_max = blur_max;
  const ImageGrid truth = experiment_truth(c);
  for (double snr : snrs) {
    ExperimentConfig noisy = c;
    noisy.noise.kind = NoiseKind::kGaussianSnr;
    noisy.noise.snr_db = snr;
    for (int t = 0; t < c.trials; ++t) {
      const std::uint64_t seed = trial_seed(c, t);
      const Problem p = make_problem(noisy, truth, seed);
      const std::vector<Frame> clean = generate_frames(p.scene);
      for (std::size_t f = 0; f < clean.size(); ++f) {
        worst = std::max(worst, std::abs(measured_snr_db(clean[f].data, p.frames[f].data) - snr));
      }
    }
  }
  ok = ok && worst <= 0.5;
  return {ok, "median RMS by SNR:" + describe(m) + ", worst SNR deviation " + fmt("%.3f", worst) +
                  " dB (limit 0.5 dB)"};
}

// 8 ---------------------------------------------------------------------------

Outcome frame_count() {
  ExperimentConfig c = preset("frames");
  c.trials = 10;
  c.blur_max = 0.06;
  const auto m = medians(run_frame_count_study({2, 4, 8, 16}, c));
  bool ok = m.size() == 3;
  for (const auto& [solver, row] : m) ok = ok && non_increasing(row);
  return {ok, "tau 4, median RMS by frame count:" + describe(m)};
}

// 9 ---------------------------------------------------------------------------

Outcome baselines() {
  ExperimentConfig c = preset("table2");
  c.trials = 10;
  c.solvers = {SolverKind::kSandr, SolverKind::kL1Btv, SolverKind::kL1BtvL, SolverKind::kL2Btv};
  const auto m = medians(run_baseline_comparison(c));
  const double s = m.at(SolverKind::kSandr).begin()->second;
  bool ok = true;
  for (SolverKind b : {SolverKind::kL1Btv, SolverKind::kL1BtvL, SolverKind::kL2Btv}) {
    ok = ok && s <= m.at(b).begin()->second;
  }
  return {ok, "median RMS at 50 iterations on defocus-free data:" + describe(m)};
}

// 10 --------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "dsr_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream out, err;
  bool ok = true;
  std::vector<std::string> files;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    ok = ok && cli::run({"dsr", "simulate", "--seed", "7", "--out", dir.string()}, out, err) == 0;
    ok = ok && cli::run({"dsr", "reconstruct", "--manifest", (dir / "manifest.txt").string(), "--truth",
                         (dir / "truth.pgm").string(), "--out", (dir / "rec").string()},
                        out, err) == 0;
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
    ok = ok && fs::exists(twin) && slurp(entry.path()) == slurp(twin);
    ++compared;
  }
  fs::remove_all(root);

  double t = 1.0;
  bool momentum = true;
  for (int k = 0; k <= 1000; ++k) {
    momentum = momentum && t >= (k + 2) / 2.0;
    t = next_momentum(t);
  }
  ok = ok && momentum && compared >= 7;
  return {ok, std::to_string(compared) + " output files identical across two runs" +
                  (err.str().empty() ? "" : " (" + err.str() + ")") +
                  (momentum ? "; t_k >= (k+2)/2 for k <= 1000" : "; momentum bound violated")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{
      operator_identities, gradient_correctness, psf_and_masks, closure,
      acceleration_ordering, solvability, noise_ordering, frame_count, baselines, determinism};

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
        return 1;
      }
      selected.push_back(n);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 1;
    }
  }
  if (selected.empty()) {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }

  bool all = true;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s: %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
