#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "dsr/errors.hpp"
#include "dsr/harness.hpp"
#include "dsr/io.hpp"
#include "dsr/simulation.hpp"

namespace dsr::cli {

namespace fs = std::filesystem;

namespace {

// Values given on the command line or in the config file. Anything left
// empty keeps the preset's value.
struct Overrides {
  std::string preset = "table1";
  std::optional<std::size_t> lr_size;
  std::optional<int> factor;
  std::optional<int> frames;
  std::optional<int> zones;
  std::optional<int> focal;
  std::optional<int> psf_size;
  std::optional<int> pupil_grid;
  std::optional<double> blur_min;
  std::optional<double> blur_max;
  std::optional<int> iterations;
  std::optional<double> step;
  std::optional<double> t0;
  std::optional<double> tolerance;
  std::optional<int> deblur_iterations;
  std::optional<double> btv_weight;
  std::optional<double> btv_decay;
  std::optional<int> btv_window;
  std::optional<double> laplace_weight;
  std::optional<double> baseline_step;
  std::optional<std::string> noise;
  std::optional<double> photon_budget;
  std::optional<double> snr_db;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> execution;
  std::optional<int> crop_margin;
  std::optional<int> window_order;
  std::optional<double> window_cutoff;
  bool no_window = false;
  std::optional<double> central_fraction;
  std::optional<std::vector<std::string>> solvers;
};

void add_scene_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--preset", o.preset, "Parameter set: " +
                 [] {
                   std::string s;
                   for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
                   return s;
                 }())
      ->capture_default_str();
  cmd.add_option("--factor", o.factor, "SR factor tau");
  cmd.add_option("--frames", o.frames, "Number of LR frames M");
  cmd.add_option("--zones", o.zones, "Defocus zones N per frame");
  cmd.add_option("--focal", o.focal, "Focal zone n0 (1-based)");
  cmd.add_option("--psf-size", o.psf_size, "PSF support rho (odd)");
  cmd.add_option("--pupil-grid", o.pupil_grid, "Pupil sampling grid");
  cmd.add_option("--blur-min", o.blur_min, "Lower end of the blur coefficient draw");
  cmd.add_option("--blur-max", o.blur_max, "Upper end of the blur coefficient draw");
  cmd.add_option("--noise", o.noise, "none, poisson or gaussian");
  cmd.add_option("--photon-budget", o.photon_budget, "Photons at unit intensity");
  cmd.add_option("--snr-db", o.snr_db, "Gaussian noise SNR in dB");
  cmd.add_option("--seed", o.seed, "Master seed");
}

void add_solver_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--iterations", o.iterations, "Iterations K");
  cmd.add_option("--step", o.step, "Step size lambda");
  cmd.add_option("--t0", o.t0, "Initial acceleration scalar");
  cmd.add_option("--tolerance", o.tolerance,
                 "Stop once the gradient-norm sum grows by more than this");
  cmd.add_option("--deblur-iterations", o.deblur_iterations,
                 "Per-frame deblurring iterations of sm");
  cmd.add_option("--btv-weight", o.btv_weight, "BTV weight of the baselines");
  cmd.add_option("--btv-decay", o.btv_decay, "BTV decay alpha");
  cmd.add_option("--btv-window", o.btv_window, "BTV window radius P");
  cmd.add_option("--laplace-weight", o.laplace_weight, "Laplacian weight of l1btvl");
  cmd.add_option("--baseline-step", o.baseline_step, "Step size of the baselines");
  cmd.add_option("--execution", o.execution,
                 "sequential or parallel scheduling of per-frame work");
}

void add_sweep_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--lr-size", o.lr_size, "LR frame side length");
  cmd.add_option("--trials", o.trials, "Seeded trials per sweep value");
  cmd.add_option("--workers", o.workers, "Threads running trials in parallel");
  cmd.add_option("--crop-margin", o.crop_margin,
                 "LR pixels simulated beyond each border (cropping study)");
  cmd.add_option("--window-order", o.window_order, "Butterworth order");
  cmd.add_option("--window-cutoff", o.window_cutoff,
                 "Butterworth cutoff as a fraction of the half size");
  cmd.add_flag("--no-window", o.no_window, "Disable the Butterworth window");
  cmd.add_option("--central-fraction", o.central_fraction,
                 "Radius fraction of the central RMS disk");
  cmd.add_option("--solvers", o.solvers, "Comma-separated solver list")->delimiter(',');
}

template <typename T, typename U>
void assign(const std::optional<T>& from, U& to) {
  if (from) to = static_cast<U>(*from);
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = preset(o.preset);
  assign(o.lr_size, c.lr_size);
  assign(o.factor, c.factor);
  assign(o.frames, c.frames);
  assign(o.zones, c.zones);
  assign(o.focal, c.focal);
  assign(o.psf_size, c.psf_size);
  assign(o.pupil_grid, c.pupil_grid);
  assign(o.blur_min, c.blur_min);
  assign(o.blur_max, c.blur_max);
  assign(o.iterations, c.iterations);
  assign(o.step, c.step);
  assign(o.t0, c.t0);
  if (o.tolerance) c.tolerance = *o.tolerance;
  assign(o.deblur_iterations, c.deblur_iterations);
  assign(o.btv_weight, c.btv.reg_weight);
  assign(o.btv_decay, c.btv.decay);
  assign(o.btv_window, c.btv.window);
  assign(o.laplace_weight, c.btv.laplace_weight);
  assign(o.baseline_step, c.baseline_step);
  if (o.noise) c.noise.kind = noise_kind_from_string(*o.noise);
  assign(o.photon_budget, c.noise.photon_budget);
  assign(o.snr_db, c.noise.snr_db);
  assign(o.trials, c.trials);
  assign(o.seed, c.seed);
  assign(o.workers, c.workers);
  if (o.execution) {
    if (*o.execution == "sequential") {
      c.execution = Execution::kSequential;
    } else if (*o.execution == "parallel") {
      c.execution = Execution::kParallel;
    } else {
      throw ConfigError("execution", "expected sequential|parallel, got '" + *o.execution + "'");
    }
  }
  assign(o.crop_margin, c.crop_margin);
  assign(o.window_order, c.window_order);
  assign(o.window_cutoff, c.window_cutoff);
  if (o.no_window) c.window = false;
  assign(o.central_fraction, c.central_fraction);
  if (o.solvers) {
    c.solvers.clear();
    for (const auto& name : *o.solvers) c.solvers.push_back(solver_from_string(name));
  }
  return c;
}

fs::path output_dir(const std::optional<std::string>& flag) {
  fs::path dir;
  if (flag) {
    dir = *flag;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    dir = env;
  } else {
    dir = "out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

io::ImageFormat image_format(const std::string& format, int depth) {
  if (format != "pgm" && format != "png") {
    throw ConfigError("format", "expected pgm|png, got '" + format + "'");
  }
  return io::format_for_path("x." + format, depth);
}

std::string extension(io::ImageFormat f) {
  return f == io::ImageFormat::kPng8 || f == io::ImageFormat::kPng16 ? ".png" : ".pgm";
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  Overrides o;
  std::optional<std::string> truth;
  std::optional<std::string> out;
  std::string format = "pgm";
  int bit_depth = 16;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ExperimentConfig c = resolve(a.o);
  const ImageGrid truth = a.truth ? io::read_image(*a.truth) : experiment_truth(c);
  if (truth.rows() % c.factor != 0 || truth.cols() % c.factor != 0) {
    throw ConfigError("factor", "truth dimensions must be divisible by the SR factor");
  }
  c.noise.validate();
  if (c.frames < 1 || c.frames > c.factor * c.factor) {
    throw ConfigError("frames", "must lie in [1, factor^2]");
  }
  const io::ImageFormat format = image_format(a.format, a.bit_depth);
  Problem problem = make_problem(c, truth, c.seed);
  for (const Frame& f : problem.frames) {
    if (!f.data.all_finite()) throw NumericError("simulated frame is not finite");
  }

  const fs::path dir = output_dir(a.out);
  io::Manifest manifest;
  manifest.factor = c.factor;
  manifest.sr_rows = truth.rows();
  manifest.sr_cols = truth.cols();
  manifest.seed = c.seed;
  manifest.noise = c.noise;
  manifest.noise.seed = noise_seed_for(c.seed);
  for (std::size_t m = 0; m < problem.frames.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu", m);
    const std::string file = name + extension(format);
    io::write_image(dir / file, problem.frames[m].data, format);
    manifest.frames.push_back({file, problem.scene.shifts[m], problem.scene.defocus[m],
                               derive_seed(manifest.noise.seed, m)});
  }
  if (!a.truth) io::write_image(dir / ("truth" + extension(format)), truth, format);
  io::write_manifest(dir / "manifest.txt", manifest);
  out << "wrote " << problem.frames.size() << " frames of " << truth.rows() / c.factor << "x"
      << truth.cols() / c.factor << " and " << (dir / "manifest.txt").string() << "\n";
  return kSuccess;
}

// reconstruct -----------------------------------------------------------------

struct ReconstructArgs {
  Overrides o;
  std::string manifest;
  std::string solver = "sandr";
  std::optional<std::string> truth;
  std::optional<std::string> out;
  std::string format = "pgm";
  int bit_depth = 16;
  bool timing = false;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  ExperimentConfig c = resolve(a.o);
  const SolverKind kind = solver_from_string(a.solver);
  c.solver_config().validate();
  c.btv.validate();
  const io::ImageFormat format = image_format(a.format, a.bit_depth);

  const io::Manifest manifest = io::read_manifest(a.manifest);
  const std::vector<Frame> frames = io::load_frames(a.manifest, manifest);
  std::optional<ImageGrid> truth;
  if (a.truth) {
    truth = io::read_image(*a.truth);
    if (truth->rows() != manifest.sr_rows || truth->cols() != manifest.sr_cols) {
      throw ConfigError("truth", "dimensions do not match the manifest's SR size");
    }
  }
  SolveResult result = run_solver(kind, frames, c, truth ? &*truth : nullptr);

  const fs::path dir = output_dir(a.out);
  const fs::path image_path = dir / (a.solver + extension(format));
  const fs::path trace_path = dir / (a.solver + "_trace.csv");
  io::write_image(image_path, result.image, format);
  io::write_trace_csv(trace_path, result.trace, truth.has_value(), a.timing);
  out << "wrote " << image_path.string() << " and " << trace_path.string();
  if (truth) out << " (rms " << io::format_double(relative_rms(result.image, *truth)) << ")";
  out << "\n";
  return kSuccess;
}

// sweep -----------------------------------------------------------------------

struct SweepArgs {
  Overrides o;
  bool preset_given = false;
  std::string kind;
  std::optional<std::vector<double>> values;
  std::optional<std::string> truth;
  std::optional<std::string> out;
  bool timing = false;
};

const std::vector<std::string>& sweep_kinds() {
  static const std::vector<std::string> kinds{"solvability", "noise",       "frames",
                                              "cropping",    "convergence", "baselines"};
  return kinds;
}

std::string default_preset(const std::string& kind) {
  if (kind == "frames") return "frames";
  if (kind == "cropping") return "table3";
  if (kind == "convergence") return "convergence";
  return "table2";
}

void write_sweep(const fs::path& dir, const std::string& kind, const SweepResult& sweep,
                 bool timing, std::ostream& out) {
  io::write_sweep_csv(dir / (kind + "_raw.csv"), sweep, timing);
  const auto rows = summarize(sweep);
  io::write_summary_csv(dir / (kind + "_summary.csv"), sweep.variable, rows);
  for (const SummaryRow& r : rows) {
    out << sweep.variable << "=" << io::format_double(r.value) << " " << to_string(r.solver)
        << " median_rms=" << io::format_double(r.median) << "\n";
  }
}

int cmd_sweep(SweepArgs a, std::ostream& out) {
  if (std::find(sweep_kinds().begin(), sweep_kinds().end(), a.kind) == sweep_kinds().end()) {
    throw ConfigError("kind", "unknown sweep kind '" + a.kind + "'");
  }
  if (!a.preset_given) a.o.preset = default_preset(a.kind);
  ExperimentConfig c = resolve(a.o);
  if (a.truth) c.truth = io::read_image(*a.truth);
  if (a.kind == "noise" && !a.o.blur_max) c.blur_max = 0.09;
  const fs::path dir = output_dir(a.out);

  auto values_or = [&](std::vector<double> fallback) { return a.values ? *a.values : fallback; };
  if (a.kind == "solvability") {
    write_sweep(dir, a.kind, run_solvability_sweep(values_or({0.06, 0.12, 0.18, 0.24, 0.3}), c),
                a.timing, out);
  } else if (a.kind == "noise") {
    write_sweep(dir, a.kind,
                run_noise_sweep(values_or({45, 50, 55, 60, 65}), c.blur_max, c), a.timing, out);
  } else if (a.kind == "frames") {
    std::vector<int> counts;
    for (double v : values_or({2, 4, 8, 16})) {
      if (v != std::floor(v)) throw ConfigError("values", "frame counts must be integers");
      counts.push_back(static_cast<int>(v));
    }
    write_sweep(dir, a.kind, run_frame_count_study(counts, c), a.timing, out);
  } else if (a.kind == "baselines") {
    if (!a.o.solvers) {
      c.solvers = {SolverKind::kSandr, SolverKind::kL1Btv, SolverKind::kL1BtvL,
                   SolverKind::kL2Btv};
    }
    write_sweep(dir, a.kind, run_baseline_comparison(c), a.timing, out);
  } else if (a.kind == "convergence") {
    for (const NamedTrace& t : run_convergence_trace(c)) {
      const fs::path path = dir / ("convergence_" + to_string(t.solver) + ".csv");
      io::write_trace_csv(path, t.trace, true, a.timing);
      out << to_string(t.solver) << " final_rms=" << io::format_double(*t.trace.final_rms())
          << "\n";
    }
  } else {
    const CroppingResult r = run_cropping_study(c);
    io::write_cropping_csv(dir / "cropping.csv", r);
    io::write_image(dir / "cropping_reference.pgm", r.reference, io::ImageFormat::kPgm16);
    for (const CroppedReconstruction& rec : r.reconstructions) {
      io::write_image(dir / ("cropping_" + to_string(rec.solver) + ".pgm"), rec.image,
                      io::ImageFormat::kPgm16);
      out << to_string(rec.solver) << " full_rms=" << io::format_double(rec.full_rms)
          << " central_rms=" << io::format_double(rec.central_rms) << "\n";
    }
  }
  return kSuccess;
}

// evaluate / target -----------------------------------------------------------

int cmd_evaluate(const std::string& estimate, const std::string& reference,
                 std::optional<double> central, std::ostream& out) {
  const ImageGrid e = io::read_image(estimate);
  const ImageGrid r = io::read_image(reference);
  if (!e.same_shape(r)) throw ConfigError("estimate", "image dimensions differ");
  out << "rms=" << io::format_double(relative_rms(e, r));
  if (central) out << " central_rms=" << io::format_double(central_relative_rms(e, r, *central));
  out << "\n";
  return kSuccess;
}

int cmd_target(std::size_t rows, std::size_t cols, std::uint64_t seed, double margin,
               const std::string& path, int depth, std::ostream& out) {
  const ImageGrid t = resolution_target(rows, cols, seed, margin);
  io::write_image(path, t, io::format_for_path(path, depth));
  out << "wrote " << path << "\n";
  return kSuccess;
}

// Replaces `--config FILE` by the file's `key = value` lines, spelled as
// `--key=value` right after the subcommand. Keys also given as flags are
// skipped, so the command line wins. Section headers are ignored.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw ConfigError("config", "expected a file path");
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  if (!fs::is_regular_file(path)) throw IoError("cannot read config file '" + path + "'");

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> expanded;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string flag = "--" + item.name;
    if (given(flag)) continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      value += (i ? "," : "") + item.inputs[i];
    }
    expanded.push_back(flag + "=" + value);
  }
  const auto sub = std::find_if(args.begin() + 1, args.end(),
                                [](const std::string& a) { return a.rfind('-', 0) != 0; });
  args.insert(sub == args.end() ? sub : sub + 1, expanded.begin(), expanded.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-frame superresolution with nonuniform defocus removal"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  const std::string config_help = "--config FILE reads `key = value` defaults; flags override it.";
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize LR frames and a manifest");
  simulate->add_option("--truth", sim.truth,
                       "SR truth image (PGM/PNG); a resolution target is drawn if omitted");
  simulate->add_option("--out", sim.out, "Output directory (default $DSR_OUTPUT_DIR or ./out)");
  simulate->add_option("--format", sim.format, "pgm or png")->capture_default_str();
  simulate->add_option("--bit-depth", sim.bit_depth, "8 or 16")->capture_default_str();
  simulate->footer(config_help);
  add_scene_options(*simulate, sim.o);
  simulate->add_option("--lr-size", sim.o.lr_size, "LR side length of a generated truth");

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct the SR image of a manifest");
  reconstruct->add_option("--manifest", rec.manifest, "Manifest written by simulate")->required();
  reconstruct->add_option("--solver", rec.solver, "sandr, pg, sm, l1btv, l1btvl or l2btv")
      ->capture_default_str();
  reconstruct->add_option("--truth", rec.truth, "Truth image; adds an rms column to the trace");
  reconstruct->add_option("--out", rec.out, "Output directory");
  reconstruct->add_option("--format", rec.format, "pgm or png")->capture_default_str();
  reconstruct->add_option("--bit-depth", rec.bit_depth, "8 or 16")->capture_default_str();
  reconstruct->add_flag("--timing", rec.timing, "Add a wall-time column to the trace");
  reconstruct->add_option("--preset", rec.o.preset, "Parameter set")->capture_default_str();
  reconstruct->footer(config_help);
  add_solver_options(*reconstruct, rec.o);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment suite and write CSV tables");
  sweep->add_option("--kind", sw.kind,
                    "solvability, noise, frames, cropping, convergence or baselines")
      ->required();
  sweep->add_option("--values", sw.values,
                    "Sweep values: d_max list, SNR list (dB) or frame counts")
      ->delimiter(',');
  sweep->add_option("--truth", sw.truth, "SR truth image instead of a generated target");
  sweep->add_option("--out", sw.out, "Output directory");
  sweep->add_flag("--timing", sw.timing, "Add wall-time columns");
  sweep->footer(config_help);
  add_scene_options(*sweep, sw.o);
  add_solver_options(*sweep, sw.o);
  add_sweep_options(*sweep, sw.o);

  std::string estimate;
  std::string reference;
  std::optional<double> central;
  auto* evaluate = app.add_subcommand("evaluate", "Relative RMS between two images");
  evaluate->add_option("estimate", estimate, "Estimated image")->required();
  evaluate->add_option("reference", reference, "Reference image")->required();
  evaluate->add_option("--central", central,
                       "Also report the RMS over the central disk of this radius fraction");

  std::size_t target_rows = 330;
  std::size_t target_cols = 330;
  std::uint64_t target_seed = 1;
  double target_margin = 0.08;
  std::string target_path = "target.pgm";
  int target_depth = 16;
  auto* target = app.add_subcommand("target", "Write a synthetic resolution target");
  target->add_option("--rows", target_rows)->capture_default_str();
  target->add_option("--cols", target_cols)->capture_default_str();
  target->add_option("--seed", target_seed)->capture_default_str();
  target->add_option("--margin", target_margin, "Blank border fraction")->capture_default_str();
  target->add_option("--bit-depth", target_depth)->capture_default_str();
  target->add_option("--output", target_path, "Output image path")->capture_default_str();

  std::vector<std::string> full;
  try {
    full = expand_config(args);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const CLI::Error& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    std::vector<std::string> rest(full.size() > 1 ? full.begin() + 1 : full.end(), full.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (reconstruct->parsed()) return cmd_reconstruct(rec, out);
    if (sweep->parsed()) {
      sw.preset_given = sweep->get_option("--preset")->count() > 0;
      return cmd_sweep(sw, out);
    }
    if (evaluate->parsed()) return cmd_evaluate(estimate, reference, central, out);
    if (target->parsed()) {
      return cmd_target(target_rows, target_cols, target_seed, target_margin, target_path,
                        target_depth, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::domain_error& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace dsr::cli
