#include "unarysim/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "unarysim/costmodel.hpp"
#include "unarysim/engines.hpp"
#include "unarysim/format.hpp"
#include "unarysim/parallel.hpp"
#include "unarysim/sparsity.hpp"
#include "unarysim/table.hpp"

namespace unarysim {
namespace {

namespace fs = std::filesystem;

constexpr const char* kOutDirEnv = "UNARYSIM_OUT_DIR";

GemmShape parse_shape(const std::string& s) {
  std::vector<int64_t> dims;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      size_t used = 0;
      dims.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("bad shape '" + s + "' (expected MxNxP)");
    }
  }
  if (dims.size() == 2) dims.push_back(dims[1]);
  if (dims.size() != 3) throw ValidationError("bad shape '" + s + "' (expected MxNxP)");
  return GemmShape(dims[0], dims[1], dims[2]);
}

std::map<int, double> parse_b_spa(const std::vector<std::string>& items) {
  std::map<int, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("--b-spa expects w=VALUE, got '" + item + "'");
    int w = 0;
    double v = 0;
    try {
      w = std::stoi(item.substr(0, eq));
      v = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("--b-spa expects w=VALUE, got '" + item + "'");
    }
    BitWidth{w};
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("--b-spa value must be in [0, 1]");
    out[w] = v;
  }
  return out;
}

std::vector<Design> parse_designs(const std::vector<std::string>& names) {
  std::vector<Design> out;
  for (const auto& n : names) {
    if (n == "all") return {kAllDesigns.begin(), kAllDesigns.end()};
    out.push_back(parse_design(n));
  }
  if (out.empty()) throw ValidationError("at least one design is required");
  // Stable report order: table column order.
  std::vector<Design> ordered;
  for (Design d : kAllDesigns) {
    if (std::find(out.begin(), out.end(), d) != out.end()) ordered.push_back(d);
  }
  return ordered;
}

std::vector<int> sorted_widths(std::vector<int> widths) {
  if (widths.empty()) throw ValidationError("at least one width is required");
  for (int w : widths) BitWidth{w};
  std::sort(widths.begin(), widths.end());
  widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
  return widths;
}

TileSpec parse_tiles(const std::string& s) {
  if (s == "feature-map") return TileSpec::per_feature_map();
  if (s == "block") return TileSpec::block(32, 32);
  if (s.rfind("block:", 0) == 0) {
    const GemmShape g = parse_shape(s.substr(6) + "x1");
    return TileSpec::block(g.m, g.n_common);
  }
  throw ValidationError("bad --tiles '" + s + "' (auto, feature-map, block, block:RxC)");
}

const CalibrationTable& calibration_for(const std::string& path, std::optional<CalibrationTable>& storage) {
  if (path.empty()) return CalibrationTable::embedded();
  storage = CalibrationTable::load(path);
  return *storage;
}

std::string out_dir_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv)) return env;
  return "";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
}

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double rms_relative_error(const Matrix& approx, const Matrix& exact) {
  double num = 0, den = 0;
  for (size_t i = 0; i < exact.data().size(); ++i) {
    const double d = static_cast<double>(approx.data()[i] - exact.data()[i]);
    num += d * d;
    den += static_cast<double>(exact.data()[i]) * static_cast<double>(exact.data()[i]);
  }
  return den == 0 ? (num == 0 ? 0.0 : 1.0) : std::sqrt(num / den);
}

// Operand A either random or a 2-D view of one bundle layer.
struct OperandSource {
  std::string bundle;
  std::string layer;
  bool truncate = false;
};

Matrix left_operand(const OperandSource& src, const GemmShape& shape, BitWidth width, uint64_t seed) {
  if (src.bundle.empty()) return random_matrix(shape.m, shape.n_common, width, 2 * seed + 1);
  const TensorBundle bundle = TensorBundle::load(src.bundle);
  for (const auto& rec : bundle.layers()) {
    if (rec.name != src.layer) continue;
    Tensor t = bundle.read(rec);
    if (src.truncate) t = msb_truncate(t, width.bits(), rec.dtype == TensorDtype::kInt32 ? 32 : 8);
    const int64_t rows = t.shape.size() == 1 ? 1 : t.shape[0];
    const int64_t cols = static_cast<int64_t>(t.size()) / rows;
    std::vector<int64_t> data(t.data.begin(), t.data.end());
    try {
      return Matrix(rows, cols, width, std::move(data));
    } catch (const ValidationError& e) {
      throw ValidationError("layer '" + rec.name + "': " + e.what() + " (use --truncate)");
    }
  }
  throw ValidationError("layer '" + src.layer + "' not found in " + src.bundle);
}

struct SimRow {
  Design design;
  int width;
  GemmShape shape;
  uint64_t seed;
  EngineResult result;
  bool exact;
  double rel_error;
  double wall_ms;
};

SimRow simulate_one(Design d, BitWidth w, const GemmShape& shape, uint64_t seed,
                    const EngineOptions& options, const OperandSource& src, bool timing) {
  const Matrix a = left_operand(src, shape, w, seed);
  const GemmShape actual(a.rows(), a.cols(), shape.p);
  const Matrix b = random_matrix(actual.n_common, actual.p, w, 2 * seed + 2);
  const auto start = std::chrono::steady_clock::now();
  EngineResult r = run_engine(d, a, b, options);
  const auto stop = std::chrono::steady_clock::now();
  const Matrix exact = exact_gemm(a, b);
  const double ms = timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  const bool match = r.result == exact;
  const double rel = rms_relative_error(r.result, exact);
  return SimRow{d, w.bits(), actual, seed, std::move(r), match, rel, ms};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-accurate unary/binary GEMM simulator and cost model", "unarysim"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run engines on random (or bundle) operands");
  std::vector<std::string> sim_designs{"all"};
  std::vector<int> sim_widths{8};
  std::string sim_shape = "16x16x16";
  uint64_t sim_seed = 1;
  std::string sim_format = "csv";
  std::string temporal_operand = "a";
  uint64_t rotation = 0;
  bool timing = false;
  OperandSource source;
  sim->add_option("--design", sim_designs, "ugemm|tugemm|tubgemm|bgemm|all (repeatable)")->delimiter(',');
  sim->add_option("--width", sim_widths, "Operand bit widths 2..8 (repeatable)")->delimiter(',');
  sim->add_option("--shape", sim_shape, "MxNxP (N = common dimension)");
  sim->add_option("--seed", sim_seed, "PRNG seed");
  sim->add_option("--format", sim_format, "csv|markdown|jsonl");
  sim->add_option("--temporal-operand", temporal_operand, "tubGEMM streamed operand: a|b");
  sim->add_option("--rotation", rotation, "uGEMM comparator schedule rotation");
  sim->add_flag("--timing", timing, "Measure engine wall time");
  sim->add_option("--bundle", source.bundle, "Take operand A from a tensor bundle");
  sim->add_option("--layer", source.layer, "Bundle layer name for operand A");
  sim->add_flag("--truncate", source.truncate, "MSB-truncate the bundle layer to the width");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Simulate and cost a design x width x size grid");
  std::vector<std::string> sweep_designs{"all"};
  std::vector<int> sweep_widths{2, 4, 8};
  std::vector<int64_t> sweep_sizes{16, 32};
  uint64_t sweep_seed = 1;
  std::string sweep_format = "csv";
  unsigned jobs = 1;
  std::vector<std::string> sweep_bspa;
  bool sweep_extrapolate = false;
  std::string sweep_calibration;
  sweep->add_option("--design", sweep_designs, "Designs (repeatable, or all)")->delimiter(',');
  sweep->add_option("--width", sweep_widths, "Bit widths")->delimiter(',');
  sweep->add_option("--size", sweep_sizes, "Square array sizes N (M = N = P)")->delimiter(',');
  sweep->add_option("--seed", sweep_seed, "PRNG seed");
  sweep->add_option("--format", sweep_format, "csv|markdown|jsonl");
  sweep->add_option("--jobs", jobs, "Worker threads");
  sweep->add_option("--b-spa", sweep_bspa, "Bit sparsity per width, w=VALUE (repeatable)");
  sweep->add_flag("--extrapolate", sweep_extrapolate, "Estimate uncalibrated configurations");
  sweep->add_option("--calibration", sweep_calibration, "Calibration JSON (default: embedded)");

  // report-tables
  auto* rep = app.add_subcommand("report-tables", "Recompute the published energy and ADP tables");
  std::string rep_calibration;
  std::string rep_format = "markdown";
  std::string figure;
  std::vector<std::string> rep_bspa;
  std::string rep_out;
  rep->add_option("--calibration", rep_calibration, "Calibration JSON (default: embedded)");
  rep->add_option("--format", rep_format, "markdown|csv");
  rep->add_option("--figure", figure, "Emit a figure data series instead: energy32|area32");
  rep->add_option("--b-spa", rep_bspa, "Bit sparsity per width for energy32, w=VALUE");
  rep->add_option("--out-dir", rep_out, "Write files here (default: $UNARYSIM_OUT_DIR or stdout)");

  // profile
  auto* prof = app.add_subcommand("profile", "Word/bit sparsity of a tensor bundle");
  std::string bundle_path;
  int prof_width = 8;
  std::optional<int> truncate_width;
  std::string tiles = "auto";
  std::string prof_format = "csv";
  bool weighted = false;
  unsigned prof_jobs = 1;
  prof->add_option("bundle", bundle_path, "Bundle directory (contains manifest.json)")->required();
  prof->add_option("--width", prof_width, "Profiling bit width");
  prof->add_option("--truncate", truncate_width, "MSB-truncate to this width (2, 4, 8)");
  prof->add_option("--tiles", tiles, "auto|feature-map|block|block:RxC");
  prof->add_option("--format", prof_format, "csv|markdown");
  prof->add_flag("--weighted", weighted, "Element-weighted model means");
  prof->add_option("--jobs", prof_jobs, "Worker threads");

  // cost
  auto* cost = app.add_subcommand("cost", "Cost model rows for given configurations");
  std::vector<std::string> cost_designs{"all"};
  std::vector<int> cost_widths{8};
  std::vector<int64_t> cost_arrays{16};
  std::vector<std::string> cost_bspa;
  bool cost_extrapolate = false;
  std::string cost_calibration;
  std::string cost_format = "csv";
  cost->add_option("--design", cost_designs, "Designs (repeatable, or all)")->delimiter(',');
  cost->add_option("--width", cost_widths, "Bit widths")->delimiter(',');
  cost->add_option("--array", cost_arrays, "Array sizes")->delimiter(',');
  cost->add_option("--b-spa", cost_bspa, "Bit sparsity per width, w=VALUE (repeatable)");
  cost->add_flag("--extrapolate", cost_extrapolate, "Estimate uncalibrated configurations");
  cost->add_option("--calibration", cost_calibration, "Calibration JSON (default: embedded)");
  cost->add_option("--format", cost_format, "csv|markdown");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) {
      EngineOptions options;
      options.sequence.rotation = rotation;
      if (temporal_operand == "b") {
        options.tub_operand = TemporalOperand::kRight;
      } else if (temporal_operand != "a") {
        throw ValidationError("--temporal-operand must be a or b");
      }
      if (!source.bundle.empty() && source.layer.empty()) {
        throw ValidationError("--bundle needs --layer");
      }
      const GemmShape shape = parse_shape(sim_shape);
      const auto designs = parse_designs(sim_designs);
      const auto widths = sorted_widths(sim_widths);
      const OutputFormat fmt = parse_output_format(sim_format);

      RowTable table{{"design", "width", "m", "n", "p", "seed", "checksum", "cycles", "wc_cycles",
                      "max_transitions", "exact", "rel_error", "wall_ms"},
                     {}};
      std::optional<std::string> mismatch;
      for (Design d : designs) {
        for (int w : widths) {
          SimRow r = simulate_one(d, BitWidth{w}, shape, sim_seed, options, source, timing);
          if (d != Design::kUgemm && !r.exact && !mismatch) {
            mismatch = std::string(design_name(d)) + " w=" + std::to_string(w);
          }
          table.rows.push_back({std::string(design_name(d)), int64_t{w}, r.shape.m, r.shape.n_common,
                                r.shape.p, static_cast<int64_t>(sim_seed), hex64(checksum(r.result.result)),
                                r.result.cycles, r.result.wc_cycles, r.result.max_transitions_per_wire,
                                std::string(d == Design::kUgemm ? (r.exact ? "yes" : "approx")
                                                                : (r.exact ? "yes" : "NO")),
                                r.rel_error, r.wall_ms});
        }
      }
      write_table(out, table, fmt);
      if (mismatch) {
        err << "error: " << *mismatch << " result differs from the exact GEMM\n";
        return kExitDeviation;
      }
      return kExitOk;
    }

    if (*sweep) {
      std::optional<CalibrationTable> storage;
      const CalibrationTable& cal = calibration_for(sweep_calibration, storage);
      const auto designs = parse_designs(sweep_designs);
      const auto widths = sorted_widths(sweep_widths);
      const auto b_spa = parse_b_spa(sweep_bspa);
      const OutputFormat fmt = parse_output_format(sweep_format);
      std::sort(sweep_sizes.begin(), sweep_sizes.end());
      sweep_sizes.erase(std::unique(sweep_sizes.begin(), sweep_sizes.end()), sweep_sizes.end());

      struct Point {
        Design d;
        int w;
        int64_t n;
      };
      std::vector<Point> grid;
      for (Design d : designs)
        for (int w : widths)
          for (int64_t n : sweep_sizes) grid.push_back({d, w, n});

      // Cost rows first so a missing calibration fails before any simulation.
      std::vector<CostReport> costs;
      for (const auto& pt : grid) {
        auto it = b_spa.find(pt.w);
        costs.push_back(cost_report(cal, pt.d, BitWidth{pt.w}, pt.n,
                                    it == b_spa.end() ? 0.0 : it->second, sweep_extrapolate));
      }
      const auto sims = parallel_map(grid.size(), jobs, [&](size_t i) {
        const GemmShape shape(grid[i].n, grid[i].n, grid[i].n);
        return simulate_one(grid[i].d, BitWidth{grid[i].w}, shape, sweep_seed, EngineOptions{}, {}, false);
      });

      RowTable table{{"design", "width", "array", "seed", "checksum", "cycles", "wc_cycles",
                      "max_transitions", "exact", "rel_error", "area_um2", "power_mW",
                      "wc_latency_ns", "energy_nJ", "adp_mm2ns", "latency_ns", "measured_energy_nJ",
                      "b_spa", "dyn_latency_ns", "dyn_energy_nJ", "estimate"},
                     {}};
      std::optional<std::string> mismatch;
      for (size_t i = 0; i < grid.size(); ++i) {
        const SimRow& s = sims[i];
        const CostReport& c = costs[i];
        if (s.design != Design::kUgemm && !s.exact && !mismatch) {
          mismatch = std::string(design_name(s.design)) + " w=" + std::to_string(s.width) +
                     " N=" + std::to_string(s.shape.n_common);
        }
        const double latency = static_cast<double>(s.result.cycles) * cal.clock_period_ns();
        table.rows.push_back({std::string(design_name(s.design)), int64_t{s.width}, s.shape.n_common,
                              static_cast<int64_t>(sweep_seed), hex64(checksum(s.result.result)),
                              s.result.cycles, s.result.wc_cycles, s.result.max_transitions_per_wire,
                              std::string(s.exact ? "yes" : (s.design == Design::kUgemm ? "approx" : "NO")),
                              s.rel_error, c.area_um2, c.power_mW, c.wc_latency_ns, c.energy_nJ,
                              c.adp_mm2_ns, latency, c.power_mW * latency * 1e-3, c.b_spa,
                              c.dynamic_latency_ns, c.dynamic_energy_nJ,
                              std::string(c.estimate ? "ESTIMATE" : "")});
      }
      write_table(out, table, fmt);
      if (mismatch) {
        err << "error: " << *mismatch << " result differs from the exact GEMM\n";
        return kExitDeviation;
      }
      return kExitOk;
    }

    if (*rep) {
      std::optional<CalibrationTable> storage;
      const CalibrationTable& cal = calibration_for(rep_calibration, storage);
      const std::string dir = out_dir_or_env(rep_out);
      if (!figure.empty()) {
        std::ostringstream s;
        if (figure == "energy32") {
          write_cost_csv(s, sparsity_energy_series(cal, 32, {2, 4, 8}, parse_b_spa(rep_bspa)));
        } else if (figure == "area32") {
          std::vector<CostReport> rows;
          for (Design d : kAllDesigns)
            for (int w : {2, 4, 8}) rows.push_back(cost_report(cal, d, BitWidth{w}, 32));
          write_cost_csv(s, rows);
        } else {
          throw ValidationError("unknown figure '" + figure + "' (energy32, area32)");
        }
        if (dir.empty()) {
          out << s.str();
        } else {
          fs::create_directories(dir);
          write_file(fs::path(dir) / ("fig_" + figure + ".csv"), s.str());
          out << "wrote " << (fs::path(dir) / ("fig_" + figure + ".csv")).string() << "\n";
        }
        return kExitOk;
      }

      if (rep_format != "markdown" && rep_format != "csv") {
        throw ValidationError("report-tables --format must be markdown or csv");
      }
      const auto checks = check_published_tables(cal);
      std::ostringstream md, csv;
      write_table_check_markdown(md, checks);
      write_table_check_csv(csv, checks);
      if (dir.empty()) {
        out << (rep_format == "csv" ? csv.str() : md.str());
      } else {
        fs::create_directories(dir);
        write_file(fs::path(dir) / "tables.md", md.str());
        write_file(fs::path(dir) / "tables.csv", csv.str());
        out << "wrote " << (fs::path(dir) / "tables.md").string() << " and tables.csv\n";
      }
      size_t failing = 0;
      const CellCheck* first = nullptr;
      for (const auto& c : checks) {
        if (!c.within_tolerance) {
          ++failing;
          if (!first) first = &c;
        }
      }
      if (first) {
        err << "deviation: " << failing << " of " << checks.size() << " cells exceed "
            << format_number(kReproductionTolerance * 100) << "%; first: " << describe(first->cell)
            << " published " << format_number(first->cell.published) << " computed "
            << format_number(first->computed) << "\n";
        return kExitDeviation;
      }
      return kExitOk;
    }

    if (*prof) {
      ProfileOptions opts;
      opts.width = BitWidth{truncate_width.value_or(prof_width)};
      opts.truncate = truncate_width.has_value();
      if (tiles != "auto") opts.tiles = parse_tiles(tiles);
      opts.weighted = weighted;
      opts.jobs = prof_jobs;
      const TensorBundle bundle = TensorBundle::load(bundle_path);
      const SparsityReport report = profile_bundle(bundle, opts);
      if (prof_format == "csv") {
        write_sparsity_csv(out, report);
      } else if (prof_format == "markdown") {
        write_sparsity_markdown(out, report);
      } else {
        throw ValidationError("profile --format must be csv or markdown");
      }
      return kExitOk;
    }

    if (*cost) {
      std::optional<CalibrationTable> storage;
      const CalibrationTable& cal = calibration_for(cost_calibration, storage);
      const auto b_spa = parse_b_spa(cost_bspa);
      std::vector<CostReport> rows;
      for (Design d : parse_designs(cost_designs)) {
        for (int w : sorted_widths(cost_widths)) {
          for (int64_t n : cost_arrays) {
            auto it = b_spa.find(w);
            rows.push_back(cost_report(cal, d, BitWidth{w}, n, it == b_spa.end() ? 0.0 : it->second,
                                       cost_extrapolate));
          }
        }
      }
      if (cost_format == "csv") {
        write_cost_csv(out, rows);
      } else if (cost_format == "markdown") {
        write_cost_markdown(out, rows);
      } else {
        throw ValidationError("cost --format must be csv or markdown");
      }
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace unarysim
