#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "unarysim/engines.hpp"

namespace unarysim {

struct CalibrationKey {
  Design design;
  int width;
  int64_t array;

  friend auto operator<=>(const CalibrationKey&, const CalibrationKey&) = default;
};

struct CalibrationEntry {
  double area_um2 = 0.0;
  double power_mW = 0.0;
  std::string source;
  /// True when produced by extrapolation rather than read from the table.
  bool estimate = false;
};

/// Post-synthesis area/power keyed by (design, width, array). Immutable after load.
/// Areas are held in um^2 regardless of the unit the source table used.
class CalibrationTable {
 public:
  /// Parses the calibration JSON schema:
  /// {clock_period_ns, entries:[{design, width, array, area_um2, power_mW, source}]}.
  static CalibrationTable from_json(const std::string& text);
  static CalibrationTable load(const std::string& path);
  /// The table compiled into the binary from data/calibration.json.
  static const CalibrationTable& embedded();

  double clock_period_ns() const { return clock_period_ns_; }
  const std::map<CalibrationKey, CalibrationEntry>& entries() const { return entries_; }

  const CalibrationEntry* find(Design design, int width, int64_t array) const;
  /// Exact entry, or throws ValidationError naming the missing configuration.
  const CalibrationEntry& at(Design design, int width, int64_t array) const;

  /// Exact entry when calibrated. Otherwise, with `extrapolate`, a log-linear
  /// estimate along the bitwidth axis marked `estimate`; without it, throws.
  CalibrationEntry resolve(Design design, int width, int64_t array, bool extrapolate) const;

 private:
  double clock_period_ns_ = 2.5;
  std::map<CalibrationKey, CalibrationEntry> entries_;
};

double wc_latency_ns(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n);

/// power_mW * latency_ns * 1e-3 (mW * ns = pJ).
double energy_nJ(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n,
                 double latency_ns);
double energy_nJ(const CalibrationEntry& entry, double latency_ns);

/// Area (mm^2) times worst-case latency (ns).
double adp_mm2_ns(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n);

/// wc_latency * (1 - b_spa). Throws ValidationError if b_spa is outside [0, 1].
double dynamic_latency(double wc_latency, double b_spa);
/// As above for temporal designs; bGEMM and uGEMM latency does not depend on values.
double dynamic_latency(Design design, double wc_latency, double b_spa);

struct CostReport {
  Design design;
  int width;
  int64_t array;
  double area_um2;
  double power_mW;
  int64_t wc_cycles;
  double wc_latency_ns;
  double energy_nJ;
  double adp_mm2_ns;
  double b_spa;
  double dynamic_latency_ns;
  double dynamic_energy_nJ;
  bool estimate = false;
};

/// Full cost row for a square array_n x array_n GEMM (common dimension = array_n).
CostReport cost_report(const CalibrationTable& table, Design design, BitWidth width,
                       int64_t array_n, double b_spa = 0.0, bool extrapolate = false);

/// Worst-case and sparsity-adjusted energy for all four designs at one array
/// size, one row per (design, width). Widths without a b_spa entry use 0.
std::vector<CostReport> sparsity_energy_series(const CalibrationTable& table, int64_t array_n,
                                               const std::vector<int>& widths,
                                               const std::map<int, double>& b_spa_by_width);

void write_cost_csv(std::ostream& out, const std::vector<CostReport>& rows);
void write_cost_markdown(std::ostream& out, const std::vector<CostReport>& rows);

// --- Reproduction of the published energy / ADP tables -------------------

enum class PublishedMetric { kEnergy, kAdp };

struct PublishedCell {
  std::string table;  // "III" or "IV"
  PublishedMetric metric;
  Design design;
  int width;
  int64_t array;
  double published;
  int decimals;  // precision the value was published with
};

/// 24 Table III energy cells followed by 8 Table IV energy and 8 ADP cells.
const std::vector<PublishedCell>& published_cells();

struct CellCheck {
  PublishedCell cell;
  double computed = 0.0;
  double relative_error = 0.0;
  bool within_tolerance = false;
  /// Computed value rounded to the published number of decimals equals the published value.
  bool rounding_consistent = false;
};

inline constexpr double kReproductionTolerance = 0.005;

std::vector<CellCheck> check_published_tables(const CalibrationTable& table,
                                              double tolerance = kReproductionTolerance);

std::string describe(const PublishedCell& cell);
void write_table_check_csv(std::ostream& out, const std::vector<CellCheck>& checks);
void write_table_check_markdown(std::ostream& out, const std::vector<CellCheck>& checks);

}  // namespace unarysim
