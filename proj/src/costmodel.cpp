#include "unarysim/costmodel.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "unarysim/format.hpp"

namespace unarysim {

extern const char* const kEmbeddedCalibrationJson;

namespace {

using nlohmann::json;

std::string config_name(Design design, int width, int64_t array) {
  std::ostringstream s;
  s << design_name(design) << " w=" << width << " " << array << "x" << array;
  return s.str();
}

double log_interp(double w, double w1, double v1, double w2, double v2) {
  const double slope = (std::log(v2) - std::log(v1)) / (w2 - w1);
  return std::exp(std::log(v1) + slope * (w - w1));
}

// Two calibrated widths for (design, array) used to fit the log-linear model:
// the bracketing pair if one exists, otherwise the two nearest.
std::optional<std::pair<int, int>> fit_widths(const std::vector<int>& widths, int target) {
  if (widths.size() < 2) return std::nullopt;
  std::optional<int> below, above;
  for (int w : widths) {
    if (w < target) below = w;
    if (w > target && !above) above = w;
  }
  if (below && above) return std::make_pair(*below, *above);
  if (above) return std::make_pair(widths[0], widths[1]);
  return std::make_pair(widths[widths.size() - 2], widths[widths.size() - 1]);
}

}  // namespace

CalibrationTable CalibrationTable::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("calibration JSON: ") + e.what());
  }
  CalibrationTable t;
  try {
    t.clock_period_ns_ = doc.at("clock_period_ns").get<double>();
    if (!(t.clock_period_ns_ > 0)) throw ValidationError("clock_period_ns must be > 0");
    for (const auto& e : doc.at("entries")) {
      const Design d = parse_design(e.at("design").get<std::string>());
      const int width = e.at("width").get<int>();
      const int64_t array = e.at("array").get<int64_t>();
      BitWidth{width};
      if (array < 1) throw ValidationError("calibration array size must be >= 1");
      CalibrationEntry entry;
      entry.area_um2 = e.at("area_um2").get<double>();
      entry.power_mW = e.at("power_mW").get<double>();
      entry.source = e.value("source", "");
      if (!(entry.area_um2 > 0) || !(entry.power_mW > 0)) {
        throw ValidationError("calibration entry " + config_name(d, width, array) +
                              " must have positive area and power");
      }
      if (!t.entries_.emplace(CalibrationKey{d, width, array}, entry).second) {
        throw ValidationError("duplicate calibration entry " + config_name(d, width, array));
      }
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("calibration JSON schema: ") + e.what());
  }
  return t;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const CalibrationTable& CalibrationTable::embedded() {
  static const CalibrationTable table = from_json(kEmbeddedCalibrationJson);
  return table;
}

const CalibrationEntry* CalibrationTable::find(Design design, int width, int64_t array) const {
  auto it = entries_.find(CalibrationKey{design, width, array});
  return it == entries_.end() ? nullptr : &it->second;
}

const CalibrationEntry& CalibrationTable::at(Design design, int width, int64_t array) const {
  if (const auto* e = find(design, width, array)) return *e;
  throw ValidationError("no calibration entry for " + config_name(design, width, array));
}

CalibrationEntry CalibrationTable::resolve(Design design, int width, int64_t array,
                                           bool extrapolate) const {
  if (const auto* e = find(design, width, array)) return *e;
  if (!extrapolate) {
    throw ValidationError("no calibration entry for " + config_name(design, width, array) +
                          " (pass --extrapolate for an estimate)");
  }
  auto widths_for = [this, design](int64_t arr) {
    std::vector<int> ws;
    for (const auto& [key, _] : entries_) {
      if (key.design == design && key.array == arr) ws.push_back(key.width);
    }
    return ws;
  };

  const std::vector<int> own = widths_for(array);
  CalibrationEntry est;
  est.estimate = true;
  if (auto pair = fit_widths(own, width)) {
    const auto& lo = at(design, pair->first, array);
    const auto& hi = at(design, pair->second, array);
    est.area_um2 = log_interp(width, pair->first, lo.area_um2, pair->second, hi.area_um2);
    est.power_mW = log_interp(width, pair->first, lo.power_mW, pair->second, hi.power_mW);
    est.source = "ESTIMATE";
    return est;
  }
  if (own.size() == 1) {
    // Borrow the per-bit log slope from the largest array calibrated at >= 2 widths.
    std::optional<int64_t> donor;
    for (const auto& [key, _] : entries_) {
      if (key.design == design && key.array != array && widths_for(key.array).size() >= 2) {
        donor = std::max(donor.value_or(0), key.array);
      }
    }
    if (donor) {
      const auto pair = fit_widths(widths_for(*donor), width);
      const auto& lo = at(design, pair->first, *donor);
      const auto& hi = at(design, pair->second, *donor);
      const auto& anchor = at(design, own[0], array);
      const double dw = static_cast<double>(pair->second - pair->first);
      const double area_slope = (std::log(hi.area_um2) - std::log(lo.area_um2)) / dw;
      const double power_slope = (std::log(hi.power_mW) - std::log(lo.power_mW)) / dw;
      est.area_um2 = anchor.area_um2 * std::exp(area_slope * (width - own[0]));
      est.power_mW = anchor.power_mW * std::exp(power_slope * (width - own[0]));
      est.source = "ESTIMATE";
      return est;
    }
  }
  throw ValidationError("cannot extrapolate " + config_name(design, width, array) +
                        ": array size has no calibrated bitwidths");
}

double wc_latency_ns(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n) {
  return static_cast<double>(worst_case_cycles(design, width, array_n)) * table.clock_period_ns();
}

double energy_nJ(const CalibrationEntry& entry, double latency_ns) {
  return entry.power_mW * latency_ns * 1e-3;
}

double energy_nJ(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n,
                 double latency_ns) {
  return energy_nJ(table.at(design, width.bits(), array_n), latency_ns);
}

double adp_mm2_ns(const CalibrationTable& table, Design design, BitWidth width, int64_t array_n) {
  const auto& e = table.at(design, width.bits(), array_n);
  return e.area_um2 * 1e-6 * wc_latency_ns(table, design, width, array_n);
}

double dynamic_latency(double wc_latency, double b_spa) {
  if (!(b_spa >= 0.0 && b_spa <= 1.0)) {
    throw ValidationError("bit sparsity must be in [0, 1], got " + format_number(b_spa));
  }
  return wc_latency * (1.0 - b_spa);
}

double dynamic_latency(Design design, double wc_latency, double b_spa) {
  const double dyn = dynamic_latency(wc_latency, b_spa);
  return is_temporal(design) ? dyn : wc_latency;
}

CostReport cost_report(const CalibrationTable& table, Design design, BitWidth width,
                       int64_t array_n, double b_spa, bool extrapolate) {
  const CalibrationEntry entry = table.resolve(design, width.bits(), array_n, extrapolate);
  CostReport r{};
  r.design = design;
  r.width = width.bits();
  r.array = array_n;
  r.area_um2 = entry.area_um2;
  r.power_mW = entry.power_mW;
  r.wc_cycles = worst_case_cycles(design, width, array_n);
  r.wc_latency_ns = static_cast<double>(r.wc_cycles) * table.clock_period_ns();
  r.energy_nJ = energy_nJ(entry, r.wc_latency_ns);
  r.adp_mm2_ns = entry.area_um2 * 1e-6 * r.wc_latency_ns;
  r.b_spa = b_spa;
  r.dynamic_latency_ns = dynamic_latency(design, r.wc_latency_ns, b_spa);
  r.dynamic_energy_nJ = energy_nJ(entry, r.dynamic_latency_ns);
  r.estimate = entry.estimate;
  return r;
}

std::vector<CostReport> sparsity_energy_series(const CalibrationTable& table, int64_t array_n,
                                               const std::vector<int>& widths,
                                               const std::map<int, double>& b_spa_by_width) {
  std::vector<CostReport> rows;
  for (Design d : kAllDesigns) {
    for (int w : widths) {
      auto it = b_spa_by_width.find(w);
      const double b_spa = it == b_spa_by_width.end() ? 0.0 : it->second;
      rows.push_back(cost_report(table, d, BitWidth{w}, array_n, b_spa));
    }
  }
  return rows;
}

void write_cost_csv(std::ostream& out, const std::vector<CostReport>& rows) {
  bool any_estimate = false;
  for (const auto& r : rows) any_estimate = any_estimate || r.estimate;
  out << "design,width,array,area_um2,power_mW,wc_cycles,wc_latency_ns,energy_nJ,adp_mm2ns,b_spa,"
         "dyn_latency_ns,dyn_energy_nJ";
  if (any_estimate) out << ",estimate";
  out << "\n";
  for (const auto& r : rows) {
    out << design_name(r.design) << ',' << r.width << ',' << r.array << ','
        << format_number(r.area_um2) << ',' << format_number(r.power_mW) << ',' << r.wc_cycles
        << ',' << format_number(r.wc_latency_ns) << ',' << format_number(r.energy_nJ) << ','
        << format_number(r.adp_mm2_ns) << ',' << format_number(r.b_spa) << ','
        << format_number(r.dynamic_latency_ns) << ',' << format_number(r.dynamic_energy_nJ);
    if (any_estimate) out << ',' << (r.estimate ? "ESTIMATE" : "");
    out << "\n";
  }
}

void write_cost_markdown(std::ostream& out, const std::vector<CostReport>& rows) {
  out << "| Design | Width | Array | Area (um^2) | Power (mW) | WC cycles | WC latency (ns) "
         "| Energy (nJ) | ADP (mm^2-ns) | b_spa | Dyn. latency (ns) | Dyn. energy (nJ) |\n"
      << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << design_name(r.design) << (r.estimate ? " (ESTIMATE)" : "") << " | " << r.width
        << "-bit | " << r.array << "x" << r.array << " | " << format_fixed(r.area_um2, 1) << " | "
        << format_fixed(r.power_mW, 2) << " | " << r.wc_cycles << " | "
        << format_fixed(r.wc_latency_ns, 1) << " | " << format_fixed(r.energy_nJ, 2) << " | "
        << format_fixed(r.adp_mm2_ns, 1) << " | " << format_fixed(r.b_spa, 4) << " | "
        << format_fixed(r.dynamic_latency_ns, 1) << " | " << format_fixed(r.dynamic_energy_nJ, 2)
        << " |\n";
  }
}

const std::vector<PublishedCell>& published_cells() {
  static const std::vector<PublishedCell> cells = [] {
    std::vector<PublishedCell> v;
    const struct {
      int width;
      int64_t array;
      double values[4];
    } energy_rows[] = {
        {2, 16, {0.42, 0.78, 0.20, 0.31}},
        {2, 32, {3.24, 5.86, 1.58, 2.47}},
        {4, 16, {2.56, 23.55, 1.58, 0.90}},
        {4, 32, {20.54, 190.46, 12.51, 7.06}},
        {8, 16, {64.51, 12910.59, 66.82, 2.91}},
        {8, 32, {502.02, 97910.78, 465.41, 25.70}},
    };
    for (const auto& row : energy_rows) {
      for (size_t d = 0; d < kAllDesigns.size(); ++d) {
        v.push_back({"III", PublishedMetric::kEnergy, kAllDesigns[d], row.width, row.array,
                     row.values[d], 2});
      }
    }
    const struct {
      PublishedMetric metric;
      int64_t array;
      double values[4];
      int decimals;
    } tpu_rows[] = {
        {PublishedMetric::kEnergy, 64, {164.61, 1490.12, 98.83, 79.48}, 2},
        {PublishedMetric::kEnergy, 128, {1318.92, 11863.65, 794.78, 894.34}, 2},
        {PublishedMetric::kAdp, 64, {635.6, 4710.4, 377.6, 174.4}, 1},
        {PublishedMetric::kAdp, 128, {5609.6, 37478.4, 3084.8, 2124.8}, 1},
    };
    for (const auto& row : tpu_rows) {
      for (size_t d = 0; d < kAllDesigns.size(); ++d) {
        v.push_back({"IV", row.metric, kAllDesigns[d], 4, row.array, row.values[d], row.decimals});
      }
    }
    return v;
  }();
  return cells;
}

std::vector<CellCheck> check_published_tables(const CalibrationTable& table, double tolerance) {
  std::vector<CellCheck> out;
  for (const PublishedCell& cell : published_cells()) {
    const BitWidth w{cell.width};
    CellCheck c{cell};
    c.computed = cell.metric == PublishedMetric::kEnergy
                     ? energy_nJ(table, cell.design, w, cell.array,
                                 wc_latency_ns(table, cell.design, w, cell.array))
                     : adp_mm2_ns(table, cell.design, w, cell.array);
    c.relative_error = std::abs(c.computed - cell.published) / cell.published;
    c.within_tolerance = c.relative_error <= tolerance;
    const double scale = std::pow(10.0, cell.decimals);
    c.rounding_consistent = std::abs(std::round(c.computed * scale) - std::round(cell.published * scale)) < 0.5;
    out.push_back(c);
  }
  return out;
}

std::string describe(const PublishedCell& cell) {
  std::ostringstream s;
  s << "Table " << cell.table << " " << (cell.metric == PublishedMetric::kEnergy ? "energy" : "ADP")
    << " " << config_name(cell.design, cell.width, cell.array);
  return s.str();
}

void write_table_check_csv(std::ostream& out, const std::vector<CellCheck>& checks) {
  out << "table,metric,design,width,array,published,computed,rel_error,within_tolerance,"
         "rounding_consistent\n";
  for (const auto& c : checks) {
    out << c.cell.table << ',' << (c.cell.metric == PublishedMetric::kEnergy ? "energy_nJ" : "adp_mm2ns")
        << ',' << design_name(c.cell.design) << ',' << c.cell.width << ',' << c.cell.array << ','
        << format_number(c.cell.published) << ',' << format_number(c.computed) << ','
        << format_number(c.relative_error) << ',' << (c.within_tolerance ? "yes" : "no") << ','
        << (c.rounding_consistent ? "yes" : "no") << "\n";
  }
}

void write_table_check_markdown(std::ostream& out, const std::vector<CellCheck>& checks) {
  std::string current;
  for (const auto& c : checks) {
    const std::string section =
        "Table " + c.cell.table +
        (c.cell.metric == PublishedMetric::kEnergy ? " energy (nJ)" : " ADP (mm^2-ns)");
    if (section != current) {
      if (!current.empty()) out << "\n";
      current = section;
      out << "### " << section << "\n\n"
          << "| Config | Design | Published | Computed | Rel. error (%) | OK | Rounds to published |\n"
          << "|---|---|---|---|---|---|---|\n";
    }
    std::ostringstream err;
    err << std::fixed << std::setprecision(3) << c.relative_error * 100.0;
    out << "| " << c.cell.width << "-bit " << c.cell.array << "x" << c.cell.array << " | "
        << design_name(c.cell.design) << " | " << format_fixed(c.cell.published, c.cell.decimals)
        << " | " << format_fixed(c.computed, 3) << " | " << err.str() << " | "
        << (c.within_tolerance ? "yes" : "NO") << " | " << (c.rounding_consistent ? "yes" : "no")
        << " |\n";
  }
}

}  // namespace unarysim
