#include "unarysim/engines.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>

namespace unarysim {
namespace {

BitWidth operand_width(const Matrix& a, const Matrix& b) {
  check_conformable(a, b);
  if (!a.width()) throw ValidationError("engine operands must carry a bit width");
  return *a.width();
}

// Toggles on each of the w bit lines of a bus that carries `values` on
// consecutive cycles and idles at 0 otherwise.
int64_t bus_max_transitions(const std::vector<int64_t>& values, BitWidth width) {
  int64_t worst = 0;
  for (int bit = 0; bit < width.bits(); ++bit) {
    Bits line(values.size());
    for (size_t t = 0; t < values.size(); ++t) {
      line[t] = static_cast<uint8_t>((static_cast<uint64_t>(values[t]) >> bit) & 1u);
    }
    worst = std::max(worst, transition_count(line));
  }
  return worst;
}

LowDiscrepancySequence make_schedule(SequenceConfig::Schedule s, BitWidth width) {
  return s == SequenceConfig::Schedule::kRamp ? LowDiscrepancySequence::ramp(width.bits())
                                              : LowDiscrepancySequence::bit_reversal(width.bits());
}

}  // namespace

std::string_view design_name(Design d) {
  switch (d) {
    case Design::kUgemm:
      return "ugemm";
    case Design::kTugemmSerial:
      return "tugemm";
    case Design::kTubgemm:
      return "tubgemm";
    case Design::kBgemm:
      return "bgemm";
  }
  return "unknown";
}

Design parse_design(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "tugemm_serial") lower = "tugemm";
  for (Design d : kAllDesigns) {
    if (design_name(d) == lower) return d;
  }
  throw ValidationError("unknown design '" + std::string(name) +
                        "' (expected ugemm, tugemm, tubgemm or bgemm)");
}

bool is_temporal(Design d) { return d == Design::kTugemmSerial || d == Design::kTubgemm; }

int64_t worst_case_cycles(Design design, BitWidth width, int64_t n_common) {
  if (n_common < 1) throw ValidationError("common dimension must be >= 1");
  const int w = width.bits();
  switch (design) {
    case Design::kBgemm:
      return n_common;
    case Design::kUgemm:
      return int64_t{1} << w;
    case Design::kTugemmSerial: {
      const int64_t cap = width.max_magnitude();
      return n_common * cap * cap;
    }
    case Design::kTubgemm:
      return n_common * (int64_t{1} << (w - 2));
  }
  return 0;
}

EngineResult run_bgemm(const Matrix& a, const Matrix& b) {
  const BitWidth width = operand_width(a, b);
  const int64_t m = a.rows(), n = a.cols(), p = b.cols();
  std::vector<int64_t> acc(static_cast<size_t>(m * p), 0);

  EngineResult r{Matrix(m, p), 0, worst_case_cycles(Design::kBgemm, width, n), 0, Design::kBgemm,
                 {}};
  for (int64_t k = 0; k < n; ++k) {
    // Column k of A against row k of B, every PE multiplies in the same cycle.
    for (int64_t i = 0; i < m; ++i) {
      const int64_t aik = a.at(i, k);
      for (int64_t j = 0; j < p; ++j) acc[static_cast<size_t>(i * p + j)] += aik * b.at(k, j);
    }
    ++r.cycles;
    r.step_cycles.push_back(1);
  }

  std::vector<int64_t> bus(static_cast<size_t>(n));
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t k = 0; k < n; ++k) bus[static_cast<size_t>(k)] = a.at(i, k);
    r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, bus_max_transitions(bus, width));
  }
  for (int64_t j = 0; j < p; ++j) {
    for (int64_t k = 0; k < n; ++k) bus[static_cast<size_t>(k)] = b.at(k, j);
    r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, bus_max_transitions(bus, width));
  }
  r.result = Matrix(m, p, std::nullopt, std::move(acc));
  return r;
}

EngineResult run_tubgemm(const Matrix& a, const Matrix& b, TemporalOperand streamed) {
  if (streamed == TemporalOperand::kRight) {
    // C = A B = (B^T A^T)^T with B^T as the streamed left operand.
    EngineResult r = run_tubgemm(b.transposed(), a.transposed(), TemporalOperand::kLeft);
    r.result = r.result.transposed();
    return r;
  }

  const BitWidth width = operand_width(a, b);
  const int64_t m = a.rows(), n = a.cols(), p = b.cols();
  std::vector<int64_t> acc(static_cast<size_t>(m * p), 0);
  std::vector<TwoUnarySchedule> row_schedule(static_cast<size_t>(m));

  EngineResult r{Matrix(m, p), 0, worst_case_cycles(Design::kTubgemm, width, n), 0,
                 Design::kTubgemm, {}};
  for (int64_t k = 0; k < n; ++k) {
    int64_t step = 0;
    for (int64_t i = 0; i < m; ++i) {
      row_schedule[static_cast<size_t>(i)] = encode_two_unary(a.at(i, k), width);
      step = std::max(step, row_schedule[static_cast<size_t>(i)].cycles());
    }
    // All PEs wait for the longest pulse train of this step.
    for (int64_t t = 0; t < step; ++t) {
      for (int64_t i = 0; i < m; ++i) {
        const TwoUnarySchedule& s = row_schedule[static_cast<size_t>(i)];
        const int weight = s.pulse_weight(t);
        if (weight == 0) continue;
        const int64_t scale = s.sign * weight;
        for (int64_t j = 0; j < p; ++j) acc[static_cast<size_t>(i * p + j)] += scale * b.at(k, j);
      }
    }
    for (const TwoUnarySchedule& s : row_schedule) {
      r.max_transitions_per_wire =
          std::max(r.max_transitions_per_wire, transition_count(s.materialize(step)));
    }
    r.cycles += step;
    r.step_cycles.push_back(step);
  }
  r.result = Matrix(m, p, std::nullopt, std::move(acc));
  return r;
}

EngineResult run_tugemm_serial(const Matrix& a, const Matrix& b) {
  const BitWidth width = operand_width(a, b);
  const int64_t m = a.rows(), n = a.cols(), p = b.cols();
  std::vector<int64_t> acc(static_cast<size_t>(m * p), 0);
  std::vector<TemporalStream> a_col(static_cast<size_t>(m));
  std::vector<TemporalStream> b_row(static_cast<size_t>(p));

  EngineResult r{Matrix(m, p), 0, worst_case_cycles(Design::kTugemmSerial, width, n), 0,
                 Design::kTugemmSerial, {}};
  for (int64_t k = 0; k < n; ++k) {
    int64_t a_len = 0, b_len = 0;
    for (int64_t i = 0; i < m; ++i) {
      a_col[static_cast<size_t>(i)] = encode_temporal(a.at(i, k), width);
      a_len = std::max(a_len, a_col[static_cast<size_t>(i)].magnitude);
    }
    for (int64_t j = 0; j < p; ++j) {
      b_row[static_cast<size_t>(j)] = encode_temporal(b.at(k, j), width);
      b_len = std::max(b_len, b_row[static_cast<size_t>(j)].magnitude);
    }
    // Shared outer counter over the a-pulse train, inner counter over the
    // b-pulse train; a PE counts while both of its own pulses are high.
    for (int64_t pa = 0; pa < a_len; ++pa) {
      for (int64_t qb = 0; qb < b_len; ++qb) {
        for (int64_t i = 0; i < m; ++i) {
          const TemporalStream& sa = a_col[static_cast<size_t>(i)];
          if (pa >= sa.magnitude) continue;
          for (int64_t j = 0; j < p; ++j) {
            const TemporalStream& sb = b_row[static_cast<size_t>(j)];
            if (qb < sb.magnitude) acc[static_cast<size_t>(i * p + j)] += sa.sign * sb.sign;
          }
        }
      }
    }
    for (const auto& s : a_col)
      r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, transition_count(s.materialize()));
    for (const auto& s : b_row)
      r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, transition_count(s.materialize()));
    r.cycles += a_len * b_len;
    r.step_cycles.push_back(a_len * b_len);
  }
  r.result = Matrix(m, p, std::nullopt, std::move(acc));
  return r;
}

EngineResult run_ugemm(const Matrix& a, const Matrix& b, const SequenceConfig& sequence) {
  const BitWidth width = operand_width(a, b);
  const int64_t m = a.rows(), n = a.cols(), p = b.cols();
  const int64_t length = int64_t{1} << width.bits();
  const LowDiscrepancySequence a_seq = make_schedule(sequence.a_schedule, width);
  const LowDiscrepancySequence b_seq = make_schedule(sequence.b_schedule, width);

  EngineResult r{Matrix(m, p), 0, worst_case_cycles(Design::kUgemm, width, n), 0, Design::kUgemm,
                 {}};

  std::vector<Bits> a_streams(static_cast<size_t>(m * n));
  std::vector<Bits> b_streams(static_cast<size_t>(n * p));
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t k = 0; k < n; ++k) {
      const uint64_t offset = static_cast<uint64_t>(i + k) + sequence.rotation;
      a_streams[static_cast<size_t>(i * n + k)] =
          encode_rate_bipolar(a.at(i, k), width, a_seq, offset).bits;
    }
  }
  for (int64_t k = 0; k < n; ++k) {
    for (int64_t j = 0; j < p; ++j) {
      uint64_t offset = 0;
      if (sequence.b_schedule == SequenceConfig::Schedule::kBitReversal) {
        offset = static_cast<uint64_t>(j + k + length / 2) + sequence.rotation;
      }
      b_streams[static_cast<size_t>(k * p + j)] =
          encode_rate_bipolar(b.at(k, j), width, b_seq, offset).bits;
    }
  }
  for (const auto& s : a_streams)
    r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, transition_count(s));
  for (const auto& s : b_streams)
    r.max_transitions_per_wire = std::max(r.max_transitions_per_wire, transition_count(s));

  // Per cycle: XNOR multipliers for every (i,k,j), adder tree over k, bipolar
  // (+1/-1) contribution added to the (i,j) accumulator.
  std::vector<int64_t> acc(static_cast<size_t>(m * p), 0);
  for (int64_t t = 0; t < length; ++t) {
    const auto tt = static_cast<size_t>(t);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < p; ++j) {
        int64_t tree = 0;
        for (int64_t k = 0; k < n; ++k) {
          const uint8_t x = a_streams[static_cast<size_t>(i * n + k)][tt];
          const uint8_t y = b_streams[static_cast<size_t>(k * p + j)][tt];
          tree += (x == y) ? 1 : -1;
        }
        acc[static_cast<size_t>(i * p + j)] += tree;
      }
    }
    ++r.cycles;
  }
  const int64_t scale = int64_t{1} << (width.bits() - 2);
  for (auto& v : acc) v *= scale;
  r.result = Matrix(m, p, std::nullopt, std::move(acc));
  return r;
}

EngineResult run_engine(Design design, const Matrix& a, const Matrix& b,
                        const EngineOptions& options) {
  switch (design) {
    case Design::kBgemm:
      return run_bgemm(a, b);
    case Design::kUgemm:
      return run_ugemm(a, b, options.sequence);
    case Design::kTugemmSerial:
      return run_tugemm_serial(a, b);
    case Design::kTubgemm:
      return run_tubgemm(a, b, options.tub_operand);
  }
  throw ValidationError("unknown design");
}

}  // namespace unarysim
