#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "unarysim/encoding.hpp"
#include "unarysim/numerics.hpp"

namespace unarysim {

enum class Design { kUgemm, kTugemmSerial, kTubgemm, kBgemm };

/// Column order of the published tables: uGEMM, tuGEMM, tubGEMM, bGEMM.
inline constexpr std::array<Design, 4> kAllDesigns = {Design::kUgemm, Design::kTugemmSerial,
                                                      Design::kTubgemm, Design::kBgemm};

/// "ugemm", "tugemm", "tubgemm", "bgemm".
std::string_view design_name(Design d);
/// Accepts the names above (case-insensitive); throws ValidationError otherwise.
Design parse_design(std::string_view name);
/// Temporal designs are the only ones whose latency depends on operand values.
bool is_temporal(Design d);

struct EngineResult {
  Matrix result;
  int64_t cycles = 0;
  int64_t wc_cycles = 0;
  /// Largest signal-transition count on any unary stream wire (binary operand
  /// bus lines for bGEMM, which has no unary wires).
  int64_t max_transitions_per_wire = 0;
  Design design = Design::kBgemm;
  /// Cycles spent on each step of the common dimension (empty for uGEMM,
  /// whose streams cover all k at once).
  std::vector<int64_t> step_cycles;
};

/// Comparator schedules for the uGEMM stream generators.
struct SequenceConfig {
  enum class Schedule { kBitReversal, kRamp };

  /// A(i,k) reads its schedule rotated by (i + k + rotation).
  Schedule a_schedule = Schedule::kBitReversal;
  /// B(k,j) reads the ramp unrotated; a bit-reversal B schedule is rotated by
  /// (j + k + rotation + L/2).
  Schedule b_schedule = Schedule::kRamp;
  uint64_t rotation = 0;
};

/// Which operand tubGEMM streams temporally; the other stays binary.
enum class TemporalOperand { kLeft, kRight };

struct EngineOptions {
  SequenceConfig sequence;
  TemporalOperand tub_operand = TemporalOperand::kLeft;
};

/// bGEMM: N. uGEMM: 2^w. tuGEMM (serial): N * (2^(w-1))^2. tubGEMM: N * 2^(w-2).
int64_t worst_case_cycles(Design design, BitWidth width, int64_t n_common);

/// Outer-product binary array: one rank-1 update per cycle.
EngineResult run_bgemm(const Matrix& a, const Matrix& b);

/// Temporal x binary hybrid with 2-unary streams on the temporal operand.
EngineResult run_tubgemm(const Matrix& a, const Matrix& b,
                         TemporalOperand streamed = TemporalOperand::kLeft);

/// Serial counter-based temporal GEMM: nested a- and b-pulse counters per step.
EngineResult run_tugemm_serial(const Matrix& a, const Matrix& b);

/// Non-streaming rate-coded GEMM: XNOR multipliers, ideal adder tree, 2^w cycles.
/// Approximate; C_ij = (sum over cycles and k of bipolar XNOR outputs) * 2^(w-2).
EngineResult run_ugemm(const Matrix& a, const Matrix& b, const SequenceConfig& sequence = {});

EngineResult run_engine(Design design, const Matrix& a, const Matrix& b,
                        const EngineOptions& options = {});

}  // namespace unarysim
