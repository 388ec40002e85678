#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "unarysim/numerics.hpp"

namespace unarysim {

/// One bit per element, index = cycle.
using Bits = std::vector<uint8_t>;

/// Temporal-unary stream: `magnitude` ones followed by zeros up to `capacity`.
/// Stored run-length; the sign travels out of band.
struct TemporalStream {
  int64_t magnitude = 0;
  int sign = 1;
  int64_t capacity = 0;

  Bits materialize() const;
};

/// 2-unary schedule: floor(m/2) pulses of weight 2, then one weight-1 pulse if m is odd.
struct TwoUnarySchedule {
  int64_t full_pulses = 0;
  bool has_residual = false;
  int sign = 1;

  int64_t cycles() const { return full_pulses + (has_residual ? 1 : 0); }
  int64_t delivered_weight() const { return 2 * full_pulses + (has_residual ? 1 : 0); }
  /// Weight delivered in cycle t (2, 1 or 0).
  int pulse_weight(int64_t t) const {
    if (t < full_pulses) return 2;
    if (t == full_pulses && has_residual) return 1;
    return 0;
  }
  /// Pulse-valid line over `length` cycles: cycles() ones, then zeros.
  Bits materialize(int64_t length) const;
};

/// Comparator threshold schedule over [0, L): a permutation of 0..L-1.
class LowDiscrepancySequence {
 public:
  /// Throws ValidationError unless `values` is a permutation of [0, values.size()).
  explicit LowDiscrepancySequence(std::vector<uint32_t> values);

  /// Base-2 van der Corput order: t -> bit-reverse(t) over `bits` bits.
  static LowDiscrepancySequence bit_reversal(int bits);
  /// t -> t. Paired with a bit-reversal stream it acts as a deterministic counter.
  static LowDiscrepancySequence ramp(int bits);

  size_t length() const { return values_.size(); }
  std::span<const uint32_t> values() const { return values_; }
  /// Threshold at cycle t with the sequence rotated left by `offset`.
  uint32_t at(uint64_t t, uint64_t offset = 0) const {
    return values_[(t + offset) % values_.size()];
  }

 private:
  std::vector<uint32_t> values_;
};

/// Bipolar rate-coded stream of length 2^w with exactly v + 2^(w-1) ones.
struct RateStream {
  Bits bits;
  int64_t source_value = 0;
  BitWidth width{8};
};

TemporalStream encode_temporal(int64_t v, BitWidth width);
TwoUnarySchedule encode_two_unary(int64_t v, BitWidth width);

/// bit_t = 1 iff sequence.at(t, offset) < v + 2^(w-1).
RateStream encode_rate_bipolar(int64_t v, BitWidth width, const LowDiscrepancySequence& sequence,
                               uint64_t offset = 0);
int64_t decode_rate_bipolar(const RateStream& stream);

/// Number of 0<->1 changes on a line that idles at 0 before and after the stream.
int64_t transition_count(std::span<const uint8_t> bits);

}  // namespace unarysim
