#include "unarysim/encoding.hpp"

#include <cstdlib>
#include <string>

namespace unarysim {
namespace {

void require_in_range(int64_t v, BitWidth width) {
  if (!width.contains(v)) {
    throw ValidationError("value " + std::to_string(v) + " outside " +
                          std::to_string(width.bits()) + "-bit range");
  }
}

}  // namespace

Bits TemporalStream::materialize() const {
  Bits bits(static_cast<size_t>(capacity), 0);
  for (int64_t t = 0; t < magnitude; ++t) bits[static_cast<size_t>(t)] = 1;
  return bits;
}

Bits TwoUnarySchedule::materialize(int64_t length) const {
  if (length < cycles()) throw ValidationError("stream length shorter than schedule");
  Bits bits(static_cast<size_t>(length), 0);
  for (int64_t t = 0; t < cycles(); ++t) bits[static_cast<size_t>(t)] = 1;
  return bits;
}

LowDiscrepancySequence::LowDiscrepancySequence(std::vector<uint32_t> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("empty comparator sequence");
  std::vector<uint8_t> seen(values_.size(), 0);
  for (uint32_t v : values_) {
    if (v >= values_.size() || seen[v]) {
      throw ValidationError("comparator sequence is not a permutation");
    }
    seen[v] = 1;
  }
}

LowDiscrepancySequence LowDiscrepancySequence::bit_reversal(int bits) {
  const uint32_t length = 1u << bits;
  std::vector<uint32_t> v(length);
  for (uint32_t t = 0; t < length; ++t) {
    uint32_t r = 0;
    for (int b = 0; b < bits; ++b) r |= ((t >> b) & 1u) << (bits - 1 - b);
    v[t] = r;
  }
  return LowDiscrepancySequence(std::move(v));
}

LowDiscrepancySequence LowDiscrepancySequence::ramp(int bits) {
  const uint32_t length = 1u << bits;
  std::vector<uint32_t> v(length);
  for (uint32_t t = 0; t < length; ++t) v[t] = t;
  return LowDiscrepancySequence(std::move(v));
}

TemporalStream encode_temporal(int64_t v, BitWidth width) {
  require_in_range(v, width);
  return TemporalStream{std::abs(v), v < 0 ? -1 : 1, width.max_magnitude()};
}

TwoUnarySchedule encode_two_unary(int64_t v, BitWidth width) {
  require_in_range(v, width);
  const int64_t m = std::abs(v);
  return TwoUnarySchedule{m / 2, (m % 2) == 1, v < 0 ? -1 : 1};
}

RateStream encode_rate_bipolar(int64_t v, BitWidth width, const LowDiscrepancySequence& sequence,
                               uint64_t offset) {
  require_in_range(v, width);
  const size_t length = size_t{1} << width.bits();
  if (sequence.length() != length) {
    throw ValidationError("comparator sequence length " + std::to_string(sequence.length()) +
                          " does not match 2^" + std::to_string(width.bits()));
  }
  const int64_t threshold = v + width.max_magnitude();
  RateStream s{Bits(length, 0), v, width};
  for (size_t t = 0; t < length; ++t) {
    s.bits[t] = static_cast<int64_t>(sequence.at(t, offset)) < threshold ? 1 : 0;
  }
  return s;
}

int64_t decode_rate_bipolar(const RateStream& stream) {
  int64_t ones = 0;
  for (uint8_t b : stream.bits) ones += b ? 1 : 0;
  return ones - stream.width.max_magnitude();
}

int64_t transition_count(std::span<const uint8_t> bits) {
  int64_t count = 0;
  uint8_t prev = 0;
  for (uint8_t b : bits) {
    const uint8_t cur = b ? 1 : 0;
    if (cur != prev) ++count;
    prev = cur;
  }
  if (prev) ++count;
  return count;
}

}  // namespace unarysim
