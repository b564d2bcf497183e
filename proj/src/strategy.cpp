#include "rolesim/strategy.hpp"

#include <cmath>

#include "rolesim/errors.hpp"

namespace rolesim {

namespace {

void check_width(int width) {
  if (width != kBuilderWidth && width != kSearcherWidth)
    throw CodecError("chromosome width must be 5 or 10, got " + std::to_string(width));
}

std::uint32_t parse_bits(std::string_view bits) {
  std::uint32_t v = 0;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw CodecError("chromosome bits must be '0' or '1'");
    v = (v << 1) | static_cast<std::uint32_t>(ch == '1');
  }
  return v;
}

}  // namespace

Chromosome::Chromosome(int width, std::uint32_t value, double f)
    : fitness(f), width_(width), value_(value) {
  check_width(width);
  if (value >> width) throw CodecError("chromosome value exceeds its width");
}

Chromosome Chromosome::from_string(std::string_view bits, double fitness) {
  check_width(static_cast<int>(bits.size()));
  return Chromosome(static_cast<int>(bits.size()), parse_bits(bits), fitness);
}

int Chromosome::segment(int k) const {
  const int segments = width_ / kSegmentBits;
  if (k < 0 || k >= segments) throw CodecError("segment index out of range");
  const int shift = (segments - 1 - k) * kSegmentBits;
  return static_cast<int>((value_ >> shift) & 0x1FU);
}

std::string Chromosome::to_string() const {
  std::string s(static_cast<std::size_t>(width_), '0');
  for (int i = 0; i < width_; ++i)
    if (bit(i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

double decode_segment(int d, double low, double high) {
  if (d < 0 || d > kSegmentMax) throw CodecError("segment integer out of [0, 31]");
  if (d == kSegmentMax) return high;
  return low + (static_cast<double>(d) / kSegmentMax) * (high - low);
}

double decode_segment(std::string_view bits, double low, double high) {
  if (bits.size() != static_cast<std::size_t>(kSegmentBits))
    throw CodecError("segment must have exactly 5 bits");
  return decode_segment(static_cast<int>(parse_bits(bits)), low, high);
}

SearcherParams decode_searcher(const Chromosome& c) {
  if (c.width() != kSearcherWidth) throw CodecError("searcher chromosome must have 10 bits");
  return {decode_segment(c.segment(0), 1.0, 5.0), decode_segment(c.segment(1), 0.0, 4.0)};
}

BuilderParams decode_builder(const Chromosome& c) {
  if (c.width() != kBuilderWidth) throw CodecError("builder chromosome must have 5 bits");
  return {decode_segment(c.segment(0), 0.0, 1.0)};
}

double bid_ratio(const SearcherParams& p, double rebate) {
  if (p.gamma2 == 0.0) return 1.0;
  const double base = 1.0 / (1.0 + std::pow(p.gamma1, -rebate));
  return std::pow(base, p.gamma2);
}

}  // namespace rolesim
