#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rolesim {

inline constexpr int kSegmentBits = 5;
inline constexpr int kSegmentMax = 31;
inline constexpr int kBuilderWidth = kSegmentBits;
inline constexpr int kSearcherWidth = 2 * kSegmentBits;

/// Fixed-width binary genome. Bit 0 is the leftmost character of the string
/// form and the most significant bit of the first 5-bit segment.
class Chromosome {
 public:
  Chromosome() = default;
  /// width must be 5 (builder) or 10 (searcher); value holds the bits MSB-first.
  Chromosome(int width, std::uint32_t value, double fitness = 0.0);

  static Chromosome from_string(std::string_view bits, double fitness = 0.0);

  int width() const { return width_; }
  std::uint32_t value() const { return value_; }
  bool bit(int pos) const { return (value_ >> (width_ - 1 - pos)) & 1U; }
  void flip(int pos) { value_ ^= 1U << (width_ - 1 - pos); }
  /// Decoded integer of segment k (0-based, left to right), in [0, 31].
  int segment(int k) const;
  std::string to_string() const;

  double fitness = 0.0;

  bool operator==(const Chromosome& o) const {
    return width_ == o.width_ && value_ == o.value_ && fitness == o.fitness;
  }

 private:
  int width_ = kBuilderWidth;
  std::uint32_t value_ = 0;
};

/// Bid-shaping parameters of a bundle-sharing strategy.
struct SearcherParams {
  double gamma1 = 1.0;  ///< sensitivity to the builder's rebate, in [1, 5]
  double gamma2 = 0.0;  ///< overall bid scale exponent, in [0, 4]

  bool operator==(const SearcherParams&) const = default;
};

struct BuilderParams {
  double rebate = 0.0;  ///< share of surplus refunded to searchers, in [0, 1]
};

/// Linear map of a 5-bit MSB-first string onto [low, high]: low + d/31 * (high - low).
double decode_segment(std::string_view bits, double low, double high);
double decode_segment(int d, double low, double high);

SearcherParams decode_searcher(const Chromosome& c);
BuilderParams decode_builder(const Chromosome& c);

/// Modified sigmoid (1 / (1 + gamma1^-rebate))^gamma2. Lies in [2^-gamma2, 1]
/// and is non-decreasing in the rebate for gamma1 >= 1.
double bid_ratio(const SearcherParams& p, double rebate);

}  // namespace rolesim
