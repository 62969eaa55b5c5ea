#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace skillmix {

/// Exact fixed-point US dollar amount with 12 fractional digits
/// (picodollars). A price of P nanodollars per 1k tokens costs exactly P
/// picodollars per token, so token-cost products never round.
class Money {
 public:
  static constexpr std::int64_t kUnitsPerDollar = 1'000'000'000'000;

  constexpr Money() = default;
  static constexpr Money from_picodollars(std::int64_t v) { return Money(v); }

  /// Parses "12", "0.01", "$25.00", "-3.5". More than 12 fractional digits
  /// is a ValidationError rather than a silent rounding.
  static Money parse(std::string_view text);

  constexpr std::int64_t picodollars() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / kUnitsPerDollar; }

  /// Rounds half away from zero to `decimals` places ("25.00").
  std::string to_string(int decimals = 2) const;

  constexpr Money& operator+=(Money o) {
    units_ += o.units_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t v) : units_(v) {}
  std::int64_t units_ = 0;
};

/// Price per 1,000 tokens, stored in nanodollars.
class PricePer1k {
 public:
  constexpr PricePer1k() = default;
  static constexpr PricePer1k from_nanodollars(std::int64_t v) {
    PricePer1k p;
    p.nano_ = v;
    return p;
  }
  /// Parses a dollar amount with at most 9 fractional digits.
  static PricePer1k parse(std::string_view text);

  constexpr std::int64_t nanodollars() const { return nano_; }
  /// Cost of `tokens` tokens at this price; exact.
  Money cost(std::int64_t tokens) const;
  std::string to_string() const;

  friend constexpr auto operator<=>(PricePer1k, PricePer1k) = default;

 private:
  std::int64_t nano_ = 0;
};

}  // namespace skillmix
