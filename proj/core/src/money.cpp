#include "skillmix/money.hpp"

#include <cctype>
#include <limits>

#include "skillmix/errors.hpp"

namespace skillmix {
namespace {

// Parses a signed decimal into an integer scaled by 10^scale.
std::int64_t parse_scaled(std::string_view text, int scale) {
  const std::string original(text);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (!text.empty() && text.front() == '$') text.remove_prefix(1);
  if (text.empty()) throw ValidationError("empty decimal amount");

  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t value = 0;
  int frac_digits = -1;  // -1 until the decimal point is seen
  bool any_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (frac_digits >= 0) throw ValidationError("malformed decimal amount '" + original + "'");
      frac_digits = 0;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ValidationError("malformed decimal amount '" + original + "'");
    }
    any_digit = true;
    if (frac_digits >= 0 && ++frac_digits > scale) {
      throw ValidationError("decimal amount '" + original + "' has more than " +
                            std::to_string(scale) + " fractional digits");
    }
    if (value > (kMax - (c - '0')) / 10) throw ValidationError("decimal amount '" + original + "' overflows");
    value = value * 10 + (c - '0');
  }
  if (!any_digit) throw ValidationError("malformed decimal amount '" + original + "'");
  for (int i = frac_digits < 0 ? 0 : frac_digits; i < scale; ++i) {
    if (value > kMax / 10) throw ValidationError("decimal amount '" + original + "' overflows");
    value *= 10;
  }
  return negative ? -value : value;
}

std::string format_scaled(std::int64_t units, int scale, int decimals) {
  const bool negative = units < 0;
  // Work in unsigned to make INT64_MIN well defined.
  std::uint64_t magnitude = negative ? std::uint64_t(0) - static_cast<std::uint64_t>(units)
                                     : static_cast<std::uint64_t>(units);
  if (decimals < scale) {
    std::uint64_t div = 1;
    for (int i = decimals; i < scale; ++i) div *= 10;
    magnitude = (magnitude + div / 2) / div;
  }
  std::uint64_t unit = 1;
  const int shown = decimals < scale ? decimals : scale;
  for (int i = 0; i < shown; ++i) unit *= 10;
  std::string out = std::to_string(magnitude / unit);
  if (decimals > 0) {
    std::string frac = std::to_string(magnitude % unit);
    frac.insert(0, static_cast<std::size_t>(shown) - frac.size(), '0');
    frac.append(static_cast<std::size_t>(decimals - shown), '0');
    out += "." + frac;
  }
  return negative && magnitude != 0 ? "-" + out : out;
}

}  // namespace

Money Money::parse(std::string_view text) { return Money(parse_scaled(text, 12)); }

std::string Money::to_string(int decimals) const { return format_scaled(units_, 12, decimals); }

PricePer1k PricePer1k::parse(std::string_view text) {
  return from_nanodollars(parse_scaled(text, 9));
}

Money PricePer1k::cost(std::int64_t tokens) const {
  std::int64_t units = 0;
  if (__builtin_mul_overflow(tokens, nano_, &units)) throw DomainError("cost overflows the fixed-point range");
  return Money::from_picodollars(units);
}

std::string PricePer1k::to_string() const { return format_scaled(nano_, 9, 9); }

}  // namespace skillmix
