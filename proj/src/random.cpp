#include "opf/random.hpp"

#include <cmath>
#include <numbers>

namespace opf {

RandomStream RandomStream::derive(std::uint64_t tag) const {
  return RandomStream(mix(key_ ^ mix(tag + 0x3c6ef372fe94f82bULL)), Raw{});
}

RandomStream RandomStream::derive(std::initializer_list<std::uint64_t> tags) const {
  RandomStream s = *this;
  for (auto t : tags) s = s.derive(t);
  return s;
}

std::pair<double, double> RandomStream::normal_pair(std::uint64_t counter) const {
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace opf
