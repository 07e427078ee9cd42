#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <utility>

namespace opf {

/// Counter-based random stream. Every draw is a pure function of the stream
/// key and a counter, so particle i always receives the same noise regardless
/// of how the particle loop is split across threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Child stream identified by `tag`; distinct tags give independent streams.
  RandomStream derive(std::uint64_t tag) const;
  RandomStream derive(std::initializer_list<std::uint64_t> tags) const;

  std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + mix(counter)); }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Two independent standard normals (Box-Muller) from uniforms 2c, 2c + 1.
  std::pair<double, double> normal_pair(std::uint64_t counter) const;

  double normal(std::uint64_t counter) const { return normal_pair(counter).first; }

  /// Three independent standard normals for slot i.
  Eigen::Vector3d normal3(std::uint64_t i) const {
    const auto a = normal_pair(2 * i);
    const auto b = normal_pair(2 * i + 1);
    return {a.first, a.second, b.first};
  }

  std::uint64_t key() const { return key_; }

  /// splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  struct Raw {};
  RandomStream(std::uint64_t key, Raw) : key_(key) {}

  std::uint64_t key_;
};

}  // namespace opf
