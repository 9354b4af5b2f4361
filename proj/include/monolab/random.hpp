#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace monolab {

// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Maps a 32-bit word to the open interval (0, 1).
inline double uint32_to_open_unit(std::uint32_t x) {
  return (static_cast<double>(x) + 0.5) * 0x1p-32;
}

// Purpose tags separate streams that share a seed and path index.
enum class StreamPurpose : std::uint32_t {
  Plain = 0,
  Coupled = 1,
  SecondChain = 2,
  Reference = 3,
  Sampling = 4,
};

/// Counter-based Gaussian noise. The standard normal for (path, step,
/// coordinate) is a pure function of (seed, purpose, path, step, coordinate),
/// so results never depend on scheduling or worker count.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, StreamPurpose purpose) : seed_(seed), purpose_(purpose) {}

  std::uint64_t seed() const { return seed_; }
  StreamPurpose purpose() const { return purpose_; }

  double standard_normal(std::uint64_t path, std::uint64_t step, std::uint64_t coordinate) const;

  /// out[k] = scale * N(path, step, k) for k < out.size().
  void fill(std::uint64_t path, std::uint64_t step, double scale, std::span<double> out) const;

 private:
  PhiloxCounter counter(std::uint64_t path, std::uint64_t step, std::uint64_t block) const;
  PhiloxKey key() const;

  std::uint64_t seed_;
  StreamPurpose purpose_;
};

}  // namespace monolab
