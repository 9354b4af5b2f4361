#include "monolab/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace monolab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

// Four normals from one Philox block via Box-Muller on (u0,u1) and (u2,u3).
inline std::array<double, 4> block_normals(const PhiloxCounter& bits) {
  std::array<double, 4> out{};
  for (int pair = 0; pair < 2; ++pair) {
    const double u1 = uint32_to_open_unit(bits[2 * pair]);
    const double u2 = uint32_to_open_unit(bits[2 * pair + 1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[2 * pair] = r * std::cos(theta);
    out[2 * pair + 1] = r * std::sin(theta);
  }
  return out;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, c[0], lo0, hi0);
    mulhilo(kMul1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

PhiloxKey NoiseSource::key() const {
  return {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
}

PhiloxCounter NoiseSource::counter(std::uint64_t path, std::uint64_t step, std::uint64_t block) const {
  if (path >> 32 || step >> 32 || block >> 24) {
    throw std::out_of_range("noise index exceeds counter capacity");
  }
  // Low byte of the third word holds the purpose tag, the upper 24 bits the block index.
  const auto block_bits = static_cast<std::uint32_t>(block);
  return {static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(step),
          static_cast<std::uint32_t>(purpose_) | (block_bits << 8), 0u};
}

double NoiseSource::standard_normal(std::uint64_t path, std::uint64_t step, std::uint64_t coordinate) const {
  const auto normals = block_normals(philox4x32_10(counter(path, step, coordinate / 4), key()));
  return normals[coordinate % 4];
}

void NoiseSource::fill(std::uint64_t path, std::uint64_t step, double scale, std::span<double> out) const {
  const PhiloxKey k = key();
  const std::size_t n = out.size();
  for (std::size_t block = 0; block * 4 < n; ++block) {
    const auto normals = block_normals(philox4x32_10(counter(path, step, block), k));
    for (std::size_t j = 0; j < 4 && block * 4 + j < n; ++j) out[block * 4 + j] = scale * normals[j];
  }
}

}  // namespace monolab
