#include "monolab/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace monolab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open unit interval mapping") {
  CHECK(uint32_to_open_unit(0) > 0.0);
  CHECK(uint32_to_open_unit(0xffffffffu) < 1.0);
}

TEST_CASE("noise is a pure function of its coordinates") {
  const NoiseSource a(42, StreamPurpose::Plain);
  const NoiseSource b(42, StreamPurpose::Plain);
  CHECK(a.standard_normal(3, 17, 5) == b.standard_normal(3, 17, 5));
  CHECK(a.standard_normal(3, 17, 5) != a.standard_normal(3, 17, 6));
  CHECK(a.standard_normal(3, 17, 5) != a.standard_normal(4, 17, 5));
  CHECK(a.standard_normal(3, 17, 5) != NoiseSource(43, StreamPurpose::Plain).standard_normal(3, 17, 5));
  CHECK(a.standard_normal(3, 17, 5) != NoiseSource(42, StreamPurpose::Coupled).standard_normal(3, 17, 5));

  std::vector<double> buf(9);
  a.fill(3, 17, 2.0, buf);
  for (std::size_t k = 0; k < buf.size(); ++k) CHECK(buf[k] == 2.0 * a.standard_normal(3, 17, k));
}

TEST_CASE("standard normal moments") {
  const NoiseSource src(7, StreamPurpose::Sampling);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = src.standard_normal(i, 0, 0);
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double m1 = s1 / n, m2 = s2 / n, m4 = s4 / n;
  CHECK(std::abs(m1) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}
