#include <catch_amalgamated.hpp>

#include <set>

#include "ldiag/rng.hpp"

using namespace ldiag::rng;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  Stream a(derive_key({1, 2, 3}), 0), b(derive_key({1, 2, 3}), 0), c(derive_key({1, 2, 4}), 0),
      d(derive_key({1, 2, 3}), 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
    seen.insert(d.next_u64());
  }
  CHECK(seen.size() == 3000);
  CHECK(derive_key({1, 2}) != derive_key({2, 1}));
}

TEST_CASE("uniform and exponential draws have the right range and moments") {
  Stream s(derive_key({99}), 0);
  double mean_u = 0.0, mean_e = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean_u += u;
    const double e = s.exponential();
    REQUIRE(e >= 0.0);
    mean_e += e;
  }
  CHECK(mean_u / n == Catch::Approx(0.5).margin(0.003));
  CHECK(mean_e / n == Catch::Approx(1.0).margin(0.01));
}
