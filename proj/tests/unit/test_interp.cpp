#include <catch2/catch_amalgamated.hpp>

#include "airtaper/interp.hpp"
#include "airtaper/rng.hpp"

using namespace airtaper;

namespace {

CTVolume random_volume(Index3 dims, Vec3 spacing, uint64_t seed) {
  CTVolume v(dims, spacing);
  CounterRng rng(seed);
  for (auto& s : v.data)
    s = static_cast<int16_t>(static_cast<int>(rng.next_u64() % 2001) - 1000);
  return v;
}

}  // namespace

TEST_CASE("interpolation reproduces voxel centres exactly", "[interp]") {
  auto v = random_volume({8, 7, 6}, {0.7, 0.8, 1.2}, 1);
  for (int k = 1; k < 5; ++k)
    for (int j = 1; j < 6; ++j)
      for (int i = 1; i < 7; ++i) {
        Vec3 p = v.voxel_center_mm(i, j, k);
        double expect = v(i, j, k);
        REQUIRE(sample_interpolated(v, p, Interp::linear) ==
                Catch::Approx(expect).margin(1e-9));
        REQUIRE(sample_interpolated(v, p, Interp::cubic) ==
                Catch::Approx(expect).margin(1e-9));
      }
}

TEST_CASE("constant volume interpolates to the constant", "[interp]") {
  CTVolume v({6, 6, 6}, {1, 1, 1});
  for (auto& s : v.data) s = -437;
  CounterRng rng(2);
  for (int n = 0; n < 200; ++n) {
    Vec3 p{1.0 + 3.0 * rng.next_uniform(), 1.0 + 3.0 * rng.next_uniform(),
           1.0 + 3.0 * rng.next_uniform()};
    REQUIRE(sample_interpolated(v, p, Interp::linear) == Catch::Approx(-437.0));
    REQUIRE(sample_interpolated(v, p, Interp::cubic) ==
            Catch::Approx(-437.0).margin(1e-9));
  }
}

TEST_CASE("cubic convolution reproduces a linear ramp", "[interp]") {
  // f(i,j,k) = i; the a = -0.5 kernel reproduces degree-1 polynomials
  CTVolume v({32, 6, 6}, {1, 1, 1});
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 32; ++i) v(i, j, k) = static_cast<int16_t>(i);
  CounterRng rng(3);
  for (int n = 0; n < 500; ++n) {
    double x = 1.0 + 29.0 * rng.next_uniform();
    Vec3 p{x, 2.5, 2.5};
    REQUIRE(sample_interpolated(v, p, Interp::cubic) ==
            Catch::Approx(x).margin(1e-9));
  }
}

TEST_CASE("out-of-bounds queries throw instead of clamping", "[interp]") {
  auto v = random_volume({8, 8, 8}, {1, 1, 1}, 4);
  REQUIRE_THROWS_AS(sample_interpolated(v, {-0.5, 4, 4}, Interp::linear),
                    std::domain_error);
  REQUIRE_THROWS_AS(sample_interpolated(v, {7.5, 4, 4}, Interp::linear),
                    std::domain_error);
  // cubic support is one voxel narrower on each side
  REQUIRE_THROWS_AS(sample_interpolated(v, {0.5, 4, 4}, Interp::cubic),
                    std::domain_error);
  REQUIRE_NOTHROW(sample_interpolated(v, {0.5, 4, 4}, Interp::linear));
  REQUIRE_NOTHROW(sample_interpolated(v, {1.0, 4, 4}, Interp::cubic));
}

TEST_CASE("linear samples stay inside the local min/max", "[interp]") {
  auto v = random_volume({10, 10, 10}, {0.9, 1.1, 1.3}, 5);
  CounterRng rng(6);
  for (int n = 0; n < 2000; ++n) {
    double ux = 8.999 * rng.next_uniform();
    double uy = 8.999 * rng.next_uniform();
    double uz = 8.999 * rng.next_uniform();
    Vec3 p{ux * v.spacing.x, uy * v.spacing.y, uz * v.spacing.z};
    int i0 = static_cast<int>(ux), j0 = static_cast<int>(uy),
        k0 = static_cast<int>(uz);
    double lo = 32767, hi = -32768;
    for (int dk = 0; dk < 2; ++dk)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          lo = std::min(lo, double(v(i0 + di, j0 + dj, k0 + dk)));
          hi = std::max(hi, double(v(i0 + di, j0 + dj, k0 + dk)));
        }
    double s = sample_interpolated(v, p, Interp::linear);
    REQUIRE(s >= lo - 1e-9);
    REQUIRE(s <= hi + 1e-9);
  }
}
