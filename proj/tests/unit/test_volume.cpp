#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "airtaper/mhd_io.hpp"
#include "airtaper/rng.hpp"
#include "support/test_util.hpp"

using namespace airtaper;

TEST_CASE("round trip preserves a tiny air volume", "[volio]") {
  testutil::TempDir tmp("volio_air");
  CTVolume v({2, 2, 2}, {1, 1, 1});
  for (auto& s : v.data) s = -1000;
  save_volume(v, tmp.file("air.mhd"));
  CTVolume r = load_volume(tmp.file("air.mhd"));
  REQUIRE(r.dims == v.dims);
  REQUIRE(r.data == v.data);
  for (int16_t s : r.data) REQUIRE(s == -1000);
}

TEST_CASE("round trip is bitwise for random volumes", "[volio]") {
  testutil::TempDir tmp("volio_rand");
  CounterRng rng(42);
  int cases = 0;
  for (Index3 dims : {Index3{5, 7, 3}, Index3{1, 1, 9}, Index3{16, 4, 4}}) {
    CTVolume v(dims, {0.5 + 0.1 * cases, 0.75, 1.5}, {-3.25, 0.0, 10.5});
    for (auto& s : v.data)
      s = static_cast<int16_t>(rng.next_u64() & 0xffff);
    auto path = tmp.file("r" + std::to_string(cases++) + ".mhd");
    save_volume(v, path);
    CTVolume r = load_volume(path);
    REQUIRE(r.dims == v.dims);
    REQUIRE(r.data == v.data);
    REQUIRE(r.spacing.x == v.spacing.x);
    REQUIRE(r.spacing.y == v.spacing.y);
    REQUIRE(r.spacing.z == v.spacing.z);
    REQUIRE(r.origin.x == v.origin.x);
  }
}

TEST_CASE("round trip keeps all-zero data and anisotropic spacing", "[volio]") {
  testutil::TempDir tmp("volio_zero");
  CTVolume v({4, 4, 4}, {0.5, 0.75, 1.5});
  save_volume(v, tmp.file("z.mhd"));
  CTVolume r = load_volume(tmp.file("z.mhd"));
  REQUIRE(r.data == v.data);
  REQUIRE(r.spacing.x == 0.5);
  REQUIRE(r.spacing.y == 0.75);
  REQUIRE(r.spacing.z == 1.5);
}

TEST_CASE("mask round trip", "[volio]") {
  testutil::TempDir tmp("volio_mask");
  BinaryMask m({3, 3, 2}, {1, 1, 1});
  m(1, 1, 0) = 1;
  m(2, 0, 1) = 1;
  save_mask(m, tmp.file("m.mhd"));
  BinaryMask r = load_mask(tmp.file("m.mhd"));
  REQUIRE(r.data == m.data);
}

static void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

TEST_CASE("payload size mismatch is an error", "[volio]") {
  testutil::TempDir tmp("volio_mismatch");
  // header declares 3x3x3 = 27 voxels, payload carries 26
  write_text(tmp.file("bad.mhd"),
             "NDims = 3\nDimSize = 3 3 3\nElementSpacing = 1 1 1\n"
             "ElementType = MET_SHORT\nElementDataFile = bad.raw\n");
  std::vector<int16_t> payload(26, 7);
  std::ofstream raw(tmp.file("bad.raw"), std::ios::binary);
  raw.write(reinterpret_cast<const char*>(payload.data()), 26 * 2);
  raw.close();
  REQUIRE_THROWS_AS(load_volume(tmp.file("bad.mhd")), std::runtime_error);
}

TEST_CASE("malformed and unsupported headers are errors", "[volio]") {
  testutil::TempDir tmp("volio_badhdr");
  write_text(tmp.file("garbage.mhd"), "this is not a header\n");
  REQUIRE_THROWS_AS(load_volume(tmp.file("garbage.mhd")), std::runtime_error);

  write_text(tmp.file("nokey.mhd"), "NDims = 3\nDimSize = 2 2 2\n");
  REQUIRE_THROWS_AS(load_volume(tmp.file("nokey.mhd")), std::runtime_error);

  write_text(tmp.file("float.mhd"),
             "NDims = 3\nDimSize = 2 2 2\nElementSpacing = 1 1 1\n"
             "ElementType = MET_FLOAT\nElementDataFile = float.raw\n");
  REQUIRE_THROWS_AS(load_volume(tmp.file("float.mhd")), std::runtime_error);

  REQUIRE_THROWS_AS(load_volume(tmp.file("missing.mhd")), std::runtime_error);
}
