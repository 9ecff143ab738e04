#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "dhym/errors.hpp"
#include "dhym/oracles.hpp"
#include "dhym/snapshot.hpp"

namespace dhym {
namespace {

TEST(Snapshot, HeaderLayout) {
  const ScalarField u = ScalarField::constant(build_domain(1, 8), 1.0);
  const auto bytes = encode_snapshot(u);
  ASSERT_EQ(bytes.size(), 16u + 8u * 64u);
  EXPECT_EQ(bytes[0], 'D');
  EXPECT_EQ(bytes[3], 'M');
  EXPECT_EQ(bytes[4], 1u);
  EXPECT_EQ(bytes[8], 1u);
  EXPECT_EQ(bytes[12], 8u);
  // 1.0 = 0x3ff0000000000000, little endian
  EXPECT_EQ(bytes[16 + 7], 0x3f);
  EXPECT_EQ(bytes[16 + 6], 0xf0);
  const SnapshotHeader h = decode_snapshot_header(bytes);
  EXPECT_EQ(h.version, kSnapshotVersion);
  EXPECT_EQ(h.complex_dim, 1u);
  EXPECT_EQ(h.points_per_axis, 8u);
}

TEST(Snapshot, BitExactRoundTrip) {
  const DomainPtr d = build_domain(2, 8);
  ScalarField u = oracles::random_band_limited(d, 3, 6, 0.3, 601);
  u[0] = -0.0;
  u[1] = std::numeric_limits<double>::denorm_min();
  u[2] = std::numeric_limits<double>::max();
  const ScalarField back = decode_snapshot(encode_snapshot(u), d);
  for (std::size_t p = 0; p < u.size(); ++p)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[p]), std::bit_cast<std::uint64_t>(u[p]));
}

TEST(Snapshot, FileRoundTrip) {
  const DomainPtr d = build_domain(3, 8);
  const ScalarField u = oracles::random_band_limited(d, 2, 4, 0.3, 602);
  const auto path = std::filesystem::temp_directory_path() / "dhym_test_snapshot.bin";
  write_snapshot(path, u);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 8u * d->total_points());
  const ScalarField back = read_snapshot(path, d);
  ScalarField diff = back;
  diff -= u;
  EXPECT_EQ(diff.max_abs(), 0.0);
  std::filesystem::remove(path);
}

TEST(Snapshot, RejectsMalformed) {
  const DomainPtr d = build_domain(1, 8);
  const auto good = encode_snapshot(ScalarField(d));
  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_snapshot(bad, d), SnapshotFormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_snapshot(bad, d), SnapshotFormatError);
  bad = good;
  bad.pop_back();
  EXPECT_THROW(decode_snapshot(bad, d), SnapshotFormatError);
  EXPECT_THROW(decode_snapshot(std::vector<std::uint8_t>(good.begin(), good.begin() + 10), d), SnapshotFormatError);
  EXPECT_THROW(decode_snapshot(good, build_domain(1, 16)), SnapshotFormatError);
  EXPECT_THROW(decode_snapshot(good, build_domain(2, 8)), SnapshotFormatError);
  EXPECT_THROW(read_snapshot("/nonexistent/dir/x.bin", d), Error);
}

}  // namespace
}  // namespace dhym
