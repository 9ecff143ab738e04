#pragma once

// Binary field snapshots:
//   bytes 0..3   magic "DHYM"
//   u32 LE       format version (1)
//   u32 LE       complex dimension n
//   u32 LE       points per axis N
//   N^{2n} x f64 LE values in canonical point order

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dhym/lattice.hpp"

namespace dhym {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotHeader {
  std::uint32_t version = kSnapshotVersion;
  std::uint32_t complex_dim = 0;
  std::uint32_t points_per_axis = 0;
};

std::vector<std::uint8_t> encode_snapshot(const ScalarField& field);
/// Decodes into `domain`, which must match the header's n and N.
ScalarField decode_snapshot(const std::vector<std::uint8_t>& bytes, DomainPtr domain);
SnapshotHeader decode_snapshot_header(const std::vector<std::uint8_t>& bytes);

void write_snapshot(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_snapshot(const std::filesystem::path& path, DomainPtr domain);

}  // namespace dhym
