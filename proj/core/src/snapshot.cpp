#include "dhym/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr char kMagic[4] = {'D', 'H', 'Y', 'M'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const ScalarField& field) {
  const auto& d = field.domain();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * field.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(d.complex_dim()));
  put_u32(out, static_cast<std::uint32_t>(d.points_per_axis()));
  for (double v : field.values()) put_f64(out, v);
  return out;
}

SnapshotHeader decode_snapshot_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) throw SnapshotFormatError("snapshot shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw SnapshotFormatError("bad snapshot magic");
  SnapshotHeader h;
  h.version = get_u32(bytes.data() + 4);
  h.complex_dim = get_u32(bytes.data() + 8);
  h.points_per_axis = get_u32(bytes.data() + 12);
  if (h.version != kSnapshotVersion) {
    throw SnapshotFormatError("unsupported snapshot version " + std::to_string(h.version));
  }
  return h;
}

ScalarField decode_snapshot(const std::vector<std::uint8_t>& bytes, DomainPtr domain) {
  const SnapshotHeader h = decode_snapshot_header(bytes);
  if (static_cast<int>(h.complex_dim) != domain->complex_dim() ||
      static_cast<int>(h.points_per_axis) != domain->points_per_axis()) {
    throw SnapshotFormatError("snapshot shape does not match the target domain");
  }
  const std::size_t count = domain->total_points();
  if (bytes.size() != kHeaderBytes + 8 * count) throw SnapshotFormatError("snapshot payload has wrong length");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f64(bytes.data() + kHeaderBytes + 8 * i);
  return ScalarField(std::move(domain), std::move(values));
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& field) {
  const auto bytes = encode_snapshot(field);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path.string());
}

ScalarField read_snapshot(const std::filesystem::path& path, DomainPtr domain) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, std::move(domain));
}

}  // namespace dhym
