// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/container.hpp"

#include <array>
#include <fstream>
#include <iterator>

#include "mcop/bytes.hpp"
#include "mcop/errors.hpp"

namespace mcop {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'M', 'C', 'O', 'P', 'V', 'O', 'X', 0};
constexpr std::uint16_t kVersion = 1;
enum : std::uint8_t { kKindLabels = 0, kKindFeatures = 1 };

void write_header(ByteWriter& w, std::uint8_t kind, std::uint32_t channels, const GridSpec& s) {
  w.bytes(kMagic);
  w.u16(kVersion);
  w.u8(kind);
  w.u8(0);
  w.u32(channels);
  w.i64(s.nx);
  w.i64(s.ny);
  w.i64(s.nz);
  w.f64(s.voxel_size);
  w.f64(s.origin.x);
  w.f64(s.origin.y);
  w.f64(s.origin.z);
}

struct Header {
  std::uint8_t kind;
  std::uint32_t channels;
  GridSpec spec;
};

Header read_header(ByteReader& r) {
  const auto magic = r.bytes(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw IoError("container: bad magic");
  if (r.u16() != kVersion) throw IoError("container: unsupported version");
  Header h{};
  h.kind = r.u8();
  if (r.u8() != 0) throw IoError("container: reserved byte set");
  h.channels = r.u32();
  h.spec.nx = r.i64();
  h.spec.ny = r.i64();
  h.spec.nz = r.i64();
  h.spec.voxel_size = r.f64();
  h.spec.origin = {r.f64(), r.f64(), r.f64()};
  constexpr std::int64_t kMaxAxis = std::int64_t{1} << 20;
  if (h.spec.nx > kMaxAxis || h.spec.ny > kMaxAxis || h.spec.nz > kMaxAxis ||
      (h.spec.nx > 0 && h.spec.ny > 0 && h.spec.nz > 0 &&
       h.spec.nx * h.spec.ny > (std::int64_t{1} << 34) / h.spec.nz))
    throw IoError("container: grid dims too large");
  try {
    h.spec.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("container: invalid grid spec: ") + e.what());
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> encode_container(const OccupancyGrid& grid) {
  ByteWriter w;
  write_header(w, kKindLabels, 1, grid.spec());
  w.bytes(grid.labels());
  return w.take();
}

std::vector<std::uint8_t> encode_container(const FeatureVolume& vol) {
  ByteWriter w;
  write_header(w, kKindFeatures, static_cast<std::uint32_t>(vol.channels()), vol.spec());
  for (float v : vol.data()) w.f32(v);
  return w.take();
}

OccupancyGrid decode_grid_container(std::span<const std::uint8_t> bytes) {
  try {
    ByteReader r(bytes);
    const Header h = read_header(r);
    if (h.kind != kKindLabels || h.channels != 1) throw IoError("container: not a label grid");
    if (r.remaining() != h.spec.voxel_count()) throw IoError("container: payload size mismatch");
    const auto payload = r.bytes(h.spec.voxel_count());
    std::vector<std::uint8_t> labels(payload.begin(), payload.end());
    for (auto l : labels)
      if (l >= kNumClasses) throw IoError("container: label outside 0..6");
    return OccupancyGrid(h.spec, std::move(labels));
  } catch (const DecodeError& e) {
    throw IoError(std::string("container: ") + e.what());
  }
}

FeatureVolume decode_volume_container(std::span<const std::uint8_t> bytes) {
  try {
    ByteReader r(bytes);
    const Header h = read_header(r);
    if (h.kind != kKindFeatures || h.channels == 0 || h.channels > 1024)
      throw IoError("container: not a feature volume");
    const std::size_t n = h.spec.voxel_count() * h.channels;
    if (r.remaining() != n * 4) throw IoError("container: payload size mismatch");
    FeatureVolume vol(h.spec, static_cast<int>(h.channels));
    for (auto& v : vol.data()) v = r.f32();
    return vol;
  } catch (const DecodeError& e) {
    throw IoError(std::string("container: ") + e.what());
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid) {
  write_file_bytes(path, encode_container(grid));
}

void write_volume(const std::filesystem::path& path, const FeatureVolume& vol) {
  write_file_bytes(path, encode_container(vol));
}

OccupancyGrid read_grid(const std::filesystem::path& path) { return decode_grid_container(read_file_bytes(path)); }

FeatureVolume read_volume(const std::filesystem::path& path) { return decode_volume_container(read_file_bytes(path)); }

}  // namespace mcop
