// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcop/exec.hpp"
#include "mcop/geometry.hpp"

namespace mcop {

// Semantic classes. Ids are dense and stable; they are part of the file formats.
enum class SemanticClass : std::uint8_t {
  kFree = 0,
  kOthers = 1,
  kGround = 2,
  kBuilding = 3,
  kVegetation = 4,
  kVehicle = 5,
  kUrbanRoad = 6,
};

inline constexpr int kNumClasses = 7;
/// Feature channels: 0 = occupancy logit, 1..7 = class logits for ids 0..6.
inline constexpr int kFeatureChannels = 8;
inline constexpr int kOccupancyChannel = 0;

constexpr int class_channel(int class_id) { return class_id + 1; }

std::string_view class_name(int class_id);

struct VoxelIndex {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// Regular lattice of cubic voxels. Linear storage is row-major over (x, y, z),
/// so each vertical pillar is contiguous.
struct GridSpec {
  std::int64_t nx = 1;
  std::int64_t ny = 1;
  std::int64_t nz = 1;
  double voxel_size = 1.0;
  Vec3 origin;  // world position of the (0,0,0) voxel's min corner

  void validate() const;  // throws ConfigError

  std::size_t voxel_count() const { return static_cast<std::size_t>(nx * ny * nz); }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx * ny); }

  bool contains(VoxelIndex i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < nx && i.y < ny && i.z < nz;
  }
  std::size_t linear(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>((x * ny + y) * nz + z);
  }
  std::size_t linear(VoxelIndex i) const { return linear(i.x, i.y, i.z); }
  std::size_t cell(std::int64_t x, std::int64_t y) const { return static_cast<std::size_t>(x * ny + y); }
  VoxelIndex unlinear(std::size_t i) const {
    const auto li = static_cast<std::int64_t>(i);
    return {li / (ny * nz), (li / nz) % ny, li % nz};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// floor((p - origin) / voxel_size) per axis, or nullopt outside [0, dims).
/// Points within 1e-9 of a voxel face snap onto that face so that exact decimal
/// inputs such as 1.2 / 0.4 land on the intended voxel.
std::optional<VoxelIndex> world_to_voxel(Vec3 p, const GridSpec& spec);

/// Center of a voxel in world coordinates; throws ContractViolation out of range.
Vec3 voxel_center(VoxelIndex idx, const GridSpec& spec);

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& spec, SemanticClass fill = SemanticClass::kFree);
  OccupancyGrid(const GridSpec& spec, std::vector<std::uint8_t> labels);

  const GridSpec& spec() const { return spec_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<std::uint8_t> labels() { return labels_; }

  std::uint8_t at(std::int64_t x, std::int64_t y, std::int64_t z) const { return labels_[spec_.linear(x, y, z)]; }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, SemanticClass c) {
    labels_[spec_.linear(x, y, z)] = static_cast<std::uint8_t>(c);
  }
  bool occupied(std::size_t linear) const { return labels_[linear] != 0; }

  std::size_t occupied_count() const;
  double occupied_fraction() const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> labels_;
};

/// Per-voxel feature channels stored as 32-bit floats (the wire precision).
class FeatureVolume {
 public:
  FeatureVolume() = default;
  explicit FeatureVolume(const GridSpec& spec, int channels = kFeatureChannels);

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  std::span<const float> voxel(std::size_t linear) const {
    return std::span<const float>(data_).subspan(linear * static_cast<std::size_t>(channels_),
                                                 static_cast<std::size_t>(channels_));
  }
  std::span<float> voxel(std::size_t linear) {
    return std::span<float>(data_).subspan(linear * static_cast<std::size_t>(channels_),
                                           static_cast<std::size_t>(channels_));
  }

  bool all_finite() const;

  friend bool operator==(const FeatureVolume&, const FeatureVolume&) = default;

 private:
  GridSpec spec_;
  int channels_ = kFeatureChannels;
  std::vector<float> data_;
};

// One byte per cell rather than packed bits: concurrent kernels can set
// distinct cells without synchronisation.
class Mask3D {
 public:
  Mask3D() = default;
  Mask3D(std::int64_t nx, std::int64_t ny, std::int64_t nz, bool value = false)
      : nx_(nx), ny_(ny), nz_(nz), bits_(static_cast<std::size_t>(nx * ny * nz), value ? 1 : 0) {}
  explicit Mask3D(const GridSpec& s, bool value = false) : Mask3D(s.nx, s.ny, s.nz, value) {}

  std::int64_t nx() const { return nx_; }
  std::int64_t ny() const { return ny_; }
  std::int64_t nz() const { return nz_; }
  std::size_t size() const { return bits_.size(); }

  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }
  std::uint8_t* raw() { return bits_.data(); }

  std::size_t count() const;
  Mask3D operator|(const Mask3D& o) const;
  bool dims_match(const GridSpec& s) const { return nx_ == s.nx && ny_ == s.ny && nz_ == s.nz; }

  friend bool operator==(const Mask3D&, const Mask3D&) = default;

 private:
  std::int64_t nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::uint8_t> bits_;
};

class Mask2D {
 public:
  Mask2D() = default;
  Mask2D(std::int64_t nx, std::int64_t ny, bool value = false)
      : nx_(nx), ny_(ny), bits_(static_cast<std::size_t>(nx * ny), value ? 1 : 0) {}

  std::int64_t nx() const { return nx_; }
  std::int64_t ny() const { return ny_; }
  std::size_t size() const { return bits_.size(); }

  bool test(std::size_t i) const { return bits_[i] != 0; }
  bool test(std::int64_t x, std::int64_t y) const { return bits_[static_cast<std::size_t>(x * ny_ + y)] != 0; }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }
  void set(std::int64_t x, std::int64_t y, bool v = true) { bits_[static_cast<std::size_t>(x * ny_ + y)] = v ? 1 : 0; }

  std::size_t count() const;
  Mask2D complement() const;
  Mask2D operator&(const Mask2D& o) const;
  Mask2D operator|(const Mask2D& o) const;

  friend bool operator==(const Mask2D&, const Mask2D&) = default;

 private:
  std::int64_t nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Ideal-encoder helper: +margin on the true class channel, -margin on the
/// others, occupancy channel +occ_logit for occupied voxels and -occ_logit for free.
FeatureVolume one_hot_logits(const OccupancyGrid& grid, double margin, double occ_logit);

/// Per-voxel argmax over the class channels; ties go to the lowest class id.
OccupancyGrid argmax_labels(const FeatureVolume& vol, Exec exec = Exec::Parallel);

/// Argmax over one voxel's class channels (channels 1..7).
int argmax_class(std::span<const float> voxel_channels);

}  // namespace mcop
