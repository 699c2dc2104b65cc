// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mcop/voxel_core.hpp"

namespace mcop {

// Flat binary container for grids and feature volumes.
//
//   offset  size  field
//   0       8     magic "MCOPVOX\0"
//   8       2     version (1)
//   10      1     kind: 0 = labels, 1 = features
//   11      1     reserved, zero
//   12      4     channels (1 for labels)
//   16      56    nx, ny, nz (i64); voxel_size, origin x/y/z (f64)
//   72      ...   row-major payload: u8 labels or f32 features, voxel-major
//
// All integers and floats are little-endian.
inline constexpr std::size_t kContainerHeaderBytes = 16;
inline constexpr std::size_t kContainerSpecBytes = 56;

std::vector<std::uint8_t> encode_container(const OccupancyGrid& grid);
std::vector<std::uint8_t> encode_container(const FeatureVolume& vol);

/// Throws IoError on malformed content or a kind mismatch.
OccupancyGrid decode_grid_container(std::span<const std::uint8_t> bytes);
FeatureVolume decode_volume_container(std::span<const std::uint8_t> bytes);

void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid);
void write_volume(const std::filesystem::path& path, const FeatureVolume& vol);
OccupancyGrid read_grid(const std::filesystem::path& path);
FeatureVolume read_volume(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mcop
