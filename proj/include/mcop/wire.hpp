// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Bit-exact little-endian wire format for swarm messages.
//
// Common prefix (6 bytes): magic "MCOP", version (1), kind (1 = request, 2 = feature).
//
// Request:  sender u16, round u32, rotation 9 x f32 (row-major),
//           translation 3 x f32, mask nx u16, ny u16, run count (LEB128),
//           runs (LEB128 each). Runs alternate clear/set starting with clear;
//           only the first run may be zero; runs sum to nx * ny.
// Feature:  sender u16, receiver u16, round u32, channels u8, cell count u32,
//           then per cell x u16, y u16, altitude f32, channels x f32.
//           Cells strictly increasing in (x, y).
//
// Decoders accept exactly one byte string per message value and reject
// trailing bytes, so any altered encoding either fails or decodes differently.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcop/bytes.hpp"
#include "mcop/dmpg.hpp"
#include "mcop/geometry.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

inline constexpr std::array<std::uint8_t, 4> kWireMagic = {'M', 'C', 'O', 'P'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWirePrefixBytes = 6;
inline constexpr std::size_t kFeatureHeaderBytes = kWirePrefixBytes + 2 + 2 + 4 + 1 + 4;

enum class MsgKind : std::uint8_t { kRequest = 1, kFeature = 2 };

const char* to_string(MsgKind k);

constexpr std::size_t feature_cell_bytes(int channels) { return 4 + 4 + 4 * static_cast<std::size_t>(channels); }

struct RequestMsg {
  std::uint16_t sender = 0;
  std::uint32_t round = 0;
  std::array<float, 9> rotation{};
  std::array<float, 3> translation{};
  Mask2D mask;

  static RequestMsg make(std::uint16_t sender, std::uint32_t round, const Pose& frame, Mask2D mask);
  /// Frame pose as carried on the wire (float precision).
  Pose frame() const;

  /// Float fields compare by bit pattern.
  friend bool operator==(const RequestMsg& a, const RequestMsg& b);
};

struct FeatureMsg {
  std::uint16_t sender = 0;
  std::uint16_t receiver = 0;
  std::uint32_t round = 0;
  std::uint8_t channels = 7;
  SparseCellSet cells;

  friend bool operator==(const FeatureMsg& a, const FeatureMsg& b);
};

/// Alternating run lengths, clear first.
std::vector<std::uint64_t> rle_runs(const Mask2D& mask);

std::vector<std::uint8_t> encode_request(const RequestMsg& msg);
RequestMsg decode_request(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_feature(const FeatureMsg& msg);
FeatureMsg decode_feature(std::span<const std::uint8_t> bytes);

/// Validates the common prefix and returns the message kind.
MsgKind peek_kind(std::span<const std::uint8_t> bytes);

}  // namespace mcop
