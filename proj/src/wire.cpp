// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/wire.hpp"

#include <bit>
#include <limits>

#include "mcop/errors.hpp"

namespace mcop {

const char* to_string(DecodeErrorKind k) {
  switch (k) {
    case DecodeErrorKind::kTruncated: return "truncated";
    case DecodeErrorKind::kBadMagic: return "bad magic";
    case DecodeErrorKind::kBadVersion: return "bad version";
    case DecodeErrorKind::kBadKind: return "bad kind";
    case DecodeErrorKind::kRleMismatch: return "rle mismatch";
    case DecodeErrorKind::kNonCanonical: return "non-canonical";
    case DecodeErrorKind::kUnsorted: return "unsorted cells";
    case DecodeErrorKind::kTrailingBytes: return "trailing bytes";
    case DecodeErrorKind::kBadField: return "bad field";
  }
  return "unknown";
}

const char* to_string(MsgKind k) { return k == MsgKind::kRequest ? "request" : "feature"; }

namespace {

bool same_bits(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }

template <std::size_t N>
bool same_bits(const std::array<float, N>& a, const std::array<float, N>& b) {
  for (std::size_t i = 0; i < N; ++i)
    if (!same_bits(a[i], b[i])) return false;
  return true;
}

void write_prefix(ByteWriter& w, MsgKind kind) {
  w.bytes(kWireMagic);
  w.u8(kWireVersion);
  w.u8(static_cast<std::uint8_t>(kind));
}

MsgKind read_prefix(ByteReader& r) {
  const auto magic = r.bytes(kWireMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kWireMagic.begin())) throw DecodeError(DecodeErrorKind::kBadMagic, "expected MCOP");
  if (r.u8() != kWireVersion) throw DecodeError(DecodeErrorKind::kBadVersion, "unsupported wire version");
  const std::uint8_t kind = r.u8();
  if (kind != static_cast<std::uint8_t>(MsgKind::kRequest) && kind != static_cast<std::uint8_t>(MsgKind::kFeature))
    throw DecodeError(DecodeErrorKind::kBadKind, "unknown message kind");
  return static_cast<MsgKind>(kind);
}

void expect_end(const ByteReader& r) {
  if (r.remaining() != 0) throw DecodeError(DecodeErrorKind::kTrailingBytes, "bytes after message end");
}

}  // namespace

RequestMsg RequestMsg::make(std::uint16_t sender, std::uint32_t round, const Pose& frame, Mask2D mask) {
  RequestMsg m;
  m.sender = sender;
  m.round = round;
  for (std::size_t i = 0; i < 9; ++i) m.rotation[i] = static_cast<float>(frame.rotation.m[i]);
  m.translation = {static_cast<float>(frame.translation.x), static_cast<float>(frame.translation.y),
                   static_cast<float>(frame.translation.z)};
  m.mask = std::move(mask);
  return m;
}

Pose RequestMsg::frame() const {
  Pose p;
  for (std::size_t i = 0; i < 9; ++i) p.rotation.m[i] = rotation[i];
  p.translation = {translation[0], translation[1], translation[2]};
  return p;
}

bool operator==(const RequestMsg& a, const RequestMsg& b) {
  return a.sender == b.sender && a.round == b.round && same_bits(a.rotation, b.rotation) &&
         same_bits(a.translation, b.translation) && a.mask == b.mask;
}

bool operator==(const FeatureMsg& a, const FeatureMsg& b) {
  if (a.sender != b.sender || a.receiver != b.receiver || a.round != b.round || a.channels != b.channels ||
      a.cells.size() != b.cells.size())
    return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& p = a.cells[i];
    const auto& q = b.cells[i];
    if (p.x != q.x || p.y != q.y || !same_bits(p.altitude, q.altitude) || p.payload.size() != q.payload.size()) return false;
    for (std::size_t k = 0; k < p.payload.size(); ++k)
      if (!same_bits(p.payload[k], q.payload[k])) return false;
  }
  return true;
}

std::vector<std::uint64_t> rle_runs(const Mask2D& mask) {
  std::vector<std::uint64_t> runs;
  bool current = false;
  std::uint64_t len = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.test(i) != current) {
      runs.push_back(len);
      current = !current;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  return runs;
}

std::vector<std::uint8_t> encode_request(const RequestMsg& msg) {
  if (msg.mask.nx() < 1 || msg.mask.ny() < 1 || msg.mask.nx() > 65535 || msg.mask.ny() > 65535)
    throw ContractViolation("encode_request: mask dims must be 1..65535");
  ByteWriter w;
  write_prefix(w, MsgKind::kRequest);
  w.u16(msg.sender);
  w.u32(msg.round);
  for (float f : msg.rotation) w.f32(f);
  for (float f : msg.translation) w.f32(f);
  w.u16(static_cast<std::uint16_t>(msg.mask.nx()));
  w.u16(static_cast<std::uint16_t>(msg.mask.ny()));
  const auto runs = rle_runs(msg.mask);
  w.varint(runs.size());
  for (auto r : runs) w.varint(r);
  return w.take();
}

RequestMsg decode_request(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (read_prefix(r) != MsgKind::kRequest) throw DecodeError(DecodeErrorKind::kBadKind, "not a request message");
  RequestMsg m;
  m.sender = r.u16();
  m.round = r.u32();
  for (auto& f : m.rotation) f = r.f32();
  for (auto& f : m.translation) f = r.f32();
  const std::int64_t nx = r.u16(), ny = r.u16();
  if (nx == 0 || ny == 0) throw DecodeError(DecodeErrorKind::kBadField, "mask dims must be nonzero");
  const auto total = static_cast<std::uint64_t>(nx * ny);
  const std::uint64_t nruns = r.varint();
  if (nruns == 0 || nruns > total + 1) throw DecodeError(DecodeErrorKind::kRleMismatch, "implausible run count");
  m.mask = Mask2D(nx, ny);
  std::uint64_t pos = 0;
  bool set = false;
  for (std::uint64_t k = 0; k < nruns; ++k, set = !set) {
    const std::uint64_t len = r.varint();
    if (len == 0 && k != 0) throw DecodeError(DecodeErrorKind::kNonCanonical, "empty run after the first");
    if (len > total - pos) throw DecodeError(DecodeErrorKind::kRleMismatch, "runs exceed mask size");
    if (set)
      for (std::uint64_t i = 0; i < len; ++i) m.mask.set(static_cast<std::size_t>(pos + i));
    pos += len;
  }
  if (pos != total) throw DecodeError(DecodeErrorKind::kRleMismatch, "runs do not cover the mask");
  expect_end(r);
  return m;
}

std::vector<std::uint8_t> encode_feature(const FeatureMsg& msg) {
  if (msg.cells.size() > std::numeric_limits<std::uint32_t>::max()) throw ContractViolation("encode_feature: too many cells");
  if (!is_sorted_unique(msg.cells)) throw ContractViolation("encode_feature: cells must be sorted and unique");
  ByteWriter w;
  write_prefix(w, MsgKind::kFeature);
  w.u16(msg.sender);
  w.u16(msg.receiver);
  w.u32(msg.round);
  w.u8(msg.channels);
  w.u32(static_cast<std::uint32_t>(msg.cells.size()));
  for (const auto& c : msg.cells) {
    if (c.payload.size() != msg.channels) throw ContractViolation("encode_feature: payload length != channels");
    w.u16(c.x);
    w.u16(c.y);
    w.f32(c.altitude);
    for (float f : c.payload) w.f32(f);
  }
  return w.take();
}

FeatureMsg decode_feature(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (read_prefix(r) != MsgKind::kFeature) throw DecodeError(DecodeErrorKind::kBadKind, "not a feature message");
  FeatureMsg m;
  m.sender = r.u16();
  m.receiver = r.u16();
  m.round = r.u32();
  m.channels = r.u8();
  if (m.channels == 0) throw DecodeError(DecodeErrorKind::kBadField, "zero channels");
  const std::uint32_t count = r.u32();
  const std::uint64_t need = static_cast<std::uint64_t>(count) * feature_cell_bytes(m.channels);
  if (r.remaining() < need) throw DecodeError(DecodeErrorKind::kTruncated, "cell payload shorter than cell count");
  if (r.remaining() > need) throw DecodeError(DecodeErrorKind::kTrailingBytes, "cell payload longer than cell count");
  m.cells.resize(count);
  for (auto& c : m.cells) {
    c.x = r.u16();
    c.y = r.u16();
    c.altitude = r.f32();
    c.payload.resize(m.channels);
    for (auto& f : c.payload) f = r.f32();
  }
  if (!is_sorted_unique(m.cells)) throw DecodeError(DecodeErrorKind::kUnsorted, "cells not strictly increasing");
  expect_end(r);
  return m;
}

MsgKind peek_kind(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  return read_prefix(r);
}

}  // namespace mcop
