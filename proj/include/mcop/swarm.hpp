// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "mcop/aar_codec.hpp"
#include "mcop/dmpg.hpp"
#include "mcop/exec.hpp"
#include "mcop/wire.hpp"

namespace mcop {

/// Undirected communication graph without self-loops.
class CommGraph {
 public:
  explicit CommGraph(int n = 0);
  static CommGraph full(int n);

  int size() const { return n_; }
  void add_edge(int i, int j);  // ContractViolation on self-loops or bad ids
  bool connected(int i, int j) const;
  /// Sorted ascending.
  const std::vector<int>& neighbors(int i) const { return adj_.at(static_cast<std::size_t>(i)); }
  std::vector<std::pair<int, int>> edges() const;
  /// Subgraph on nodes 0..k-1.
  CommGraph induced(int k) const;

 private:
  int n_ = 0;
  std::vector<std::vector<int>> adj_;
};

struct LinkBudget {
  /// Egress cap per UAV per round, request bytes included; nullopt = unlimited.
  std::optional<std::uint64_t> bytes_per_round;
  // Link impairments, off by default.
  double drop_probability = 0.0;
  std::optional<std::uint64_t> link_byte_cap;  // per feature message
  std::uint64_t impairment_seed = 0;

  static LinkBudget unlimited() { return {}; }
  static LinkBudget capped(std::uint64_t b) { return {b, 0.0, std::nullopt, 0}; }
};

/// Everything one UAV has computed before a communication round.
struct AgentState {
  std::uint16_t id = 0;
  Pose frame;  // pose of the BEV grid frame in the world
  BevFeature bev;
  Mask2D support;
  Mask2D request;
  std::vector<double> quality;
};

struct DeliveryRecord {
  std::uint32_t round = 0;
  std::uint16_t sender = 0;
  std::int32_t receiver = -1;  // -1 = broadcast
  MsgKind kind = MsgKind::kRequest;
  std::uint64_t bytes = 0;     // 0 when everything was truncated and nothing was sent
  std::uint32_t cells = 0;
  std::uint32_t truncated_cells = 0;
  bool delivered = true;
  std::vector<std::uint8_t> wire;  // exact bytes sent

  friend bool operator==(const DeliveryRecord&, const DeliveryRecord&) = default;
};

struct DeliveryLog {
  std::vector<DeliveryRecord> records;

  void append(const DeliveryLog& other);
  /// round,sender,receiver,kind,bytes,cells,truncated_cells
  void write_csv(std::ostream& out, bool header = true) const;

  friend bool operator==(const DeliveryLog&, const DeliveryLog&) = default;
};

struct ByteScope {
  std::optional<std::uint16_t> sender;
  std::optional<std::uint32_t> round;
  std::optional<MsgKind> kind;
};

std::uint64_t total_bytes(const DeliveryLog& log, const ByteScope& scope = {});
inline double to_megabytes(std::uint64_t bytes) { return static_cast<double>(bytes) / 1048576.0; }

struct ReceivedCells {
  std::uint16_t sender = 0;
  SparseCellSet cells;  // already in the receiver's grid
};

struct RoundResult {
  DeliveryLog log;
  std::vector<std::vector<ReceivedCells>> inbox;  // per agent index, sorted by sender
  std::vector<std::uint64_t> egress;               // budget ledger: bytes charged per agent
};

/// One synchronous round. Phase 1: every UAV with neighbors broadcasts its
/// request mask (charged once against its budget). Phase 2: every neighbor
/// selects cells per requester, orders all of its candidates by descending
/// quality (ties: receiver id, then (x, y)) and emits them until the next one
/// would exceed its remaining budget. All decoding on the receiving side goes
/// through the wire format. Pure function of its inputs.
RoundResult run_round(std::span<const AgentState> agents, const CommGraph& graph, const LinkBudget& budget,
                      std::uint32_t round, Exec exec = Exec::Parallel);

}  // namespace mcop
