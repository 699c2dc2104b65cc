// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/swarm.hpp"

#include <algorithm>
#include <numeric>

#include "mcop/errors.hpp"
#include "mcop/rng.hpp"

namespace mcop {

CommGraph::CommGraph(int n) : n_(n), adj_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n < 0) throw ContractViolation("graph size must be >= 0");
}

CommGraph CommGraph::full(int n) {
  CommGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

void CommGraph::add_edge(int i, int j) {
  if (i == j) throw ContractViolation("graph: self-loop");
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw ContractViolation("graph: node id out of range");
  if (connected(i, j)) return;
  auto ins = [](std::vector<int>& v, int x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
  ins(adj_[static_cast<std::size_t>(i)], j);
  ins(adj_[static_cast<std::size_t>(j)], i);
}

bool CommGraph::connected(int i, int j) const {
  const auto& v = adj_.at(static_cast<std::size_t>(i));
  return std::binary_search(v.begin(), v.end(), j);
}

std::vector<std::pair<int, int>> CommGraph::edges() const {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n_; ++i)
    for (int j : adj_[static_cast<std::size_t>(i)])
      if (i < j) e.emplace_back(i, j);
  return e;
}

CommGraph CommGraph::induced(int k) const {
  CommGraph g(std::min(k, n_));
  for (auto [i, j] : edges())
    if (i < g.n_ && j < g.n_) g.add_edge(i, j);
  return g;
}

void DeliveryLog::append(const DeliveryLog& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

void DeliveryLog::write_csv(std::ostream& out, bool header) const {
  if (header) out << "round,sender,receiver,kind,bytes,cells,truncated_cells\n";
  for (const auto& r : records) {
    out << r.round << ',' << r.sender << ',';
    if (r.receiver < 0)
      out << '*';
    else
      out << r.receiver;
    out << ',' << to_string(r.kind) << ',' << r.bytes << ',' << r.cells << ',' << r.truncated_cells << '\n';
  }
}

std::uint64_t total_bytes(const DeliveryLog& log, const ByteScope& scope) {
  std::uint64_t sum = 0;
  for (const auto& r : log.records) {
    if (scope.sender && r.sender != *scope.sender) continue;
    if (scope.round && r.round != *scope.round) continue;
    if (scope.kind && r.kind != *scope.kind) continue;
    sum += r.bytes;
  }
  return sum;
}

namespace {

struct Candidate {
  double quality;
  int receiver;
  std::size_t cell;  // index into that receiver's selection
};

bool dropped(const LinkBudget& b, MsgKind kind, std::uint32_t round, int sender, int receiver) {
  if (b.drop_probability <= 0.0) return false;
  const std::uint64_t seed = hash_combine(b.impairment_seed, static_cast<std::uint64_t>(kind));
  return counter_uniform(seed, round, static_cast<std::uint64_t>(sender), static_cast<std::uint64_t>(receiver)) <
         b.drop_probability;
}

}  // namespace

RoundResult run_round(std::span<const AgentState> agents, const CommGraph& graph, const LinkBudget& budget,
                      std::uint32_t round, Exec exec) {
  const int n = static_cast<int>(agents.size());
  if (graph.size() != n) throw ContractViolation("run_round: graph size differs from agent count");
  for (int k = 0; k < n; ++k)
    if (agents[static_cast<std::size_t>(k)].id != k) throw ContractViolation("run_round: agent ids must equal their index");

  RoundResult result;
  result.inbox.resize(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> spent(static_cast<std::size_t>(n), 0);
  auto remaining = [&](int j) -> std::optional<std::uint64_t> {
    if (!budget.bytes_per_round) return std::nullopt;
    const auto s = spent[static_cast<std::size_t>(j)];
    return *budget.bytes_per_round > s ? *budget.bytes_per_round - s : 0;
  };

  // Phase 1: request broadcast. inbound[j] lists the decoded requests j heard.
  std::vector<std::vector<RequestMsg>> inbound(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = graph.neighbors(i);
    if (nbrs.empty()) continue;
    const AgentState& a = agents[static_cast<std::size_t>(i)];
    auto wire = encode_request(RequestMsg::make(a.id, round, a.frame, a.request));
    if (auto rem = remaining(i); rem && wire.size() > *rem) continue;  // cannot afford to ask
    spent[static_cast<std::size_t>(i)] += wire.size();
    for (int j : nbrs)
      if (!dropped(budget, MsgKind::kRequest, round, i, j)) inbound[static_cast<std::size_t>(j)].push_back(decode_request(wire));
    DeliveryRecord rec;
    rec.round = round;
    rec.sender = a.id;
    rec.receiver = -1;
    rec.kind = MsgKind::kRequest;
    rec.bytes = wire.size();
    rec.wire = std::move(wire);
    result.log.records.push_back(std::move(rec));
  }

  // Selections are independent per (sender, requester) pair.
  struct Pair {
    int sender;
    std::size_t request;  // index into inbound[sender]
  };
  std::vector<Pair> pairs;
  for (int j = 0; j < n; ++j)
    for (std::size_t r = 0; r < inbound[static_cast<std::size_t>(j)].size(); ++r) pairs.push_back({j, r});
  std::vector<Selection> selections(pairs.size());
  auto select_one = [&](std::size_t p) {
    const int j = pairs[p].sender;
    const AgentState& s = agents[static_cast<std::size_t>(j)];
    const RequestMsg& req = inbound[static_cast<std::size_t>(j)][pairs[p].request];
    GridSpec ego_spec = s.bev.spec;
    ego_spec.nx = req.mask.nx();
    ego_spec.ny = req.mask.ny();
    const NeighborOffer offer{s.bev, s.support, s.quality, s.frame};
    selections[p] = select_transmit(offer, req.mask, req.frame(), ego_spec);
  };
  const auto npairs = static_cast<std::int64_t>(pairs.size());
  if (exec == Exec::Serial) {
    for (std::int64_t p = 0; p < npairs; ++p) select_one(static_cast<std::size_t>(p));
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t p = 0; p < npairs; ++p) select_one(static_cast<std::size_t>(p));
  }

  // Phase 2: per-sender budget allocation, highest quality first.
  std::size_t first_pair = 0;
  for (int j = 0; j < n; ++j) {
    const auto& reqs = inbound[static_cast<std::size_t>(j)];
    if (reqs.empty()) continue;
    const AgentState& s = agents[static_cast<std::size_t>(j)];
    const int channels = s.bev.channels;
    const std::size_t cell_cost = feature_cell_bytes(channels);

    std::vector<Candidate> cands;
    for (std::size_t r = 0; r < reqs.size(); ++r) {
      const Selection& sel = selections[first_pair + r];
      for (std::size_t c = 0; c < sel.cells.size(); ++c) cands.push_back({sel.quality[c], static_cast<int>(r), c});
    }
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.quality != b.quality) return a.quality > b.quality;
      const auto ra = reqs[static_cast<std::size_t>(a.receiver)].sender, rb = reqs[static_cast<std::size_t>(b.receiver)].sender;
      if (ra != rb) return ra < rb;
      return a.cell < b.cell;  // selections are already in (x, y) order
    });

    std::vector<std::vector<std::size_t>> taken(reqs.size());
    std::vector<std::uint64_t> msg_bytes(reqs.size(), 0);
    std::vector<bool> capped(reqs.size(), false);
    for (const Candidate& c : cands) {
      const auto r = static_cast<std::size_t>(c.receiver);
      if (capped[r]) continue;
      const std::uint64_t cost = cell_cost + (taken[r].empty() ? kFeatureHeaderBytes : 0);
      if (budget.link_byte_cap && msg_bytes[r] + cost > *budget.link_byte_cap) {
        capped[r] = true;
        continue;
      }
      if (auto rem = remaining(j); rem && cost > *rem) break;
      taken[r].push_back(c.cell);
      msg_bytes[r] += cost;
      spent[static_cast<std::size_t>(j)] += cost;
    }

    for (std::size_t r = 0; r < reqs.size(); ++r) {
      const Selection& sel = selections[first_pair + r];
      DeliveryRecord rec;
      rec.round = round;
      rec.sender = s.id;
      rec.receiver = reqs[r].sender;
      rec.kind = MsgKind::kFeature;
      rec.truncated_cells = static_cast<std::uint32_t>(sel.cells.size() - taken[r].size());
      if (sel.cells.empty()) continue;  // nothing to offer, nothing logged
      if (!taken[r].empty()) {
        std::sort(taken[r].begin(), taken[r].end());
        FeatureMsg msg;
        msg.sender = s.id;
        msg.receiver = reqs[r].sender;
        msg.round = round;
        msg.channels = static_cast<std::uint8_t>(channels);
        msg.cells.reserve(taken[r].size());
        for (std::size_t c : taken[r]) msg.cells.push_back(sel.cells[c]);
        rec.wire = encode_feature(msg);
        rec.bytes = rec.wire.size();
        rec.cells = static_cast<std::uint32_t>(msg.cells.size());
        rec.delivered = !dropped(budget, MsgKind::kFeature, round, j, reqs[r].sender);
        if (rec.delivered) {
          FeatureMsg got = decode_feature(rec.wire);
          result.inbox[reqs[r].sender].push_back({got.sender, std::move(got.cells)});
        }
      } else {
        rec.delivered = false;
      }
      result.log.records.push_back(std::move(rec));
    }
    first_pair += reqs.size();
  }

  result.egress = spent;
  for (auto& box : result.inbox)
    std::sort(box.begin(), box.end(), [](const ReceivedCells& a, const ReceivedCells& b) { return a.sender < b.sender; });
  std::stable_sort(result.log.records.begin(), result.log.records.end(), [](const DeliveryRecord& a, const DeliveryRecord& b) {
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.receiver < b.receiver;
  });
  return result;
}

}  // namespace mcop
