// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>
#include <tuple>
#include <sstream>

#include "mcop/errors.hpp"
#include "mcop/swarm.hpp"
#include "swarm_fixture.hpp"

using namespace mcop;
using mcop::testing::random_swarm;

namespace {

std::uint64_t request_size(const AgentState& a, std::uint32_t round = 0) {
  return encode_request(RequestMsg::make(a.id, round, a.frame, a.request)).size();
}

std::set<std::tuple<int, int, int>> delivered_cells(const RoundResult& r) {
  std::set<std::tuple<int, int, int>> out;  // (receiver, x, y)
  for (std::size_t k = 0; k < r.inbox.size(); ++k)
    for (const auto& rc : r.inbox[k])
      for (const auto& c : rc.cells) out.emplace(static_cast<int>(k) * 1000 + rc.sender, c.x, c.y);
  return out;
}

// Two agents on a 4x4 grid: agent 0 asks for three cells that agent 1 scores
// 0.9, 0.8 and 0.7. Agent 1 asks for nothing agent 0 can supply.
std::vector<AgentState> cut_point_agents() {
  const GridSpec s{4, 4, 4, 1.0, {}};
  std::vector<AgentState> a(2);
  for (int k = 0; k < 2; ++k) {
    a[k].id = static_cast<std::uint16_t>(k);
    a[k].bev = BevFeature(s, 7, 0.5);
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
      a[k].bev.altitude[c] = 0.0f;
      a[k].bev.cell_planes(c)[0] = static_cast<float>(c);
    }
    a[k].quality.assign(s.cell_count(), 0.0);
  }
  a[0].support = Mask2D(4, 4, true);
  a[0].request = Mask2D(4, 4);
  for (auto [x, y] : {std::pair{0, 1}, {2, 2}, {3, 0}}) {
    a[0].support.set(std::int64_t{x}, std::int64_t{y}, false);
    a[0].request.set(std::int64_t{x}, std::int64_t{y}, true);
  }
  a[1].support = Mask2D(4, 4);
  a[1].support.set(std::int64_t{0}, std::int64_t{1});
  a[1].support.set(std::int64_t{2}, std::int64_t{2});
  a[1].support.set(std::int64_t{3}, std::int64_t{0});
  a[1].quality[s.cell(0, 1)] = 0.7;
  a[1].quality[s.cell(2, 2)] = 0.9;
  a[1].quality[s.cell(3, 0)] = 0.8;
  a[1].request = Mask2D(4, 4);
  return a;
}

}  // namespace

TEST_CASE("comm graph") {
  CommGraph g(4);
  g.add_edge(0, 2);
  g.add_edge(2, 0);
  g.add_edge(3, 2);
  CHECK(g.connected(2, 0));
  CHECK_FALSE(g.connected(0, 1));
  CHECK(g.neighbors(2) == std::vector<int>{0, 3});
  CHECK(g.edges() == std::vector<std::pair<int, int>>{{0, 2}, {2, 3}});
  CHECK(g.induced(3).edges() == std::vector<std::pair<int, int>>{{0, 2}});
  CHECK(CommGraph::full(4).edges().size() == 6);
  CHECK_THROWS_AS(g.add_edge(1, 1), ContractViolation);
  CHECK_THROWS_AS(g.add_edge(0, 4), ContractViolation);
}

TEST_CASE("zero budget sends nothing") {
  auto sc = random_swarm(4, 12, 10, 0.5, 1);
  const RoundResult r = run_round(sc.agents, sc.graph, LinkBudget::capped(0), 0);
  CHECK(r.log.records.empty());
  for (const auto& box : r.inbox) CHECK(box.empty());
  for (auto e : r.egress) CHECK(e == 0);
}

TEST_CASE("unlimited budget delivers every gated cell") {
  auto sc = random_swarm(3, 12, 10, 0.5, 2);
  const RoundResult r = run_round(sc.agents, sc.graph, LinkBudget::unlimited(), 0);
  const GridSpec& s = sc.agents[0].bev.spec;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      std::set<std::pair<int, int>> want, got;
      for (std::int64_t x = 0; x < s.nx; ++x)
        for (std::int64_t y = 0; y < s.ny; ++y)
          if (sc.agents[i].request.test(x, y) && sc.agents[j].support.test(x, y) && !sc.agents[j].bev.empty(s.cell(x, y)))
            want.emplace(x, y);
      for (const auto& rc : r.inbox[i])
        if (rc.sender == j)
          for (const auto& c : rc.cells) got.emplace(c.x, c.y);
      CHECK(got == want);
    }
  for (const auto& rec : r.log.records) CHECK(rec.truncated_cells == 0);
}

TEST_CASE("budget cut point delivers the best k cells") {
  const auto agents = cut_point_agents();
  const CommGraph g = CommGraph::full(2);
  const std::uint64_t req1 = request_size(agents[1]);
  REQUIRE(request_size(agents[0]) <= req1 + kFeatureHeaderBytes);
  const std::vector<std::pair<int, int>> order = {{2, 2}, {3, 0}, {0, 1}};
  for (std::uint64_t k = 0; k <= 3; ++k) {
    const std::uint64_t b = req1 + (k ? kFeatureHeaderBytes + k * 36 : 0);
    for (std::uint64_t budget : {b, b + 35}) {
      const RoundResult r = run_round(agents, g, LinkBudget::capped(budget), 0);
      std::set<std::pair<int, int>> got, want(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      for (const auto& rc : r.inbox[0])
        for (const auto& c : rc.cells) got.emplace(c.x, c.y);
      CHECK(got == want);
      CHECK(r.egress[1] <= budget);
      CHECK(r.egress[1] == req1 + (k ? kFeatureHeaderBytes + k * 36 : 0));
    }
  }
  // One byte short of the first cell.
  const RoundResult r = run_round(agents, g, LinkBudget::capped(req1 + kFeatureHeaderBytes + 35), 0);
  CHECK(r.inbox[0].empty());
  REQUIRE(r.log.records.size() == 3);
  CHECK(r.log.records[2].bytes == 0);
  CHECK(r.log.records[2].truncated_cells == 3);
}

TEST_CASE("per-link byte cap") {
  const auto agents = cut_point_agents();
  LinkBudget b;
  b.link_byte_cap = kFeatureHeaderBytes + 2 * 36;
  const RoundResult r = run_round(agents, CommGraph::full(2), b, 0);
  REQUIRE(r.inbox[0].size() == 1);
  CHECK(r.inbox[0][0].cells.size() == 2);
}

TEST_CASE("randomized budget safety and ledger agreement") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto sc = random_swarm(2 + static_cast<int>(seed % 5), 16, 12, 0.3 + 0.01 * static_cast<double>(seed), seed, 0.7);
    Rng rng(seed);
    const std::uint64_t budget = static_cast<std::uint64_t>(rng.uniform_int(0, 4000));
    const RoundResult r = run_round(sc.agents, sc.graph, LinkBudget::capped(budget), 3);
    std::vector<std::uint64_t> from_log(sc.agents.size(), 0);
    for (const auto& rec : r.log.records) {
      from_log[rec.sender] += rec.bytes;
      CHECK(rec.wire.size() == rec.bytes);
    }
    CHECK(from_log == r.egress);
    for (auto e : r.egress) CHECK(e <= budget);
    for (std::uint16_t k = 0; k < sc.agents.size(); ++k)
      CHECK(total_bytes(r.log, {k, std::nullopt, std::nullopt}) == r.egress[k]);
  }
}

TEST_CASE("more budget never removes cells while the requester set is fixed") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto sc = random_swarm(4, 14, 12, 0.45, 500 + seed);
    std::uint64_t max_req = 0;
    for (const auto& a : sc.agents) max_req = std::max(max_req, request_size(a));
    std::set<std::tuple<int, int, int>> prev;
    for (std::uint64_t b = max_req; b < max_req + 3000; b += 97) {
      const auto cur = delivered_cells(run_round(sc.agents, sc.graph, LinkBudget::capped(b), 0));
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST_CASE("serial and parallel exchanges agree") {
  auto sc = random_swarm(6, 20, 20, 0.5, 77, 0.6);
  LinkBudget b = LinkBudget::capped(2500);
  b.drop_probability = 0.3;
  b.impairment_seed = 5;
  const RoundResult s = run_round(sc.agents, sc.graph, b, 2, Exec::Serial);
  const RoundResult p = run_round(sc.agents, sc.graph, b, 2, Exec::Parallel);
  CHECK(s.log == p.log);
  CHECK(s.egress == p.egress);
  CHECK(delivered_cells(s) == delivered_cells(p));
}

TEST_CASE("drops are charged but not delivered") {
  auto sc = random_swarm(3, 10, 10, 0.5, 8);
  LinkBudget all_drop;
  all_drop.drop_probability = 1.0;
  const RoundResult r = run_round(sc.agents, sc.graph, all_drop, 0);
  for (const auto& box : r.inbox) CHECK(box.empty());
  CHECK(r.log.records.size() == 3);  // requests only: nobody heard one
  for (auto e : r.egress) CHECK(e > 0);
}

TEST_CASE("log bytes match re-encoding and CSV is stable") {
  auto sc = random_swarm(3, 10, 10, 0.5, 9);
  const RoundResult r = run_round(sc.agents, sc.graph, LinkBudget::unlimited(), 1);
  std::uint64_t re = 0;
  for (const auto& rec : r.log.records) {
    if (rec.kind == MsgKind::kRequest)
      re += encode_request(decode_request(rec.wire)).size();
    else if (rec.bytes)
      re += encode_feature(decode_feature(rec.wire)).size();
  }
  CHECK(re == total_bytes(r.log));
  std::uint64_t req = 0;
  for (const auto& a : sc.agents) req += request_size(a, 1);
  CHECK(total_bytes(r.log, {std::nullopt, std::nullopt, MsgKind::kRequest}) == req);
  std::ostringstream a, b;
  r.log.write_csv(a);
  r.log.write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("round,sender,receiver,kind,bytes,cells,truncated_cells\n", 0) == 0);
  CHECK(a.str().find(",*,request,") != std::string::npos);
}

TEST_CASE("run_round contract checks") {
  auto sc = random_swarm(3, 6, 6, 0.5, 1);
  CHECK_THROWS_AS(run_round(sc.agents, CommGraph(2), LinkBudget{}, 0), ContractViolation);
  sc.agents[1].id = 7;
  CHECK_THROWS_AS(run_round(sc.agents, sc.graph, LinkBudget{}, 0), ContractViolation);
}
