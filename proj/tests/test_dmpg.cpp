// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcop/dmpg.hpp"
#include "mcop/errors.hpp"
#include "test_helpers.hpp"

using namespace mcop;

namespace {

BevFeature flat_bev(const GridSpec& s, float value = 1.0f) {
  BevFeature b(s, 7, 0.5);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    b.altitude[c] = 0.0f;
    b.cell_planes(c)[0] = value;
  }
  return b;
}

BevFeature random_bev(const GridSpec& s, std::uint64_t seed) {
  Rng rng(seed);
  BevFeature b(s, 7, 0.5);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    if (rng.uniform() < 0.2) continue;
    b.altitude[c] = static_cast<float>(rng.uniform());
    for (auto& p : b.cell_planes(c)) p = static_cast<float>(rng.uniform(-1, 1));
  }
  return b;
}

}  // namespace

TEST_CASE("gradient of a constant map is zero") {
  const GridSpec s{6, 5, 4, 1.0, {}};
  for (double g : gradient_map(flat_bev(s, 2.5f))) CHECK(g == 0.0);
}

TEST_CASE("gradient of a unit step") {
  const GridSpec s{8, 3, 4, 1.0, {}};
  BevFeature b(s, 7, 0.5);
  const std::int64_t k = 4;
  for (std::int64_t x = k; x < s.nx; ++x)
    for (std::int64_t y = 0; y < s.ny; ++y) {
      b.altitude[s.cell(x, y)] = 0.0f;
      b.cell_planes(s.cell(x, y))[2] = -1.0f;  // norm 1
    }
  const auto g = gradient_map(b);
  for (std::int64_t x = 0; x < s.nx; ++x)
    for (std::int64_t y = 0; y < s.ny; ++y)
      CHECK(g[s.cell(x, y)] == ((x == k - 1 || x == k) ? 0.5 : 0.0));
}

TEST_CASE("gradient around a single pillar") {
  const GridSpec s{5, 5, 4, 1.0, {}};
  BevFeature b(s, 7, 0.5);
  b.altitude[s.cell(2, 2)] = 0.5f;
  b.cell_planes(s.cell(2, 2))[0] = 0.6f;
  b.cell_planes(s.cell(2, 2))[1] = 0.8f;
  const auto g = gradient_map(b);
  CHECK(g[s.cell(2, 2)] == 0.0);
  for (auto [x, y] : {std::pair{1, 2}, {3, 2}, {2, 1}, {2, 3}}) CHECK(g[s.cell(x, y)] == doctest::Approx(0.5));
  CHECK(g[s.cell(1, 1)] == 0.0);
}

TEST_CASE("quality score arithmetic") {
  QualityParams qp;  // 0.5, 0.5, 0.8
  const GridSpec s{101, 1, 4, 1.0, {}};
  BevFeature b(s, 7, 0.5);
  b.altitude[51] = 0.0f;
  b.cell_planes(51)[0] = 1.0f;
  const Pose uav = Pose::nadir_camera({0.5, 0.5, 50}, 0.0);
  const auto q = quality_map(b, uav, qp);
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[50] == doctest::Approx(0.5 / std::sqrt(2.0) + 0.5));
  const Mask2D sup = support_mask(q, s, qp.xi);
  CHECK_FALSE(sup.test(std::size_t{0}));
  CHECK(sup.test(std::size_t{50}));

  Mask2D all = support_mask(q, s, 0.0);
  CHECK(all.count() == s.cell_count());
  CHECK(support_mask(q, s, 1.0).count() == 0);
}

TEST_CASE("quality requires the UAV above ground") {
  const GridSpec s{4, 4, 4, 1.0, {0, 0, 10}};
  const BevFeature b = flat_bev(s);
  CHECK_THROWS_AS(quality_map(b, Pose::nadir_camera({1, 1, 10}, 0.0), QualityParams{}), ConfigError);
  CHECK_NOTHROW(quality_map(b, Pose::nadir_camera({1, 1, 10.5}, 0.0), QualityParams{}));
  QualityParams bad;
  bad.xi = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.alpha = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("score is non-increasing in distance for fixed gradient") {
  const GridSpec s{64, 64, 4, 1.0, {}};
  const BevFeature b = flat_bev(s);
  const Pose uav = Pose::nadir_camera({0.5, 0.5, 30}, 0.0);
  const auto q = quality_map(b, uav, QualityParams{});
  for (std::int64_t x = 1; x < s.nx; ++x) CHECK(q[s.cell(x, 0)] <= q[s.cell(x - 1, 0)]);
  for (std::int64_t d = 1; d < s.nx; ++d) CHECK(q[s.cell(d, d)] <= q[s.cell(d - 1, d - 1)]);
}

TEST_CASE("request mask partitions the grid") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Mask2D sup(7, 9);
    for (std::size_t i = 0; i < sup.size(); ++i) sup.set(i, rng.uniform() < 0.4);
    const Mask2D req = request_mask(sup);
    CHECK((sup & req).count() == 0);
    CHECK((sup | req).count() == sup.size());
    CHECK(request_mask(req) == sup);
  }
  CHECK(request_mask(Mask2D(3, 3, true)).count() == 0);
}

TEST_CASE("warp: identity and integer translation") {
  const GridSpec s{6, 5, 4, 1.0, {}};
  const BevFeature b = random_bev(s, 3);
  const Pose id;
  CHECK(warp_to_ego(b, id, id, s) == b);
  const PlanarWarp w(s, id, id, s);
  CHECK(w.is_identity());

  // Source frame shifted +2 cells in x: ego (x, y) sees source (x - 2, y).
  const Pose shifted = Pose::planar(0.0, 2.0, 0.0);
  const BevFeature t = warp_to_ego(b, shifted, id, s);
  for (std::int64_t x = 0; x < s.nx; ++x)
    for (std::int64_t y = 0; y < s.ny; ++y) {
      const auto e = s.cell(x, y);
      if (x < 2) {
        CHECK(t.empty(e));
        continue;
      }
      const auto src = s.cell(x - 2, y);
      CHECK(t.altitude[e] == b.altitude[src]);
      for (int k = 0; k < 7; ++k) CHECK(t.cell_planes(e)[static_cast<std::size_t>(k)] == b.cell_planes(src)[static_cast<std::size_t>(k)]);
    }

  Mask2D m(s.nx, s.ny, true);
  const Mask2D mw = warp_to_ego(m, s, shifted, id, s);
  CHECK(mw.count() == static_cast<std::size_t>((s.nx - 2) * s.ny));
}

TEST_CASE("warp: 90 degree yaw is an index rotation") {
  const std::int64_t n = 7;
  const GridSpec s{n, n, 4, 1.0, {}};
  const BevFeature b = random_bev(s, 9);
  const Pose src_frame = Pose::planar(std::numbers::pi / 2, static_cast<double>(n), 0.0);
  const PlanarWarp w(s, src_frame, Pose{}, s);
  const BevFeature r = w.apply(b);
  for (std::int64_t x = 0; x < n; ++x)
    for (std::int64_t y = 0; y < n; ++y) {
      const std::size_t want = s.cell(y, n - 1 - x);  // direct index-rotation oracle
      CHECK(w.source(s.cell(x, y)) == static_cast<std::int64_t>(want));
      CHECK(r.altitude[s.cell(x, y)] == b.altitude[want]);
    }
}

TEST_CASE("select_transmit is the gated intersection") {
  const GridSpec s{6, 6, 4, 1.0, {}};
  const BevFeature b = flat_bev(s);
  Mask2D req(s.nx, s.ny), sup(s.nx, s.ny);
  for (std::int64_t x = 0; x < s.nx; ++x)
    for (std::int64_t y = 0; y < s.ny; ++y) {
      req.set(x, y, x < 3);
      sup.set(x, y, y < 3);
    }
  std::vector<double> q(s.cell_count());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<double>(i);
  const Pose id;
  const Selection sel = select_transmit({b, sup, q, id}, req, id, s);
  REQUIRE(sel.cells.size() == 9);
  CHECK(is_sorted_unique(sel.cells));
  for (std::size_t i = 0; i < sel.cells.size(); ++i) {
    CHECK(sel.cells[i].x < 3);
    CHECK(sel.cells[i].y < 3);
    CHECK(sel.quality[i] == q[s.cell(sel.cells[i].x, sel.cells[i].y)]);
    CHECK(sel.cells[i].payload.size() == 7);
  }
  CHECK(select_transmit({b, sup, q, id}, Mask2D(s.nx, s.ny), id, s).cells.empty());
  CHECK(select_transmit({b, Mask2D(s.nx, s.ny), q, id}, req, id, s).cells.empty());

  BevFeature holes = b;
  holes.altitude[s.cell(0, 0)] = kEmptyPillar;
  std::fill(holes.cell_planes(s.cell(0, 0)).begin(), holes.cell_planes(s.cell(0, 0)).end(), 0.0f);
  CHECK(select_transmit({holes, sup, q, id}, req, id, s).cells.size() == 8);
}

TEST_CASE("selection soundness and threshold monotonicity") {
  const GridSpec s{24, 20, 8, 1.0, {}};
  const Pose id;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BevFeature nb = random_bev(s, 100 + seed);
    const BevFeature eb = random_bev(s, 200 + seed);
    const Pose nbr_uav = Pose::nadir_camera({5, 5, 30}, 0.0);
    const Pose ego_uav = Pose::nadir_camera({18, 14, 30}, 0.0);
    const auto nq = quality_map(nb, nbr_uav, QualityParams{});
    const Mask2D req = request_mask(support_mask(eb, ego_uav, QualityParams{}));
    std::size_t prev = std::numeric_limits<std::size_t>::max(), prev_sup = prev;
    for (double xi = 0.0; xi <= 1.0; xi += 0.05) {
      const Mask2D sup = support_mask(nq, s, xi);
      const Selection sel = select_transmit({nb, sup, nq, id}, req, id, s);
      for (const auto& c : sel.cells) {
        CHECK(req.test(std::int64_t{c.x}, std::int64_t{c.y}));
        CHECK(sup.test(std::int64_t{c.x}, std::int64_t{c.y}));
      }
      CHECK(sup.count() <= prev_sup);
      CHECK(sel.cells.size() <= prev);
      prev_sup = sup.count();
      prev = sel.cells.size();
    }
  }
}
