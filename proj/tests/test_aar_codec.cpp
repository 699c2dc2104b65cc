// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcop/aar_codec.hpp"
#include "mcop/errors.hpp"
#include "test_helpers.hpp"

using namespace mcop;

namespace {

// One valid voxel per nonempty pillar; others invalid with random class noise.
FeatureVolume one_voxel_volume(const GridSpec& s, Rng& rng, std::vector<std::int64_t>& level) {
  FeatureVolume v(s);
  level.assign(s.cell_count(), -1);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    const bool empty = rng.uniform() < 0.3;
    const std::int64_t zv = empty ? -1 : rng.uniform_int(0, s.nz - 1);
    level[c] = zv;
    for (std::int64_t z = 0; z < s.nz; ++z) {
      auto vox = v.voxel(c * static_cast<std::size_t>(s.nz) + static_cast<std::size_t>(z));
      vox[kOccupancyChannel] = static_cast<float>(z == zv ? rng.uniform(0.1, 8) : -rng.uniform(0, 8));
      for (int k = 1; k < kFeatureChannels; ++k) vox[static_cast<std::size_t>(k)] = static_cast<float>(rng.uniform(-6, 6));
    }
  }
  return v;
}

}  // namespace

TEST_CASE("valid mask threshold is strict") {
  const GridSpec s{1, 1, 3, 1.0, {}};
  FeatureVolume v(s);
  v.voxel(0)[0] = 0.0f;
  v.voxel(1)[0] = 4.0f;
  v.voxel(2)[0] = -4.0f;
  const Mask3D m = valid_mask(v, 0.5);
  CHECK_FALSE(m.test(0));
  CHECK(m.test(1));
  CHECK_FALSE(m.test(2));
  CHECK_THROWS_AS(valid_mask(v, 0.0), ConfigError);
  CHECK_THROWS_AS(valid_mask(v, 1.0), ConfigError);
}

TEST_CASE("altitude encoding") {
  Mask3D m(1, 3, 4);
  m.set(2);  // pillar 0: z = 2, 3
  m.set(3);
  m.set(4 + 1);  // pillar 1: z = 1
  const auto a = altitude_encode(m);
  CHECK(a[0] == doctest::Approx(2.5 / 3.0));
  CHECK(a[1] == static_cast<float>(1.0 / 3.0));
  CHECK(a[2] == kEmptyPillar);

  Mask3D flat(2, 1, 1);
  flat.set(0);
  const auto f = altitude_encode(flat);
  CHECK(f[0] == 0.0f);
  CHECK(f[1] == kEmptyPillar);
}

TEST_CASE("one-voxel pillar compresses to logits over Z") {
  const GridSpec s{1, 1, 8, 1.0, {}};
  FeatureVolume v(s);
  auto vox = v.voxel(5);
  vox[0] = 3.0f;
  for (int k = 1; k < 8; ++k) vox[static_cast<std::size_t>(k)] = static_cast<float>(k);
  const BevFeature b = compress(v, 0.5);
  CHECK(b.altitude[0] == static_cast<float>(5.0 / 7.0));
  for (int c = 0; c < 7; ++c) CHECK(b.planes[static_cast<std::size_t>(c)] == doctest::Approx((c + 1) / 8.0));
}

TEST_CASE("all-invalid volume compresses to empty") {
  const GridSpec s{3, 2, 4, 1.0, {}};
  FeatureVolume v(s);
  for (std::size_t i = 0; i < s.voxel_count(); ++i) v.voxel(i)[3] = 2.0f;  // class logits only
  const BevFeature b = compress(v, 0.5);
  for (float a : b.altitude) CHECK(a == kEmptyPillar);
  for (float p : b.planes) CHECK(p == 0.0f);
  CHECK(b.nonempty_count() == 0);
  const FeatureVolume e = expand(b);
  for (float x : e.data()) CHECK(x == 0.0f);
}

TEST_CASE("decode level rounds half to even") {
  CHECK(decode_level(static_cast<float>(2.5 / 3.0), 4) == 2);
  CHECK(decode_level(static_cast<float>(1.5 / 3.0), 4) == 2);
  CHECK(decode_level(static_cast<float>(0.5 / 3.0), 4) == 0);
  CHECK(decode_level(1.0f, 4) == 3);
  CHECK(decode_level(0.0f, 4) == 0);
  CHECK(decode_level(0.0f, 1) == 0);
  // Every single-voxel altitude decodes to its own level.
  for (std::int64_t nz : {2, 3, 7, 16, 64, 255, 1024})
    for (std::int64_t z = 0; z < nz; ++z)
      CHECK(decode_level(static_cast<float>(static_cast<double>(z) / static_cast<double>(nz - 1)), nz) == z);
  // Two-voxel means hit exact halves; ties go to the even level.
  for (std::int64_t nz : {4, 9, 64, 300})
    for (std::int64_t z = 0; z + 1 < nz; ++z) {
      const float a = static_cast<float>((static_cast<double>(z) + 0.5) / static_cast<double>(nz - 1));
      CHECK(decode_level(a, nz) == (z % 2 == 0 ? z : z + 1));
    }
}

TEST_CASE("expand places mass at the rounded mean level") {
  const GridSpec s{1, 1, 4, 1.0, {}};
  FeatureVolume v(s);
  for (std::int64_t z : {2, 3}) {
    auto vox = v.voxel(static_cast<std::size_t>(z));
    vox[0] = 4.0f;
    vox[4] = 4.0f;  // building
  }
  const BevFeature b = compress(v, 0.5);
  CHECK(b.altitude[0] == doctest::Approx(0.8333).epsilon(1e-4));
  const FeatureVolume e = expand(b, 4.0);
  CHECK(e.voxel(2)[0] == 4.0f);
  CHECK(e.voxel(2)[4] == doctest::Approx(8.0));
  for (std::int64_t z : {0, 1, 3})
    for (float x : e.voxel(static_cast<std::size_t>(z))) CHECK(x == 0.0f);
}

TEST_CASE("one-voxel round trip restores level and logits") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const GridSpec s{rng.uniform_int(1, 12), rng.uniform_int(1, 12), rng.uniform_int(1, 20), 1.0, {}};
    std::vector<std::int64_t> level;
    const FeatureVolume v = one_voxel_volume(s, rng, level);
    const BevFeature b = compress(v, 0.5);
    const FeatureVolume e = expand(b, 4.0);
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
      if (level[c] < 0) {
        CHECK(b.empty(c));
        continue;
      }
      CHECK(decode_level(b.altitude[c], s.nz) == level[c]);
      const auto orig = v.voxel(c * static_cast<std::size_t>(s.nz) + static_cast<std::size_t>(level[c]));
      const auto got = e.voxel(c * static_cast<std::size_t>(s.nz) + static_cast<std::size_t>(level[c]));
      for (int k = 1; k < kFeatureChannels; ++k) {
        const double a = orig[static_cast<std::size_t>(k)], g = got[static_cast<std::size_t>(k)];
        CHECK(std::abs(a - g) <= 1e-6 * std::max(1.0, std::abs(a)));
      }
      CHECK(argmax_class(got) == argmax_class(orig));
    }
  }
}

TEST_CASE("sentinel coupling and range") {
  Rng rng(2);
  const GridSpec s{9, 9, 12, 1.0, {}};
  FeatureVolume v(s);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(-3, 2));
  const BevFeature b = compress(v, 0.5);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    const float a = b.altitude[c];
    CHECK((a == kEmptyPillar || (a >= 0.0f && a <= 1.0f)));
    if (a == kEmptyPillar)
      for (float p : b.cell_planes(c)) CHECK(p == 0.0f);
  }
}

TEST_CASE("compress is pillar-local") {
  Rng rng(8);
  const GridSpec s{5, 4, 6, 1.0, {}};
  FeatureVolume v(s);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(-3, 3));
  // Swap pillars (1,2) and (3,0).
  FeatureVolume w = v;
  const std::size_t pa = s.cell(1, 2), pb = s.cell(3, 0);
  const std::size_t stride = static_cast<std::size_t>(s.nz * kFeatureChannels);
  std::swap_ranges(w.data().begin() + static_cast<std::ptrdiff_t>(pa * stride),
                   w.data().begin() + static_cast<std::ptrdiff_t>((pa + 1) * stride),
                   w.data().begin() + static_cast<std::ptrdiff_t>(pb * stride));
  const BevFeature bv = compress(v, 0.5), bw = compress(w, 0.5);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    const std::size_t src = c == pa ? pb : c == pb ? pa : c;
    CHECK(testing::bits_equal(bw.altitude[c], bv.altitude[src]));
    for (int k = 0; k < 7; ++k) CHECK(testing::bits_equal(bw.cell_planes(c)[static_cast<std::size_t>(k)], bv.cell_planes(src)[static_cast<std::size_t>(k)]));
  }
}

TEST_CASE("byte accounting") {
  const GridSpec s{200, 100, 64, 0.4, {}};
  CHECK(volume_bytes(s, 8) == 200ULL * 100 * 64 * 8 * 4);
  CHECK(bev_bytes(s, 7) == 200ULL * 100 * 8 * 4);
  CHECK(compression_ratio(s, 8, 7) == 64.0);
  CHECK(compression_ratio(GridSpec{3, 3, 16, 1.0, {}}, 8, 3) == doctest::Approx(16.0 * 8 / 4));
}

TEST_CASE("channel map parsing and routing") {
  std::istringstream id_text(
      "1 0 0 0 0 0 0 0\n0 1 0 0 0 0 0 0\n0 0 1 0 0 0 0 0\n0 0 0 1 0 0 0 0\n"
      "0 0 0 0 1 0 0 0\n0 0 0 0 0 1 0 0\n0 0 0 0 0 0 1 0\n");
  const ChannelMap id = ChannelMap::parse(id_text);
  CHECK(id.is_identity());

  std::istringstream bad("1 0 0\n");
  CHECK_THROWS_AS(ChannelMap::parse(bad), ParseError);
  std::istringstream nan_row("1 0 0 0 0 0 0 nan\n");
  CHECK_THROWS_AS(ChannelMap::parse(nan_row), ParseError);

  // Two summary planes cannot be inverted back to seven means.
  std::istringstream lossy("1 1 1 1 1 1 1 0\n0 0 0 0 0 0 0 1\n");
  const ChannelMap two = ChannelMap::parse(lossy);
  CHECK(two.out_channels() == 2);
  CHECK_FALSE(two.invertible());

  const GridSpec s{2, 2, 4, 1.0, {}};
  Rng rng(3);
  FeatureVolume v(s);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(-1, 3));
  const BevFeature b7 = compress(v, 0.5);
  const BevFeature b2 = compress(v, 0.5, two);
  CHECK(b2.channels == 2);
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    if (b7.empty(c)) continue;
    double sum = 0.0;
    for (float p : b7.cell_planes(c)) sum += p;
    CHECK(b2.cell_planes(c)[0] == doctest::Approx(sum).epsilon(1e-5));
    CHECK(b2.cell_planes(c)[1] == doctest::Approx(b7.altitude[c]));
  }
}

TEST_CASE("invertible custom map decodes like the identity") {
  // A shuffled, scaled, altitude-mixed 8x8 map.
  std::ostringstream text;
  const int perm[7] = {3, 0, 6, 1, 5, 2, 4};
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 7; ++c) text << (c == perm[r] ? 2.0 + r : 0.0) << ' ';
    text << (r % 2 ? 0.5 : 0.0) << '\n';
  }
  text << "0.1 0.1 0.1 0.1 0.1 0.1 0.1 1\n";
  std::istringstream in(text.str());
  const ChannelMap psi = ChannelMap::parse(in);
  REQUIRE(psi.invertible());
  CHECK_FALSE(psi.is_identity());

  Rng rng(14);
  const GridSpec s{6, 5, 9, 1.0, {}};
  std::vector<std::int64_t> level;
  const FeatureVolume v = one_voxel_volume(s, rng, level);
  const FeatureVolume a = expand(compress(v, 0.5), 4.0);
  const FeatureVolume b = expand(compress(v, 0.5, psi), psi, 4.0);
  REQUIRE(a.data().size() == b.data().size());
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(b.data()[i] == doctest::Approx(a.data()[i]).epsilon(1e-4));
  CHECK_THROWS_AS(expand(compress(v, 0.5, psi), 4.0), ContractViolation);  // plane count mismatch
}

TEST_CASE("serial and parallel codec agree") {
  Rng rng(30);
  const GridSpec s{21, 17, 9, 1.0, {}};
  FeatureVolume v(s);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(-3, 3));
  const BevFeature a = compress(v, 0.5, Exec::Serial), b = compress(v, 0.5, Exec::Parallel);
  CHECK(a == b);
  CHECK(expand(a, 4.0, Exec::Serial) == expand(a, 4.0, Exec::Parallel));
  CHECK(valid_mask(v, 0.3, Exec::Serial) == valid_mask(v, 0.3, Exec::Parallel));
}
