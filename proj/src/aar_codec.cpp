// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/aar_codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mcop/errors.hpp"

namespace mcop {

ChannelMap ChannelMap::identity() { return ChannelMap(); }

ChannelMap::ChannelMap(int rows, std::vector<double> coeffs) : rows_(rows), coeffs_(std::move(coeffs)), identity_(false) {
  if (rows < 1 || rows > 255) throw ConfigError("channel map needs 1..255 rows");
  if (coeffs_.size() != static_cast<std::size_t>(rows) * kFeatureChannels)
    throw ConfigError("channel map needs exactly 8 coefficients per row");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw ConfigError("channel map coefficients must be finite");
  if (rows == kDefaultBevChannels) {
    bool id = true;
    for (int r = 0; r < rows && id; ++r)
      for (int k = 0; k < kFeatureChannels && id; ++k)
        id = coeffs_[static_cast<std::size_t>(r * kFeatureChannels + k)] == (r == k ? 1.0 : 0.0);
    identity_ = id;
  }
  if (!identity_) build_left_inverse();
}

void ChannelMap::build_left_inverse() {
  // Normal equations on the class-mean block A (rows x 7): (A^T A)^-1 A^T.
  constexpr int k = kNumClasses;
  auto a = [&](int r, int c) { return coeffs_[static_cast<std::size_t>(r * kFeatureChannels + c)]; };
  std::array<double, k * 2 * k> aug{};  // [A^T A | I]
  double scale = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int r = 0; r < rows_; ++r) s += a(r, i) * a(r, j);
      aug[static_cast<std::size_t>(i * 2 * k + j)] = s;
      scale = std::max(scale, std::abs(s));
    }
  for (int i = 0; i < k; ++i) aug[static_cast<std::size_t>(i * 2 * k + k + i)] = 1.0;
  auto at = [&](int r, int c) -> double& { return aug[static_cast<std::size_t>(r * 2 * k + c)]; };
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
    if (!(std::abs(at(piv, col)) > 1e-12 * std::max(scale, 1e-300))) return;  // rank deficient
    for (int c = 0; c < 2 * k; ++c) std::swap(at(col, c), at(piv, c));
    const double p = at(col, col);
    for (int c = 0; c < 2 * k; ++c) at(col, c) /= p;
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < 2 * k; ++c) at(r, c) -= f * at(col, c);
    }
  }
  left_inverse_.assign(static_cast<std::size_t>(k * rows_), 0.0);
  for (int i = 0; i < k; ++i)
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += at(i, k + j) * a(r, j);
      left_inverse_[static_cast<std::size_t>(i * rows_ + r)] = s;
    }
}

std::array<double, kNumClasses> ChannelMap::recover_means(std::span<const float> planes, double altitude) const {
  if (planes.size() != static_cast<std::size_t>(rows_)) throw ContractViolation("recover_means: plane count mismatch");
  std::array<double, kNumClasses> means{};
  if (identity_) {
    for (std::size_t c = 0; c < means.size(); ++c) means[c] = planes[c];
    return means;
  }
  if (left_inverse_.empty()) throw ContractViolation("recover_means: channel map is not invertible");
  for (int i = 0; i < kNumClasses; ++i) {
    double s = 0.0;
    for (int r = 0; r < rows_; ++r) {
      const double b = planes[static_cast<std::size_t>(r)] - coeffs_[static_cast<std::size_t>(r * kFeatureChannels + kNumClasses)] * altitude;
      s += left_inverse_[static_cast<std::size_t>(i * rows_ + r)] * b;
    }
    means[static_cast<std::size_t>(i)] = s;
  }
  return means;
}

ChannelMap ChannelMap::parse(std::istream& in) {
  std::vector<double> coeffs;
  int rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::vector<double> row;
    for (std::string tok; ss >> tok;) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad coefficient '" + tok + "'");
      }
      if (used != tok.size() || !std::isfinite(v)) throw ParseError(lineno, "bad coefficient '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (row.size() != kFeatureChannels) throw ParseError(lineno, "expected 8 coefficients");
    coeffs.insert(coeffs.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError(lineno, "channel map is empty");
  return ChannelMap(rows, std::move(coeffs));
}

void ChannelMap::apply(std::span<const double, kNumClasses> means, double altitude, std::span<float> out) const {
  if (identity_) {
    for (int c = 0; c < kNumClasses; ++c) out[static_cast<std::size_t>(c)] = static_cast<float>(means[static_cast<std::size_t>(c)]);
    return;
  }
  for (int r = 0; r < rows_; ++r) {
    const double* row = &coeffs_[static_cast<std::size_t>(r * kFeatureChannels)];
    double acc = row[kNumClasses] * altitude;
    for (int k = 0; k < kNumClasses; ++k) acc += row[k] * means[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(r)] = static_cast<float>(acc);
  }
}

BevFeature::BevFeature(const GridSpec& s, int c_out, double theta_used)
    : spec(s),
      theta(theta_used),
      channels(c_out),
      altitude(s.cell_count(), kEmptyPillar),
      planes(s.cell_count() * static_cast<std::size_t>(c_out), 0.0f) {}

std::size_t BevFeature::nonempty_count() const {
  return static_cast<std::size_t>(std::count_if(altitude.begin(), altitude.end(), [](float a) { return a != kEmptyPillar; }));
}

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must be in (0,1)");
}

bool is_valid(float occ_logit, double theta) { return sigmoid(occ_logit) > theta; }

float normalized_altitude(double z_sum, std::int64_t count, std::int64_t nz) {
  if (count == 0) return kEmptyPillar;
  if (nz == 1) return 0.0f;
  const double a = (z_sum / static_cast<double>(count)) / static_cast<double>(nz - 1);
  return static_cast<float>(std::clamp(a, 0.0, 1.0));
}

void compress_pillar(const FeatureVolume& vol, double theta, const ChannelMap& psi, std::size_t cell, BevFeature& out) {
  const std::int64_t nz = vol.spec().nz;
  std::array<double, kNumClasses> sums{};
  double z_sum = 0.0;
  std::int64_t count = 0;
  for (std::int64_t z = 0; z < nz; ++z) {
    const auto v = vol.voxel(cell * static_cast<std::size_t>(nz) + static_cast<std::size_t>(z));
    if (!is_valid(v[kOccupancyChannel], theta)) continue;
    ++count;
    z_sum += static_cast<double>(z);
    for (int c = 0; c < kNumClasses; ++c) sums[static_cast<std::size_t>(c)] += v[static_cast<std::size_t>(class_channel(c))];
  }
  out.altitude[cell] = normalized_altitude(z_sum, count, nz);
  if (count == 0) return;  // planes already zero
  for (auto& s : sums) s /= static_cast<double>(nz);
  psi.apply(sums, out.altitude[cell], out.cell_planes(cell));
}

}  // namespace

Mask3D valid_mask(const FeatureVolume& vol, double theta, Exec exec) {
  check_theta(theta);
  Mask3D m(vol.spec());
  const auto n = static_cast<std::int64_t>(vol.spec().voxel_count());
  if (exec == Exec::Serial) {
    for (std::int64_t i = 0; i < n; ++i)
      m.set(static_cast<std::size_t>(i), is_valid(vol.voxel(static_cast<std::size_t>(i))[kOccupancyChannel], theta));
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      m.set(static_cast<std::size_t>(i), is_valid(vol.voxel(static_cast<std::size_t>(i))[kOccupancyChannel], theta));
  }
  return m;
}

std::vector<float> altitude_encode(const Mask3D& mask) {
  const std::int64_t nz = mask.nz();
  std::vector<float> a(static_cast<std::size_t>(mask.nx() * mask.ny()));
  for (std::size_t cell = 0; cell < a.size(); ++cell) {
    double z_sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t z = 0; z < nz; ++z)
      if (mask.test(cell * static_cast<std::size_t>(nz) + static_cast<std::size_t>(z))) {
        z_sum += static_cast<double>(z);
        ++count;
      }
    a[cell] = normalized_altitude(z_sum, count, nz);
  }
  return a;
}

BevFeature compress(const FeatureVolume& vol, double theta, const ChannelMap& psi, Exec exec) {
  check_theta(theta);
  if (vol.channels() != kFeatureChannels) throw ContractViolation("compress: volume needs 8 channels");
  BevFeature out(vol.spec(), psi.out_channels(), theta);
  const auto cells = static_cast<std::int64_t>(vol.spec().cell_count());
  if (exec == Exec::Serial) {
    for (std::int64_t c = 0; c < cells; ++c) compress_pillar(vol, theta, psi, static_cast<std::size_t>(c), out);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < cells; ++c) compress_pillar(vol, theta, psi, static_cast<std::size_t>(c), out);
  }
  return out;
}

std::int64_t decode_level(float altitude, std::int64_t nz) {
  if (nz <= 1) return 0;
  const double t = static_cast<double>(altitude) * static_cast<double>(nz - 1);
  const double fl = std::floor(t);
  const double frac = t - fl;
  // Float storage of the altitude perturbs t by at most ~2^-24 * (Z-1).
  const double tol = std::min(0.25, 4.0 * 0x1.0p-24 * static_cast<double>(nz - 1) + 1e-12);
  double level;
  if (std::abs(frac - 0.5) <= tol) {
    level = std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
  } else {
    level = frac < 0.5 ? fl : fl + 1.0;
  }
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(level), 0, nz - 1);
}

PillarDecode decode_pillar(float altitude, std::span<const float> planes, std::int64_t nz, const ChannelMap& psi) {
  const auto means = psi.recover_means(planes, altitude);
  PillarDecode d{decode_level(altitude, nz), {}};
  for (std::size_t c = 0; c < means.size(); ++c) d.class_logits[c] = static_cast<float>(means[c] * static_cast<double>(nz));
  return d;
}

FeatureVolume expand(const BevFeature& bev, const ChannelMap& psi, double g_expand, Exec exec) {
  if (bev.channels != psi.out_channels()) throw ContractViolation("expand: plane count differs from the channel map");
  FeatureVolume vol(bev.spec);
  const std::int64_t nz = bev.spec.nz;
  const auto cells = static_cast<std::int64_t>(bev.spec.cell_count());
  auto one = [&](std::size_t cell) {
    if (bev.empty(cell)) return;
    const PillarDecode d = decode_pillar(bev.altitude[cell], bev.cell_planes(cell), nz, psi);
    auto v = vol.voxel(cell * static_cast<std::size_t>(nz) + static_cast<std::size_t>(d.level));
    v[kOccupancyChannel] = static_cast<float>(g_expand);
    for (int c = 0; c < kNumClasses; ++c) v[static_cast<std::size_t>(class_channel(c))] = d.class_logits[static_cast<std::size_t>(c)];
  };
  if (exec == Exec::Serial) {
    for (std::int64_t c = 0; c < cells; ++c) one(static_cast<std::size_t>(c));
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < cells; ++c) one(static_cast<std::size_t>(c));
  }
  return vol;
}

std::uint64_t volume_bytes(const GridSpec& spec, int channels) {
  return static_cast<std::uint64_t>(spec.voxel_count()) * static_cast<std::uint64_t>(channels) * 4u;
}

std::uint64_t bev_bytes(const GridSpec& spec, int c_out) {
  return static_cast<std::uint64_t>(spec.cell_count()) * static_cast<std::uint64_t>(c_out + 1) * 4u;
}

}  // namespace mcop
