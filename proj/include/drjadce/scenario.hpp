#pragma once

/** @file
 * Synthetic grant-free uplink instances: unit-norm Gaussian pilots, sporadic
 * activity, Rayleigh channels with a common path loss and AWGN at the base
 * station. Y = A X + E with row n of X equal to chi_n sqrt(L p) h_n^T.
 */

#include "drjadce/linalg.hpp"
#include "drjadce/random.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace drjadce {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Each device is active independently with this probability.
struct ActivityProbability {
  double eps;
};
/// Exactly this many devices, chosen uniformly at random, are active.
struct FixedActiveCount {
  Index k;
};
using ActivityModel = std::variant<ActivityProbability, FixedActiveCount>;

struct SystemConfig {
  Index n_devices = 100;
  Index n_antennas = 32;
  Index pilot_len = 40;
  ActivityModel activity = ActivityProbability{0.1};
  double pilot_power_dbm = 20.0;
  double noise_psd_dbm_hz = -160.0;
  double bandwidth_hz = 1e6;
  double pathloss_db = -123.0;
  std::uint64_t seed = 1;
  /// Replaces the PSD-derived noise variance when set (0 gives noiseless Y).
  std::optional<double> noise_var_override;

  double noise_var() const {
    if (noise_var_override) return *noise_var_override;
    return dbm_to_watts(noise_psd_dbm_hz) * bandwidth_hz;
  }
  double pilot_power_w() const { return dbm_to_watts(pilot_power_dbm); }
  double pathloss() const { return db_to_linear(pathloss_db); }
  /// Transmit energy L * p shared by every device.
  double energy() const { return static_cast<double>(pilot_len) * pilot_power_w(); }

  void validate() const {
    if (n_devices < 1 || n_antennas < 1 || pilot_len < 1) {
      throw contract_error("SystemConfig: N, M and L must be positive");
    }
    if (const auto* p = std::get_if<ActivityProbability>(&activity)) {
      if (!(p->eps > 0.0 && p->eps < 1.0)) {
        throw contract_error("SystemConfig: activity probability must lie in (0,1)");
      }
    } else {
      const Index k = std::get<FixedActiveCount>(activity).k;
      if (k < 0 || k > n_devices) {
        throw contract_error("SystemConfig: active count must lie in [0, N]");
      }
    }
    if (noise_var_override && *noise_var_override < 0.0) {
      throw contract_error("SystemConfig: negative noise variance");
    }
  }
};

struct ActivityPattern {
  std::vector<std::uint8_t> indicators;  // length N
  std::vector<Index> active_set;         // ascending
  Index count() const { return static_cast<Index>(active_set.size()); }
};

struct ChannelMatrix {
  CMatrix h;        // N x M, row n = sqrt(pathloss) * standard complex Gaussian
  double pathloss;  // linear
};

struct Instance {
  SystemConfig config;
  CMatrix a;  // L x N pilots
  CMatrix x;  // N x M device state
  CMatrix y;  // L x M received
  double noise_var = 0.0;
  std::vector<double> energies;  // per-device transmit energy
  ActivityPattern activity;
  ChannelMatrix channels;

  Index n() const { return a.cols(); }
  Index m() const { return y.cols(); }
  Index l() const { return a.rows(); }
};

/// i.i.d. complex Gaussian pilots normalized to unit column norm.
inline CMatrix generate_pilots(const SystemConfig& cfg, Rng& rng) {
  CMatrix a = rng.complex_normal(cfg.pilot_len, cfg.n_devices);
  for (Index n = 0; n < a.cols(); ++n) {
    const double nrm = a.col(n).norm();
    a.col(n) /= nrm;
  }
  return a;
}

inline ActivityPattern generate_activity(const SystemConfig& cfg, Rng& rng) {
  const Index n = cfg.n_devices;
  ActivityPattern out;
  out.indicators.assign(static_cast<std::size_t>(n), 0);
  if (const auto* p = std::get_if<ActivityProbability>(&cfg.activity)) {
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < p->eps) out.indicators[static_cast<std::size_t>(i)] = 1;
    }
  } else {
    const Index k = std::get<FixedActiveCount>(cfg.activity).k;
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: the first k slots are a uniform k-subset.
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng.engine()))]);
      out.indicators[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (out.indicators[static_cast<std::size_t>(i)]) out.active_set.push_back(i);
  }
  return out;
}

inline ChannelMatrix generate_channels(const SystemConfig& cfg, Rng& rng) {
  const double pl = cfg.pathloss();
  return {std::sqrt(pl) * rng.complex_normal(cfg.n_devices, cfg.n_antennas), pl};
}

/// Builds X from activity and channels, then draws Y = A X + E.
inline Instance synthesize(const SystemConfig& cfg, const CMatrix& a, const ActivityPattern& activity,
                           const ChannelMatrix& channels, Rng& rng) {
  cfg.validate();
  const Index n = cfg.n_devices, m = cfg.n_antennas, l = cfg.pilot_len;
  if (a.rows() != l || a.cols() != n || channels.h.rows() != n || channels.h.cols() != m ||
      static_cast<Index>(activity.indicators.size()) != n) {
    throw contract_error("synthesize: inconsistent shapes");
  }
  Instance inst;
  inst.config = cfg;
  inst.a = a;
  inst.activity = activity;
  inst.channels = channels;
  inst.noise_var = cfg.noise_var();
  inst.energies.assign(static_cast<std::size_t>(n), cfg.energy());
  inst.x = CMatrix::Zero(n, m);
  for (Index k : activity.active_set) {
    inst.x.row(k) = std::sqrt(inst.energies[static_cast<std::size_t>(k)]) * channels.h.row(k);
  }
  inst.y = a * inst.x;
  if (inst.noise_var > 0.0) inst.y += rng.complex_normal(l, m, inst.noise_var);
  return inst;
}

/// Full instance from cfg.seed with one substream per random component.
inline Instance generate_instance(const SystemConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  Rng pilots = root.split({1});
  Rng act = root.split({2});
  Rng chan = root.split({3});
  Rng noise = root.split({4});
  const CMatrix a = generate_pilots(cfg, pilots);
  const ActivityPattern pattern = generate_activity(cfg, act);
  const ChannelMatrix h = generate_channels(cfg, chan);
  return synthesize(cfg, a, pattern, h, noise);
}

}  // namespace drjadce
