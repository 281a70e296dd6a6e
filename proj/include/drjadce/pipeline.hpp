#pragma once

/** @file
 * End-to-end DR-JADCE: rank estimate, reduction to the signal subspace,
 * Riemannian trust-region solve of the lifted problem, lift back, detection
 * and channel read-out.
 *
 * Y is divided by the noise standard deviation before any processing so the
 * covariance shrinkage and the default theta and zeta act on data in noise
 * units. The unit is floored at 0.1 RMS(Y), which caps the assumed per-entry
 * SNR at 20 dB and keeps noiseless instances well defined. X_hat is scaled back.
 */

#include "drjadce/dimension_reduction.hpp"
#include "drjadce/metrics.hpp"
#include "drjadce/rank_estimation.hpp"
#include "drjadce/scenario.hpp"
#include "drjadce/trust_region.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace drjadce {

enum class InitMode { MatchedFilter, Random };

struct DrJadceOptions {
  std::optional<Index> rank;  // replaces the rank estimate when set
  RankOptions rank_options;
  double theta = 1.0 / 0.039;
  double zeta = 8.0;
  double v1 = 0.1;
  InitMode init = InitMode::MatchedFilter;
  std::uint64_t init_seed = 0;
  TrustRegionConfig solver;
};

struct DetectionResult {
  CMatrix x_hat;                // N x M, original units
  std::vector<Index> detected;  // ascending
  CMatrix h_hat;                // |detected| x M
  Index r_used = 0;
  Index r_hat = 0;              // rank estimate, reported even under an override
  double aer = 0.0;
  Index missed = 0;
  Index false_alarms = 0;
  double nmse_db = std::numeric_limits<double>::quiet_NaN();  // NaN when K = 0
  double f_final = 0.0;
  double grad_norm = 0.0;
  int outer_iters = 0;
  bool converged = true;
  SolverTrace trace;

  // Intermediate artifacts, all in normalized units.
  double scale = 1.0;
  std::optional<RankSelection> rank_selection;
  std::optional<ReducedModel> reduced;
  CMatrix s_hat;
};

inline constexpr double kNoiseUnitFloor = 0.1;

/// Divisor that brings Y to noise units; 0 for an all-zero noiseless block.
inline double normalization_scale(const Instance& inst) {
  const double n = static_cast<double>(inst.y.size());
  const double rms = n > 0.0 ? inst.y.norm() / std::sqrt(n) : 0.0;
  return std::max(std::sqrt(inst.noise_var), kNoiseUnitFloor * rms);
}

/**
 * [A^H V; I] or a Gaussian draw, with each block rescaled to ||V||_F^{1/2}/sqrt(2)
 * so that ||Z0||_F^2 = ||V||_F and S0 = J Jt^H starts with balanced factors.
 */
inline CMatrix initial_point(const ObjectiveParams& p, InitMode mode, std::uint64_t seed) {
  const Index n = p.n(), r = p.r();
  CMatrix z(n + r, r);
  if (mode == InitMode::MatchedFilter) {
    z.topRows(n) = p.a.adjoint() * p.v;
    z.bottomRows(r).setIdentity();
  } else {
    Rng rng(seed);
    z = rng.complex_normal(n + r, r);
  }
  const double half = std::sqrt(0.5 * p.v.norm());
  if (half > 0.0) {
    const double nt = z.topRows(n).norm(), nb = z.bottomRows(r).norm();
    if (nt > 0.0) z.topRows(n) *= half / nt;
    if (nb > 0.0) z.bottomRows(r) *= half / nb;
  }
  return z;
}

inline void fill_metrics(DetectionResult& res, const Instance& inst, double v1) {
  res.detected = detect_activity(res.x_hat, v1);
  res.h_hat = estimate_channels(res.x_hat, res.detected, inst.energies);
  const AerResult aer = compute_aer(res.detected, inst.activity.active_set, inst.n());
  res.aer = aer.aer;
  res.missed = aer.missed;
  res.false_alarms = aer.false_alarms;
  if (!inst.activity.active_set.empty()) {
    res.nmse_db = compute_nmse(res.x_hat, inst.x, inst.activity.active_set);
  }
}

inline DetectionResult run_dr_jadce(const Instance& inst, const DrJadceOptions& opt = {}) {
  const Index n = inst.n(), m = inst.m(), l = inst.l();
  if (inst.y.rows() != l || inst.a.rows() != l) throw contract_error("run_dr_jadce: malformed instance");
  require_finite(inst.y, "run_dr_jadce");
  DetectionResult res;
  res.scale = normalization_scale(inst);
  if (!(res.scale > 0.0)) {
    // Y = 0: nothing was received, nothing is detected.
    res.x_hat = CMatrix::Zero(n, m);
    res.s_hat = CMatrix::Zero(n, 0);
    fill_metrics(res, inst, opt.v1);
    return res;
  }
  const CMatrix y = inst.y / res.scale;

  RankSelection sel = estimate_rank_for_reduction(y, opt.rank_options);
  const Index r_max = std::min(l, m);
  res.r_hat = sel.r_hat;
  if (opt.rank) {
    if (*opt.rank < 1 || *opt.rank > r_max) throw contract_error("run_dr_jadce: rank override out of range");
    res.r_used = *opt.rank;
  } else {
    res.r_used = std::min(sel.r_hat, r_max);
  }
  ReducedModel red = build_reduced_model(y, inst.a, res.r_used, sel.noise_subspace(res.r_used));

  ObjectiveParams params{inst.a, red.v, red.weights, opt.theta, opt.zeta};
  const ManifoldPoint z0(initial_point(params, opt.init, opt.init_seed), n);
  SolveResult sol = rtr_solve(z0, params, opt.solver);

  res.s_hat = extract_s(sol.z);
  res.x_hat = res.scale * lift_back(res.s_hat, red.u);
  res.f_final = sol.f;
  res.grad_norm = sol.grad_norm;
  res.outer_iters = sol.outer_iters;
  res.converged = sol.converged;
  res.trace = std::move(sol.trace);
  res.rank_selection = std::move(sel);
  res.reduced = std::move(red);
  fill_metrics(res, inst, opt.v1);
  return res;
}

}  // namespace drjadce
