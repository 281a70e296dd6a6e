#pragma once

/** @file
 * Riemannian trust-region method with a Steihaug-Toint truncated CG inner
 * solver. Every vector lives in the horizontal space at the current iterate;
 * the retraction is Z + eta.
 */

#include "drjadce/objective.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace drjadce {

struct TrustRegionConfig {
  std::optional<double> delta_bar;  // sqrt(r) when unset
  std::optional<double> delta0;     // delta_bar / 8 when unset
  double rho_prime = 0.1;
  std::optional<double> grad_tol;   // 1e-6 (1 + ||V||_F) when unset
  int max_outer = 500;
  double tcg_kappa = 0.1;
  double tcg_theta = 1.0;
  std::optional<int> max_inner;     // horizontal-space real dimension when unset
  /// Model decreases below this are treated as rejected steps.
  double min_model_decrease = 1e-15;
};

enum class TcgStop { ZeroGradient, Residual, NegativeCurvature, Boundary, MaxInner };

inline const char* to_string(TcgStop s) {
  switch (s) {
    case TcgStop::ZeroGradient: return "zero_gradient";
    case TcgStop::Residual: return "residual";
    case TcgStop::NegativeCurvature: return "negative_curvature";
    case TcgStop::Boundary: return "boundary";
    case TcgStop::MaxInner: return "max_inner";
  }
  return "?";
}

struct TcgResult {
  TangentVector eta;
  TangentVector h_eta;  // Hess[eta], kept for the model value
  TcgStop stop = TcgStop::ZeroGradient;
  int inner_iters = 0;
  double model_decrease = 0.0;  // m(0) - m(eta)
  bool on_boundary = false;
};

/// Positive tau with ||eta + tau delta|| = radius.
inline double boundary_step(const CMatrix& eta, const CMatrix& delta, double radius) {
  const double ee = metric(eta, eta);
  const double ed = metric(eta, delta);
  const double dd = metric(delta, delta);
  if (!(dd > 0.0)) return 0.0;
  const double disc = std::max(0.0, ed * ed + dd * (radius * radius - ee));
  return (-ed + std::sqrt(disc)) / dd;
}

/// Real dimension of the horizontal space at a point of C^{(N+r) x r}.
inline int horizontal_dimension(Index rows, Index r) {
  return static_cast<int>(2 * rows * r - r * r);
}

inline TcgResult tcg(const ManifoldPoint& z, const TangentVector& grad, double radius, const ObjectiveParams& p,
                     const TrustRegionConfig& cfg) {
  const Index rows = z.z().rows(), r = z.r();
  TcgResult out;
  out.eta.xi = CMatrix::Zero(rows, r);
  out.h_eta.xi = CMatrix::Zero(rows, r);

  CMatrix res = grad.xi;
  double rr = metric(res, res);
  const double r0 = std::sqrt(rr);
  if (!(r0 > 0.0)) return out;
  const double target = r0 * std::min(std::pow(r0, cfg.tcg_theta), cfg.tcg_kappa);
  const int max_inner = cfg.max_inner.value_or(horizontal_dimension(rows, r));

  CMatrix delta = -res;
  auto finish = [&](double tau, const CMatrix& hd, TcgStop why) {
    out.eta.xi += tau * delta;
    out.h_eta.xi += tau * hd;
    out.stop = why;
    out.on_boundary = (why == TcgStop::NegativeCurvature || why == TcgStop::Boundary);
  };

  out.stop = TcgStop::MaxInner;
  for (int j = 0; j < max_inner; ++j) {
    out.inner_iters = j + 1;
    const CMatrix hd = hessian_vec(z, TangentVector{delta}, p, 1e-6).xi;
    const double curv = metric(delta, hd);
    if (!std::isfinite(curv)) throw numerical_error("tcg: non-finite curvature");
    if (curv <= 0.0) {
      finish(boundary_step(out.eta.xi, delta, radius), hd, TcgStop::NegativeCurvature);
      break;
    }
    const double alpha = rr / curv;
    const CMatrix trial = out.eta.xi + alpha * delta;
    if (trial.norm() >= radius) {
      finish(boundary_step(out.eta.xi, delta, radius), hd, TcgStop::Boundary);
      break;
    }
    out.eta.xi = trial;
    out.h_eta.xi += alpha * hd;
    res += alpha * hd;
    const double rr_new = metric(res, res);
    if (std::sqrt(rr_new) <= target) {
      out.stop = TcgStop::Residual;
      break;
    }
    delta = -res + (rr_new / rr) * delta;
    rr = rr_new;
  }
  out.model_decrease = -(metric(grad.xi, out.eta.xi) + 0.5 * metric(out.h_eta.xi, out.eta.xi));
  if (!std::isfinite(out.model_decrease)) throw numerical_error("tcg: non-finite model value");
  return out;
}

struct TraceRecord {
  int iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  bool accepted = false;
  int inner_iters = 0;
  double ms = 0.0;
  double eta_norm = 0.0;
  TcgStop stop = TcgStop::ZeroGradient;
};

struct SolverTrace {
  std::vector<TraceRecord> records;

  void write_csv(std::ostream& os) const {
    os << "iter,f,gradnorm,delta,rho,accepted,inner_iters,ms\n";
    os.precision(17);
    for (const TraceRecord& t : records) {
      os << t.iter << ',' << t.f << ',' << t.grad_norm << ',' << t.delta << ',' << t.rho << ','
         << (t.accepted ? 1 : 0) << ',' << t.inner_iters << ',' << t.ms << '\n';
    }
  }
};

struct SolveResult {
  ManifoldPoint z;
  double f = 0.0;
  double grad_norm = 0.0;
  int outer_iters = 0;
  bool converged = false;
  SolverTrace trace;
};

inline SolveResult rtr_solve(const ManifoldPoint& z0, const ObjectiveParams& p, const TrustRegionConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  p.validate();
  if (z0.n() != p.n() || z0.r() != p.r()) throw contract_error("rtr_solve: Z0 does not match the problem shape");
  const double delta_bar = cfg.delta_bar.value_or(std::sqrt(static_cast<double>(z0.r())));
  double delta = cfg.delta0.value_or(0.125 * delta_bar);
  if (!(delta > 0.0 && delta <= delta_bar)) throw contract_error("rtr_solve: need 0 < delta0 <= delta_bar");
  if (!(cfg.rho_prime >= 0.0 && cfg.rho_prime < 0.25)) throw contract_error("rtr_solve: rho' must lie in [0, 0.25)");
  const double tol = cfg.grad_tol.value_or(1e-6 * (1.0 + p.v.norm()));

  ManifoldPoint z = z0;
  double f = cost(z, p);
  TangentVector grad = riemannian_gradient(z, p);
  SolverTrace trace;
  int t = 0;
  bool converged = false;
  for (;; ++t) {
    const double gn = std::sqrt(metric(grad, grad));
    if (!std::isfinite(f) || !std::isfinite(gn)) throw numerical_error("rtr_solve: non-finite iterate");
    if (gn < tol) {
      converged = true;
      break;
    }
    if (t >= cfg.max_outer) break;
    const auto t0 = clock::now();
    TraceRecord rec;
    rec.iter = t;
    rec.delta = delta;

    const TcgResult step = tcg(z, grad, delta, p, cfg);
    rec.inner_iters = step.inner_iters;
    rec.eta_norm = step.eta.xi.norm();
    rec.stop = step.stop;

    std::optional<ManifoldPoint> cand;
    double f_new = f;
    double rho = -std::numeric_limits<double>::infinity();
    if (step.model_decrease >= cfg.min_model_decrease) {
      try {
        cand.emplace(retract(z, step.eta));
        f_new = cost(*cand, p);
        // Cancellation guard: f differences below round-off of |f| are noise.
        const double reg = std::max(1.0, std::abs(f)) * std::numeric_limits<double>::epsilon() * 1e3;
        rho = (f - f_new + reg) / (step.model_decrease + reg);
      } catch (const retraction_error&) {
        cand.reset();
      }
    }
    if (!std::isfinite(rho) && rho > 0.0) rho = -std::numeric_limits<double>::infinity();

    if (rho <= 0.25) {
      delta /= 4.0;
    } else if (rho >= 0.75 && step.on_boundary) {
      delta = std::min(2.0 * delta, delta_bar);
    }
    rec.rho = rho;
    rec.accepted = cand.has_value() && rho > cfg.rho_prime && f_new <= f;
    if (rec.accepted) {
      z = std::move(*cand);
      f = f_new;
      grad = riemannian_gradient(z, p);
    }
    rec.f = f;
    rec.grad_norm = std::sqrt(metric(grad, grad));
    rec.ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    trace.records.push_back(rec);
    if (delta < 1e-14 * delta_bar) break;  // stalled: radius collapsed
  }
  const double gn = std::sqrt(metric(grad, grad));
  return SolveResult{std::move(z), f, gn, t, converged, std::move(trace)};
}

}  // namespace drjadce
