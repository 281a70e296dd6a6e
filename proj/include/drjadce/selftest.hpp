#pragma once

/** @file
 * Invariant suite behind `jadce selftest`: finite-difference checks of the
 * gradient and Hessian, horizontal-space geometry, rank preservation of the
 * pilot map, smoother properties, and a noiseless end-to-end recovery.
 */

#include "drjadce/pipeline.hpp"

#include <functional>
#include <iomanip>
#include <ostream>
#include <string>

namespace drjadce {

struct SelftestCheck {
  std::string name;
  double value = 0.0;  // worst observed error (or failure count)
  double tol = 0.0;
  bool passed = false;
};

using GradientFn = std::function<CMatrix(const CMatrix&, const ObjectiveParams&)>;

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  int instances = 20;
  int directions = 5;
  /// Replaceable so a test fixture can inject a faulty gradient.
  GradientFn gradient = [](const CMatrix& z, const ObjectiveParams& p) { return euclidean_gradient(z, p); };
};

/// Small random lifted problem (N <= 24, r <= 4, L <= 12) with paper smoothing.
inline ObjectiveParams selftest_problem(Rng& rng, CMatrix& z) {
  const Index n = 8 + static_cast<Index>(rng.uniform() * 17.0);
  const Index l = 4 + static_cast<Index>(rng.uniform() * 9.0);
  const Index r = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(std::min<Index>(4, l)));
  ObjectiveParams p;
  p.a = rng.complex_normal(l, n);
  for (Index j = 0; j < n; ++j) p.a.col(j).normalize();
  p.v = rng.complex_normal(l, r);
  for (Index i = 0; i < n; ++i) p.weights.push_back(0.1 + rng.uniform());
  z = rng.complex_normal(n + r, r);
  return p;
}

inline double selftest_rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

inline std::vector<SelftestCheck> run_selftest(const SelftestOptions& opt = {}) {
  std::vector<SelftestCheck> out;
  Rng rng(opt.seed);

  {
    SelftestCheck c{"gradient_fd", 0.0, 1e-5, false};
    Rng sub = rng.split({1});
    for (int i = 0; i < opt.instances; ++i) {
      CMatrix z;
      const ObjectiveParams p = selftest_problem(sub, z);
      const CMatrix g = opt.gradient(z, p);
      for (int k = 0; k < opt.directions; ++k) {
        const CMatrix xi = sub.complex_normal(z.rows(), z.cols());
        const double h = 1e-6;
        const double fd = (cost(CMatrix(z + h * xi), p) - cost(CMatrix(z - h * xi), p)) / (2.0 * h);
        c.value = std::max(c.value, selftest_rel(metric(g, xi), fd));
      }
    }
    c.passed = c.value < c.tol;
    out.push_back(c);
  }

  {
    SelftestCheck fd{"hessian_fd", 0.0, 1e-4, false};
    SelftestCheck sym{"hessian_symmetry", 0.0, 1e-8, false};
    Rng sub = rng.split({2});
    for (int i = 0; i < opt.instances; ++i) {
      CMatrix zm;
      const ObjectiveParams p = selftest_problem(sub, zm);
      const ManifoldPoint z(zm, p.n());
      for (int k = 0; k < opt.directions; ++k) {
        const TangentVector eta = project_horizontal(z, sub.complex_normal(zm.rows(), zm.cols()));
        const TangentVector xi = project_horizontal(z, sub.complex_normal(zm.rows(), zm.cols()));
        const CMatrix he = hessian_vec(z, eta, p).xi;
        const double h = 1e-5;
        const CMatrix d = (opt.gradient(CMatrix(zm + h * eta.xi), p) - opt.gradient(CMatrix(zm - h * eta.xi), p)) / (2.0 * h);
        const CMatrix oracle = project_horizontal(zm, d).xi;
        fd.value = std::max(fd.value, (he - oracle).norm() / std::max(oracle.norm(), he.norm()));
        const double a = metric(he, xi.xi), b = metric(hessian_vec(z, xi, p).xi, eta.xi);
        sym.value = std::max(sym.value, selftest_rel(a, b));
      }
    }
    fd.passed = fd.value < fd.tol;
    sym.passed = sym.value < sym.tol;
    out.push_back(fd);
    out.push_back(sym);
  }

  {
    SelftestCheck c{"horizontal_space", 0.0, 1e-9, false};
    Rng sub = rng.split({3});
    for (int i = 0; i < 100; ++i) {
      const Index n = 3 + static_cast<Index>(sub.uniform() * 10.0);
      const Index r = 1 + static_cast<Index>(sub.uniform() * 4.0);
      const CMatrix z = sub.complex_normal(n + r, r);
      const CMatrix xi = sub.complex_normal(n + r, r);
      const HorizontalSplit s = split_horizontal(z, xi);
      const CMatrix g = z.adjoint() * z;
      const CMatrix rhs = z.adjoint() * xi - xi.adjoint() * z;
      const CMatrix b = sub.complex_normal(r, r);
      const CMatrix skew = 0.5 * (b - b.adjoint());
      const CMatrix vert = z * skew;
      const double errs[] = {
          (g * s.b + s.b * g - rhs).norm() / rhs.norm(),
          (project_horizontal(z, s.horizontal).xi - s.horizontal).norm() / s.horizontal.norm(),
          project_horizontal(z, vert).xi.norm() / vert.norm(),
          std::abs(metric(s.horizontal, vert)) / (s.horizontal.norm() * vert.norm()),
      };
      for (double e : errs) c.value = std::max(c.value, e);
    }
    c.passed = c.value <= c.tol;
    out.push_back(c);
  }

  {
    SelftestCheck c{"rank_preservation", 0.0, 0.0, false};
    for (std::uint64_t s = 1; s <= 20; ++s) {
      SystemConfig cfg;
      cfg.n_devices = 60;
      cfg.pilot_len = 24;
      cfg.n_antennas = 16;
      cfg.activity = FixedActiveCount{static_cast<Index>(1 + s % 10)};
      cfg.seed = derive_seed(opt.seed, {4, s});
      const Instance inst = generate_instance(cfg);
      if (numerical_rank(inst.a * inst.x) != numerical_rank(inst.x)) c.value += 1.0;
    }
    c.passed = c.value == 0.0;
    out.push_back(c);
  }

  {
    SelftestCheck c{"smoother", 0.0, 0.0, false};
    for (double theta : {1.0, 10.0, 1.0 / 0.039, 100.0}) {
      double prev = 0.0;
      if (smooth_norm(0.0, theta) != 0.0) c.value += 1.0;
      for (double t = 1e-6; t < 1e3; t *= 3.0) {
        const double j = smooth_norm(t, theta);
        // 0 <= J(t) <= t, increasing, and t - J(t) <= log(1 + theta t)/theta.
        if (!(j >= prev && j <= t && t - j <= std::log1p(theta * t) / theta * (1.0 + 1e-12))) c.value += 1.0;
        prev = j;
      }
    }
    c.passed = c.value == 0.0;
    out.push_back(c);
  }

  {
    SelftestCheck c{"noiseless_recovery", 0.0, 0.0, false};
    for (std::uint64_t s = 1; s <= 5; ++s) {
      SystemConfig cfg;
      cfg.n_devices = 24;
      cfg.n_antennas = 8;
      cfg.pilot_len = 12;
      cfg.activity = FixedActiveCount{3};
      cfg.noise_var_override = 0.0;
      cfg.seed = derive_seed(opt.seed, {5, s});
      const DetectionResult res = run_dr_jadce(generate_instance(cfg));
      if (res.aer != 0.0 || !(res.nmse_db <= -60.0)) c.value += 1.0;
    }
    c.passed = c.value == 0.0;
    out.push_back(c);
  }
  return out;
}

inline bool all_passed(const std::vector<SelftestCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

inline void print_selftest(std::ostream& os, const std::vector<SelftestCheck>& checks) {
  os << std::left << std::setw(22) << "check" << std::setw(14) << "worst" << std::setw(10) << "tol" << "result\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(22) << c.name << std::setw(14) << std::setprecision(3) << c.value << std::setw(10)
       << c.tol << (c.passed ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace drjadce
