#pragma once

/** @file
 * Activity detector, channel read-out and the AER / NMSE figures of merit.
 */

#include "drjadce/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace drjadce {

/// Thrown when a metric is requested on an input where it is not defined.
class undefined_metric_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kNmseFloorDb = -300.0;

/**
 * Device k is declared active iff ||row k||^2 >= v^2 M with v = v1 max|X_hat_ij|.
 * An all-zero X_hat (v = 0) yields the empty set.
 */
inline std::vector<Index> detect_activity(const CMatrix& x_hat, double v1 = 0.1) {
  if (!(v1 > 0.0)) throw contract_error("detect_activity: v1 must be positive");
  std::vector<Index> out;
  if (x_hat.size() == 0) return out;
  const double v = v1 * x_hat.cwiseAbs().maxCoeff();
  if (!(v > 0.0)) return out;
  const double thr = v * v * static_cast<double>(x_hat.cols());
  for (Index k = 0; k < x_hat.rows(); ++k) {
    if (x_hat.row(k).squaredNorm() >= thr) out.push_back(k);
  }
  return out;
}

/// h_k = x_k / sqrt(energy_k) for each k in the detected set; row i pairs with detected[i].
inline CMatrix estimate_channels(const CMatrix& x_hat, const std::vector<Index>& detected,
                                 const std::vector<double>& energies) {
  CMatrix h(static_cast<Index>(detected.size()), x_hat.cols());
  for (std::size_t i = 0; i < detected.size(); ++i) {
    const Index k = detected[i];
    if (k < 0 || k >= x_hat.rows()) throw contract_error("estimate_channels: index out of range");
    const double e = energies.at(static_cast<std::size_t>(k));
    if (!(e > 0.0)) throw contract_error("estimate_channels: energy must be positive");
    h.row(static_cast<Index>(i)) = x_hat.row(k) / std::sqrt(e);
  }
  return h;
}

struct AerResult {
  double aer = 0.0;
  Index missed = 0;
  Index false_alarms = 0;
};

/// (missed + false alarms) / N. Both sets must be sorted ascending.
inline AerResult compute_aer(const std::vector<Index>& detected, const std::vector<Index>& truth, Index n) {
  if (n < 1) throw contract_error("compute_aer: N must be positive");
  auto in_range = [n](Index k) { return k >= 0 && k < n; };
  if (!std::all_of(detected.begin(), detected.end(), in_range) || !std::all_of(truth.begin(), truth.end(), in_range)) {
    throw contract_error("compute_aer: index out of range");
  }
  std::vector<Index> d = detected, t = truth;
  std::sort(d.begin(), d.end());
  std::sort(t.begin(), t.end());
  std::vector<Index> diff;
  std::set_difference(t.begin(), t.end(), d.begin(), d.end(), std::back_inserter(diff));
  AerResult out;
  out.missed = static_cast<Index>(diff.size());
  diff.clear();
  std::set_difference(d.begin(), d.end(), t.begin(), t.end(), std::back_inserter(diff));
  out.false_alarms = static_cast<Index>(diff.size());
  out.aer = static_cast<double>(out.missed + out.false_alarms) / static_cast<double>(n);
  return out;
}

/// 10 log10(||X_hat_K - X_K||^2 / ||X_K||^2) over the true active rows K.
inline double compute_nmse(const CMatrix& x_hat, const CMatrix& x, const std::vector<Index>& truth) {
  if (truth.empty()) throw undefined_metric_error("compute_nmse: true active set is empty");
  if (x_hat.rows() != x.rows() || x_hat.cols() != x.cols()) throw contract_error("compute_nmse: shape mismatch");
  double err = 0.0, sig = 0.0;
  for (Index k : truth) {
    err += (x_hat.row(k) - x.row(k)).squaredNorm();
    sig += x.row(k).squaredNorm();
  }
  if (!(sig > 0.0)) throw undefined_metric_error("compute_nmse: true rows carry no energy");
  if (err == 0.0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(err / sig));
}

}  // namespace drjadce
