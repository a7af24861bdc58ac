#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "esdirk/tableau.hpp"

namespace esdirk {

inline constexpr double kCoefficientTruncation = 1e-11;

/// R(z) = P(z) / Q(z), coefficients in ascending powers of z.
struct StabilityFunction {
  Vector p_coeffs;
  Vector q_coeffs;
  int deg_p = 0;
  int deg_q = 0;
  // |R(infinity)|: 0 when deg P < deg Q, +inf when deg P > deg Q.
  double r_inf = 0.0;
  // Zeros of Q, i.e. 1 / a_ii for every nonzero diagonal entry.
  std::vector<double> poles;

  std::complex<double> operator()(std::complex<double> z) const;
};

/// Stability function of the Runge-Kutta method (A, weights, c).
///
/// P is obtained by evaluating det(I - zA + z e w') at s + 1 sample points
/// and interpolating with divided differences; Q = det(I - zA) is formed
/// from the diagonal of A. Coefficients smaller than 1e-11 times the largest
/// one are set to zero before degrees are determined. The default sample
/// points are 0, 1/2, -1/2, 1, -1, 2, -2, 3, ...
StabilityFunction stability_function(
    const ButcherTableau& t, const Vector& weights,
    const std::optional<std::vector<double>>& sample_points = std::nullopt);

/// R(infinity) = -e' A~^{-1} a~ for a method whose weights equal row r of A.
/// A~ and a~ are taken from the leading (r+1)-stage subtableau, so this
/// covers embedded methods that end on an earlier stiffly accurate row.
/// Throws std::invalid_argument when no row of A equals the weights and
/// DegenerateTableauError when A~ is singular.
double r_infinity_stiffly_accurate(const ButcherTableau& t,
                                   const Vector& weights);

/// Same, for the advancing weights b.
double r_infinity_stiffly_accurate(const ButcherTableau& t);

/// Laguerre polynomial L_n(x) for 0 <= n <= 8.
double laguerre(int n, double x);

struct AStabilityScan {
  double min_e = 0.0;      // min over the grid of |Q(iy)|^2 - |P(iy)|^2
  double argmin_y = 0.0;
  bool degree_ok = false;  // deg P <= deg Q
  bool poles_ok = false;   // all poles in the open right half-plane
  bool a_stable_consistent = false;
  int samples = 0;
};

inline constexpr double kAStabilityTolerance = 1e-9;

/// Necessary-condition scan for A-stability: evaluates E(y) = |Q(iy)|^2 -
/// |P(iy)|^2 at y = 0 and n_samples log-spaced points in [1e-3, 1e6]. E is
/// formed as an even polynomial in y whose coefficients are truncated
/// relative to the largest |Q|^2 or |P|^2 coefficient before evaluation.
AStabilityScan a_stability_scan(const StabilityFunction& sf,
                                int n_samples = 2000);

}  // namespace esdirk
