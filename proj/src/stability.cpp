#include "esdirk/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>
#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

constexpr double kRowMatch = 1e-15;

std::vector<double> default_samples(int count) {
  std::vector<double> z{0.0};
  for (double m = 0.5; static_cast<int>(z.size()) < count;
       m = (m < 1.0 ? 1.0 : m + 1.0)) {
    z.push_back(m);
    if (static_cast<int>(z.size()) < count) z.push_back(-m);
  }
  return z;
}

// Monomial coefficients of the interpolating polynomial through (x_k, y_k).
Vector interpolate(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t n = x.size();
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i)
      y[i] = (y[i] - y[i - 1]) / (x[i] - x[i - j]);
  Vector poly = Vector::Zero(static_cast<Eigen::Index>(n));
  poly(0) = y[n - 1];
  int deg = 0;
  for (std::size_t k = n - 1; k-- > 0;) {
    // poly <- poly * (z - x_k) + y_k
    for (int d = deg + 1; d >= 1; --d) poly(d) = poly(d - 1) - x[k] * poly(d);
    poly(0) = -x[k] * poly(0) + y[k];
    ++deg;
  }
  return poly;
}

int truncate(Vector& coeffs) {
  const double largest = coeffs.cwiseAbs().maxCoeff();
  int deg = 0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    if (std::abs(coeffs(k)) <= kCoefficientTruncation * largest)
      coeffs(k) = 0.0;
    else
      deg = static_cast<int>(k);
  }
  return deg;
}

Vector multiply(const Vector& a, const Vector& b) {
  Vector out = Vector::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
  return out;
}

// Coefficients of |F(iy)|^2 in powers of y for real coefficients f.
Vector modulus_squared_on_axis(const Vector& f) {
  const auto n = f.size();
  Vector out = Vector::Zero(2 * n - 1);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) {
      // i^k (-i)^l = i^(k+l) (-1)^l, real only when k + l is even.
      if ((k + l) % 2 != 0) continue;
      const double sign = (((k + l) / 2 + l) % 2 == 0) ? 1.0 : -1.0;
      out(k + l) += sign * f(k) * f(l);
    }
  return out;
}

double horner(const Vector& c, double x) {
  double v = 0.0;
  for (Eigen::Index k = c.size(); k-- > 0;) v = v * x + c(k);
  return v;
}

}  // namespace

std::complex<double> StabilityFunction::operator()(std::complex<double> z) const {
  std::complex<double> p = 0.0, q = 0.0;
  for (Eigen::Index k = p_coeffs.size(); k-- > 0;) p = p * z + p_coeffs(k);
  for (Eigen::Index k = q_coeffs.size(); k-- > 0;) q = q * z + q_coeffs(k);
  return p / q;
}

StabilityFunction stability_function(
    const ButcherTableau& t, const Vector& weights,
    const std::optional<std::vector<double>>& sample_points) {
  const int s = t.stages();
  std::vector<double> z = sample_points ? *sample_points : default_samples(s + 1);
  if (static_cast<int>(z.size()) != s + 1) {
    throw std::invalid_argument(fmt::format(
        "stability_function: need {} sample points, got {}", s + 1, z.size()));
  }

  const Matrix eye = Matrix::Identity(s, s);
  const Matrix ewt = Vector::Ones(s) * weights.transpose();
  std::vector<double> values;
  values.reserve(z.size());
  for (double zk : z)
    values.push_back(Eigen::PartialPivLU<Matrix>(eye - zk * t.a + zk * ewt).determinant());

  StabilityFunction sf;
  sf.p_coeffs = interpolate(z, values);
  sf.deg_p = truncate(sf.p_coeffs);

  Vector q = Vector::Ones(1);
  for (int i = 0; i < s; ++i) {
    const double d = t.a(i, i);
    if (d == 0.0) continue;
    Vector factor(2);
    factor << 1.0, -d;
    q = multiply(q, factor);
    sf.poles.push_back(1.0 / d);
  }
  sf.q_coeffs = q;
  sf.deg_q = static_cast<int>(q.size()) - 1;

  if (sf.deg_p > sf.deg_q)
    sf.r_inf = std::numeric_limits<double>::infinity();
  else if (sf.deg_p < sf.deg_q)
    sf.r_inf = 0.0;
  else
    sf.r_inf = std::abs(sf.p_coeffs(sf.deg_p) / sf.q_coeffs(sf.deg_q));
  return sf;
}

double r_infinity_stiffly_accurate(const ButcherTableau& t,
                                   const Vector& weights) {
  int row = -1;
  for (int r = t.stages() - 1; r >= 0; --r) {
    if (((t.a.row(r).transpose() - weights).array().abs() <= kRowMatch).all()) {
      row = r;
      break;
    }
  }
  if (row < 0) {
    throw std::invalid_argument(fmt::format(
        "'{}': the weights do not coincide with any row of A", t.name));
  }
  if (row == 0) return 1.0;  // x_{n+1} = x_n
  const int m = row;  // size of A~
  const Matrix at = t.a.block(1, 1, m, m);
  const Vector av = t.a.block(1, 0, m, 1);
  for (int i = 0; i < m; ++i)
    if (at(i, i) == 0.0)
      throw DegenerateTableauError(fmt::format(
          "'{}': zero diagonal entry in stage {}; R(inf) is undefined", t.name,
          i + 2));
  const Vector y = at.triangularView<Eigen::Lower>().solve(av);
  return -y(m - 1);
}

double r_infinity_stiffly_accurate(const ButcherTableau& t) {
  return r_infinity_stiffly_accurate(t, t.b);
}

double laguerre(int n, double x) {
  if (n < 0 || n > 8)
    throw std::invalid_argument(fmt::format("laguerre: n = {} outside [0, 8]", n));
  double sum = 0.0, binom = 1.0, power = 1.0, fact = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) {
      binom = binom * (n - j + 1) / j;
      power *= x;
      fact *= j;
    }
    sum += (j % 2 == 0 ? 1.0 : -1.0) * binom * power / fact;
  }
  return sum;
}

AStabilityScan a_stability_scan(const StabilityFunction& sf, int n_samples) {
  if (n_samples < 100)
    throw std::invalid_argument("a_stability_scan: need at least 100 samples");
  const Vector qq = modulus_squared_on_axis(sf.q_coeffs);
  const Vector pp = modulus_squared_on_axis(sf.p_coeffs);
  Vector e = Vector::Zero(std::max(qq.size(), pp.size()));
  e.head(qq.size()) += qq;
  e.head(pp.size()) -= pp;
  const double scale =
      std::max(qq.cwiseAbs().maxCoeff(), pp.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < e.size(); ++k)
    if (std::abs(e(k)) <= kCoefficientTruncation * scale) e(k) = 0.0;

  AStabilityScan scan;
  scan.samples = n_samples + 1;
  scan.min_e = horner(e, 0.0);
  scan.argmin_y = 0.0;
  const double lo = std::log10(1e-3), hi = std::log10(1e6);
  for (int k = 0; k < n_samples; ++k) {
    const double y = std::pow(10.0, lo + (hi - lo) * k / (n_samples - 1));
    const double v = horner(e, y);
    if (v < scan.min_e) {
      scan.min_e = v;
      scan.argmin_y = y;
    }
  }
  scan.degree_ok = sf.deg_p <= sf.deg_q;
  scan.poles_ok = std::all_of(sf.poles.begin(), sf.poles.end(),
                              [](double p) { return p > 0.0; });
  scan.a_stable_consistent =
      scan.degree_ok && scan.poles_ok && scan.min_e >= -kAStabilityTolerance;
  return scan;
}

}  // namespace esdirk
