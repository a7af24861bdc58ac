#include "esdirk/tableau.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

constexpr double kRowMatchTolerance = 1e-15;
constexpr double kAbscissaTolerance = 1e-14;

Matrix lower(std::initializer_list<std::initializer_list<double>> rows) {
  const auto s = static_cast<Eigen::Index>(rows.size());
  Matrix a = Matrix::Zero(s, s);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) a(i, j++) = v;
    ++i;
  }
  return a;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

bool is_esdirk(const Matrix& a) {
  const auto s = a.rows();
  if (s < 2 || a(0, 0) != 0.0) return false;
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i + 1; j < s; ++j)
      if (a(i, j) != 0.0) return false;
  const double g = a(1, 1);
  for (Eigen::Index i = 2; i < s; ++i)
    if (std::abs(a(i, i) - g) > kRowMatchTolerance * std::max(1.0, std::abs(g)))
      return false;
  return g != 0.0;
}

// Symbolic families parameterized by the diagonal entry.

ButcherTableau esdirk12() {
  return make_tableau("ESDIRK12", lower({{0.0}, {0.0, 1.0}}), vec({0.0, 1.0}),
                      vec({0.5, 0.5}), vec({0.0, 1.0}), 1, 2);
}

ButcherTableau esdirk23() {
  const double g = (2.0 - std::sqrt(2.0)) / 2.0;
  const double w = (1.0 - g) / 2.0;
  Matrix a = lower({{0.0}, {g, g}, {w, w, g}});
  Vector b_hat = vec({(6.0 * g - 1.0) / (12.0 * g),
                      1.0 / (12.0 * g * (1.0 - 2.0 * g)),
                      (1.0 - 3.0 * g) / (3.0 * (1.0 - 2.0 * g))});
  Vector b = a.row(2).transpose();
  return make_tableau("ESDIRK23", a, b, b_hat, vec({0.0, 2.0 * g, 1.0}), 2, 3);
}

// The ESDIRK34 coefficients are only available as decimals.
constexpr double kGamma34 = 0.43586652150845899942;

ButcherTableau esdirk34() {
  const double g = kGamma34;
  Matrix a = lower({{0.0},
                    {0.43586652150845899942, g},
                    {0.14073777472470619619, -0.1083655513813208000, g},
                    {0.10239940061991099768, -0.3768784522555561061,
                     0.83861253012718610911, g}});
  Vector b = a.row(3).transpose();
  Vector b_hat = vec({0.15702489786032493710, 0.11733044137043884870,
                      0.61667803039212146434, 0.10896663037711474985});
  Vector c = vec({0.0, 0.87173304301691799883, 0.46823874485184439565, 1.0});
  return make_tableau("ESDIRK34", a, b, b_hat, c, 3, 4);
}

// Four-stage family with two stiffly accurate rows: row 3 has order 2 and
// row 4 has order 3 for any admissible gamma.
Matrix kvaerno4(double g) {
  return lower({{0.0},
                {g, g},
                {(-4.0 * g * g + 6.0 * g - 1.0) / (4.0 * g),
                 (-2.0 * g + 1.0) / (4.0 * g), g},
                {(6.0 * g - 1.0) / (12.0 * g),
                 -1.0 / (12.0 * g * (2.0 * g - 1.0)),
                 (-6.0 * g * g + 6.0 * g - 1.0) / (3.0 * (2.0 * g - 1.0)), g}});
}

ButcherTableau esdirk32a() {
  const double g = kGamma34;
  Matrix a = kvaerno4(g);
  Vector b = a.row(3).transpose();
  Vector b_hat = a.row(2).transpose();
  return make_tableau("ESDIRK32a", a, b, b_hat, vec({0.0, 2.0 * g, 1.0, 1.0}),
                      3, 2);
}

ButcherTableau esdirk32b() {
  const double g = (2.0 - std::sqrt(2.0)) / 2.0;
  Matrix a = kvaerno4(g);
  Vector b = a.row(2).transpose();
  Vector b_hat = a.row(3).transpose();
  return make_tableau("ESDIRK32b", a, b, b_hat, vec({0.0, 2.0 * g, 1.0, 1.0}),
                      2, 3);
}

ButcherTableau esdirk43b() {
  const double g = 0.43586652150846;
  Matrix a = lower({{0.0},
                    {0.43586652150846, g},
                    {0.14073777472471, -0.10836555138132, g},
                    {0.10239940061991, -0.37687845225556, 0.83861253012719, g},
                    {0.15702489786032, 0.11733044137044, 0.61667803039212,
                     -0.32689989113134, g}});
  Vector b = a.row(3).transpose();
  Vector b_hat = a.row(4).transpose();
  Vector c = vec({0.0, 0.87173304301692, 0.46823874485185, 1.0, 1.0});
  return make_tableau("ESDIRK43b", a, b, b_hat, c, 3, 4);
}

ButcherTableau esdirk32c() {
  Matrix a = lower({{0.0},
                    {1.0 / 2.0, 1.0 / 2.0},
                    {5.0 / 8.0, 3.0 / 8.0, 1.0 / 2.0},
                    {7.0 / 18.0, 1.0 / 3.0, -2.0 / 9.0, 1.0 / 2.0}});
  Vector b = a.row(3).transpose();
  Vector b_hat = vec({0.5, 0.5, 0.0, 0.0});
  return make_tableau("ESDIRK32c", a, b, b_hat, vec({0.0, 1.0, 1.5, 1.0}), 3,
                      2);
}

ButcherTableau esdirk45c() {
  Matrix a = lower(
      {{0.0},
       {1.0 / 4.0, 1.0 / 4.0},
       {1.0 / 16.0, -1.0 / 16.0, 1.0 / 4.0},
       {-7.0 / 36.0, -4.0 / 9.0, 8.0 / 9.0, 1.0 / 4.0},
       {-5.0 / 48.0, -257.0 / 768.0, 5.0 / 6.0, 27.0 / 256.0, 1.0 / 4.0},
       {1.0 / 4.0, 2.0 / 3.0, -1.0 / 3.0, 1.0 / 2.0, -1.0 / 3.0, 1.0 / 4.0}});
  Vector b = a.row(5).transpose();
  // The printed second weight row. Its entries sum to one and satisfy all
  // order-4 conditions, so it is the embedded quadrature, not b - b_hat.
  Vector b_hat = vec({7.0 / 90.0, 3.0 / 20.0, 16.0 / 45.0, -1.0 / 60.0,
                      16.0 / 45.0, 7.0 / 90.0});
  Vector c = vec({0.0, 0.5, 0.25, 0.5, 0.75, 1.0});
  auto t = make_tableau("ESDIRK45c", a, b, b_hat, c, 4, 4);
  t.flags.embedded_order_uncertain = true;
  return t;
}

}  // namespace

ButcherTableau make_tableau(std::string name, Matrix a, Vector b,
                            std::optional<Vector> b_hat, Vector c, int order,
                            int embedded_order) {
  const auto s = c.size();
  if (s < 1 || a.rows() != s || a.cols() != s || b.size() != s ||
      (b_hat && b_hat->size() != s)) {
    throw std::invalid_argument(
        fmt::format("tableau '{}': inconsistent dimensions", name));
  }

  ButcherTableau t;
  t.name = std::move(name);
  t.a = std::move(a);
  t.b = std::move(b);
  t.c = std::move(c);
  t.b_hat = std::move(b_hat);
  if (t.b_hat) t.d = t.b - *t.b_hat;
  t.order = order;
  t.embedded_order = embedded_order;

  t.flags.esdirk = is_esdirk(t.a);
  t.gamma = s >= 2 ? t.a(1, 1) : t.a(0, 0);

  for (Eigen::Index r = 0; r < s; ++r) {
    if (std::abs(t.c(r) - 1.0) > kAbscissaTolerance) continue;
    if (((t.a.row(r).transpose() - t.b).array().abs() <= kRowMatchTolerance)
            .all()) {
      t.solution_stage = static_cast<int>(r);
      break;
    }
  }
  t.flags.stiffly_accurate = t.solution_stage.has_value();
  t.flags.fsal = t.flags.esdirk && t.c(0) == 0.0 && t.flags.stiffly_accurate;
  t.flags.event_safe = (t.c.array() >= -kAbscissaTolerance).all() &&
                       (t.c.array() <= 1.0 + kAbscissaTolerance).all();
  return t;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{
      "ESDIRK12",  "ESDIRK23",  "ESDIRK34",  "ESDIRK32a",
      "ESDIRK32b", "ESDIRK43b", "ESDIRK32c", "ESDIRK45c"};
  return names;
}

ButcherTableau builtin(std::string_view name) {
  if (name == "ESDIRK12") return esdirk12();
  if (name == "ESDIRK23") return esdirk23();
  if (name == "ESDIRK34") return esdirk34();
  if (name == "ESDIRK32a") return esdirk32a();
  if (name == "ESDIRK32b") return esdirk32b();
  if (name == "ESDIRK43b") return esdirk43b();
  if (name == "ESDIRK32c") return esdirk32c();
  if (name == "ESDIRK45c") return esdirk45c();
  throw NotFoundError(fmt::format("unknown method '{}'; valid names: {}", name,
                                  fmt::join(builtin_names(), ", ")));
}

ButcherTableau leading_subtableau(const ButcherTableau& t, int stages) {
  if (stages < 1 || stages > t.stages()) {
    throw std::invalid_argument(
        fmt::format("leading_subtableau: {} stages requested from a {}-stage "
                    "tableau",
                    stages, t.stages()));
  }
  Matrix a = t.a.topLeftCorner(stages, stages);
  Vector b = a.row(stages - 1).transpose();
  return make_tableau(fmt::format("{}[1..{}]", t.name, stages), a, b,
                      std::nullopt, t.c.head(stages), 0, 0);
}

CheckReport check_consistency(const ButcherTableau& t) {
  CheckReport r{"consistency", true, 0.0, {}};
  const Vector row_sums = t.a.rowwise().sum();
  Eigen::Index worst = 0;
  r.residual = (row_sums - t.c).cwiseAbs().maxCoeff(&worst);
  r.passed = r.residual <= kConsistencyTolerance;
  r.detail = fmt::format("max |sum_j a_ij - c_i| = {:.3e} (row {})", r.residual,
                         worst + 1);
  return r;
}

CheckReport check_stage_order_2(const ButcherTableau& t) {
  CheckReport r{"stage_order_2", true, 0.0, {}};
  const int s = t.stages();
  if (s <= 2) {
    r.detail = "no interior stages";
    return r;
  }
  const Vector ac = t.a * t.c;
  for (int i = 1; i < s - 1; ++i) {
    r.residual =
        std::max(r.residual, std::abs(ac(i) - 0.5 * t.c(i) * t.c(i)));
  }
  const double c2_residual = std::abs(t.c(1) - 2.0 * t.gamma);
  r.passed = r.residual <= kStageOrderTolerance &&
             (!t.flags.esdirk || c2_residual <= kStageOrderTolerance);
  r.detail = fmt::format(
      "max |sum_j a_ij c_j - c_i^2/2| over stages 2..{} = {:.3e}; "
      "|c_2 - 2 gamma| = {:.3e}",
      s - 1, r.residual, c2_residual);
  r.residual = std::max(r.residual, c2_residual);
  return r;
}

}  // namespace esdirk
