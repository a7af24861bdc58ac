#include "esdirk/dense_output.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "esdirk/errors.hpp"
#include "esdirk/order_conditions.hpp"
#include "linalg.hpp"

namespace esdirk {

namespace {

struct Block {
  std::string name;
  Eigen::Index first_row;
  Eigen::Index rows;
};

struct System {
  Matrix m;
  Vector rhs;
  std::vector<Block> blocks;
};

void check_stage(const ButcherTableau& t, const SideCondition& c, int lowest) {
  if (c.stage < lowest || c.stage > t.stages()) {
    throw std::invalid_argument(fmt::format(
        "{}: stage index must lie in [{}, {}]", c.label(), lowest, t.stages()));
  }
}

System assemble(const ButcherTableau& t, int q,
                const std::vector<SideCondition>& conds) {
  if (q < 1 || q > kMaxExtensionOrder) {
    throw UnsupportedOrderError(
        fmt::format("continuous extension of order {} not supported", q));
  }
  const int s = t.stages();
  const int trees = tree_count(q);
  const Eigen::Index rows = static_cast<Eigen::Index>(trees) * q +
                            static_cast<Eigen::Index>(conds.size()) * s;
  System sys{Matrix::Zero(rows, s * q), Vector::Zero(rows), {}};
  auto col = [s](int stage, int power) { return (power - 1) * s + stage; };

  const Matrix psi = psi_bar(t);
  Eigen::Index r = 0;
  for (int k = 1; k <= q; ++k) {
    for (int tau = 0; tau < trees; ++tau, ++r) {
      sys.m.block(r, col(0, k), 1, s) = psi.row(tau);
      const auto& tree = rooted_trees()[tau];
      sys.rhs(r) = tree.order == k ? 1.0 / tree.density : 0.0;
    }
  }
  sys.blocks.push_back({fmt::format("order <= {}", q), 0, r});

  for (const auto& c : conds) {
    const Eigen::Index first = r;
    switch (c.kind) {
      case SideKind::EndpointB:
      case SideKind::EndpointBhat: {
        if (c.kind == SideKind::EndpointBhat && !t.b_hat) {
          throw std::invalid_argument(
              fmt::format("'{}' has no embedded weights", t.name));
        }
        const Vector& w = c.kind == SideKind::EndpointB ? t.b : *t.b_hat;
        for (int j = 0; j < s; ++j, ++r) {
          for (int k = 1; k <= q; ++k) sys.m(r, col(j, k)) = 1.0;
          sys.rhs(r) = w(j);
        }
        break;
      }
      case SideKind::StageMatch: {
        check_stage(t, c, 2);
        const int i = c.stage - 1;
        for (int j = 0; j < s; ++j, ++r) {
          for (int k = 1; k <= q; ++k)
            sys.m(r, col(j, k)) = std::pow(t.c(i), k);
          sys.rhs(r) = t.a(i, j);
        }
        break;
      }
      case SideKind::DerivativeMatch: {
        check_stage(t, c, 1);
        const int i = c.stage - 1;
        for (int j = 0; j < s; ++j, ++r) {
          for (int k = 1; k <= q; ++k)
            sys.m(r, col(j, k)) = k * std::pow(t.c(i), k - 1);
          sys.rhs(r) = j == i ? 1.0 : 0.0;
        }
        break;
      }
    }
    sys.blocks.push_back({c.label(), first, r - first});
  }
  return sys;
}

Vector to_vec(const Matrix& b_bar) {
  return Eigen::Map<const Vector>(b_bar.data(), b_bar.size());
}

ExtensionMatrix stored(std::string method, std::string variant, Matrix b_bar,
                       std::vector<SideCondition> conds,
                       std::optional<SolutionMode> derivation) {
  ExtensionMatrix em;
  em.method = std::move(method);
  em.variant = std::move(variant);
  em.order = static_cast<int>(b_bar.cols());
  em.b_bar = std::move(b_bar);
  em.side_conditions = std::move(conds);
  em.mode = SolutionMode::Stored;
  em.derivation = derivation;
  em.unknowns = static_cast<int>(em.b_bar.size());
  return em;
}

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix out(n, m);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

}  // namespace

std::string SideCondition::label() const {
  switch (kind) {
    case SideKind::EndpointB: return "endpoint_b";
    case SideKind::EndpointBhat: return "endpoint_bhat";
    case SideKind::StageMatch: return fmt::format("stage_match({})", stage);
    case SideKind::DerivativeMatch:
      return fmt::format("derivative_match({})", stage);
  }
  return "?";
}

std::string_view to_string(SolutionMode mode) {
  switch (mode) {
    case SolutionMode::Unique: return "unique";
    case SolutionMode::MinNorm: return "min_norm";
    case SolutionMode::MinNormWithDerivative: return "min_norm_with_derivative";
    case SolutionMode::Stored: return "stored";
  }
  return "?";
}

Matrix psi_bar(const ButcherTableau& t) {
  Matrix out(8, t.stages());
  for (int k = 0; k < 8; ++k)
    out.row(k) = psi_vector(t, rooted_trees()[k]).transpose();
  return out;
}

ExtensionMatrix solve_extension(const ButcherTableau& t, int q,
                                const std::vector<SideCondition>& conds) {
  const System sys = assemble(t, q, conds);
  const auto sol = detail::min_norm_solve(sys.m, sys.rhs, kRankThreshold);
  const Vector res = sys.m * sol.x - sys.rhs;
  const double relative = res.norm() / sys.rhs.norm();

  if (relative > kExtensionInfeasibility) {
    const Block* worst = &sys.blocks.front();
    double worst_norm = -1.0;
    for (const auto& b : sys.blocks) {
      const double n = res.segment(b.first_row, b.rows).norm();
      if (n > worst_norm) {
        worst_norm = n;
        worst = &b;
      }
    }
    throw InfeasibleError(
        fmt::format("no order-{} continuous extension of '{}' satisfies the "
                    "conditions (relative residual {:.3e}, largest in {})",
                    q, t.name, relative, worst->name),
        relative, worst->name);
  }

  ExtensionMatrix em;
  em.method = t.name;
  em.order = q;
  em.side_conditions = conds;
  em.b_bar = Eigen::Map<const Matrix>(sol.x.data(), t.stages(), q);
  em.rank = sol.rank;
  em.unknowns = static_cast<int>(sys.m.cols());
  em.residual = relative;
  if (em.rank == em.unknowns) {
    em.mode = SolutionMode::Unique;
  } else {
    const bool with_derivative =
        std::any_of(conds.begin(), conds.end(), [](const SideCondition& c) {
          return c.kind == SideKind::DerivativeMatch;
        });
    em.mode = with_derivative ? SolutionMode::MinNormWithDerivative
                              : SolutionMode::MinNorm;
  }
  em.variant = fmt::format("o{}_{}", q, to_string(em.mode));
  return em;
}

Vector extension_weights(const ExtensionMatrix& em, double theta) {
  Vector w = Vector::Zero(em.stages());
  for (Eigen::Index k = em.b_bar.cols(); k-- > 0;)
    w = (w + em.b_bar.col(k)) * theta;
  return w;
}

Vector extension_weights_derivative(const ExtensionMatrix& em, double theta) {
  Vector w = Vector::Zero(em.stages());
  for (Eigen::Index k = em.b_bar.cols(); k-- > 0;)
    w = w * theta + static_cast<double>(k + 1) * em.b_bar.col(k);
  return w;
}

Vector eval_extension(const ExtensionMatrix& em, const Vector& x_n, double h,
                      const Matrix& k, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw OutOfRangeError(
        fmt::format("theta = {} outside [0, 1]; extrapolation is refused", theta));
  }
  return x_n + h * (k.transpose() * extension_weights(em, theta));
}

const std::vector<std::pair<std::string, std::string>>& extension_catalog() {
  static const std::vector<std::pair<std::string, std::string>> catalog{
      {"ESDIRK12", "o1"},         {"ESDIRK12", "o2"},
      {"ESDIRK23", "o2"},         {"ESDIRK23", "o3"},
      {"ESDIRK34", "o2_24"},      {"ESDIRK34", "o2_34"},
      {"ESDIRK34", "o3_minnorm"}, {"ESDIRK34", "o3_mincurv"},
      {"ESDIRK34", "o3_deriv"},   {"ESDIRK32a", "o3_deriv"},
      {"ESDIRK32b", "o2"},        {"ESDIRK43b", "o3_deriv"},
  };
  return catalog;
}

ExtensionMatrix builtin_extension(std::string_view method,
                                  std::string_view variant) {
  using SC = SideCondition;
  using enum SolutionMode;
  const std::string m(method), v(variant);
  const double r2 = std::sqrt(2.0);

  if (m == "ESDIRK12" && v == "o1")
    return stored(m, v, rows_of({{0.0}, {1.0}}), {SC::endpoint_b()}, Unique);
  if (m == "ESDIRK12" && v == "o2")
    return stored(m, v, rows_of({{1.0, -0.5}, {0.0, 0.5}}), {}, Unique);

  if (m == "ESDIRK23" && v == "o2") {
    return stored(m, v,
                  rows_of({{r2 / 2, -r2 / 4}, {r2 / 2, -r2 / 4}, {1 - r2, r2 / 2}}),
                  {SC::endpoint_b(), SC::stage_match(2)}, Unique);
  }
  if (m == "ESDIRK23" && v == "o3") {
    return stored(m, v,
                  rows_of({{1, -1.35355339059327, 0.569035593728849},
                           {0, 2.06066017177982, -1.37377344785321},
                           {0, -0.707106781186547, 0.804737854124365}}),
                  {SC::endpoint_bhat()}, Unique);
  }

  if (m == "ESDIRK34" && v == "o2_24") {
    return stored(m, v,
                  rows_of({{3.20218915732655, -3.09978975670664},
                           {6.45947654423207, -6.83635499648762},
                           {-5.69941214787150, 6.53802467799868},
                           {-2.96225355368712, 3.39812007519558}}),
                  {SC::stage_match(2), SC::stage_match(4)}, Unique);
  }
  if (m == "ESDIRK34" && v == "o2_34") {
    return stored(m, v,
                  rows_of({{0.47506477777383, -0.372665377153919},
                           {-0.103360609602923, -0.273517842652633},
                           {1.01209512329345, -0.173482593166265},
                           {-0.383799291464359, 0.819665812972817}}),
                  {SC::stage_match(3), SC::stage_match(4)}, Unique);
  }
  if (m == "ESDIRK34" && v == "o3_minnorm") {
    return stored(
        m, v,
        rows_of({{0.969611875176691, -1.53835725968354, 0.671144785126761},
                 {-0.274928052044991, 0.266658367468879, -0.368608767679444},
                 {0.123462002567514, 1.88835458133267, -1.173204053773},
                 {0.181854174300786, -0.61665568911801, 0.870668036325683}}),
        {SC::endpoint_b()}, MinNorm);
  }
  if (m == "ESDIRK34" && v == "o3_mincurv") {
    return stored(
        m, v,
        rows_of({{0.927166003679448, -1.64140141649749, 0.816634813437953},
                 {-0.658945191501327, -0.665604793624494, 0.947671532870265},
                 {0.29591266631342, 2.30700621012198, -1.76430634630822},
                 {0.43586652150846, 0, 0}}),
        {SC::endpoint_b()}, std::nullopt);
  }
  if (m == "ESDIRK34" && v == "o3_deriv") {
    return stored(
        m, v,
        rows_of({{0.92277773077164, -1.53835725968353, 0.71797892953181},
                 {-0.69864686211777, 0.26665836746888, 0.05511004239334},
                 {0.31374150452444, 1.88835458133266, -1.36348355572992},
                 {0.46212762682169, -0.61665568911801, 0.59039458380477}}),
        {SC::endpoint_b(), SC::derivative_match(4)}, MinNormWithDerivative);
  }
  if (m == "ESDIRK32a" && v == "o3_deriv") {
    return stored(
        m, v,
        rows_of({{1.00000000000000, -1.07357009006975, 0.38238006004650},
                 {0.00000000000000, 4.47169016526534, -2.98112677684356},
                 {-0.86407093427697, -1.97757777116702, 1.60640882553700},
                 {0.86407093427697, -1.42054230402855, 0.99233789126005}}),
        {SC::endpoint_b(), SC::derivative_match(4)}, MinNormWithDerivative);
  }
  if (m == "ESDIRK32b" && v == "o2") {
    return stored(m, v,
                  rows_of({{r2 / 2, -r2 / 4},
                           {r2 / 2, -r2 / 4},
                           {1 - r2, r2 / 2},
                           {0, 0}}),
                  {SC::stage_match(2), SC::endpoint_b(), SC::derivative_match(3)},
                  Unique);
  }
  if (m == "ESDIRK43b" && v == "o3_deriv") {
    return stored(
        m, v,
        rows_of({{0.91305667617487, -1.51891515049001, 0.70825787493505},
                 {-0.78659538212849, 0.44255540749030, -0.03283847761737},
                 {0.35323656631463, 1.80936445775230, -1.32398849393974},
                 {0.30072875082513, -0.29385793712489, 0.42899570780821},
                 {0.21957338881385, -0.43914677762771, 0.21957338881385}}),
        {SC::endpoint_b(), SC::derivative_match(4)}, MinNormWithDerivative);
  }

  std::vector<std::string> names;
  for (const auto& [mm, vv] : extension_catalog())
    names.push_back(fmt::format("{}/{}", mm, vv));
  throw NotFoundError(fmt::format("no stored extension '{}/{}'; catalog: {}",
                                  method, variant, fmt::join(names, ", ")));
}

std::vector<InfeasibleCase> known_infeasible_extensions(std::string_view method) {
  using SC = SideCondition;
  if (method == "ESDIRK23") return {{3, {SC::endpoint_b()}}};
  if (method == "ESDIRK34") {
    return {{2, {SC::stage_match(2), SC::stage_match(3), SC::stage_match(4)}},
            {3, {SC::stage_match(2), SC::stage_match(3), SC::stage_match(4)}},
            {3, {SC::stage_match(2), SC::stage_match(4)}},
            {3, {SC::stage_match(3), SC::stage_match(4)}},
            {4, {}}};
  }
  if (method == "ESDIRK32a")
    return {{3, {SC::endpoint_b(), SC::stage_match(2)}}};
  if (method == "ESDIRK43b") {
    const auto b = SC::endpoint_b();
    const auto d = SC::derivative_match(4);
    return {{3, {b, d, SC::stage_match(2)}},
            {3, {b, d, SC::stage_match(3)}},
            {3, {b, d, SC::stage_match(2), SC::stage_match(3)}},
            {3, {b, SC::stage_match(2)}},
            {3, {b, SC::stage_match(3)}}};
  }
  return {};
}

std::optional<ExtensionMatrix> default_extension(std::string_view method) {
  if (method == "ESDIRK12") return builtin_extension(method, "o1");
  if (method == "ESDIRK23") return builtin_extension(method, "o2");
  if (method == "ESDIRK34" || method == "ESDIRK32a" || method == "ESDIRK43b")
    return builtin_extension(method, "o3_deriv");
  if (method == "ESDIRK32b") return builtin_extension(method, "o2");
  return std::nullopt;
}

ExtensionCheck check_extension(const ButcherTableau& t,
                               const ExtensionMatrix& em, double tol) {
  if (em.stages() != t.stages()) {
    throw std::invalid_argument(
        fmt::format("extension has {} stages, tableau '{}' has {}", em.stages(),
                    t.name, t.stages()));
  }
  const System sys = assemble(t, em.order, em.side_conditions);
  const Vector res = sys.m * to_vec(em.b_bar) - sys.rhs;
  ExtensionCheck out;
  const auto& order_block = sys.blocks.front();
  out.order_residual =
      res.segment(order_block.first_row, order_block.rows).cwiseAbs().maxCoeff();
  if (sys.blocks.size() > 1) {
    const auto first = sys.blocks[1].first_row;
    out.side_residual = res.tail(res.size() - first).cwiseAbs().maxCoeff();
  }
  out.passed = out.order_residual <= tol && out.side_residual <= tol;
  return out;
}

}  // namespace esdirk

namespace esdirk {

Vector DenseSegment::eval(double theta) const {
  if (!extension) {
    throw UnsupportedMethodError("segment carries no continuous extension");
  }
  return eval_extension(*extension, x_n, h, k, theta);
}

Vector DenseSegment::eval_at(double t) const {
  const double theta = (t - t_n) / h;
  // Absorb rounding in t_n + theta h; anything further out is refused.
  constexpr double slack = 1e-12;
  if (theta < -slack || theta > theta_end + slack) {
    throw OutOfRangeError(fmt::format("t = {} outside segment [{}, {}]", t, t_n,
                                      t_end()));
  }
  return eval(std::clamp(theta, 0.0, theta_end));
}

}  // namespace esdirk
