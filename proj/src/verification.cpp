#include "esdirk/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "esdirk/dense_output.hpp"
#include "esdirk/errors.hpp"
#include "esdirk/order_conditions.hpp"
#include "esdirk/stability.hpp"

namespace esdirk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRInfTolerance = 1e-3;
constexpr double kPathAgreement = 1e-10;
constexpr double kGammaTolerance = 5e-5;  // published to four digits
constexpr double kLaguerreTolerance = 1e-6;
constexpr double kWeightTolerance = 1e-10;
constexpr double kUniqueTolerance = 1e-10;
constexpr double kMinNormTolerance = 1e-8;

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string magnitude(double v) {
  return std::isinf(v) ? "inf" : fmt::format("{:.6g}", v);
}

RowStatus status(bool ok) { return ok ? RowStatus::Pass : RowStatus::Fail; }

// Zero-based index of a row of A equal to w with c = 1.
std::optional<int> matching_row(const ButcherTableau& t, const Vector& w) {
  for (int r = t.stages() - 1; r >= 0; --r) {
    if (std::abs(t.c(r) - 1.0) > 1e-14) continue;
    if (((t.a.row(r).transpose() - w).array().abs() <= 1e-15).all()) return r;
  }
  return std::nullopt;
}

bool r_inf_matches(double measured, double expected) {
  if (std::isinf(expected)) return std::isinf(measured);
  return std::abs(measured - expected) <= kRInfTolerance;
}

void order_rows(VerificationReport& rep, const ButcherTableau& t,
                const Vector& w, const std::string& label,
                std::optional<int> expected, bool uncertain) {
  const int cap = std::min(expected.value_or(kMaxTreeOrder), kMaxTreeOrder);
  const OrderReport full = verify_order(t, w, kMaxTreeOrder);
  if (!expected || uncertain || *expected > kMaxTreeOrder) {
    rep.rows.push_back({label + " order",
                        expected ? fmt::format("({})", *expected) : "-",
                        fmt::format(">= {} (trees up to order 4)", full.observed_order),
                        0.0, RowStatus::Info});
    if (expected && cap > 0) {
      const OrderReport r = verify_order(t, w, cap);
      double worst = 0.0;
      for (const auto& tc : r.trees)
        if (tc.tree_order <= cap) worst = std::max(worst, tc.residual);
      rep.rows.push_back({fmt::format("{} order conditions <= {}", label, cap),
                          "hold", r.passed ? "hold" : "violated", worst,
                          status(r.passed)});
    }
    return;
  }
  const OrderReport r = verify_order(t, w, *expected);
  double worst = 0.0;
  for (const auto& tc : r.trees)
    if (tc.tree_order <= *expected) worst = std::max(worst, tc.residual);
  rep.rows.push_back({label + " order", std::to_string(*expected),
                      std::to_string(full.observed_order), worst,
                      status(r.passed)});
  if (r.next_order_holds) {
    rep.rows.push_back({label + " order is sharp",
                        fmt::format("order {} violated", *expected + 1),
                        *r.next_order_holds ? "holds" : "violated", 0.0,
                        status(!*r.next_order_holds)});
  }
}

void stability_rows(VerificationReport& rep, const ButcherTableau& t,
                    const Vector& w, const std::string& label,
                    std::optional<double> expected_r_inf,
                    std::optional<bool> expected_a_stable, bool informational_as,
                    int scan_samples) {
  const StabilityFunction sf = stability_function(t, w);
  rep.rows.push_back(
      {label + " |R(inf)|",
       expected_r_inf ? magnitude(*expected_r_inf) : "-", magnitude(sf.r_inf),
       expected_r_inf && !std::isinf(*expected_r_inf) && !std::isinf(sf.r_inf)
           ? std::abs(sf.r_inf - *expected_r_inf)
           : 0.0,
       expected_r_inf ? status(r_inf_matches(sf.r_inf, *expected_r_inf))
                      : RowStatus::Info});

  if (auto row = matching_row(t, w)) {
    const double direct = std::abs(r_infinity_stiffly_accurate(t, w));
    const double diff = std::isinf(sf.r_inf) ? kInf : std::abs(direct - sf.r_inf);
    rep.rows.push_back({label + " R(inf) from stiffly accurate row",
                        magnitude(sf.r_inf), magnitude(direct), diff,
                        status(diff <= kPathAgreement)});
  }

  const AStabilityScan scan = a_stability_scan(sf, scan_samples);
  const std::string measured = fmt::format(
      "{} (min E = {:.3e}, deg P = {}, deg Q = {})",
      yes_no(scan.a_stable_consistent), scan.min_e, sf.deg_p, sf.deg_q);
  RowStatus st = RowStatus::Info;
  std::string expected = "-";
  if (expected_a_stable) {
    expected = yes_no(*expected_a_stable);
    const bool agree = scan.a_stable_consistent == *expected_a_stable;
    st = agree ? RowStatus::Pass
               : (informational_as ? RowStatus::Info : RowStatus::Fail);
    if (!agree && informational_as) expected += " (discrepancy)";
  }
  rep.rows.push_back({label + " A-stable", expected, measured,
                      std::min(scan.min_e, 0.0), st});
}

}  // namespace

std::optional<MethodProperties> published_properties(std::string_view name) {
  static const std::vector<MethodProperties> table{
      {"ESDIRK12", 2, 1.0, 1, true, 0.0, true, 2, false, kInf, false},
      {"ESDIRK23", 3, 0.2929, 2, true, 0.0, true, 3, false, kInf, false},
      {"ESDIRK34", 4, 0.4359, 3, true, 0.0, true, 4, false, kInf, false},
      {"ESDIRK32a", 4, 0.4359, 3, true, 0.0, true, 2, true, 0.9569, true},
      {"ESDIRK32b", 4, 0.2929, 2, true, 0.0, true, 3, true, 1.609, true},
      {"ESDIRK43b", 5, 0.4359, 3, true, 0.0, true, 4, true, 0.7175, true},
      {"ESDIRK32c", 4, 0.5, 3, true, 0.0, true, 2, true, 1.0, true},
      {"ESDIRK45c", 6, 0.25, 4, true, 0.0, true, 5, false, kInf, false},
  };
  for (const auto& m : table)
    if (m.name == name) return m;
  return std::nullopt;
}

std::map<int, double> embedded_weight_pins(std::string_view name) {
  if (name == "ESDIRK32a") {
    const auto t = builtin(name);
    return {{2, t.gamma}, {3, 0.0}};
  }
  if (name == "ESDIRK32b" || name == "ESDIRK43b") {
    const auto t = builtin(name);
    return {{t.stages() - 1, t.gamma}};
  }
  if (name == "ESDIRK32c") return {{2, 0.0}, {3, 0.0}};
  if (name == "ESDIRK45c") return {{5, 7.0 / 90.0}};
  return {};
}

bool VerificationReport::passed() const {
  return std::none_of(rows.begin(), rows.end(), [](const VerificationRow& r) {
    return r.status == RowStatus::Fail;
  });
}

std::vector<std::string> VerificationReport::failing_checks() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (r.status == RowStatus::Fail) out.push_back(r.check);
  return out;
}

VerificationReport verify_method(const ButcherTableau& t,
                                 const VerifyOptions& options) {
  VerificationReport rep;
  rep.method = t.name;
  const auto props = published_properties(t.name);

  if (props) {
    rep.rows.push_back({"stages", std::to_string(props->stages),
                        std::to_string(t.stages()), 0.0,
                        status(props->stages == t.stages())});
    const double dg = std::abs(t.gamma - props->gamma);
    rep.rows.push_back({"gamma", fmt::format("{}", props->gamma),
                        fmt::format("{:.10f}", t.gamma), dg,
                        status(dg <= kGammaTolerance)});
  }

  const CheckReport cons = check_consistency(t);
  rep.rows.push_back({"consistency", "<= 1e-13", fmt::format("{:.3e}", cons.residual),
                      cons.residual, status(cons.passed)});
  rep.rows.push_back({"ESDIRK structure", "yes", yes_no(t.flags.esdirk), 0.0,
                      props ? status(t.flags.esdirk) : RowStatus::Info});
  if (t.flags.esdirk) {
    const CheckReport so = check_stage_order_2(t);
    rep.rows.push_back({"stage order 2", "<= 1e-13",
                        fmt::format("{:.3e}", so.residual), so.residual,
                        props ? status(so.passed) : RowStatus::Info});
  }

  // Advancing method.
  std::optional<int> p;
  if (props) p = props->p;
  else if (t.order > 0) p = t.order;
  order_rows(rep, t, t.b, "advancing", p, false);

  const bool sa = t.flags.stiffly_accurate;
  rep.rows.push_back({"advancing stiffly accurate",
                      props ? yes_no(props->stiffly_accurate) : "-", yes_no(sa),
                      0.0,
                      props ? status(sa == props->stiffly_accurate) : RowStatus::Info});

  if (options.stability) {
    stability_rows(rep, t, t.b, "advancing",
                   props ? std::optional<double>(props->r_inf) : std::nullopt,
                   props ? std::optional<bool>(props->a_stable) : std::nullopt,
                   false, options.scan_samples);

    const int s_eff = t.solution_stage ? *t.solution_stage + 1 : t.stages();
    const int p_known = p.value_or(0);
    if (t.flags.esdirk && s_eff >= 2 && s_eff - 1 <= 8 && p_known >= s_eff - 1) {
      const double lag = std::abs(laguerre(s_eff - 1, 1.0 / t.gamma));
      const bool want_l = props && props->r_inf == 0.0;
      rep.rows.push_back({fmt::format("Laguerre |L_{}(1/gamma)|", s_eff - 1),
                          "<= 1e-6", fmt::format("{:.3e}", lag), lag,
                          want_l ? status(lag <= kLaguerreTolerance)
                                 : RowStatus::Info});
    }
  }

  // Embedded method.
  if (t.has_embedded()) {
    const Vector& bh = *t.b_hat;
    std::optional<int> ph;
    if (props) ph = props->p_hat;
    else if (t.embedded_order > 0) ph = t.embedded_order;
    const bool uncertain = t.flags.embedded_order_uncertain;
    order_rows(rep, t, bh, "embedded", ph, uncertain);

    if (ph) {
      const int target = std::min(*ph, kMaxTreeOrder);
      const auto pins = props ? embedded_weight_pins(t.name) : std::map<int, double>{};
      try {
        const EmbeddedSolution sol = solve_embedded_weights(t, target, pins);
        const double diff = (sol.weights - bh).cwiseAbs().maxCoeff();
        rep.rows.push_back({"embedded weights re-derived",
                            "<= 1e-10", fmt::format("{:.3e} (rank {})", diff, sol.rank),
                            diff,
                            props ? status(diff <= kWeightTolerance) : RowStatus::Info});
      } catch (const InfeasibleError& e) {
        rep.rows.push_back({"embedded weights re-derived", "<= 1e-10",
                            fmt::format("infeasible ({:.3e})", e.residual()),
                            e.residual(),
                            props ? RowStatus::Fail : RowStatus::Info});
      }
    }

    const bool hat_sa = matching_row(t, bh).has_value();
    rep.rows.push_back({"embedded stiffly accurate",
                        props ? yes_no(props->hat_stiffly_accurate) : "-",
                        yes_no(hat_sa), 0.0,
                        props ? status(hat_sa == props->hat_stiffly_accurate)
                              : RowStatus::Info});
    if (options.stability) {
      stability_rows(rep, t, bh, "embedded",
                     props ? std::optional<double>(props->hat_r_inf) : std::nullopt,
                     props ? std::optional<bool>(props->hat_a_stable) : std::nullopt,
                     true, options.scan_samples);
    }
  }

  rep.rows.push_back({"FSAL", "-", yes_no(t.flags.fsal), 0.0, RowStatus::Info});
  rep.rows.push_back({"event safe (0 <= c <= 1)", "-", yes_no(t.flags.event_safe),
                      0.0, RowStatus::Info});

  if (options.extensions && props) {
    for (const auto& [method, variant] : extension_catalog()) {
      if (method != t.name) continue;
      const ExtensionMatrix em = builtin_extension(method, variant);
      const ExtensionCheck chk = check_extension(t, em);
      rep.rows.push_back(
          {fmt::format("extension {} conditions", variant), "<= 1e-10",
           fmt::format("order {:.3e}, side {:.3e}", chk.order_residual,
                       chk.side_residual),
           std::max(chk.order_residual, chk.side_residual), status(chk.passed)});
      if (!em.derivation) {
        rep.rows.push_back({fmt::format("extension {} re-derived", variant),
                            "-", "stored only", 0.0, RowStatus::Info});
        continue;
      }
      const double tol =
          *em.derivation == SolutionMode::Unique ? kUniqueTolerance : kMinNormTolerance;
      try {
        const ExtensionMatrix derived =
            solve_extension(t, em.order, em.side_conditions);
        const double diff = (derived.b_bar - em.b_bar).cwiseAbs().maxCoeff();
        const bool ok = diff <= tol && derived.mode == *em.derivation;
        rep.rows.push_back({fmt::format("extension {} re-derived", variant),
                            fmt::format("{} <= {:.0e}", to_string(*em.derivation), tol),
                            fmt::format("{} {:.3e}", to_string(derived.mode), diff),
                            diff, status(ok)});
      } catch (const InfeasibleError& e) {
        rep.rows.push_back({fmt::format("extension {} re-derived", variant),
                            std::string(to_string(*em.derivation)),
                            fmt::format("infeasible ({:.3e})", e.residual()),
                            e.residual(), RowStatus::Fail});
      }
    }
    for (const auto& c : known_infeasible_extensions(t.name)) {
      std::vector<std::string> labels;
      for (const auto& sc : c.conditions) labels.push_back(sc.label());
      const std::string name =
          fmt::format("no order-{} extension with {{{}}}", c.order,
                      fmt::join(labels, ", "));
      try {
        const ExtensionMatrix em = solve_extension(t, c.order, c.conditions);
        rep.rows.push_back({name, "infeasible",
                            fmt::format("solved (residual {:.3e})", em.residual),
                            em.residual, RowStatus::Fail});
      } catch (const InfeasibleError& e) {
        rep.rows.push_back({name, "infeasible",
                            fmt::format("infeasible ({:.3e}, {})", e.residual(),
                                        e.block()),
                            e.residual(), RowStatus::Pass});
      }
    }
  }
  return rep;
}

}  // namespace esdirk
