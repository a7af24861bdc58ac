// Command-line front end: tableau verification, adaptive and fixed-step
// solves, and event location on the built-in problem corpus.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "esdirk/dense_output.hpp"
#include "esdirk/errors.hpp"
#include "esdirk/integrator.hpp"
#include "esdirk/problems.hpp"
#include "esdirk/stability.hpp"
#include "esdirk/tableau.hpp"
#include "esdirk/tableau_io.hpp"
#include "esdirk/verification.hpp"

namespace {

using namespace esdirk;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_state(const Vector& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) out += ',';
    out += num(x(i));
  }
  return out;
}

std::string state_header(int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) out += fmt::format(",x_{}", i);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::string_view status_name(RowStatus s) {
  switch (s) {
    case RowStatus::Pass: return "PASS";
    case RowStatus::Fail: return "FAIL";
    case RowStatus::Info: return "info";
  }
  return "?";
}

// Output stream that is either a file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error(fmt::format("cannot write '{}'", path));
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(text);
  return out;
}

// verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string method;
  std::string file;
  bool stability = false;
  std::string format = "text";
};

void print_report(std::ostream& os, const VerificationReport& rep, bool csv) {
  if (csv) {
    for (const auto& r : rep.rows) {
      os << fmt::format("{},{},{},{},{},{}\n", rep.method, csv_field(r.check),
                        csv_field(r.expected), csv_field(r.measured),
                        num(r.residual), status_name(r.status));
    }
    return;
  }
  os << fmt::format("== {} ==\n", rep.method);
  for (const auto& r : rep.rows) {
    os << fmt::format("  {:<4}  {:<52} expected {:<24} measured {}\n",
                      status_name(r.status), r.check, r.expected, r.measured);
  }
  const auto failing = rep.failing_checks();
  if (failing.empty())
    os << "  all checks pass\n";
  else
    os << fmt::format("  failing: {}\n", fmt::join(failing, "; "));
}

void print_stability(std::ostream& os, const ButcherTableau& t, bool csv) {
  struct Line {
    std::string which;
    StabilityFunction sf;
    AStabilityScan scan;
  };
  std::vector<Line> lines;
  auto add = [&](const std::string& which, const Vector& w) {
    StabilityFunction sf = stability_function(t, w);
    AStabilityScan scan = a_stability_scan(sf);
    lines.push_back({which, std::move(sf), scan});
  };
  add("advancing", t.b);
  if (t.b_hat) add("embedded", *t.b_hat);
  const int s_eff = t.solution_stage ? *t.solution_stage + 1 : t.stages();
  const double lag = s_eff >= 2 && s_eff <= 9
                         ? std::abs(laguerre(s_eff - 1, 1.0 / t.gamma))
                         : std::nan("");
  for (const auto& l : lines) {
    auto coeffs = [](const Vector& v) {
      std::vector<std::string> parts;
      for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(num(v(i)));
      return fmt::format("{}", fmt::join(parts, " "));
    };
    if (csv) {
      os << fmt::format("{},{},{},{},{},{},{},{}\n", t.name, l.which,
                        coeffs(l.sf.p_coeffs), coeffs(l.sf.q_coeffs),
                        std::isinf(l.sf.r_inf) ? "inf" : num(l.sf.r_inf),
                        num(lag), num(l.scan.min_e),
                        l.scan.a_stable_consistent ? "A-stable-consistent"
                                                   : "not-A-stable");
    } else {
      os << fmt::format("{} {}:\n  P: {}\n  Q: {}\n  |R(inf)| = {}\n  "
                        "|L_{}(1/gamma)| = {:.3e}\n  min E = {:.3e} -> {}\n",
                        t.name, l.which, coeffs(l.sf.p_coeffs),
                        coeffs(l.sf.q_coeffs),
                        std::isinf(l.sf.r_inf) ? "inf" : num(l.sf.r_inf),
                        s_eff - 1, lag, l.scan.min_e,
                        l.scan.a_stable_consistent ? "A-stable-consistent"
                                                   : "not A-stable");
    }
  }
}

int run_verify(const VerifyArgs& args) {
  std::vector<ButcherTableau> tableaus;
  if (!args.file.empty()) {
    tableaus.push_back(load_tableau(args.file).tableau);
  } else if (!args.method.empty()) {
    tableaus.push_back(builtin(args.method));
  } else {
    for (const auto& name : builtin_names()) tableaus.push_back(builtin(name));
  }
  const bool csv = args.format == "csv";
  if (args.stability) {
    if (csv) std::cout << "method,weights,p_coeffs,q_coeffs,r_inf,laguerre_residual,min_e,verdict\n";
    for (const auto& t : tableaus) print_stability(std::cout, t, csv);
    return kExitOk;
  }
  if (csv) std::cout << "method,check,expected,measured,residual,status\n";
  bool all = true;
  for (const auto& t : tableaus) {
    const auto rep = verify_method(t);
    print_report(std::cout, rep, csv);
    all = all && rep.passed();
  }
  return all ? kExitOk : kExitVerifyFailed;
}

// solve -------------------------------------------------------------------

struct SolveArgs {
  std::string method = "ESDIRK34";
  std::string problem;
  double rtol = 1e-6;
  std::string atol = "1e-6";
  std::optional<double> h0;
  int dense = 0;
  std::string out;
  long max_steps = 500000;
  bool allow_uncertain = false;
};

Controls make_controls(const SolveArgs& a) {
  Controls c;
  c.rtol = a.rtol;
  const auto atol = parse_list(a.atol);
  c.atol = Eigen::Map<const Vector>(atol.data(), static_cast<Eigen::Index>(atol.size()));
  c.h_init = a.h0;
  c.max_steps = a.max_steps;
  c.allow_uncertain_estimator = a.allow_uncertain;
  return c;
}

void write_stats(std::ostream& os, const SolveResult& r) {
  const auto& s = r.stats;
  os << "status,t_final,steps,rejected,newton_failures,rhs_evals,jacobian_evals,"
        "factorizations,newton_iterations,fsal_restarts,events\n";
  os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.status == SolveStatus::Success ? "success" : "event_terminated",
                    num(r.t), s.steps, s.rejected, s.newton_failures, s.rhs_evals,
                    s.jacobian_evals, s.factorizations, s.newton_iterations,
                    s.fsal_restarts, s.events);
}

int run_solve(const SolveArgs& args) {
  const ButcherTableau t = builtin(args.method);
  const TestProblem tp = make_problem(args.problem);
  const SolveResult r = solve(t, tp.problem, make_controls(args));

  Sink sink(args.out);
  auto& os = sink.out();
  const bool dense = args.dense > 0;
  os << "t,h,err_norm,accepted" << (dense ? ",interp" : "")
     << state_header(tp.problem.dim()) << '\n';
  auto row = [&](double tt, double h, double err, bool acc, bool interp,
                 const Vector& x) {
    os << fmt::format("{},{},{},{}", num(tt), num(h), num(err), acc ? 1 : 0);
    if (dense) os << (interp ? ",1" : ",0");
    os << ',' << join_state(x) << '\n';
  };
  row(tp.problem.t0, 0.0, 0.0, true, false, tp.problem.x0);

  std::size_t seg = 0;
  for (const auto& rec : r.steps) {
    if (!rec.accepted) {
      const Vector x = rec.newton_failed
                           ? Vector::Constant(tp.problem.dim(), std::nan(""))
                           : rec.x_next;
      row(rec.t_n + rec.h, rec.h, rec.newton_failed ? std::nan("") : rec.err_norm,
          false, false, x);
      continue;
    }
    const DenseSegment* s = nullptr;
    if (seg < r.segments.size() && r.segments[seg].t_n == rec.t_n) s = &r.segments[seg++];
    if (dense && s) {
      for (int k = 1; k <= args.dense; ++k) {
        const double theta = rec.theta_end * k / (args.dense + 1);
        row(rec.t_n + theta * rec.h, rec.h, rec.err_norm, true, true, s->eval(theta));
      }
    }
    if (rec.theta_end < 1.0 && s) {
      row(s->t_end(), rec.h, rec.err_norm, true, false, s->eval(rec.theta_end));
    } else {
      row(rec.t_n + rec.h, rec.h, rec.err_norm, true, false, rec.x_next);
    }
  }

  if (!args.out.empty()) {
    std::ofstream stats(args.out + ".stats.csv");
    write_stats(stats, r);
  } else {
    write_stats(std::cerr, r);
  }
  return kExitOk;
}

// convergence ---------------------------------------------------------------

struct ConvergenceArgs {
  std::string method = "ESDIRK34";
  std::string problem = "forced_linear";
  double h0 = 0.1;
  int halvings = 5;
  std::string out;
};

int run_convergence(const ConvergenceArgs& args) {
  const ButcherTableau t = builtin(args.method);
  const TestProblem tp = make_problem(args.problem);
  if (!tp.exact) {
    std::cerr << fmt::format("problem '{}' has no analytic reference\n", args.problem);
    return kExitUsage;
  }
  if (!(args.h0 > 0.0) || args.halvings < 0) {
    std::cerr << "--h0 must be positive and --halvings non-negative\n";
    return kExitUsage;
  }
  const double span = tp.problem.tf - tp.problem.t0;
  const Vector exact = tp.exact(tp.problem.tf);

  Sink sink(args.out);
  auto& os = sink.out();
  os << "h,steps,error,observed_order\n";
  double prev_err = std::nan(""), prev_h = std::nan("");
  for (int i = 0; i <= args.halvings; ++i) {
    const long n = std::max(1L, std::lround(span / (args.h0 / std::ldexp(1.0, i))));
    const double h = span / static_cast<double>(n);
    FixedResult fr;
    try {
      fr = solve_fixed(t, tp.problem, h, n);
    } catch (const ConvergenceError& e) {
      if (i == 0) {
        std::cerr << fmt::format("{}; try a smaller --h0\n", e.what());
        return kExitNumerical;
      }
      throw;
    }
    const double err = (fr.x.back() - exact).cwiseAbs().maxCoeff();
    const double order = i == 0 ? std::nan("") : std::log(prev_err / err) / std::log(prev_h / h);
    os << fmt::format("{},{},{},{}\n", num(h), n, num(err), i == 0 ? "" : num(order));
    prev_err = err;
    prev_h = h;
  }
  return kExitOk;
}

// events ------------------------------------------------------------------

int run_events(const SolveArgs& args) {
  const ButcherTableau t = builtin(args.method);
  const TestProblem tp = make_problem(args.problem);
  if (tp.problem.events.empty()) {
    std::cerr << fmt::format("problem '{}' defines no events\n", args.problem);
    return kExitUsage;
  }
  Controls c = make_controls(args);
  c.record_segments = false;
  c.record_steps = false;
  const SolveResult r = solve(t, tp.problem, c);
  Sink sink(args.out);
  auto& os = sink.out();
  os << "t_event,spec_index,terminal" << state_header(tp.problem.dim()) << '\n';
  for (const auto& e : r.events) {
    os << fmt::format("{},{},{},{}\n", num(e.t_event), e.spec_index,
                      e.terminal ? 1 : 0, join_state(e.x_event));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ESDIRK integrators: tableau verification, stiff ODE/DAE solves, "
               "convergence studies and event location"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "check builtin or file tableaus");
  verify->add_option("name", va.method, "builtin method (default: all)");
  verify->add_option("--method", va.method, "builtin method");
  verify->add_option("--file", va.file, "tableau text file")->check(CLI::ExistingFile);
  verify->add_flag("--stability", va.stability, "print stability functions");
  verify->add_option("--format", va.format, "report format")
      ->check(CLI::IsMember({"csv", "text"}));

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "adaptive solve of a corpus problem");
  solve_cmd->add_option("--method", sa.method, "builtin method");
  solve_cmd->add_option("--problem", sa.problem, "corpus problem")->required();
  solve_cmd->add_option("--rtol", sa.rtol, "relative tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--atol", sa.atol, "absolute tolerance, scalar or comma list");
  solve_cmd->add_option("--h0", sa.h0, "initial step size")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--dense", sa.dense, "interpolated points per step")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--out", sa.out, "trajectory CSV (default stdout)");
  solve_cmd->add_option("--max-steps", sa.max_steps, "step budget");
  solve_cmd->add_flag("--allow-uncertain-estimator", sa.allow_uncertain,
                      "permit error control with an estimator of uncertain order");

  ConvergenceArgs ca;
  auto* conv = app.add_subcommand("convergence", "fixed-step order study");
  conv->add_option("--method", ca.method, "builtin method");
  conv->add_option("--problem", ca.problem, "corpus problem with analytic solution");
  conv->add_option("--h0", ca.h0, "coarsest step size");
  conv->add_option("--halvings", ca.halvings, "number of halvings");
  conv->add_option("--out", ca.out, "CSV output (default stdout)");

  SolveArgs ea;
  ea.problem = "bouncing_ball";
  ea.rtol = 1e-8;
  ea.atol = "1e-8";
  auto* events = app.add_subcommand("events", "locate events of a corpus problem");
  events->add_option("--method", ea.method, "builtin method");
  events->add_option("--problem", ea.problem, "corpus problem with events");
  events->add_option("--rtol", ea.rtol, "relative tolerance")->check(CLI::PositiveNumber);
  events->add_option("--atol", ea.atol, "absolute tolerance, scalar or comma list");
  events->add_option("--out", ea.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify) return run_verify(va);
    if (*solve_cmd) return run_solve(sa);
    if (*conv) return run_convergence(ca);
    if (*events) return run_events(ea);
  } catch (const ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const NotFoundError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedMethodError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
