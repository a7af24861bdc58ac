#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esdirk/tableau.hpp"

namespace esdirk {

/// Published properties of a method; r_inf values are magnitudes and may be
/// +inf.
struct MethodProperties {
  std::string name;
  int stages = 0;
  double gamma = 0.0;
  int p = 0;
  bool a_stable = false;
  double r_inf = 0.0;
  bool stiffly_accurate = false;
  int p_hat = 0;
  bool hat_a_stable = false;
  double hat_r_inf = 0.0;
  bool hat_stiffly_accurate = false;
};

std::optional<MethodProperties> published_properties(std::string_view name);

/// Embedded weights that are fixed by the structure of a builtin (trailing
/// zeros, the diagonal entry of a stiffly accurate embedded row) or by a
/// published value that selects one member of a one-parameter family.
std::map<int, double> embedded_weight_pins(std::string_view name);

enum class RowStatus { Pass, Fail, Info };

struct VerificationRow {
  std::string check;
  std::string expected;
  std::string measured;
  double residual = 0.0;
  RowStatus status = RowStatus::Info;
};

struct VerificationReport {
  std::string method;
  std::vector<VerificationRow> rows;

  bool passed() const;
  std::vector<std::string> failing_checks() const;
};

struct VerifyOptions {
  bool stability = true;
  bool extensions = true;
  int scan_samples = 2000;
};

/// Runs the structural, order, stability and extension checks on a tableau.
/// Expectations come from the published properties when the name is known,
/// otherwise from the orders claimed by the tableau itself. Disagreement
/// about the embedded method's A-stability is reported as Info.
VerificationReport verify_method(const ButcherTableau& t,
                                 const VerifyOptions& options = {});

}  // namespace esdirk
