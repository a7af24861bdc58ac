#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>

#include "esdirk/tableau.hpp"

namespace esdirk {

/// A tableau read from text, with the orders the file claims (if any).
struct ParsedTableau {
  ButcherTableau tableau;
  std::optional<int> claimed_order;
  std::optional<int> claimed_embedded_order;
};

/// Reads the plain-text tableau format:
///
///     # comment
///     name: MyMethod            (optional)
///     0
///     1/2  1/2
///     1/2  1/4  1/4
///     b:    1/2  1/4  1/4
///     bhat: 1/2  1/2  0         (optional)
///     c:    0  1  1
///     p: 2                      (optional)
///     phat: 1                   (optional)
///
/// Row i of A holds its first i entries (lower triangle with diagonal).
/// Entries are decimals or rationals `p/q`. Errors carry the 1-based line and
/// column of the offending token.
ParsedTableau parse_tableau(std::istream& in, std::string source_name = "<input>");
ParsedTableau parse_tableau(std::string_view text);
ParsedTableau load_tableau(const std::string& path);

}  // namespace esdirk
