#include "esdirk/tableau_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "esdirk/errors.hpp"

namespace esdirk {

namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> split(const std::string& line, int first_column) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    out.push_back({line.substr(start, i - start),
                   first_column + static_cast<int>(start)});
  }
  return out;
}

double parse_real(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw std::invalid_argument(text);
  return value;
}

double parse_entry(const Token& tok, int line, const std::string& source) {
  try {
    const auto slash = tok.text.find('/');
    if (slash == std::string::npos) return parse_real(tok.text);
    const double num = parse_real(tok.text.substr(0, slash));
    const double den = parse_real(tok.text.substr(slash + 1));
    if (den == 0.0) {
      throw ParseError(fmt::format("{}:{}:{}: zero denominator in '{}'", source,
                                   line, tok.column, tok.text),
                       line, tok.column);
    }
    return num / den;
  } catch (const std::invalid_argument&) {
    throw ParseError(fmt::format("{}:{}:{}: cannot parse number '{}'", source,
                                 line, tok.column, tok.text),
                     line, tok.column);
  }
}

int parse_int(const Token& tok, int line, const std::string& source) {
  int value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(fmt::format("{}:{}:{}: expected an integer, got '{}'",
                                 source, line, tok.column, tok.text),
                     line, tok.column);
  }
  return value;
}

}  // namespace

ParsedTableau parse_tableau(std::istream& in, std::string source_name) {
  std::vector<std::vector<double>> rows;
  std::optional<std::vector<double>> b, b_hat, c;
  std::optional<int> p, p_hat;
  std::string name = "file";
  int last_line = 0;

  auto fail = [&](int line, int column, const std::string& msg) -> ParseError {
    return ParseError(
        fmt::format("{}:{}:{}: {}", source_name, line, column, msg), line,
        column);
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    last_line = line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    auto tokens = split(raw, 1);
    if (tokens.empty()) continue;

    const std::string& head = tokens.front().text;
    if (head.back() == ':') {
      const std::string key = head.substr(0, head.size() - 1);
      std::vector<Token> rest(tokens.begin() + 1, tokens.end());
      if (key == "name") {
        if (rest.size() != 1) throw fail(line_no, tokens[0].column, "name: expects one word");
        name = rest[0].text;
        continue;
      }
      if (key == "p" || key == "phat") {
        if (rest.size() != 1)
          throw fail(line_no, tokens[0].column, key + ": expects one integer");
        (key == "p" ? p : p_hat) = parse_int(rest[0], line_no, source_name);
        continue;
      }
      std::optional<std::vector<double>>* target = nullptr;
      if (key == "b") target = &b;
      else if (key == "bhat") target = &b_hat;
      else if (key == "c") target = &c;
      else throw fail(line_no, tokens[0].column, fmt::format("unknown key '{}'", key));
      if (target->has_value())
        throw fail(line_no, tokens[0].column, fmt::format("duplicate '{}' line", key));
      std::vector<double> values;
      for (const auto& tok : rest) values.push_back(parse_entry(tok, line_no, source_name));
      if (values.size() != rows.size()) {
        throw fail(line_no, tokens[0].column,
                   fmt::format("'{}' has {} entries but A has {} rows", key,
                               values.size(), rows.size()));
      }
      *target = std::move(values);
      continue;
    }

    if (b || b_hat || c) {
      throw fail(line_no, tokens[0].column,
                 "matrix rows must precede the b:, bhat: and c: lines");
    }
    const std::size_t expected = rows.size() + 1;
    if (tokens.size() != expected) {
      const int col = tokens.size() > expected ? tokens[expected].column
                                                : tokens.back().column;
      throw fail(line_no, col,
                 fmt::format("row {} of A needs {} entries, found {}",
                             expected, expected, tokens.size()));
    }
    std::vector<double> row;
    for (const auto& tok : tokens) row.push_back(parse_entry(tok, line_no, source_name));
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw fail(last_line + 1, 1, "no matrix rows found");
  if (!b) throw fail(last_line + 1, 1, "missing 'b:' line");
  if (!c) throw fail(last_line + 1, 1, "missing 'c:' line");

  const auto s = static_cast<Eigen::Index>(rows.size());
  Matrix a = Matrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = rows[i][j];
  auto to_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  std::optional<Vector> bh;
  if (b_hat) bh = to_vec(*b_hat);

  ParsedTableau out{make_tableau(name, a, to_vec(*b), bh, to_vec(*c), p.value_or(0),
                                 p_hat.value_or(0)),
                    p, p_hat};
  return out;
}

ParsedTableau parse_tableau(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_tableau(in, "<string>");
}

ParsedTableau load_tableau(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError(fmt::format("cannot open tableau file '{}'", path));
  return parse_tableau(in, path);
}

}  // namespace esdirk
