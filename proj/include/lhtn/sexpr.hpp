#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lhtn {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Raised for syntactically valid input that uses a construct outside the
// supported subset.
class UnsupportedFeature : public std::runtime_error {
 public:
  explicit UnsupportedFeature(const std::string& construct)
      : std::runtime_error("unsupported feature: " + construct) {}
};

// Raised when a name does not resolve (undeclared object, type, task...).
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// S-expression node. Atoms are lower-cased; `;` starts a comment.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 0;
  int column = 0;

  bool is_atom() const { return !is_list; }
  bool is(std::string_view text) const { return !is_list && atom == text; }
  // Head keyword of a list, or "" for atoms and empty lists.
  const std::string& head() const;
  std::string to_string() const;
};

std::vector<SExpr> parse_sexprs(std::string_view text);
SExpr parse_single_sexpr(std::string_view text);

[[noreturn]] void syntax_error(const SExpr& at, const std::string& message);

}  // namespace lhtn
