#include "lhtn/sexpr.hpp"

#include <cctype>

namespace lhtn {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

const std::string& SExpr::head() const {
  static const std::string kEmpty;
  if (!is_list || items.empty() || items.front().is_list) return kEmpty;
  return items.front().atom;
}

std::string SExpr::to_string() const {
  if (!is_list) return atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    out += items[i].to_string();
  }
  return out + ")";
}

void syntax_error(const SExpr& at, const std::string& message) {
  throw ParseError(at.line, at.column, message);
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr node;
    node.line = line_;
    node.column = col_;
    char c = text_[pos_];
    if (c == ')') throw ParseError(line_, col_, "unexpected ')'");
    if (c == '(') {
      node.is_list = true;
      advance();
      skip();
      while (true) {
        if (pos_ >= text_.size()) throw ParseError(node.line, node.column, "unbalanced '(' opened here");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
        skip();
      }
      return node;
    }
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      node.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
      advance();
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

SExpr parse_single_sexpr(std::string_view text) {
  auto all = parse_sexprs(text);
  if (all.empty()) throw ParseError(1, 1, "empty input");
  if (all.size() > 1) syntax_error(all[1], "trailing content after top-level expression");
  return std::move(all.front());
}

}  // namespace lhtn
