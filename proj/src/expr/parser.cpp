#include "confein/errors.hpp"
#include "confein/expr.hpp"

#include <cctype>
#include <charconv>
#include <numbers>
#include <set>

namespace confein {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> coords)
      : text_(text), coords_(coords) {}

  Expr run() {
    skip_space();
    if (at_end()) throw SyntaxError("empty expression", pos_);
    Expr e = parse_expr();
    skip_space();
    if (!at_end()) {
      throw SyntaxError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) {
        throw SyntaxError(std::string("expected '") + c + "' but reached end of input",
                          pos_);
      }
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    skip_space();
    const std::size_t caret = pos_;
    if (accept('^')) {
      Expr exponent = parse_unary();
      if (!exponent.is_constant()) {
        throw SyntaxError("exponent must be a constant expression", caret + 1);
      }
      return pow(base, exponent.value());
    }
    return base;
  }

  Expr parse_atom() {
    skip_space();
    if (at_end()) throw SyntaxError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (ident_start(c)) return parse_identifier();
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                         text_[pos_] == '.')) {
      ++pos_;
    }
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw SyntaxError("malformed number '" + std::string(first, last) + "'", start);
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (!at_end() && ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == name) return Expr::coordinate(i, name);
    }
    if (name == "pi") return Expr::constant(std::numbers::pi);

    static constexpr std::pair<const char*, UnaryOp> kFunctions[] = {
        {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},
        {"sinh", UnaryOp::Sinh}, {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh},
        {"exp", UnaryOp::Exp},   {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
    };
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        skip_space();
        if (at_end() || text_[pos_] != '(') {
          throw SyntaxError("expected '(' after function '" + name + "'", pos_);
        }
        ++pos_;
        Expr arg = parse_expr();
        expect(')');
        return Expr::unary(op, std::move(arg));
      }
    }
    throw UnknownIdentifier(name, start);
  }

  std::string_view text_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, std::span<const std::string> coords) {
  std::set<std::string> seen;
  for (const auto& c : coords) {
    if (!seen.insert(c).second) {
      throw Error(ErrorCode::Precondition, "duplicate coordinate name '" + c + "'");
    }
  }
  return Parser(text, coords).run();
}

}  // namespace confein
