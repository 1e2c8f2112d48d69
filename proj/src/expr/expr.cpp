#include "confein/expr.hpp"

#include "confein/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace confein {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double number = 0.0;  // constant value or power exponent
  std::size_t index = 0;
  std::string name;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  std::vector<Expr> children;  // empty for leaves
  std::size_t arity = 0;
};

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

// Returns false when the operation is undefined at v.
bool apply_unary(UnaryOp op, double v, double& out) {
  switch (op) {
    case UnaryOp::Neg: out = -v; return true;
    case UnaryOp::Sin: out = std::sin(v); return true;
    case UnaryOp::Cos: out = std::cos(v); return true;
    case UnaryOp::Tan: out = std::tan(v); return true;
    case UnaryOp::Sinh: out = std::sinh(v); return true;
    case UnaryOp::Cosh: out = std::cosh(v); return true;
    case UnaryOp::Tanh: out = std::tanh(v); return true;
    case UnaryOp::Exp: out = std::exp(v); return true;
    case UnaryOp::Log:
      if (!(v > 0.0)) return false;
      out = std::log(v);
      return true;
    case UnaryOp::Sqrt:
      if (!(v >= 0.0)) return false;
      out = std::sqrt(v);
      return true;
  }
  return false;
}

bool apply_binary(BinaryOp op, double a, double b, double& out) {
  switch (op) {
    case BinaryOp::Add: out = a + b; return true;
    case BinaryOp::Sub: out = a - b; return true;
    case BinaryOp::Mul: out = a * b; return true;
    case BinaryOp::Div:
      if (b == 0.0) return false;
      out = a / b;
      return true;
  }
  return false;
}

bool apply_power(double base, double exponent, double& out) {
  if (base < 0.0 && !is_integer(exponent)) return false;
  if (base == 0.0 && exponent < 0.0) return false;
  out = std::pow(base, exponent);
  return true;
}

}  // namespace

const char* to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Sinh: return "sinh";
    case UnaryOp::Cosh: return "cosh";
    case UnaryOp::Tanh: return "tanh";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
  }
  return "?";
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->number = value;
  return Expr(std::move(n));
}

Expr Expr::coordinate(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Coordinate;
  n->index = index;
  n->name = std::move(name);
  n->arity = index + 1;
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  if (operand.is_constant()) {
    double folded = 0.0;
    if (apply_unary(op, operand.value(), folded)) return constant(folded);
  }
  if (op == UnaryOp::Neg && operand.kind() == Kind::Unary &&
      operand.unary_op() == UnaryOp::Neg) {
    return operand.operand();
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->uop = op;
  n->arity = operand.arity();
  n->children = {std::move(operand)};
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  if (lhs.is_constant() && rhs.is_constant()) {
    double folded = 0.0;
    if (apply_binary(op, lhs.value(), rhs.value(), folded)) {
      return constant(folded);
    }
  }
  switch (op) {
    case BinaryOp::Add:
      if (lhs.is_constant(0.0)) return rhs;
      if (rhs.is_constant(0.0)) return lhs;
      break;
    case BinaryOp::Sub:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return unary(UnaryOp::Neg, std::move(rhs));
      break;
    case BinaryOp::Mul:
      if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return constant(0.0);
      if (lhs.is_constant(1.0)) return rhs;
      if (rhs.is_constant(1.0)) return lhs;
      if (lhs.is_constant(-1.0)) return unary(UnaryOp::Neg, std::move(rhs));
      if (rhs.is_constant(-1.0)) return unary(UnaryOp::Neg, std::move(lhs));
      break;
    case BinaryOp::Div:
      if (lhs.is_constant(0.0) && !rhs.is_constant(0.0)) return constant(0.0);
      if (rhs.is_constant(1.0)) return lhs;
      break;
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->bop = op;
  n->arity = std::max(lhs.arity(), rhs.arity());
  n->children = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    double folded = 0.0;
    if (apply_power(base.value(), exponent, folded)) return constant(folded);
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->number = exponent;
  n->arity = base.arity();
  n->children = {std::move(base)};
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->number; }
std::size_t Expr::index() const { return node_->index; }
const std::string& Expr::name() const { return node_->name; }
UnaryOp Expr::unary_op() const { return node_->uop; }
BinaryOp Expr::binary_op() const { return node_->bop; }
double Expr::exponent() const { return node_->number; }
const Expr& Expr::operand(std::size_t i) const { return node_->children.at(i); }
std::size_t Expr::arity() const { return node_->arity; }

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(UnaryOp::Neg, a); }
Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }
Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }

Expr pow(const Expr& base, double exponent) { return Expr::power(base, exponent); }
Expr sin(const Expr& e) { return Expr::unary(UnaryOp::Sin, e); }
Expr cos(const Expr& e) { return Expr::unary(UnaryOp::Cos, e); }
Expr tan(const Expr& e) { return Expr::unary(UnaryOp::Tan, e); }
Expr sinh(const Expr& e) { return Expr::unary(UnaryOp::Sinh, e); }
Expr cosh(const Expr& e) { return Expr::unary(UnaryOp::Cosh, e); }
Expr tanh(const Expr& e) { return Expr::unary(UnaryOp::Tanh, e); }
Expr exp(const Expr& e) { return Expr::unary(UnaryOp::Exp, e); }
Expr log(const Expr& e) { return Expr::unary(UnaryOp::Log, e); }
Expr sqrt(const Expr& e) { return Expr::unary(UnaryOp::Sqrt, e); }

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, std::size_t v) {
  if (e.arity() <= v) return Expr::constant(0.0);
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return Expr::constant(0.0);
    case Expr::Kind::Coordinate:
      return Expr::constant(e.index() == v ? 1.0 : 0.0);
    case Expr::Kind::Unary: {
      const Expr& u = e.operand();
      Expr du = differentiate(u, v);
      if (du.is_constant(0.0)) return du;
      switch (e.unary_op()) {
        case UnaryOp::Neg: return -du;
        case UnaryOp::Sin: return cos(u) * du;
        case UnaryOp::Cos: return -sin(u) * du;
        case UnaryOp::Tan: return du * pow(cos(u), -2.0);
        case UnaryOp::Sinh: return cosh(u) * du;
        case UnaryOp::Cosh: return sinh(u) * du;
        case UnaryOp::Tanh: return du * pow(cosh(u), -2.0);
        case UnaryOp::Exp: return e * du;
        case UnaryOp::Log: return du / u;
        case UnaryOp::Sqrt: return du / (2.0 * e);
      }
      break;
    }
    case Expr::Kind::Binary: {
      const Expr& a = e.operand(0);
      const Expr& b = e.operand(1);
      Expr da = differentiate(a, v);
      Expr db = differentiate(b, v);
      switch (e.binary_op()) {
        case BinaryOp::Add: return da + db;
        case BinaryOp::Sub: return da - db;
        case BinaryOp::Mul: return da * b + a * db;
        case BinaryOp::Div:
          if (db.is_constant(0.0)) return da / b;
          return (da * b - a * db) / pow(b, 2.0);
      }
      break;
    }
    case Expr::Kind::Power: {
      const Expr& u = e.operand();
      Expr du = differentiate(u, v);
      if (du.is_constant(0.0)) return du;
      const double c = e.exponent();
      return c * pow(u, c - 1.0) * du;
    }
  }
  throw std::logic_error("differentiate: unhandled node");
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Expr& e, std::span<const double> p) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e.value();
    case Expr::Kind::Coordinate:
      return p[e.index()];
    case Expr::Kind::Unary: {
      const double v = eval_node(e.operand(), p);
      double out = 0.0;
      if (!apply_unary(e.unary_op(), v, out)) {
        throw DomainError(e.unary_op() == UnaryOp::Log
                              ? "log of non-positive value"
                              : "sqrt of negative value",
                          print(e));
      }
      return out;
    }
    case Expr::Kind::Binary: {
      const double a = eval_node(e.operand(0), p);
      const double b = eval_node(e.operand(1), p);
      double out = 0.0;
      if (!apply_binary(e.binary_op(), a, b, out)) {
        throw DomainError("division by zero", print(e));
      }
      return out;
    }
    case Expr::Kind::Power: {
      const double b = eval_node(e.operand(), p);
      double out = 0.0;
      if (!apply_power(b, e.exponent(), out)) {
        throw DomainError(b == 0.0 ? "negative power of zero"
                                   : "fractional power of negative value",
                          print(e));
      }
      return out;
    }
  }
  throw std::logic_error("evaluate: unhandled node");
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> point) {
  if (point.size() < e.arity()) {
    throw Error(ErrorCode::Precondition,
                "point has " + std::to_string(point.size()) +
                    " coordinates, expression needs " +
                    std::to_string(e.arity()));
  }
  return eval_node(e, point);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength of the printed form; higher binds tighter.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    case Expr::Kind::Coordinate:
      return 5;
    case Expr::Kind::Unary:
      return e.unary_op() == UnaryOp::Neg ? 3 : 5;
    case Expr::Kind::Binary:
      return (e.binary_op() == BinaryOp::Add || e.binary_op() == BinaryOp::Sub)
                 ? 1
                 : 2;
    case Expr::Kind::Power:
      return 4;
  }
  return 0;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::Precondition, "cannot print non-finite constant");
  }
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("to_chars failed");
  return std::string(buf.data(), end);
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_precedence, std::string& out) {
  if (precedence(child) < min_precedence) {
    out += '(';
    print_into(child, out);
    out += ')';
  } else {
    print_into(child, out);
  }
}

void print_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      out += format_number(e.value());
      return;
    case Expr::Kind::Coordinate:
      out += e.name();
      return;
    case Expr::Kind::Unary:
      if (e.unary_op() == UnaryOp::Neg) {
        out += '-';
        print_child(e.operand(), 3, out);
      } else {
        out += to_string(e.unary_op());
        out += '(';
        print_into(e.operand(), out);
        out += ')';
      }
      return;
    case Expr::Kind::Binary: {
      const int prec = precedence(e);
      static constexpr const char* kSymbols[] = {" + ", " - ", " * ", " / "};
      print_child(e.operand(0), prec, out);
      out += kSymbols[static_cast<int>(e.binary_op())];
      // Right operands of equal precedence are parenthesized so the printed
      // text reassociates to exactly the same tree.
      print_child(e.operand(1), prec + 1, out);
      return;
    }
    case Expr::Kind::Power: {
      print_child(e.operand(), 5, out);
      out += '^';
      const double c = e.exponent();
      if (c < 0.0) {
        out += '(' + format_number(c) + ')';
      } else {
        out += format_number(c);
      }
      return;
    }
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structural utilities

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::Constant:
      return a.value() == b.value();
    case Expr::Kind::Coordinate:
      return a.index() == b.index();
    case Expr::Kind::Unary:
      return a.unary_op() == b.unary_op() &&
             structurally_equal(a.operand(), b.operand());
    case Expr::Kind::Binary:
      return a.binary_op() == b.binary_op() &&
             structurally_equal(a.operand(0), b.operand(0)) &&
             structurally_equal(a.operand(1), b.operand(1));
    case Expr::Kind::Power:
      return a.exponent() == b.exponent() &&
             structurally_equal(a.operand(), b.operand());
  }
  return false;
}

Expr replace_coordinates(const Expr& e,
                         const std::function<Expr(const Expr&)>& replacement) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Coordinate:
      return replacement(e);
    case Expr::Kind::Unary:
      return Expr::unary(e.unary_op(),
                         replace_coordinates(e.operand(), replacement));
    case Expr::Kind::Binary:
      return Expr::binary(e.binary_op(),
                          replace_coordinates(e.operand(0), replacement),
                          replace_coordinates(e.operand(1), replacement));
    case Expr::Kind::Power:
      return Expr::power(replace_coordinates(e.operand(), replacement),
                         e.exponent());
  }
  throw std::logic_error("replace_coordinates: unhandled node");
}

Expr shift_coordinates(const Expr& e, std::size_t offset,
                       const std::string& prefix) {
  return replace_coordinates(e, [&](const Expr& c) {
    return Expr::coordinate(c.index() + offset, prefix + c.name());
  });
}

// ---------------------------------------------------------------------------
// Jets

ExprJet::ExprJet(Expr e, std::size_t dim) : expr_(std::move(e)), dim_(dim) {
  first_.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) first_.push_back(differentiate(expr_, i));
  second_.reserve(dim * (dim + 1) / 2);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      second_.push_back(differentiate(first_[i], j));
    }
  }
}

const Expr& ExprJet::second(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row i of the packed upper triangle starts after i rows of shrinking length.
  const std::size_t row_start = i * dim_ - i * (i - 1) / 2;
  return second_[row_start + (j - i)];
}

Jet2 ExprJet::evaluate(std::span<const double> point) const {
  Jet2 jet;
  jet.value = confein::evaluate(expr_, point);
  jet.gradient.resize(static_cast<Eigen::Index>(dim_));
  jet.hessian.resize(static_cast<Eigen::Index>(dim_),
                     static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) {
    jet.gradient[static_cast<Eigen::Index>(i)] =
        confein::evaluate(first_[i], point);
    for (std::size_t j = i; j < dim_; ++j) {
      const double h = confein::evaluate(second(i, j), point);
      jet.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h;
      jet.hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = h;
    }
  }
  return jet;
}

Jet2 jet2(const Expr& e, std::span<const double> point) {
  return ExprJet(e, point.size()).evaluate(point);
}

}  // namespace confein
