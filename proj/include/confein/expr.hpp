#pragma once

// Closed-form scalar expressions over named chart coordinates.
//
// Grammar (version 1), loosest binding first:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := atom ('^' unary)?           exponent must fold to a constant
//   atom    := number | 'pi' | coordinate | function '(' expr ')' | '(' expr ')'
//   function:= sin cos tan sinh cosh tanh exp log sqrt
//
// Identifiers are [A-Za-z_][A-Za-z0-9_.]*, so prefixed product coordinates
// such as "f0.x" are ordinary names. Numbers accept an optional fraction and
// decimal exponent ("2", "0.5", "1e-3").

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace confein {

enum class UnaryOp { Neg, Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div };

const char* to_string(UnaryOp op);

// Immutable expression tree. Copies share structure; nothing is mutated after
// construction, so an Expr may be evaluated from many threads at once.
class Expr {
 public:
  enum class Kind { Constant, Coordinate, Unary, Binary, Power };

  // The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr coordinate(std::size_t index, std::string name);

  // The builders below apply light simplification: constant folding and the
  // 0/1 identities. No reordering or canonicalization happens.
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr power(Expr base, double exponent);

  Kind kind() const;
  double value() const;               // Constant
  std::size_t index() const;          // Coordinate
  const std::string& name() const;    // Coordinate
  UnaryOp unary_op() const;           // Unary
  BinaryOp binary_op() const;         // Binary
  double exponent() const;            // Power
  const Expr& operand(std::size_t i = 0) const;  // Unary, Binary, Power

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  // One past the largest coordinate index referenced; 0 for closed terms.
  std::size_t arity() const;

  bool same_node(const Expr& other) const { return node_ == other.node_; }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator+(double a, const Expr& b);
Expr operator+(const Expr& a, double b);
Expr operator-(double a, const Expr& b);
Expr operator-(const Expr& a, double b);
Expr operator*(double a, const Expr& b);
Expr operator*(const Expr& a, double b);
Expr operator/(double a, const Expr& b);
Expr operator/(const Expr& a, double b);

Expr pow(const Expr& base, double exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr sinh(const Expr& e);
Expr cosh(const Expr& e);
Expr tanh(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);

// Parses text against the ordered coordinate list. Throws SyntaxError or
// UnknownIdentifier; both carry the byte offset of the failure.
Expr parse(std::string_view text, std::span<const std::string> coords);

// Canonical text form. The output parses back (against the same coordinate
// list) to a structurally identical tree.
std::string print(const Expr& e);

// Exact partial derivative with respect to the coordinate with this index.
Expr differentiate(const Expr& e, std::size_t coordinate);

// Throws DomainError naming the offending node, and Error(Precondition) when
// the point has fewer entries than the expression's arity.
double evaluate(const Expr& e, std::span<const double> point);

bool structurally_equal(const Expr& a, const Expr& b);

// Rebuilds e with every coordinate node replaced by replacement(index).
Expr replace_coordinates(const Expr& e,
                         const std::function<Expr(const Expr&)>& replacement);

// Shifts every coordinate index by offset and prefixes its name.
Expr shift_coordinates(const Expr& e, std::size_t offset,
                       const std::string& prefix);

// Value, coordinate gradient and coordinate Hessian (plain second partials).
struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Precomputed symbolic first and second partials of one expression over a
// chart of fixed dimension.
class ExprJet {
 public:
  ExprJet(Expr e, std::size_t dim);

  std::size_t dim() const { return dim_; }
  const Expr& expr() const { return expr_; }
  const Expr& first(std::size_t i) const { return first_[i]; }
  const Expr& second(std::size_t i, std::size_t j) const;

  Jet2 evaluate(std::span<const double> point) const;

 private:
  Expr expr_;
  std::size_t dim_;
  std::vector<Expr> first_;
  std::vector<Expr> second_;  // packed upper triangle, i <= j
};

Jet2 jet2(const Expr& e, std::span<const double> point);

}  // namespace confein
