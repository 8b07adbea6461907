#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weylflow/jet.hpp"

namespace weylflow {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset(offset) {}
  size_t offset;
};

struct EvalError : std::runtime_error {
  EvalError(const std::string& what, size_t offset)
      : std::runtime_error(what + " (node at offset " + std::to_string(offset) + ")"),
        offset(offset) {}
  size_t offset;
};

/// A profile is a numeric function bound by the caller: given the evaluation
/// point it supplies its own jet (value and partial derivatives) there.
using ProfileFn = std::function<Jet(std::span<const double> point, int order)>;

struct Bindings {
  std::map<std::string, double, std::less<>> params;
  std::map<std::string, ProfileFn, std::less<>> profiles;
};

/// Immutable arithmetic expression over coordinates x1..xn, named
/// parameters/profiles and the functions sin, cos, exp, log, sqrt.
class Expr {
 public:
  enum class Kind : std::uint8_t {
    Number, Coord, Name,
    Add, Sub, Mul, Div, Pow, PowInt, Neg,
    Sin, Cos, Exp, Log, Sqrt,
  };

  struct Node {
    Kind kind;
    double number = 0;       // Number
    int coord = -1;          // Coord, 0-based
    long long iexp = 0;      // PowInt
    int a = -1, b = -1;      // children
    std::string name;        // Name
    std::uint32_t offset = 0;
  };

  Expr() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  bool empty() const { return nodes_.empty(); }
  const std::string& source() const { return source_; }

  /// Free parameter/profile names referenced by the expression.
  std::set<std::string> free_names() const;
  /// Highest coordinate index referenced (1-based), 0 if none.
  int max_coord() const;

 private:
  friend Expr parse_expr(std::string_view);
  std::vector<Node> nodes_;
  int root_ = -1;
  std::string source_;
};

/// Parses src under the precedence ^ > unary minus > *,/ > +,-.
/// Throws ParseError with a byte offset on malformed input.
Expr parse_expr(std::string_view src);

/// Strict variant: every free name must appear in allowed_names.
Expr parse_expr(std::string_view src, const std::set<std::string>& allowed_names);

/// Evaluates the truncated Taylor expansion of e at the given point.
/// Differentiation is exact to machine rounding. Throws EvalError on domain
/// violations or unbound names, reporting the offending node.
Jet eval_jet(const Expr& e, std::span<const double> point, int order,
             const Bindings& bindings = {});

}  // namespace weylflow
