#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace weylflow {

inline constexpr int kMaxVars = 6;
inline constexpr int kMaxJetOrder = 4;

/// Thrown when an elementary function is evaluated outside its domain
/// (division by zero, log/sqrt of a nonpositive value, real power of a
/// nonpositive base).
struct JetDomainError : std::runtime_error {
  explicit JetDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Enumeration of all multi-indices of total degree <= kMaxJetOrder in a
/// fixed number of variables, ordered by (degree, lex). The degree-d block
/// of the enumeration is a prefix of the degree-(d+1) block, so an order-k
/// jet is stored as a prefix of an order-(k+1) jet.
struct MultiIndexTable {
  int nvars = 0;
  std::vector<std::array<std::uint8_t, kMaxVars>> alpha;
  std::vector<int> degree;
  std::array<int, kMaxJetOrder + 2> offset{};   // offset[d] = first index of degree d
  std::vector<int> product;                      // [i * size + j] -> index of alpha_i + alpha_j, or -1
  std::vector<std::array<int, kMaxVars>> shift;  // [i][v] -> index of alpha_i + e_v, or -1
  std::vector<double> alpha_factorial;

  int size() const { return static_cast<int>(alpha.size()); }
  int count(int order) const { return offset[order + 1]; }
  int index_of(std::span<const int> a) const;  // -1 if absent
};

const MultiIndexTable& multi_index_table(int nvars);

/// Truncated multivariate Taylor expansion of a scalar at a point.
/// Coefficients are stored as Taylor coefficients t_alpha = d^alpha f / alpha!,
/// which makes multiplication a plain truncated convolution.
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order);
  static Jet constant(int nvars, int order, double value);
  static Jet variable(int nvars, int order, int var, double value);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }

  double value() const { return c_[0]; }
  double coeff(int idx) const { return c_[idx]; }
  double& coeff(int idx) { return c_[idx]; }

  /// Value of the mixed partial derivative d^alpha f (alpha! times the
  /// stored Taylor coefficient). Returns 0 for |alpha| > order.
  double deriv(std::span<const int> alpha) const;
  double deriv1(int v) const;
  double deriv2(int v, int w) const;

  /// Prefix truncation to a lower order.
  Jet truncated(int order) const;

  /// Jet of the partial derivative in direction v; order drops by one.
  Jet derivative(int v) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return (-b) + a; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double b);
  friend Jet operator/(double a, const Jet& b);

  /// Composition with an analytic function given by the univariate Taylor
  /// coefficients cs[k] = phi^(k)(value()) / k!, truncated at this order.
  static Jet compose(const Jet& inner, std::span<const double> cs);

  Jet pow_int(long long p) const;
  Jet pow_real(double a) const;
  Jet reciprocal() const;

 private:
  int nvars_ = 0;
  int order_ = 0;
  std::vector<double> c_;
};

Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sqrt(const Jet& u);

}  // namespace weylflow
