#pragma once

#include <cassert>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace weylflow {

inline constexpr double kResidualFloor = 1e-12;

struct TensorError : std::runtime_error {
  explicit TensorError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMetricError : std::runtime_error {
  explicit SingularMetricError(const std::string& what) : std::runtime_error(what) {}
};

enum class Variance : unsigned char { Up, Dn };

/// Dense real tensor over one dimension with an explicit valence signature.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> valence);
  Tensor(int dim, std::initializer_list<Variance> valence)
      : Tensor(dim, std::vector<Variance>(valence)) {}

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(valence_.size()); }
  const std::vector<Variance>& valence() const { return valence_; }
  Variance variance(int slot) const { return valence_[slot]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double at(std::span<const int> idx) const { return data_[flat(idx)]; }
  double& at(std::span<const int> idx) { return data_[flat(idx)]; }

  template <typename... I>
  double operator()(I... idx) const {
    return data_[flat_of(idx...)];
  }
  template <typename... I>
  double& operator()(I... idx) {
    return data_[flat_of(idx...)];
  }

  Tensor& operator+=(const Tensor& rhs);
  Tensor& operator-=(const Tensor& rhs);
  Tensor& operator*=(double s);
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

 private:
  size_t flat(std::span<const int> idx) const {
    assert(static_cast<int>(idx.size()) == rank());
    size_t f = 0;
    for (int v : idx) f = f * dim_ + static_cast<size_t>(v);
    return f;
  }
  template <typename... I>
  size_t flat_of(I... idx) const {
    assert(static_cast<int>(sizeof...(idx)) == rank());
    size_t f = 0;
    ((f = f * dim_ + static_cast<size_t>(idx)), ...);
    return f;
  }

  int dim_ = 0;
  std::vector<Variance> valence_;
  std::vector<double> data_;
};

/// Visits every index tuple of a rank-r tensor over dimension n.
template <typename F>
void for_each_index(int dim, int rank, F&& f) {
  std::vector<int> idx(rank, 0);
  if (rank == 0) {
    f(std::span<const int>(idx));
    return;
  }
  for (;;) {
    f(std::span<const int>(idx));
    int s = rank - 1;
    while (s >= 0 && ++idx[s] == dim) idx[s--] = 0;
    if (s < 0) return;
  }
}

double max_abs(const Tensor& t);

/// Relative difference |x - y|_inf normalized by the larger magnitude with an
/// absolute floor, so residuals near zero tensors do not blow up.
double rel_residual(const Tensor& x, const Tensor& y);

/// diff / (scale + floor/tol): bounding this by tol is exactly the statement
/// diff <= tol * scale + floor.
double gated_residual(double diff, double scale, double tol, double floor = kResidualFloor);

/// Einstein sum over one up/down slot pair; rank drops by two.
Tensor contract(const Tensor& t, int slot_a, int slot_b);

/// Flips the variance of one slot by contracting with the metric (Up -> Dn)
/// or the inverse metric (Dn -> Up). The metric pair is checked for rough
/// consistency via a condition estimate.
Tensor raise_lower(const Tensor& t, int slot, const Tensor& metric, const Tensor& inverse_metric);

/// Reorders slots: out(idx) = t(idx[perm[0]], ..., idx[perm[r-1]]).
Tensor transpose(const Tensor& t, std::span<const int> perm);

/// Max-abs of t - sign * perm(t), normalized by max-abs of t (0 if t = 0).
double symmetry_residual(const Tensor& t, std::span<const int> perm, int sign);

/// Dense symmetric-matrix helpers used across the geometry and soliton code.
Tensor matrix_inverse_spd(const Tensor& g);  // throws SingularMetricError
double condition_estimate(const Tensor& g, const Tensor& ginv);

/// Eigenvalues (ascending) and orthonormal eigenvectors of the generalized
/// symmetric problem  a v = lambda g v  with g positive definite. Columns of
/// the returned matrix are g-orthonormal eigenvectors.
void generalized_sym_eig(const Tensor& a, const Tensor& g, std::vector<double>& eigenvalues,
                         std::vector<std::vector<double>>& eigenvectors);

}  // namespace weylflow
