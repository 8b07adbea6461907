#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "weylflow/catalog.hpp"
#include "weylflow/tensor.hpp"

using namespace weylflow;

namespace {

Tensor random_spd_metric(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  Tensor g(n, {Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i) {
    g(i, i) = 1.0 + std::abs(coef(rng));
    for (int j = i + 1; j < n; ++j) {
      const double v = coef(rng);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Tensor random_tensor(int n, std::vector<Variance> val, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2, 2);
  Tensor t(n, std::move(val));
  for (double& x : t.data()) x = coef(rng);
  return t;
}

}  // namespace

TEST_CASE("trace of the identity (1,1)-tensor is the dimension") {
  Tensor id(4, {Variance::Up, Variance::Dn});
  for (int i = 0; i < 4; ++i) id(i, i) = 1.0;
  Tensor tr = contract(id, 0, 1);
  CHECK(tr.rank() == 0);
  CHECK(tr.data()[0] == doctest::Approx(4.0));
}

TEST_CASE("contracting the inverse metric against the metric gives the identity") {
  std::mt19937_64 rng(5);
  const int n = 4;
  Tensor g = random_spd_metric(n, rng);
  Tensor gi = matrix_inverse_spd(g);
  // P_{i}{}^{j}{}_{k}{}_{l} = gi(i,j) g(k,l), contract j against k
  Tensor prod(n, {Variance::Up, Variance::Up, Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) prod(i, j, k, l) = gi(i, j) * g(k, l);
  Tensor delta = contract(prod, 1, 2);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      CHECK(delta(i, l) == doctest::Approx(i == l ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("trace of the raised Ricci tensor of the unit 4-sphere is 12") {
  // constant-curvature oracle: Ric = (n-1) K g with K = 1, so the full trace
  // is n (n-1) = 12
  CatalogEntry sphere = get_metric("sphere", {{"n", 4}, {"r", 1}});
  std::vector<double> p = {0.2, -0.1, 0.3, 0.05};
  Tensor g = sphere.chart.metric(p);
  Tensor gi = matrix_inverse_spd(g);
  Tensor ric = g;
  ric *= 3.0;
  Tensor mixed = raise_lower(ric, 0, g, gi);
  Tensor tr = contract(mixed, 0, 1);
  CHECK(tr.data()[0] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("raise then lower restores the original components") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Tensor g = random_spd_metric(n, rng);
    Tensor gi = matrix_inverse_spd(g);
    Tensor t = random_tensor(n, {Variance::Dn, Variance::Dn, Variance::Dn}, rng);
    for (int slot = 0; slot < 3; ++slot) {
      Tensor up = raise_lower(t, slot, g, gi);
      Tensor down = raise_lower(up, slot, g, gi);
      CHECK(rel_residual(down, t) <= 1e-13);
    }
  }
}

TEST_CASE("raising with the Euclidean metric leaves components unchanged") {
  std::mt19937_64 rng(13);
  const int n = 4;
  Tensor g(n, {Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i) g(i, i) = 1.0;
  Tensor gi = matrix_inverse_spd(g);
  Tensor t = random_tensor(n, {Variance::Dn, Variance::Dn}, rng);
  Tensor up = raise_lower(t, 0, g, gi);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(up(i, j) == doctest::Approx(t(i, j)));
}

TEST_CASE("symmetry residuals detect pair symmetry and antisymmetry") {
  std::mt19937_64 rng(23);
  const int n = 4;
  Tensor g = random_spd_metric(n, rng);
  // space-form shaped tensor K (g_ik g_jl - g_il g_jk)
  Tensor riem(n, {Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) riem(i, j, k, l) = g(i, k) * g(j, l) - g(i, l) * g(j, k);
  const std::vector<int> pair_swap = {2, 3, 0, 1};
  const std::vector<int> first_swap = {1, 0, 2, 3};
  CHECK(symmetry_residual(riem, pair_swap, 1) <= 1e-12);
  CHECK(symmetry_residual(riem, first_swap, -1) <= 1e-12);

  Tensor asym = random_tensor(n, {Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn}, rng);
  CHECK(symmetry_residual(asym, pair_swap, 1) > 0.01);
  Tensor zero(n, {Variance::Dn, Variance::Dn});
  CHECK(symmetry_residual(zero, std::vector<int>{1, 0}, 1) == 0.0);
}

TEST_CASE("contraction is linear") {
  std::mt19937_64 rng(31);
  const int n = 3;
  Tensor x = random_tensor(n, {Variance::Up, Variance::Dn, Variance::Dn}, rng);
  Tensor y = random_tensor(n, {Variance::Up, Variance::Dn, Variance::Dn}, rng);
  Tensor combo = x;
  combo *= 2.0;
  Tensor y3 = y;
  y3 *= -3.0;
  combo += y3;
  Tensor lhs = contract(combo, 0, 1);
  Tensor rhs = contract(x, 0, 1);
  rhs *= 2.0;
  Tensor ry = contract(y, 0, 1);
  ry *= -3.0;
  rhs += ry;
  CHECK(rel_residual(lhs, rhs) <= 1e-14);
}

TEST_CASE("contract and raise_lower validate their inputs") {
  Tensor t(3, {Variance::Dn, Variance::Dn});
  CHECK_THROWS_AS((void)contract(t, 0, 1), TensorError);  // both covariant
  CHECK_THROWS_AS((void)contract(t, 0, 0), TensorError);
  CHECK_THROWS_AS((void)contract(t, 0, 5), TensorError);

  // ill-conditioned metric pair trips the condition estimate
  Tensor g(3, {Variance::Dn, Variance::Dn});
  Tensor gi(3, {Variance::Up, Variance::Up});
  for (int i = 0; i < 3; ++i) {
    g(i, i) = (i == 0) ? 1e15 : 1.0;
    gi(i, i) = (i == 0) ? 1e-15 : 1.0;
  }
  CHECK_THROWS_AS((void)raise_lower(t, 0, g, gi), SingularMetricError);
}

TEST_CASE("generalized symmetric eigensolver recovers known spectra") {
  std::mt19937_64 rng(41);
  const int n = 4;
  Tensor g = random_spd_metric(n, rng);
  // a = 2 g has generalized spectrum {2,2,2,2}
  Tensor a = g;
  a *= 2.0;
  std::vector<double> lam;
  std::vector<std::vector<double>> vecs;
  generalized_sym_eig(a, g, lam, vecs);
  for (double l : lam) CHECK(l == doctest::Approx(2.0).epsilon(1e-12));
  // eigenvectors satisfy a v = lambda g v
  Tensor b = random_tensor(n, {Variance::Dn, Variance::Dn}, rng);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double s = 0.5 * (b(i, j) + b(j, i));
      b(i, j) = s;
      b(j, i) = s;
    }
  generalized_sym_eig(b, g, lam, vecs);
  for (int e = 0; e < n; ++e) {
    for (int i = 0; i < n; ++i) {
      double av = 0, gv = 0;
      for (int j = 0; j < n; ++j) {
        av += b(i, j) * vecs[e][j];
        gv += g(i, j) * vecs[e][j];
      }
      CHECK(std::abs(av - lam[e] * gv) <= 1e-10);
    }
  }
}
