#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "weylflow/jet.hpp"

using namespace weylflow;

namespace {

// Independent dense-polynomial oracle: exponent vector -> coefficient.
struct Poly {
  std::map<std::array<int, kMaxVars>, double> terms;

  static Poly constant(double c) {
    Poly p;
    p.terms[{}] = c;
    return p;
  }
  static Poly var(int v) {
    Poly p;
    std::array<int, kMaxVars> e{};
    e[v] = 1;
    p.terms[e] = 1.0;
    return p;
  }
  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [e, c] : o.terms) r.terms[e] += c;
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (auto& [e1, c1] : terms)
      for (auto& [e2, c2] : o.terms) {
        std::array<int, kMaxVars> e{};
        for (int v = 0; v < kMaxVars; ++v) e[v] = e1[v] + e2[v];
        r.terms[e] += c1 * c2;
      }
    return r;
  }
  Poly scaled(double s) const {
    Poly r = *this;
    for (auto& [e, c] : r.terms) c *= s;
    return r;
  }
  // value of the mixed partial d^alpha P at a point
  double deriv(std::span<const int> alpha, std::span<const double> x) const {
    double total = 0;
    for (auto& [e, c] : terms) {
      double term = c;
      bool dead = false;
      for (size_t v = 0; v < x.size(); ++v) {
        int k = e[v];
        for (int d = 0; d < alpha[v]; ++d) {
          if (k == 0) dead = true;
          term *= k;
          k -= 1;
        }
        if (dead) break;
        for (int d = 0; d < k; ++d) term *= x[v];
      }
      if (!dead) total += term;
    }
    return total;
  }
};

void compare_all(const Jet& jet, const Poly& poly, std::span<const double> x, double tol) {
  const auto& table = multi_index_table(jet.nvars());
  for (int i = 0; i < table.count(jet.order()); ++i) {
    std::vector<int> alpha(jet.nvars());
    for (int v = 0; v < jet.nvars(); ++v) alpha[v] = table.alpha[i][v];
    const double expect = poly.deriv(alpha, x);
    const double got = jet.deriv(alpha);
    CHECK(std::abs(got - expect) <= tol * std::max(1.0, std::abs(expect)));
  }
}

}  // namespace

TEST_CASE("polynomial jets match the symbolic expansion exactly") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % kMaxVars);
    std::vector<double> x(n);
    for (auto& xi : x) xi = coef(rng);
    // random degree <= 4 polynomial built by the same op sequence on both sides
    Jet j = Jet::constant(n, 4, coef(rng));
    Poly p = Poly::constant(j.value());
    for (int step = 0; step < 6; ++step) {
      const int v = static_cast<int>(rng() % n);
      switch (rng() % 3) {
        case 0: {
          const double c = coef(rng);
          j += Jet::variable(n, 4, v, x[v]) * c;
          p = p + Poly::var(v).scaled(c);
          break;
        }
        case 1: {
          Jet q = Jet::variable(n, 4, v, x[v]);
          j = j * (q * q);  // keeps degree growth modest
          p = p * (Poly::var(v) * Poly::var(v));
          break;
        }
        default: {
          const double c = coef(rng);
          j *= c;
          p = p.scaled(c);
          break;
        }
      }
    }
    compare_all(j, p, x, 1e-14);
  }
}

TEST_CASE("product rule holds between independently built jets") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    std::vector<double> x(n);
    for (auto& xi : x) xi = coef(rng);
    auto random_jet_poly = [&](Jet& j, Poly& p) {
      j = Jet::constant(n, 4, coef(rng));
      p = Poly::constant(j.value());
      for (int v = 0; v < n; ++v) {
        const double c = coef(rng);
        j += Jet::variable(n, 4, v, x[v]) * c;
        p = p + Poly::var(v).scaled(c);
      }
      Jet sq = j * j;
      j = sq;
      p = p * p;
    };
    Jet f, g;
    Poly pf, pg;
    random_jet_poly(f, pf);
    random_jet_poly(g, pg);
    compare_all(f * g, pf * pg, x, 1e-13);
  }
}

TEST_CASE("elementary function jets match known Taylor data") {
  Jet x0 = Jet::variable(1, 3, 0, 0.0);
  Jet s = sin(x0);
  std::array<int, 1> a{};
  a[0] = 0;
  CHECK(s.deriv(a) == doctest::Approx(0.0));
  a[0] = 1;
  CHECK(s.deriv(a) == doctest::Approx(1.0));
  a[0] = 2;
  CHECK(s.deriv(a) == doctest::Approx(0.0));
  a[0] = 3;
  CHECK(s.deriv(a) == doctest::Approx(-1.0));

  Jet u = Jet::variable(2, 4, 0, 0.7) + Jet::variable(2, 4, 1, -0.3);
  Jet e = exp(u);
  CHECK(e.value() == doctest::Approx(std::exp(0.4)).epsilon(1e-14));
  CHECK(e.deriv2(0, 1) == doctest::Approx(std::exp(0.4)).epsilon(1e-13));

  Jet l = log(exp(u));
  CHECK(l.value() == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(l.deriv1(0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(l.deriv2(0, 0) == doctest::Approx(0.0).epsilon(1e-12));

  Jet q = sqrt(u + 1.0);
  Jet q2 = q * q;
  CHECK(q2.value() == doctest::Approx(1.4).epsilon(1e-13));
  CHECK(q2.deriv1(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(q2.deriv2(1, 1)) <= 1e-12);
}

TEST_CASE("division, powers and reciprocals are inverse operations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(0.4, 1.8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3;
    Jet f = Jet::constant(n, 4, coef(rng));
    Jet g = Jet::constant(n, 4, coef(rng));
    for (int v = 0; v < n; ++v) {
      f += Jet::variable(n, 4, v, coef(rng)) * 0.3;
      g += Jet::variable(n, 4, v, coef(rng)) * 0.2;
    }
    Jet h = (f / g) * g;
    for (int i = 0; i < f.size(); ++i)
      CHECK(std::abs(h.coeff(i) - f.coeff(i)) <= 1e-13 * std::max(1.0, std::abs(f.coeff(i))));

    Jet p3 = f.pow_int(3);
    Jet p3b = f * f * f;
    for (int i = 0; i < p3.size(); ++i)
      CHECK(p3.coeff(i) == doctest::Approx(p3b.coeff(i)).epsilon(1e-13));

    Jet pm2 = f.pow_int(-2);
    Jet pm2b = (f * f).reciprocal();
    for (int i = 0; i < pm2.size(); ++i)
      CHECK(pm2.coeff(i) == doctest::Approx(pm2b.coeff(i)).epsilon(1e-12));

    Jet pr = f.pow_real(1.7);
    Jet prb = exp(log(f) * 1.7);
    for (int i = 0; i < pr.size(); ++i)
      CHECK(std::abs(pr.coeff(i) - prb.coeff(i)) <= 1e-12 * std::max(1.0, std::abs(prb.coeff(i))));
  }
}

TEST_CASE("order-k jet is a prefix of the order-(k+1) jet") {
  Jet x = Jet::variable(3, 4, 0, 0.5);
  Jet y = Jet::variable(3, 4, 1, -0.25);
  Jet full = exp(x * y) + x.pow_int(3);
  for (int k = 0; k < 4; ++k) {
    Jet xl = Jet::variable(3, k, 0, 0.5);
    Jet yl = Jet::variable(3, k, 1, -0.25);
    Jet low = exp(xl * yl) + xl.pow_int(3);
    for (int i = 0; i < low.size(); ++i)
      CHECK(low.coeff(i) == doctest::Approx(full.coeff(i)).epsilon(1e-14));
  }
}

TEST_CASE("directional derivative of a jet drops the order by one") {
  // f = x^2 y, df/dx = 2 x y
  Jet x = Jet::variable(2, 3, 0, 1.5);
  Jet y = Jet::variable(2, 3, 1, -2.0);
  Jet f = x * x * y;
  Jet d = f.derivative(0);
  CHECK(d.order() == 2);
  CHECK(d.value() == doctest::Approx(2 * 1.5 * -2.0));
  CHECK(d.deriv1(0) == doctest::Approx(2 * -2.0));
  CHECK(d.deriv1(1) == doctest::Approx(2 * 1.5));
  CHECK(d.deriv2(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("domain violations throw") {
  Jet z = Jet::variable(2, 2, 0, 0.0);
  CHECK_THROWS_AS((void)z.reciprocal(), JetDomainError);
  CHECK_THROWS_AS((void)log(z), JetDomainError);
  CHECK_THROWS_AS((void)sqrt(Jet::constant(2, 2, -1.0)), JetDomainError);
  CHECK_THROWS_AS((void)Jet::constant(2, 2, -1.0).pow_real(0.5), JetDomainError);
  Jet one = Jet::constant(2, 2, 1.0);
  CHECK_THROWS_AS((void)(one / z), JetDomainError);
}
