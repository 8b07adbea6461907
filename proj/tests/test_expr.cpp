#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "weylflow/expr.hpp"

using namespace weylflow;

namespace {

double eval_value(const std::string& src, std::span<const double> p, const Bindings& b = {}) {
  return eval_jet(parse_expr(src), p, 0, b).value();
}

std::string num17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

TEST_CASE("literal structure of simple sums of squares") {
  Expr e = parse_expr("1 + x1^2 + x2^2");
  CHECK(e.nodes()[e.root()].kind == Expr::Kind::Add);
  int pow_count = 0, coord_count = 0;
  for (const auto& n : e.nodes()) {
    if (n.kind == Expr::Kind::PowInt) ++pow_count;
    if (n.kind == Expr::Kind::Coord) ++coord_count;
  }
  CHECK(pow_count == 2);
  CHECK(coord_count == 2);
  CHECK(e.max_coord() == 2);
  CHECK(e.free_names().empty());
}

TEST_CASE("conformal factor expression is well formed") {
  Expr e = parse_expr("4/(1+x1^2+x2^2+x3^2+x4^2)^2");
  std::vector<double> p = {0.1, -0.2, 0.3, 0.05};
  double s2 = 0;
  for (double x : p) s2 += x * x;
  CHECK(eval_jet(e, p, 0).value() == doctest::Approx(4.0 / std::pow(1 + s2, 2)).epsilon(1e-15));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_expr("1 + * x1");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.offset == 4);
  }
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("   "), ParseError);
  CHECK_THROWS_AS(parse_expr("(1+2"), ParseError);
  CHECK_THROWS_AS(parse_expr("sin(x1, x2)"), ParseError);
  CHECK_THROWS_AS(parse_expr("bogus(x1)"), ParseError);
  CHECK_THROWS_AS(parse_expr("1 + 2 x1"), ParseError);
}

TEST_CASE("strict parsing rejects undeclared names") {
  CHECK_NOTHROW(parse_expr("a*x1", {"a"}));
  CHECK_THROWS_AS(parse_expr("a*x1", std::set<std::string>{}), ParseError);
}

TEST_CASE("precedence: powers bind above unary minus above products above sums") {
  std::vector<double> p = {2.0};
  CHECK(eval_value("-x1^2", p) == doctest::Approx(-4.0));
  CHECK(eval_value("2^-2", p) == doctest::Approx(0.25));
  CHECK(eval_value("x1^2^3", p) == doctest::Approx(256.0));  // right associative
  CHECK(eval_value("1+2*3^2", p) == doctest::Approx(19.0));
  CHECK(eval_value("-2*3", p) == doctest::Approx(-6.0));
  CHECK(eval_value("2--3", p) == doctest::Approx(5.0));
  CHECK(eval_value(" 1 +x1   ^ 2 ", p) == doctest::Approx(5.0));  // whitespace-insensitive
}

TEST_CASE("jet evaluation examples") {
  // x1^2 at 3: value 9, first derivative 6, second derivative 2
  Jet j = eval_jet(parse_expr("x1^2"), std::vector<double>{3.0}, 2);
  CHECK(j.value() == doctest::Approx(9.0));
  CHECK(j.deriv1(0) == doctest::Approx(6.0));
  CHECK(j.deriv2(0, 0) == doctest::Approx(2.0));

  // sin x1 at 0 to order 3: derivative values 0, 1, 0, -1
  Jet s = eval_jet(parse_expr("sin(x1)"), std::vector<double>{0.0}, 3);
  std::array<int, 1> a{};
  for (int k = 0; k <= 3; ++k) {
    a[0] = k;
    const double expect = (k % 2 == 0) ? 0.0 : (k == 1 ? 1.0 : -1.0);
    CHECK(s.deriv(a) == doctest::Approx(expect));
  }

  // conformal-factor numerator at (1,0,0,.) in four variables, order 1
  Jet f = eval_jet(parse_expr("1+x1^2+x2^2+x3^2"), std::vector<double>{1, 0, 0, 0.7}, 1);
  CHECK(f.value() == doctest::Approx(2.0));
  CHECK(f.deriv1(0) == doctest::Approx(2.0));
  CHECK(f.deriv1(1) == doctest::Approx(0.0));
  CHECK(f.deriv1(2) == doctest::Approx(0.0));
  CHECK(f.deriv1(3) == doctest::Approx(0.0));
}

TEST_CASE("random polynomial expressions differentiate exactly") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> coef(-2, 2);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    // random monomial sum of total degree <= 4
    std::string src;
    std::vector<std::vector<int>> monos;
    std::vector<double> coefs;
    const int terms = 1 + static_cast<int>(rng() % 5);
    for (int t = 0; t < terms; ++t) {
      std::vector<int> e(n, 0);
      int deg = static_cast<int>(rng() % 5);
      for (int d = 0; d < deg; ++d) e[rng() % n] += 1;
      const double c = coef(rng);
      monos.push_back(e);
      coefs.push_back(c);
      std::string term = "(" + num17(c) + ")";
      for (int v = 0; v < n; ++v)
        if (e[v]) term += "*x" + std::to_string(v + 1) + "^" + std::to_string(e[v]);
      src += (t ? " + " : "") + term;
    }
    std::vector<double> p(n);
    for (auto& x : p) x = coef(rng);
    Jet j = eval_jet(parse_expr(src), p, 4);
    // oracle: differentiate the monomial list directly
    const auto& table = multi_index_table(n);
    for (int i = 0; i < table.count(4); ++i) {
      std::vector<int> alpha(n);
      for (int v = 0; v < n; ++v) alpha[v] = table.alpha[i][v];
      double expect = 0;
      for (size_t t = 0; t < monos.size(); ++t) {
        double term = coefs[t];
        bool dead = false;
        for (int v = 0; v < n && !dead; ++v) {
          int k = monos[t][v];
          for (int d = 0; d < alpha[v]; ++d) {
            if (k == 0) dead = true;
            term *= k--;
          }
          if (!dead)
            for (int d = 0; d < k; ++d) term *= p[v];
        }
        if (!dead) expect += term;
      }
      CHECK(std::abs(j.deriv(alpha) - expect) <= 1e-14 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("evaluating a product equals the jet product of the factors") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-1, 1);
  const char* pieces[] = {"1+x1^2+0.5*x2", "exp(0.3*x1*x2)", "1/(2+x1)", "sqrt(2+x2)",
                          "cos(x1-x2)"};
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      std::vector<double> p = {coef(rng), coef(rng)};
      Jet ja = eval_jet(parse_expr(pieces[a]), p, 4);
      Jet jb = eval_jet(parse_expr(pieces[b]), p, 4);
      Jet prod = ja * jb;
      std::string src = "(" + std::string(pieces[a]) + ")*(" + pieces[b] + ")";
      Jet whole = eval_jet(parse_expr(src), p, 4);
      for (int i = 0; i < prod.size(); ++i)
        CHECK(std::abs(whole.coeff(i) - prod.coeff(i)) <=
              1e-13 * std::max(1.0, std::abs(prod.coeff(i))));
    }
}

TEST_CASE("order-k evaluation is a prefix of order-(k+1)") {
  Expr e = parse_expr("exp(x1*x2)/(1+x1^2)");
  std::vector<double> p = {0.3, -0.6};
  Jet j4 = eval_jet(e, p, 4);
  for (int k = 0; k <= 3; ++k) {
    Jet jk = eval_jet(e, p, k);
    for (int i = 0; i < jk.size(); ++i)
      CHECK(jk.coeff(i) == doctest::Approx(j4.coeff(i)).epsilon(1e-15));
  }
}

TEST_CASE("parameters and profiles resolve through bindings") {
  Bindings b;
  b.params["r2"] = 2.5;
  b.profiles["h"] = [](std::span<const double> point, int order) {
    // h(t) = t^2 as a function of the first coordinate
    Jet t = Jet::variable(static_cast<int>(point.size()), order, 0, point[0]);
    return t * t;
  };
  Jet j = eval_jet(parse_expr("r2*h + 1"), std::vector<double>{1.5, 0.0}, 2, b);
  CHECK(j.value() == doctest::Approx(2.5 * 2.25 + 1));
  CHECK(j.deriv1(0) == doctest::Approx(2.5 * 3.0));
  CHECK(j.deriv2(0, 0) == doctest::Approx(2.5 * 2.0));

  CHECK_THROWS_AS((void)eval_jet(parse_expr("nope+1"), std::vector<double>{0.0}, 1, b), EvalError);
}

TEST_CASE("random token soup either parses or throws a located error") {
  std::mt19937_64 rng(99);
  const char* tokens[] = {"x1", "x2", "+", "-", "*", "/", "^", "(", ")", "sin", "cos",
                          "1.5", "2", "0.25", "foo", "sqrt", "exp", ",", "."};
  for (int trial = 0; trial < 300; ++trial) {
    std::string src;
    const int len = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < len; ++i) {
      src += tokens[rng() % (sizeof(tokens) / sizeof(tokens[0]))];
      if (rng() % 2) src += " ";
    }
    try {
      Expr e = parse_expr(src);
      CHECK(!e.empty());
      // a successful parse must also evaluate or fail with a located error
      try {
        (void)eval_jet(e, std::vector<double>{0.3, -0.4}, 2);
      } catch (const EvalError& err) {
        CHECK(err.offset <= src.size());
      }
    } catch (const ParseError& err) {
      CHECK(err.offset <= src.size());
    }
  }
}

TEST_CASE("domain violations report the offending node") {
  try {
    (void)eval_jet(parse_expr("1 + 1/x1"), std::vector<double>{0.0}, 1);
    FAIL("expected an evaluation error");
  } catch (const EvalError& err) {
    CHECK(err.offset == 5);  // the '/' node
  }
  CHECK_THROWS_AS((void)eval_jet(parse_expr("log(x1)"), std::vector<double>{-1.0}, 1), EvalError);
  CHECK_THROWS_AS((void)eval_jet(parse_expr("x3"), std::vector<double>{0.0, 0.0}, 1), EvalError);
}
