#include "weylflow/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <mutex>

namespace weylflow {

namespace {

// Packed key for a multi-index: base-(kMaxJetOrder+1) digits.
int pack(std::span<const std::uint8_t> a, int nvars) {
  int key = 0;
  for (int v = nvars - 1; v >= 0; --v) key = key * (kMaxJetOrder + 1) + a[v];
  return key;
}

MultiIndexTable build_table(int nvars) {
  MultiIndexTable t;
  t.nvars = nvars;
  // Enumerate by total degree, lexicographically within each degree.
  std::array<std::uint8_t, kMaxVars> cur{};
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    t.offset[d] = static_cast<int>(t.alpha.size());
    // generate all multi-indices of total degree d over nvars variables
    std::vector<std::array<std::uint8_t, kMaxVars>> level;
    struct Rec {
      int nvars, d;
      std::vector<std::array<std::uint8_t, kMaxVars>>* out;
      void gen(std::array<std::uint8_t, kMaxVars>& a, int v, int rem) {
        if (v == nvars - 1) {
          a[v] = static_cast<std::uint8_t>(rem);
          out->push_back(a);
          return;
        }
        for (int k = rem; k >= 0; --k) {
          a[v] = static_cast<std::uint8_t>(k);
          gen(a, v + 1, rem - k);
        }
      }
    } rec{nvars, d, &level};
    rec.gen(cur, 0, d);
    std::sort(level.begin(), level.end());
    for (auto& a : level) {
      t.alpha.push_back(a);
      t.degree.push_back(d);
    }
  }
  t.offset[kMaxJetOrder + 1] = static_cast<int>(t.alpha.size());

  int pow5 = 1;
  for (int v = 0; v < nvars; ++v) pow5 *= (kMaxJetOrder + 1);
  std::vector<int> lookup(static_cast<size_t>(pow5), -1);
  for (int i = 0; i < t.size(); ++i) lookup[pack(t.alpha[i], nvars)] = i;

  const int n = t.size();
  t.product.assign(static_cast<size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (t.degree[i] + t.degree[j] > kMaxJetOrder) continue;
      std::array<std::uint8_t, kMaxVars> s{};
      for (int v = 0; v < nvars; ++v) s[v] = static_cast<std::uint8_t>(t.alpha[i][v] + t.alpha[j][v]);
      t.product[static_cast<size_t>(i) * n + j] = lookup[pack(s, nvars)];
    }
  }
  t.shift.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < kMaxVars; ++v) t.shift[i][v] = -1;
    for (int v = 0; v < nvars; ++v) {
      if (t.degree[i] + 1 > kMaxJetOrder) continue;
      auto s = t.alpha[i];
      s[v] += 1;
      t.shift[i][v] = lookup[pack(s, nvars)];
    }
  }
  t.alpha_factorial.resize(n);
  for (int i = 0; i < n; ++i) {
    double f = 1.0;
    for (int v = 0; v < nvars; ++v)
      for (int k = 2; k <= t.alpha[i][v]; ++k) f *= k;
    t.alpha_factorial[i] = f;
  }
  return t;
}

}  // namespace

int MultiIndexTable::index_of(std::span<const int> a) const {
  std::array<std::uint8_t, kMaxVars> b{};
  int deg = 0;
  for (size_t v = 0; v < a.size(); ++v) {
    if (a[v] < 0 || a[v] > kMaxJetOrder) return -1;
    b[v] = static_cast<std::uint8_t>(a[v]);
    deg += a[v];
  }
  if (deg > kMaxJetOrder) return -1;
  for (int i = offset[deg]; i < offset[deg + 1]; ++i)
    if (alpha[i] == b) return i;
  return -1;
}

const MultiIndexTable& multi_index_table(int nvars) {
  assert(nvars >= 1 && nvars <= kMaxVars);
  static std::array<MultiIndexTable, kMaxVars + 1> tables;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int n = 1; n <= kMaxVars; ++n) tables[n] = build_table(n);
  });
  return tables[nvars];
}

Jet::Jet(int nvars, int order) : nvars_(nvars), order_(order) {
  assert(nvars >= 1 && nvars <= kMaxVars && order >= 0 && order <= kMaxJetOrder);
  c_.assign(multi_index_table(nvars).count(order), 0.0);
}

Jet Jet::constant(int nvars, int order, double value) {
  Jet j(nvars, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double value) {
  assert(var >= 0 && var < nvars);
  Jet j(nvars, order);
  j.c_[0] = value;
  if (order >= 1) {
    // degree-1 indices come right after the constant term, lex order
    std::array<int, kMaxVars> a{};
    a[var] = 1;
    int idx = multi_index_table(nvars).index_of(std::span<const int>(a.data(), nvars));
    j.c_[idx] = 1.0;
  }
  return j;
}

double Jet::deriv(std::span<const int> alpha) const {
  const auto& t = multi_index_table(nvars_);
  int idx = t.index_of(alpha);
  if (idx < 0 || idx >= size()) return 0.0;
  return c_[idx] * t.alpha_factorial[idx];
}

double Jet::deriv1(int v) const {
  std::array<int, kMaxVars> a{};
  a[v] = 1;
  return deriv(std::span<const int>(a.data(), nvars_));
}

double Jet::deriv2(int v, int w) const {
  std::array<int, kMaxVars> a{};
  a[v] += 1;
  a[w] += 1;
  return deriv(std::span<const int>(a.data(), nvars_));
}

Jet Jet::truncated(int order) const {
  assert(order <= order_);
  Jet j(nvars_, order);
  std::copy_n(c_.begin(), j.size(), j.c_.begin());
  return j;
}

Jet Jet::derivative(int v) const {
  assert(order_ >= 1);
  assert(v >= 0 && v < nvars_);
  const auto& t = multi_index_table(nvars_);
  Jet out(nvars_, order_ - 1);
  for (int i = 0; i < out.size(); ++i) {
    int up = t.shift[i][v];
    out.c_[i] = c_[up] * (t.alpha[i][v] + 1);
  }
  return out;
}

Jet Jet::operator-() const {
  Jet j = *this;
  for (double& x : j.c_) x = -x;
  return j;
}

Jet& Jet::operator+=(const Jet& rhs) {
  assert(nvars_ == rhs.nvars_);
  if (rhs.order_ < order_) {
    order_ = rhs.order_;
    c_.resize(rhs.size());
  }
  for (int i = 0; i < size(); ++i) c_[i] += rhs.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  assert(nvars_ == rhs.nvars_);
  if (rhs.order_ < order_) {
    order_ = rhs.order_;
    c_.resize(rhs.size());
  }
  for (int i = 0; i < size(); ++i) c_[i] -= rhs.c_[i];
  return *this;
}

Jet& Jet::operator+=(double rhs) {
  c_[0] += rhs;
  return *this;
}

Jet& Jet::operator-=(double rhs) {
  c_[0] -= rhs;
  return *this;
}

Jet& Jet::operator*=(double rhs) {
  for (double& x : c_) x *= rhs;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  assert(a.nvars_ == b.nvars_);
  const auto& t = multi_index_table(a.nvars_);
  const int ord = std::min(a.order_, b.order_);
  const int stride = t.size();
  Jet out(a.nvars_, ord);
  const int na = t.count(ord);
  for (int i = 0; i < na; ++i) {
    const double ai = a.c_[i];
    if (ai == 0.0) continue;
    const int nb = t.count(ord - t.degree[i]);
    const int* prow = t.product.data() + static_cast<size_t>(i) * stride;
    for (int j = 0; j < nb; ++j) out.c_[prow[j]] += ai * b.c_[j];
  }
  return out;
}

Jet Jet::compose(const Jet& inner, std::span<const double> cs) {
  Jet v = inner;
  v.c_[0] = 0.0;  // inner - inner(0)
  const int ord = inner.order_;
  Jet acc = Jet::constant(inner.nvars_, ord, cs[ord]);
  for (int k = ord - 1; k >= 0; --k) {
    acc = acc * v;
    acc.c_[0] += cs[k];
  }
  return acc;
}

Jet Jet::reciprocal() const {
  const double u0 = value();
  if (u0 == 0.0) throw JetDomainError("division by zero");
  std::array<double, kMaxJetOrder + 1> cs{};
  double p = 1.0 / u0;
  for (int k = 0; k <= order_; ++k) {
    cs[k] = p;
    p = -p / u0;
  }
  return compose(*this, std::span<const double>(cs.data(), order_ + 1));
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }

Jet operator/(Jet a, double b) {
  if (b == 0.0) throw JetDomainError("division by zero");
  return a *= (1.0 / b);
}

Jet operator/(double a, const Jet& b) { return b.reciprocal() * a; }

Jet Jet::pow_int(long long p) const {
  if (p < 0) return pow_int(-p).reciprocal();
  Jet result = Jet::constant(nvars_, order_, 1.0);
  Jet base = *this;
  while (p > 0) {
    if (p & 1) result = result * base;
    base = base * base;
    p >>= 1;
  }
  return result;
}

Jet Jet::pow_real(double a) const {
  const double u0 = value();
  if (u0 <= 0.0) throw JetDomainError("real power of nonpositive base");
  std::array<double, kMaxJetOrder + 1> cs{};
  cs[0] = std::pow(u0, a);
  for (int k = 1; k <= order_; ++k) cs[k] = cs[k - 1] * (a - k + 1) / (k * u0);
  return compose(*this, std::span<const double>(cs.data(), order_ + 1));
}

Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  const double d[4] = {s, c, -s, -c};
  std::array<double, kMaxJetOrder + 1> cs{};
  double f = 1.0;
  for (int k = 0; k <= u.order(); ++k) {
    if (k > 1) f *= k;
    cs[k] = d[k % 4] / f;
  }
  return Jet::compose(u, std::span<const double>(cs.data(), u.order() + 1));
}

Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  const double d[4] = {c, -s, -c, s};
  std::array<double, kMaxJetOrder + 1> cs{};
  double f = 1.0;
  for (int k = 0; k <= u.order(); ++k) {
    if (k > 1) f *= k;
    cs[k] = d[k % 4] / f;
  }
  return Jet::compose(u, std::span<const double>(cs.data(), u.order() + 1));
}

Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  std::array<double, kMaxJetOrder + 1> cs{};
  double f = 1.0;
  for (int k = 0; k <= u.order(); ++k) {
    if (k > 1) f *= k;
    cs[k] = e / f;
  }
  return Jet::compose(u, std::span<const double>(cs.data(), u.order() + 1));
}

Jet log(const Jet& u) {
  const double u0 = u.value();
  if (u0 <= 0.0) throw JetDomainError("log of nonpositive value");
  std::array<double, kMaxJetOrder + 1> cs{};
  cs[0] = std::log(u0);
  double p = 1.0 / u0;
  for (int k = 1; k <= u.order(); ++k) {
    cs[k] = ((k % 2) ? p : -p) / k;
    p /= u0;
  }
  return Jet::compose(u, std::span<const double>(cs.data(), u.order() + 1));
}

Jet sqrt(const Jet& u) {
  if (u.value() <= 0.0) throw JetDomainError("sqrt of nonpositive value");
  return u.pow_real(0.5);
}

}  // namespace weylflow
