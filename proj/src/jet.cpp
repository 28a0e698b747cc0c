#include "phg/jet.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace phg {

int MultiIndex::degree() const {
  int d = 0;
  for (auto x : e) d += x;
  return d;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (auto x : e)
    for (int k = 2; k <= x; ++k) f *= k;
  return f;
}

MultiIndex make_multi_index(std::initializer_list<int> exps) {
  if (exps.size() > kMaxVars) throw JetError("multi-index has too many variables");
  MultiIndex g;
  int i = 0;
  for (int x : exps) {
    if (x < 0) throw JetError("negative exponent in multi-index");
    g.e[i++] = static_cast<std::uint8_t>(x);
  }
  return g;
}

namespace {

constexpr int kBase = kMaxOrder + 1;

int encode(const MultiIndex& g) {
  int key = 0;
  for (int v = kMaxVars - 1; v >= 0; --v) key = key * kBase + g.e[v];
  return key;
}

int dense_size() {
  int s = 1;
  for (int v = 0; v < kMaxVars; ++v) s *= kBase;
  return s;
}

// all exponent vectors of m variables with total degree d, lexicographically descending
void enumerate_degree(int m, int d, int var, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (var == m - 1) {
    cur.e[var] = static_cast<std::uint8_t>(d);
    out.push_back(cur);
    cur.e[var] = 0;
    return;
  }
  for (int x = d; x >= 0; --x) {
    cur.e[var] = static_cast<std::uint8_t>(x);
    enumerate_degree(m, d - x, var + 1, cur, out);
  }
  cur.e[var] = 0;
}

std::vector<int>& lookup_storage(int m) {
  static std::array<std::vector<int>, kMaxVars + 1> store;
  return store[m];
}

}  // namespace

JetTable::JetTable(int m_) : m(m_) {
  for (int d = 0; d <= kMaxOrder; ++d) {
    MultiIndex cur;
    enumerate_degree(m, d, 0, cur, index);
    size[d] = static_cast<int>(index.size());
  }
  size[kMaxOrder + 1] = size[kMaxOrder];

  auto& lut = lookup_storage(m);
  lut.assign(dense_size(), -1);
  for (int i = 0; i < static_cast<int>(index.size()); ++i) lut[encode(index[i])] = i;

  struct Triple { int a, b, c, deg; };
  std::vector<Triple> all;
  const int n = static_cast<int>(index.size());
  for (int a = 0; a < n; ++a) {
    int da = index[a].degree();
    for (int b = 0; b < size[kMaxOrder - da]; ++b) {
      MultiIndex s;
      for (int v = 0; v < kMaxVars; ++v) s.e[v] = index[a].e[v] + index[b].e[v];
      all.push_back({a, b, lut[encode(s)], s.degree()});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Triple& x, const Triple& y) { return x.deg < y.deg; });
  for (const auto& t : all) {
    ta.push_back(static_cast<std::uint16_t>(t.a));
    tb.push_back(static_cast<std::uint16_t>(t.b));
    tc.push_back(static_cast<std::uint16_t>(t.c));
  }
  for (int K = 0; K <= kMaxOrder; ++K) {
    triples[K] = static_cast<int>(std::count_if(all.begin(), all.end(), [K](const Triple& t) { return t.deg <= K; }));
  }
  triples[kMaxOrder + 1] = triples[kMaxOrder];

  for (int v = 0; v < m; ++v) {
    for (int i = 0; i < size[kMaxOrder - 1]; ++i) {
      MultiIndex s = index[i];
      s.e[v] += 1;
      shift[v].push_back(static_cast<std::uint16_t>(lut[encode(s)]));
    }
  }
}

const JetTable& JetTable::get(int m) {
  static const auto tables = [] {
    std::array<std::unique_ptr<JetTable>, kMaxVars + 1> t;
    for (int k = 1; k <= kMaxVars; ++k) t[k].reset(new JetTable(k));
    return t;
  }();
  if (m < 1 || m > kMaxVars) throw JetError("jet variable count out of range: " + std::to_string(m));
  return *tables[m];
}

int JetTable::find(const MultiIndex& g) const {
  for (int v = m; v < kMaxVars; ++v)
    if (g.e[v] != 0) return -1;
  if (g.degree() > kMaxOrder) return -1;
  return lookup_storage(m)[encode(g)];
}

Jet::Jet(int m, int K, double value) : t_(&JetTable::get(m)), K_(K) {
  if (K < 0 || K > kMaxOrder) throw JetError("jet order out of range: " + std::to_string(K));
  c_.assign(t_->size[K], 0.0);
  c_[0] = value;
}

Jet Jet::variable(int index, double value, int m, int K) {
  if (index < 0 || index >= m) throw JetError("jet variable index out of range");
  Jet j(m, K, value);
  if (K >= 1) j.c_[1 + index] = 1.0;
  return j;
}

double Jet::coeff(const MultiIndex& g) const {
  if (g.degree() > K_) throw JetError("multi-index degree exceeds jet order");
  int i = t_->find(g);
  if (i < 0) throw JetError("multi-index references a missing variable");
  return c_[i];
}

double Jet::extract(const MultiIndex& g) const { return coeff(g) * g.factorial(); }

Jet Jet::truncated(int K) const {
  if (K > K_) throw JetError("cannot raise jet order by truncation");
  Jet r;
  r.t_ = t_;
  r.K_ = K;
  r.c_.assign(c_.begin(), c_.begin() + t_->size[K]);
  return r;
}

Jet Jet::derivative(int v) const {
  if (K_ < 1) throw JetError("jet order budget exhausted: derivative of an order-0 jet");
  if (v < 0 || v >= t_->m) throw JetError("derivative variable out of range");
  Jet r;
  r.t_ = t_;
  r.K_ = K_ - 1;
  const int n = t_->size[K_ - 1];
  r.c_.resize(n);
  const auto& sh = t_->shift[v];
  for (int i = 0; i < n; ++i) r.c_[i] = c_[sh[i]] * (t_->index[i].e[v] + 1);
  return r;
}

void Jet::check_vars(const Jet& o) const {
  if (t_ != o.t_) throw JetError("jets with different variable counts");
}

Jet& Jet::operator+=(const Jet& o) {
  check_vars(o);
  if (o.K_ < K_) { K_ = o.K_; c_.resize(t_->size[K_]); }
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_vars(o);
  if (o.K_ < K_) { K_ = o.K_; c_.resize(t_->size[K_]); }
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& x : c_) x *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this / o;
  return *this;
}

void Jet::add_product(const Jet& a, const Jet& b, double scale) {
  check_vars(a);
  check_vars(b);
  const int K = std::min({K_, a.K_, b.K_});
  if (K < K_) { K_ = K; c_.resize(t_->size[K]); }
  const int nt = t_->triples[K];
  const auto* ta = t_->ta.data();
  const auto* tb = t_->tb.data();
  const auto* tc = t_->tc.data();
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pc = c_.data();
  if (scale == 1.0) {
    for (int i = 0; i < nt; ++i) pc[tc[i]] += pa[ta[i]] * pb[tb[i]];
  } else {
    for (int i = 0; i < nt; ++i) pc[tc[i]] += scale * pa[ta[i]] * pb[tb[i]];
  }
}

Jet operator*(const Jet& a, const Jet& b) {
  const int K = std::min(a.order(), b.order());
  Jet r(a.vars(), K, 0.0);
  r.add_product(a, b);
  return r;
}

Jet Jet::compose(const double* d, int count) const {
  Jet n = *this;
  n.c_[0] = 0.0;
  const int top = std::min(count - 1, K_);
  Jet r(t_->m, K_, d[top]);
  for (int k = top - 1; k >= 0; --k) {
    r = r * n;
    r.c_[0] += d[k];
  }
  return r;
}

Jet operator-(const Jet& a) { return a * -1.0; }
Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw JetError("division by a jet with zero constant term");
  std::array<double, kMaxOrder + 1> d{};
  double p = 1.0 / a0;
  for (int k = 0; k <= a.order(); ++k) {
    d[k] = p;
    p *= -1.0 / a0;
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet exp(const Jet& a) {
  std::array<double, kMaxOrder + 1> d{};
  double e = std::exp(a.value());
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = e / f;
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw JetError("log of a jet with non-positive constant term");
  std::array<double, kMaxOrder + 1> d{};
  d[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= a0;
    d[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  std::array<double, kMaxOrder + 1> d{};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = cyc[k % 4] / f;
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  std::array<double, kMaxOrder + 1> d{};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = cyc[k % 4] / f;
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet powi(const Jet& a, int n) {
  if (n < 0) return reciprocal(powi(a, -n));
  Jet r(a.vars(), a.order(), 1.0);
  Jet base = a;
  while (n > 0) {
    if (n & 1) r = r * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return r;
}

Jet pow(const Jet& a, double p) {
  if (std::nearbyint(p) == p && std::abs(p) <= 64) return powi(a, static_cast<int>(p));
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw JetError("non-integer power of a jet with non-positive constant term");
  std::array<double, kMaxOrder + 1> d{};
  double binom = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    d[k] = binom * std::pow(a0, p - k);
    binom *= (p - k) / (k + 1);
  }
  return a.compose(d.data(), a.order() + 1);
}

Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0)) throw JetError("sqrt of a jet with non-positive constant term");
  return pow(a, 0.5);
}

Jet jet_arith(const Jet& a, const Jet& b, JetOp op) {
  if (a.vars() != b.vars() || a.order() != b.order()) throw JetError("jet shape mismatch");
  switch (op) {
    case JetOp::add: return a + b;
    case JetOp::sub: return a - b;
    case JetOp::mul: return a * b;
    case JetOp::div: return a / b;
  }
  throw JetError("unknown jet operation");
}

}  // namespace phg
