#pragma once
// Truncated multivariate Taylor expansions (Taylor-mode forward differentiation).
//
// A Jet in m variables truncated at order K stores c[γ] = ∂^γ f / γ! for every
// multi-index of total degree <= K. Multi-indices are enumerated in graded
// order, so the order-k truncation of a jet is a prefix of its coefficient
// vector. Binary operations between jets of different orders truncate to the
// smaller order; mixing variable counts is an error.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phg {

constexpr int kMaxVars = 6;
constexpr int kMaxOrder = 6;

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MultiIndex {
  std::array<std::uint8_t, kMaxVars> e{};
  int degree() const;
  double factorial() const;  // γ!
  bool operator==(const MultiIndex&) const = default;
};

MultiIndex make_multi_index(std::initializer_list<int> exps);

// Per-variable-count lookup tables, built once and shared read-only.
class JetTable {
 public:
  static const JetTable& get(int m);

  int m = 0;
  std::vector<MultiIndex> index;           // graded enumeration up to kMaxOrder
  std::array<int, kMaxOrder + 2> size{};   // size[K] = C(m+K, K)
  // product triples (a, b, c): c[c] += a[a] * b[b], sorted by degree of c
  std::vector<std::uint16_t> ta, tb, tc;
  std::array<int, kMaxOrder + 2> triples{};
  // shift[v][i] = index of (index[i] + e_v), for deg(index[i]) < kMaxOrder
  std::array<std::vector<std::uint16_t>, kMaxVars> shift;

  int find(const MultiIndex& g) const;  // -1 when absent

 private:
  explicit JetTable(int m);
};

class Jet {
 public:
  Jet() = default;
  Jet(int m, int K, double value = 0.0);

  static Jet variable(int index, double value, int m, int K);
  static Jet constant(double value, int m, int K) { return Jet(m, K, value); }

  int vars() const { return t_ ? t_->m : 0; }
  int order() const { return K_; }
  bool valid() const { return t_ != nullptr; }
  std::size_t size() const { return c_.size(); }
  double value() const { return c_[0]; }
  double coeff(int i) const { return c_[i]; }
  double& coeff(int i) { return c_[i]; }
  const std::vector<double>& coeffs() const { return c_; }
  const JetTable& table() const { return *t_; }

  double coeff(const MultiIndex& g) const;
  double extract(const MultiIndex& g) const;  // γ! * coefficient

  Jet truncated(int K) const;
  Jet derivative(int v) const;  // order drops by one

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return *this *= 1.0 / s; }

  // fused c += a * b at the smallest of the three orders
  void add_product(const Jet& a, const Jet& b, double scale = 1.0);

  // Horner evaluation of sum_k d[k] n^k on the nilpotent part n = this - value
  Jet compose(const double* d, int count) const;

 private:
  const JetTable* t_ = nullptr;
  int K_ = 0;
  std::vector<double> c_;
  void check_vars(const Jet& o) const;
};

Jet operator-(const Jet& a);
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet pow(const Jet& a, double p);
Jet powi(const Jet& a, int n);
Jet reciprocal(const Jet& a);

enum class JetOp { add, sub, mul, div };
// Strict form: operands must share (m, K).
Jet jet_arith(const Jet& a, const Jet& b, JetOp op);

}  // namespace phg
