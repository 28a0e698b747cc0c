#pragma once
// Dense coordinate tensors with a variance signature. Components are stored
// row-major over rank indices, each running over 0..dim-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "phg/jet.hpp"

namespace phg {

template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, const T& fill = T()) : dim_(dim), rank_(rank), upper_(rank, false) {
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) n *= static_cast<std::size_t>(dim);
    c_.assign(n, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return c_.size(); }
  bool empty() const { return c_.empty(); }

  // variance: true marks a contravariant slot
  const std::vector<bool>& upper() const { return upper_; }
  Tensor& set_upper(std::vector<bool> u) {
    if (static_cast<int>(u.size()) != rank_) throw std::invalid_argument("variance signature length mismatch");
    upper_ = std::move(u);
    return *this;
  }

  T& operator[](std::size_t i) { return c_[i]; }
  const T& operator[](std::size_t i) const { return c_[i]; }

  template <class... I>
  T& operator()(I... idx) { return c_[flat(idx...)]; }
  template <class... I>
  const T& operator()(I... idx) const { return c_[flat(idx...)]; }

  T& at(const int* idx) { return c_[flat_array(idx)]; }
  const T& at(const int* idx) const { return c_[flat_array(idx)]; }

  std::size_t flat_array(const int* idx) const {
    std::size_t f = 0;
    for (int r = 0; r < rank_; ++r) f = f * dim_ + idx[r];
    return f;
  }

  void unflatten(std::size_t f, int* idx) const {
    for (int r = rank_ - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(f % dim_);
      f /= dim_;
    }
  }

  std::vector<T>& data() { return c_; }
  const std::vector<T>& data() const { return c_; }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t f = 0;
    ((f = f * dim_ + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<bool> upper_;
  std::vector<T> c_;
};

using JTensor = Tensor<Jet>;
using DTensor = Tensor<double>;

inline DTensor values(const JTensor& t) {
  DTensor d(t.dim(), t.rank(), 0.0);
  d.set_upper(t.upper());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = t[i].value();
  return d;
}

inline int min_order(const JTensor& t) {
  int k = kMaxOrder;
  for (const auto& j : t.data()) k = std::min(k, j.order());
  return k;
}

inline JTensor truncated(const JTensor& t, int K) {
  JTensor r = t;
  for (auto& j : r.data())
    if (j.order() > K) j = j.truncated(K);
  return r;
}

inline double max_abs(const DTensor& t) {
  double m = 0.0;
  for (double x : t.data()) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const DTensor& a, const DTensor& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tensor shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace phg
