#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fhj {

inline constexpr int kMaxDim = 3;   // spatial dimension cap
inline constexpr int kMaxChan = 4;  // noise channel cap

// Fixed-capacity vector with runtime dimension. Arithmetic only touches
// the first n entries; the rest stay zero so dot products are safe.
template <int Cap>
class SmallVec {
 public:
  SmallVec() : n_(0) { v_.fill(0.0); }
  explicit SmallVec(int n) : n_(n) {
    assert(n >= 0 && n <= Cap);
    v_.fill(0.0);
  }
  SmallVec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    assert(n_ <= Cap);
    v_.fill(0.0);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }
  static SmallVec from(const std::vector<double>& xs) {
    SmallVec out(static_cast<int>(xs.size()));
    for (int i = 0; i < out.n_; ++i) out.v_[i] = xs[i];
    return out;
  }

  int dim() const { return n_; }
  double operator[](int i) const { return v_[i]; }
  double& operator[](int i) { return v_[i]; }

  SmallVec& operator+=(const SmallVec& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  SmallVec& operator-=(const SmallVec& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  SmallVec& operator*=(double a) {
    for (int i = 0; i < n_; ++i) v_[i] *= a;
    return *this;
  }

  friend SmallVec operator+(SmallVec a, const SmallVec& b) { return a += b; }
  friend SmallVec operator-(SmallVec a, const SmallVec& b) { return a -= b; }
  friend SmallVec operator*(double a, SmallVec b) { return b *= a; }
  friend SmallVec operator*(SmallVec b, double a) { return b *= a; }
  friend SmallVec operator/(SmallVec b, double a) { return b *= (1.0 / a); }
  friend SmallVec operator-(SmallVec a) { return a *= -1.0; }

  friend bool operator==(const SmallVec& a, const SmallVec& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

  double dot(const SmallVec& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  std::vector<double> to_vector() const {
    return std::vector<double>(v_.begin(), v_.begin() + n_);
  }

 private:
  std::array<double, Cap> v_;
  int n_;
};

using Point = SmallVec<kMaxDim>;    // position / velocity / momentum in R^d
using ChanVec = SmallVec<kMaxChan>; // field value / Brownian value in R^m

// m x d matrix stored by rows; row i is the spatial gradient of channel i.
struct ChanMat {
  std::array<Point, kMaxChan> row;
  int m = 0;
  int d = 0;

  ChanMat() = default;
  ChanMat(int m_, int d_) : m(m_), d(d_) {
    for (auto& r : row) r = Point(d_);
  }

  // (Df * w) in R^m for w in R^d
  ChanVec apply(const Point& w) const {
    ChanVec out(m);
    for (int i = 0; i < m; ++i) out[i] = row[i].dot(w);
    return out;
  }
  // (Df^T * b) in R^d for b in R^m
  Point apply_transpose(const ChanVec& b) const {
    Point out(d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) out[j] += b[i] * row[i][j];
    return out;
  }
  double frobenius2() const {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += row[i].norm2();
    return s;
  }
};

// Axis-aligned box.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return lo.dim(); }
  bool contains(const Point& x, double tol = 0.0) const {
    for (int j = 0; j < dim(); ++j)
      if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
    return true;
  }
  // distance from x to the boundary (negative outside)
  double margin(const Point& x) const {
    double m = 1e300;
    for (int j = 0; j < dim(); ++j) {
      m = std::min(m, x[j] - lo[j]);
      m = std::min(m, hi[j] - x[j]);
    }
    return m;
  }
};

inline bool nearly_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) <= tol * std::max(1.0, std::abs(x));
}

}  // namespace fhj
