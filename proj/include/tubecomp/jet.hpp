#pragma once

#include <array>
#include <cmath>

namespace tubecomp {

// Order-2 truncated Taylor number in up to kJetVars variables: value, gradient and Hessian.
struct Jet2 {
  static constexpr int kJetVars = 4;

  double v = 0.0;
  std::array<double, kJetVars> g{};
  std::array<std::array<double, kJetVars>, kJetVars> h{};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet2 variable(double value, int index) {
    Jet2 j(value);
    j.g[index] = 1.0;
    return j;
  }
};

namespace jet_detail {

// f(a) given f, f', f'' at a.v.
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
  Jet2 r(f0);
  for (int i = 0; i < Jet2::kJetVars; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < Jet2::kJetVars; ++i)
    for (int j = 0; j < Jet2::kJetVars; ++j) r.h[i][j] = f1 * a.h[i][j] + f2 * a.g[i] * a.g[j];
  return r;
}

}  // namespace jet_detail

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v + b.v);
  for (int i = 0; i < Jet2::kJetVars; ++i) {
    r.g[i] = a.g[i] + b.g[i];
    for (int j = 0; j < Jet2::kJetVars; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(-a.v);
  for (int i = 0; i < Jet2::kJetVars; ++i) {
    r.g[i] = -a.g[i];
    for (int j = 0; j < Jet2::kJetVars; ++j) r.h[i][j] = -a.h[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v * b.v);
  for (int i = 0; i < Jet2::kJetVars; ++i) {
    r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int j = 0; j < Jet2::kJetVars; ++j)
      r.h[i][j] = a.h[i][j] * b.v + a.v * b.h[i][j] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
  }
  return r;
}

inline Jet2 reciprocal(const Jet2& a) {
  const double inv = 1.0 / a.v;
  return jet_detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2& operator+=(Jet2& a, const Jet2& b) { return a = a + b; }
inline Jet2& operator*=(Jet2& a, const Jet2& b) { return a = a * b; }

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return jet_detail::chain(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return jet_detail::chain(a, c, -s, -c);
}
inline Jet2 sinh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return jet_detail::chain(a, s, c, s);
}
inline Jet2 cosh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return jet_detail::chain(a, c, s, c);
}
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return jet_detail::chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) { return jet_detail::chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return jet_detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
// a^c for a constant exponent; valid for negative a when c is an integer.
inline Jet2 pow(const Jet2& a, double c) {
  if (c == 0.0) return Jet2(1.0);
  if (c == 1.0) return a;
  return jet_detail::chain(a, std::pow(a.v, c), c * std::pow(a.v, c - 1.0), c * (c - 1.0) * std::pow(a.v, c - 2.0));
}
inline Jet2 pow(const Jet2& a, const Jet2& b) {
  bool constant_exponent = true;
  for (int i = 0; i < Jet2::kJetVars; ++i) {
    constant_exponent = constant_exponent && b.g[i] == 0.0;
    for (int j = 0; j < Jet2::kJetVars; ++j) constant_exponent = constant_exponent && b.h[i][j] == 0.0;
  }
  if (constant_exponent) return pow(a, b.v);
  return exp(b * log(a));
}

}  // namespace tubecomp
