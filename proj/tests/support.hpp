#pragma once

#include <cmath>
#include <random>

#include "lcklab/types.hpp"

namespace lcklab::testing {

inline const double kLn2 = std::log(2.0);

inline MatC mat2(cxd a, cxd b, cxd c, cxd d) {
  MatC M(2, 2);
  M << a, b, c, d;
  return M;
}

inline VecC vec2(cxd a, cxd b) {
  VecC v(2);
  v << a, b;
  return v;
}

inline MatC random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  MatC M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = cxd(g(rng), g(rng));
  return M;
}

inline VecC random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  VecC v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cxd(g(rng), g(rng));
  return v;
}

/// Taylor series with scaling and squaring; independent of the Pade path.
inline MatC taylor_expm(const MatC& X) {
  const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm, -s) > 0.125) ++s;
  const MatC Y = X / std::ldexp(1.0, s);
  MatC term = MatC::Identity(X.rows(), X.cols());
  MatC sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * Y / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// Root of f on [a, b] by plain bisection, f(a) and f(b) of opposite sign.
template <class F>
double bisect(F f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace lcklab::testing
