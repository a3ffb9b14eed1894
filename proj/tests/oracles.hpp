// test-side reference implementations, kept deliberately straight-line and
// independent of the library's vectorized paths

#ifndef POIR_TESTS_ORACLES_HPP_
#define POIR_TESTS_ORACLES_HPP_

#include <cmath>

#include "poir/mlp.hpp"

namespace poir_test {

// central finite differences over every parameter, one at a time
inline poir::MlpGrads<double> finite_difference_gradient(
    poir::MlpParams<double> p, const poir::MatXd& inputs,
    const poir::MatXd& targets, double h) {
  poir::MlpGrads<double> g = poir::zero_grads_like(p);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& w = p.layers[l].w;
    for (long i = 0; i < w.rows(); ++i) {
      for (long j = 0; j < w.cols(); ++j) {
        const double saved = w(i, j);
        w(i, j) = saved + h;
        const double lp = poir::mse_loss(p, inputs, targets);
        w(i, j) = saved - h;
        const double lm = poir::mse_loss(p, inputs, targets);
        w(i, j) = saved;
        g[l].w(i, j) = (lp - lm) / (2.0 * h);
      }
    }
    auto& b = p.layers[l].b;
    for (long i = 0; i < b.size(); ++i) {
      const double saved = b[i];
      b[i] = saved + h;
      const double lp = poir::mse_loss(p, inputs, targets);
      b[i] = saved - h;
      const double lm = poir::mse_loss(p, inputs, targets);
      b[i] = saved;
      g[l].b[i] = (lp - lm) / (2.0 * h);
    }
  }
  return g;
}

// worst relative disagreement between analytic and reference gradients
inline double max_gradient_rel_error(const poir::MlpGrads<double>& a,
                                     const poir::MlpGrads<double>& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const auto rel = [&](double x, double y) {
      const double scale = std::max({1e-8, std::abs(x), std::abs(y)});
      return std::abs(x - y) / scale;
    };
    for (long i = 0; i < a[l].w.size(); ++i)
      worst = std::max(worst, rel(a[l].w.data()[i], b[l].w.data()[i]));
    for (long i = 0; i < a[l].b.size(); ++i)
      worst = std::max(worst, rel(a[l].b[i], b[l].b[i]));
  }
  return worst;
}

}  // namespace poir_test

#endif  // POIR_TESTS_ORACLES_HPP_
