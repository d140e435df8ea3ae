#include "cadsev/numeric/adam.hpp"

#include <cmath>

namespace cadsev::num {

void adam_step(std::span<Parameter* const> params, const AdamConfig& config) {
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  for (Parameter* p : params) {
    p->step_count += 1;
    const double t = static_cast<double>(p->step_count);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    const std::size_t n = p->value.size();
    double* w = p->value.ptr();
    const double* g = p->gradient.ptr();
    double* m = p->adam_m.ptr();
    double* v = p->adam_v.ptr();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace cadsev::num
