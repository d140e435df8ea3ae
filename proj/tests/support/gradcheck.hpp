#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cadsev/numeric/parameter.hpp"
#include "cadsev/numeric/tape.hpp"

namespace cadsev::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;  // "name[index]"
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, 1e-6)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Compares tape gradients of `loss` with central differences over every
/// element of `params`. `loss` must bind the parameters itself.
inline GradCheck gradient_check(std::span<num::Parameter* const> params,
                                const std::function<num::Var(num::Tape&)>& loss, double eps = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    num::Tape tape;
    tape.backward(loss(tape));
  }
  GradCheck out;
  auto value_at = [&] {
    num::Tape tape;
    return loss(tape).value().item();
  };
  for (auto* p : params) {
    const num::Tensor analytic = p->gradient;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = value_at();
      p->value[i] = saved - eps;
      const double down = value_at();
      p->value[i] = saved;
      const double err = relative_error(analytic[i], (up - down) / (2.0 * eps));
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

}  // namespace cadsev::testing
