#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/numeric/tensor.hpp"

namespace cadsev::num {

/// A trainable tensor with its gradient slot and Adam moment estimates.
struct Parameter {
  Parameter(std::string name, Tensor initial);

  std::string name;
  Tensor value;
  Tensor gradient;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  void zero_grad() { gradient.set_zero(); }
};

/// Owns parameters at stable addresses, in registration order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  /// Throws if the name is already registered.
  Parameter& add(std::string name, Tensor initial);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Uniform initialization in [-limit, limit].
void init_uniform(Tensor& t, double limit, std::mt19937_64& rng);

}  // namespace cadsev::num
