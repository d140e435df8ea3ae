#include "cadsev/numeric/tape.hpp"

#include <stdexcept>
#include <string>

namespace cadsev::num {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant_ref(const Tensor& t) {
  Node n;
  n.external = &t;
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor t) {
  Node n;
  n.owned = std::move(t);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, BackwardFn backward, bool requires_grad) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external != nullptr ? *n.external : n.owned;
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.param != nullptr) return n.param->gradient;
  if (n.grad.size() != value(v).size()) n.grad = Tensor::zeros_like(value(v));
  return n.grad;
}

void Tape::check(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw std::invalid_argument("variable does not belong to this tape");
  }
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) return;
  check(loss);
  const Tensor& lv = value(loss);
  if (!lv.is_scalar()) {
    throw std::invalid_argument("backward needs a scalar loss, got shape " + lv.shape().str());
  }
  if (!nodes_[loss.id].requires_grad) return;

  for (Node& n : nodes_) n.grad = Tensor();
  grad(loss)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.owned, n.grad);
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace cadsev::num
