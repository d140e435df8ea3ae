#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cadsev/numeric/parameter.hpp"
#include "cadsev/numeric/tensor.hpp"

namespace cadsev::num {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Linear record of forward operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order; `backward` walks them in reverse.
/// Parameter leaves accumulate straight into `Parameter::gradient`, so
/// several forward/backward passes can be summed before an optimizer step.
/// A Tape and the parameters bound to it belong to one thread at a time.
class Tape {
 public:
  /// Receives the node's output value and its gradient; accumulates into inputs.
  using BackwardFn = std::function<void(Tape&, const Tensor& out, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf whose gradient flows into `p.gradient`. The value is not copied.
  Var param(Parameter& p);
  /// Leaf that reads `t` by reference and takes no gradient. `t` must outlive the tape.
  Var constant_ref(const Tensor& t);
  /// Owned leaf without gradient.
  Var constant(Tensor t);

  /// Appends an op result. `requires_grad` is false when no input needs a gradient.
  Var record(Tensor value, BackwardFn backward, bool requires_grad);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient buffer for `v`, zero-initialized on first use.
  Tensor& grad(Var v);

  /// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse.
  void backward(Var loss);

  /// Drops all nodes; capacity is kept for reuse.
  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  void check(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace cadsev::num
