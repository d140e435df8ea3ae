#include "cadsev/numeric/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadsev::num {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstVecMap vec(const Tensor& t) { return {t.ptr(), static_cast<Eigen::Index>(t.size())}; }
VecMap vec(Tensor& t) { return {t.ptr(), static_cast<Eigen::Index>(t.size())}; }

ConstMatMap mat(const Tensor& t) {
  return {t.ptr(), static_cast<Eigen::Index>(t.shape()[0]), static_cast<Eigen::Index>(t.shape()[1])};
}
MatMap mat(Tensor& t) {
  return {t.ptr(), static_cast<Eigen::Index>(t.shape()[0]), static_cast<Eigen::Index>(t.shape()[1])};
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + a.str() + " and " +
                              b.str());
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.shape().rank() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got shape " + t.shape().str());
  }
}

void require_same(const char* op, Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument(std::string(op) + ": operands on different tapes");
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

bool needs_grad(Var v) { return v.tape->requires_grad(v); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
Var unary(Var x, F&& f, Tape::BackwardFn backward) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return x.tape->record(std::move(out), std::move(backward), needs_grad(x));
}

}  // namespace

Var affine(Var W, Var x, Var b) {
  const Tensor& wv = W.value();
  const Tensor& xv = x.value();
  const Tensor& bv = b.value();
  require_rank("affine", wv, 2);
  require_rank("affine", xv, 1);
  if (wv.shape()[1] != xv.size()) shape_error("affine", wv.shape(), xv.shape());
  if (bv.shape() != Shape{wv.shape()[0]}) shape_error("affine", wv.shape(), bv.shape());

  Tensor out(Shape{wv.shape()[0]});
  vec(out).noalias() = mat(wv) * vec(xv) + vec(bv);
  const bool rg = needs_grad(W) || needs_grad(x) || needs_grad(b);
  return W.tape->record(
      std::move(out),
      [W, x, b](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(W)) mat(t.grad(W)).noalias() += vec(g) * vec(t.value(x)).transpose();
        if (t.requires_grad(x)) vec(t.grad(x)).noalias() += mat(t.value(W)).transpose() * vec(g);
        if (t.requires_grad(b)) vec(t.grad(b)) += vec(g);
      },
      rg);
}

Var matvec(Var W, Var x) {
  const Tensor& wv = W.value();
  const Tensor& xv = x.value();
  require_rank("matvec", wv, 2);
  require_rank("matvec", xv, 1);
  if (wv.shape()[1] != xv.size()) shape_error("matvec", wv.shape(), xv.shape());

  Tensor out(Shape{wv.shape()[0]});
  vec(out).noalias() = mat(wv) * vec(xv);
  const bool rg = needs_grad(W) || needs_grad(x);
  return W.tape->record(
      std::move(out),
      [W, x](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(W)) mat(t.grad(W)).noalias() += vec(g) * vec(t.value(x)).transpose();
        if (t.requires_grad(x)) vec(t.grad(x)).noalias() += mat(t.value(W)).transpose() * vec(g);
      },
      rg);
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Tape* tape = parts.front().tape;
  std::size_t total = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.value().shape().rank() > 1) {
      throw std::invalid_argument("concat: expected scalars or vectors, got shape " + p.value().shape().str());
    }
    if (p.tape != tape) throw std::invalid_argument("concat: operands on different tapes");
    total += p.value().size();
    rg = rg || needs_grad(p);
  }
  Tensor out(Shape{total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(off));
    off += pv.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape->record(
      std::move(out),
      [inputs = std::move(inputs)](Tape& t, const Tensor&, const Tensor& g) {
        std::size_t o = 0;
        for (const Var& p : inputs) {
          const std::size_t n = t.value(p).size();
          if (t.requires_grad(p)) {
            Tensor& pg = t.grad(p);
            for (std::size_t i = 0; i < n; ++i) pg[i] += g[o + i];
          }
          o += n;
        }
      },
      rg);
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(parts);
}

Var sigmoid(Var x) {
  return unary(x, stable_sigmoid, [x](Tape& t, const Tensor& y, const Tensor& g) {
    Tensor& xg = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var x) {
  return unary(x, [](double v) { return std::tanh(v); }, [x](Tape& t, const Tensor& y, const Tensor& g) {
    Tensor& xg = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [x](Tape& t, const Tensor&, const Tensor& g) {
    const Tensor& xv = t.value(x);
    Tensor& xg = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) xg[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same("mul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape->record(
      std::move(out),
      [a, b](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(a)) {
          const Tensor& bv = t.value(b);
          Tensor& ag = t.grad(a);
          for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
        }
        if (t.requires_grad(b)) {
          const Tensor& av = t.value(a);
          Tensor& bg = t.grad(b);
          for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
        }
      },
      needs_grad(a) || needs_grad(b));
}

Var add(Var a, Var b) {
  const Var terms[] = {a, b};
  return sum(terms);
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw std::invalid_argument("sum: no inputs");
  const Var first = terms.front();
  Tensor out = first.value();
  bool rg = needs_grad(first);
  for (std::size_t k = 1; k < terms.size(); ++k) {
    require_same("add", first, terms[k]);
    const Tensor& tv = terms[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tv[i];
    rg = rg || needs_grad(terms[k]);
  }
  std::vector<Var> inputs(terms.begin(), terms.end());
  return first.tape->record(
      std::move(out),
      [inputs = std::move(inputs)](Tape& t, const Tensor&, const Tensor& g) {
        for (const Var& v : inputs) {
          if (t.requires_grad(v)) t.grad(v) += g;
        }
      },
      rg);
}

Var dot(Var a, Var b) {
  require_same("dot", a, b);
  const double d = vec(a.value()).dot(vec(b.value()));
  return a.tape->record(
      Tensor::scalar(d),
      [a, b](Tape& t, const Tensor&, const Tensor& g) {
        const double s = g[0];
        if (t.requires_grad(a)) vec(t.grad(a)) += s * vec(t.value(b));
        if (t.requires_grad(b)) vec(t.grad(b)) += s * vec(t.value(a));
      },
      needs_grad(a) || needs_grad(b));
}

Var scale(Var x, double factor) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = factor * xv[i];
  return x.tape->record(
      std::move(out),
      [x, factor](Tape& t, const Tensor&, const Tensor& g) { vec(t.grad(x)) += factor * vec(g); },
      needs_grad(x));
}

Var scale(Var x, Var factor) {
  const Tensor& fv = factor.value();
  if (!fv.is_scalar()) shape_error("scale", x.shape(), fv.shape());
  if (x.tape != factor.tape) throw std::invalid_argument("scale: operands on different tapes");
  const double f = fv[0];
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f * xv[i];
  return x.tape->record(
      std::move(out),
      [x, factor](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(x)) vec(t.grad(x)) += t.value(factor)[0] * vec(g);
        if (t.requires_grad(factor)) t.grad(factor)[0] += vec(g).dot(vec(t.value(x)));
      },
      needs_grad(x) || needs_grad(factor));
}

Var softmax(Var x, std::size_t axis) {
  const Tensor& xv = x.value();
  const std::size_t rank = xv.shape().rank();
  if (rank == 0 || rank > 2 || axis >= rank) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                                xv.shape().str());
  }
  // `groups` independent softmaxes of `len` elements spaced `stride` apart.
  const std::size_t cols = rank == 2 ? xv.shape()[1] : xv.size();
  const bool down_columns = rank == 2 && axis == 0;
  const std::size_t len = down_columns ? xv.shape()[0] : cols;
  const std::size_t groups = xv.size() / len;
  const std::size_t stride = down_columns ? cols : 1;
  const std::size_t group_step = down_columns ? 1 : len;

  Tensor out(xv.shape());
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::size_t base = gi * group_step;
    double mx = xv[base];
    for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, xv[base + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double e = std::exp(xv[base + k * stride] - mx);
      out[base + k * stride] = e;
      z += e;
    }
    for (std::size_t k = 0; k < len; ++k) out[base + k * stride] /= z;
  }
  return x.tape->record(
      std::move(out),
      [x, len, groups, stride, group_step](Tape& t, const Tensor& y, const Tensor& g) {
        Tensor& xg = t.grad(x);
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const std::size_t base = gi * group_step;
          double inner = 0.0;
          for (std::size_t k = 0; k < len; ++k) {
            const std::size_t i = base + k * stride;
            inner += g[i] * y[i];
          }
          for (std::size_t k = 0; k < len; ++k) {
            const std::size_t i = base + k * stride;
            xg[i] += y[i] * (g[i] - inner);
          }
        }
      },
      needs_grad(x));
}

Var l2norm(Var x) {
  const double n = vec(x.value()).norm();
  return x.tape->record(
      Tensor::scalar(n),
      [x](Tape& t, const Tensor& y, const Tensor& g) {
        const double n = y[0];
        if (n > 0.0) vec(t.grad(x)) += (g[0] / n) * vec(t.value(x));
      },
      needs_grad(x));
}

Var sqnorm(Var x) {
  const double n2 = vec(x.value()).squaredNorm();
  return x.tape->record(
      Tensor::scalar(n2),
      [x](Tape& t, const Tensor&, const Tensor& g) { vec(t.grad(x)) += (2.0 * g[0]) * vec(t.value(x)); },
      needs_grad(x));
}

Var gather_row(Var table, std::size_t row) {
  const Tensor& tv = table.value();
  require_rank("gather_row", tv, 2);
  if (row >= tv.shape()[0]) {
    throw std::invalid_argument("gather_row: row " + std::to_string(row) + " out of range for " +
                                tv.shape().str());
  }
  const std::size_t cols = tv.shape()[1];
  Tensor out(Shape{cols});
  std::copy_n(tv.ptr() + row * cols, cols, out.ptr());
  return table.tape->record(
      std::move(out),
      [table, row, cols](Tape& t, const Tensor&, const Tensor& g) {
        double* dst = t.grad(table).ptr() + row * cols;
        for (std::size_t i = 0; i < cols; ++i) dst[i] += g[i];
      },
      needs_grad(table));
}

Var slice(Var x, std::size_t offset, std::size_t length) {
  const Tensor& xv = x.value();
  require_rank("slice", xv, 1);
  if (offset + length > xv.size() || length == 0) {
    throw std::invalid_argument("slice: [" + std::to_string(offset) + ", " +
                                std::to_string(offset + length) + ") invalid for " + xv.shape().str());
  }
  Tensor out(Shape{length});
  std::copy_n(xv.ptr() + offset, length, out.ptr());
  return x.tape->record(
      std::move(out),
      [x, offset](Tape& t, const Tensor&, const Tensor& g) {
        double* dst = t.grad(x).ptr() + offset;
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
      },
      needs_grad(x));
}

Var squash(Var s) {
  const Tensor& sv = s.value();
  const double n2 = vec(sv).squaredNorm();
  const double n = std::sqrt(n2);
  const double f = n / (1.0 + n2);
  Tensor out(sv.shape());
  for (std::size_t i = 0; i < sv.size(); ++i) out[i] = f * sv[i];
  return s.tape->record(
      std::move(out),
      [s](Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& sv = t.value(s);
        const double n2 = vec(sv).squaredNorm();
        if (n2 == 0.0) return;  // Jacobian vanishes at the origin
        const double n = std::sqrt(n2);
        const double f = n / (1.0 + n2);
        const double df_over_n = (1.0 - n2) / ((1.0 + n2) * (1.0 + n2)) / n;
        const double sg = vec(sv).dot(vec(g));
        vec(t.grad(s)) += f * vec(g) + (df_over_n * sg) * vec(sv);
      },
      needs_grad(s));
}

Var softmax_cross_entropy(Var logits, std::size_t target) {
  const Tensor& zv = logits.value();
  require_rank("softmax_cross_entropy", zv, 1);
  if (target >= zv.size()) {
    throw std::invalid_argument("softmax_cross_entropy: target " + std::to_string(target) +
                                " out of range for " + zv.shape().str());
  }
  double mx = zv[0];
  for (std::size_t i = 1; i < zv.size(); ++i) mx = std::max(mx, zv[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < zv.size(); ++i) z += std::exp(zv[i] - mx);
  const double loss = std::log(z) + mx - zv[target];
  return logits.tape->record(
      Tensor::scalar(loss),
      [logits, target](Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& zv = t.value(logits);
        double mx = zv[0];
        for (std::size_t i = 1; i < zv.size(); ++i) mx = std::max(mx, zv[i]);
        double z = 0.0;
        for (std::size_t i = 0; i < zv.size(); ++i) z += std::exp(zv[i] - mx);
        Tensor& zg = t.grad(logits);
        for (std::size_t i = 0; i < zv.size(); ++i) {
          const double p = std::exp(zv[i] - mx) / z;
          zg[i] += g[0] * (p - (i == target ? 1.0 : 0.0));
        }
      },
      needs_grad(logits));
}

}  // namespace cadsev::num
