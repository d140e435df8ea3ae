#pragma once

#include <cstddef>
#include <span>

#include "cadsev/numeric/tape.hpp"

// Differentiable operations recorded on a Tape. Every model equation is
// composed from this set; each op validates shapes and throws
// std::invalid_argument naming the offending shapes.
namespace cadsev::num {

/// W·x + b with W [m, n], x [n], b [m].
Var affine(Var W, Var x, Var b);
/// W·x with W [m, n], x [n].
Var matvec(Var W, Var x);

/// Concatenation of vectors; scalars count as length-1 vectors.
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);

Var sigmoid(Var x);
Var tanh(Var x);
/// max(0, x)
Var relu(Var x);

/// Element-wise product.
Var mul(Var a, Var b);
/// Element-wise sum.
Var add(Var a, Var b);
/// Element-wise sum of any number of equally shaped terms.
Var sum(std::span<const Var> terms);

/// Inner product of two equally shaped tensors; scalar result.
Var dot(Var a, Var b);

Var scale(Var x, double factor);
/// x scaled by a scalar that is itself on the tape.
Var scale(Var x, Var factor);

/// Softmax along `axis` (rank 1: axis 0; rank 2: axis 0 or 1).
Var softmax(Var x, std::size_t axis = 0);

/// Euclidean norm; scalar result. The gradient at x = 0 is taken as 0.
Var l2norm(Var x);
/// Squared Euclidean norm; scalar result.
Var sqnorm(Var x);

/// Row `row` of a rank-2 table as a rank-1 vector (embedding lookup).
Var gather_row(Var table, std::size_t row);
/// Elements [offset, offset + length) of a rank-1 vector.
Var slice(Var x, std::size_t offset, std::size_t length);

/// Capsule non-linearity: (|s|^2 / (1 + |s|^2)) * s / |s|, with squash(0) = 0.
Var squash(Var s);

/// -log softmax(logits)[target]; scalar result.
Var softmax_cross_entropy(Var logits, std::size_t target);

}  // namespace cadsev::num
