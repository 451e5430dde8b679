#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dlvgen/graph.hpp"

namespace dlvgen {

// Differentiable operations. Binary elementwise ops take equal shapes, or a
// right operand holding one row that is broadcast over the left operand's
// rows. Rank 1 operands are treated as a single row.

Var matmul(Var a, Var b);     // [m x k] * [k x n]
Var matmul_bt(Var a, Var b);  // [m x k] * [n x k]^T

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double c);

Var tanh(Var a);
Var exp(Var a);
// Throws DomainError if any |a| < 1e-12; clamp first.
Var reciprocal(Var a);
// tanh approximation of the Gaussian error linear unit.
Var gelu(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);
// Euclidean norm over all elements; the gradient at the origin is taken as 0.
Var l2_norm(Var a);

// Joins operands with equal row counts side by side.
Var concat_cols(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var table, std::span<const int> ids);

Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// Row-wise softmax over [queries x keys] scores. Causal masking hides key j
// from query i when j > i; key_valid (one flag per key) hides padding keys.
// A query row with no visible key yields all zeros.
Var softmax_rows(Var scores, bool causal, std::span<const char> key_valid = {});

// Mean of the rows whose flag is set; result is rank 1 with cols() entries.
Var mean_rows(Var x, std::span<const char> row_valid);

// Mean over rows t of -log softmax(logits_t)[targets_t], computed with
// max-subtraction.
Var log_softmax_nll(Var logits, std::span<const int> targets);

// Gradient passes where lo <= a <= hi and is zero elsewhere.
Var clamp(Var a, double lo, double hi);
// Raises |a| to at least floor keeping the sign (0 maps to +floor). The
// gradient is zero on the raised entries.
Var magnitude_floor(Var a, double floor);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace dlvgen
