#pragma once

#include <vector>

#include "dpsom/ndcore/tape.hpp"

// Differentiable primitives recorded on a Tape. Shapes are checked and a
// DimensionError is thrown on mismatch.
namespace dpsom::nd {

/// Overflow-safe 1 / (1 + exp(-x)).
double logistic(double x);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product.
Var mul(const Var& a, const Var& b);
/// a (n x m) plus a 1 x m row broadcast over rows.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

Var relu(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var square(const Var& a);
/// log(max(a, eps)); the gradient is zero where the clamp is active.
Var log_clamped(const Var& a, double eps);
/// Elementwise clamp; the gradient is zero outside [lo, hi].
Var clamp(const Var& a, double lo, double hi);
/// a^p for strictly positive a.
Var pow_scalar(const Var& a, double p);

/// Sum of all entries as a 1x1 node.
Var sum(const Var& a);
Var mean(const Var& a);
/// n x 1 column of row sums.
Var row_sum(const Var& a);
/// Divides each row by its sum.
Var row_normalize(const Var& a);
/// n x 1 column of squared row norms.
Var row_sq_norm(const Var& a);
/// D(i, j) = ||z_i - m_j||^2 for Z (n x l) and M (k x l).
Var sq_distances(const Var& z, const Var& m);

Var gather_rows(const Var& a, const std::vector<Eigen::Index>& rows);
/// out(:, j) = sum of a(:, e) over e in sources[j]; repeats count again.
Var sum_columns(const Var& a, const std::vector<std::vector<Eigen::Index>>& sources);
Var col_block(const Var& a, Eigen::Index start, Eigen::Index count);
/// Copy of the value with no gradient path.
Var detach(const Var& a);

/// sum_ij softplus(l_ij) - t_ij * l_ij, i.e. the Bernoulli negative
/// log-likelihood of targets t in [0, 1] given logits l.
Var bce_with_logits_sum(const Var& logits, const Matrix& targets);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }

}  // namespace dpsom::nd
