#include "dpsom/ndcore/ops.hpp"

#include <cmath>
#include <string>

#include "dpsom/errors.hpp"

namespace dpsom::nd {
namespace {

std::string shape(const Var& v) { return std::to_string(v.rows()) + "x" + std::to_string(v.cols()); }

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape " + shape(a) + " vs " + shape(b));
  }
}

template <class F, class DF>
Var unary(const Var& a, F f, DF df) {
  Matrix out = a.value().unaryExpr(f);
  return a.tape().record(std::move(out), {a}, [a, df](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.binaryExpr(a.value(), [df](double gi, double x) { return gi * df(x); }));
  });
}

}  // namespace

double logistic(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: " + shape(a) + " * " + shape(b));
  Matrix out = a.value() * b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  return a.tape().record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix&, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw DimensionError("add_row: " + shape(a) + " + " + shape(row));
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape().record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g);
    if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
  });
}

Var scale(const Var& a, double c) {
  return a.tape().record(a.value() * c, {a}, [a, c](Tape& t, const Matrix&, const Matrix& g) { t.accumulate(a, g * c); });
}

Var add_scalar(const Var& a, double c) {
  return a.tape().record(a.value().array() + c, {a}, [a](Tape& t, const Matrix&, const Matrix& g) { t.accumulate(a, g); });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(const Var& a) {
  Matrix out = a.value().array().tanh();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return logistic(x); });
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var exp(const Var& a) {
  Matrix out = a.value().array().exp();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& y, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(y));
  });
}

Var square(const Var& a) {
  return a.tape().record(a.value().array().square(), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
  });
}

Var log_clamped(const Var& a, double eps) {
  Matrix out = a.value().cwiseMax(eps).array().log().matrix();
  return a.tape().record(std::move(out), {a}, [a, eps](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.binaryExpr(a.value(), [eps](double gi, double x) { return x > eps ? gi / x : 0.0; }));
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  return a.tape().record(std::move(out), {a}, [a, lo, hi](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.binaryExpr(a.value(), [lo, hi](double gi, double x) { return (x >= lo && x <= hi) ? gi : 0.0; }));
  });
}

Var pow_scalar(const Var& a, double p) {
  const bool positive = (a.value().array() > 0.0).all();
  Matrix out = positive ? Matrix((p * a.value().array().log()).exp()) : Matrix(a.value().array().pow(p));
  return a.tape().record(std::move(out), {a}, [a, p, positive](Tape& t, const Matrix& y, const Matrix& g) {
    if (positive) {
      t.accumulate(a, (g.array() * p * y.array() / a.value().array()).matrix());
    } else {
      t.accumulate(a, (g.array() * p * a.value().array().pow(p - 1.0)).matrix());
    }
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw DimensionError("mean of an empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_sum(const Var& a) {
  Matrix out = a.value().rowwise().sum();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, g.col(0).replicate(1, a.cols()));
  });
}

Var row_normalize(const Var& a) {
  const Vector sums = a.value().rowwise().sum();
  Matrix out = a.value().array().colwise() / sums.array();
  return a.tape().record(std::move(out), {a}, [a, sums](Tape& t, const Matrix& y, const Matrix& g) {
    // d y_j / d a_k = (delta_jk - y_j) / r
    const Vector inner = g.cwiseProduct(y).rowwise().sum();
    Matrix ga = (g.colwise() - inner).array().colwise() / sums.array();
    t.accumulate(a, ga);
  });
}

Var row_sq_norm(const Var& a) {
  Matrix out = a.value().rowwise().squaredNorm();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix&, const Matrix& g) {
    t.accumulate(a, 2.0 * (a.value().array().colwise() * g.col(0).array()).matrix());
  });
}

Var sq_distances(const Var& z, const Var& m) {
  if (z.cols() != m.cols()) throw DimensionError("sq_distances: " + shape(z) + " vs " + shape(m));
  const Matrix& zv = z.value();
  const Matrix& mv = m.value();
  Matrix out = (-2.0 * zv * mv.transpose());
  out.colwise() += zv.rowwise().squaredNorm();
  out.rowwise() += mv.rowwise().squaredNorm().transpose();
  out = out.cwiseMax(0.0);
  return z.tape().record(std::move(out), {z, m}, [z, m](Tape& t, const Matrix&, const Matrix& g) {
    if (z.requires_grad()) {
      Matrix gz = 2.0 * ((z.value().array().colwise() * g.rowwise().sum().array()).matrix() - g * m.value());
      t.accumulate(z, gz);
    }
    if (m.requires_grad()) {
      const Vector colsum = g.colwise().sum().transpose();
      Matrix gm = 2.0 * ((m.value().array().colwise() * colsum.array()).matrix() - g.transpose() * z.value());
      t.accumulate(m, gm);
    }
  });
}

Var gather_rows(const Var& a, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= a.rows()) throw IndexError("gather_rows: row " + std::to_string(rows[r]));
    out.row(static_cast<Eigen::Index>(r)) = a.value().row(rows[r]);
  }
  return a.tape().record(std::move(out), {a}, [a, rows](Tape& t, const Matrix&, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) ga.row(rows[r]) += g.row(static_cast<Eigen::Index>(r));
    t.accumulate(a, ga);
  });
}

Var sum_columns(const Var& a, const std::vector<std::vector<Eigen::Index>>& sources) {
  for (const auto& src : sources) {
    for (const auto e : src) {
      if (e < 0 || e >= a.cols()) throw IndexError("sum_columns: column " + std::to_string(e));
    }
  }
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(sources.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i).data();
    double* oi = out.row(i).data();
    for (std::size_t j = 0; j < sources.size(); ++j)
      for (const auto e : sources[j]) oi[j] += xi[e];
  }
  return a.tape().record(std::move(out), {a}, [a, sources](Tape& t, const Matrix&, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double* gi = g.row(i).data();
      double* ai = ga.row(i).data();
      for (std::size_t j = 0; j < sources.size(); ++j)
        for (const auto e : sources[j]) ai[e] += gi[j];
    }
    t.accumulate(a, ga);
  });
}

Var col_block(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw IndexError("col_block out of range");
  Matrix out = a.value().middleCols(start, count);
  return a.tape().record(std::move(out), {a}, [a, start, count](Tape& t, const Matrix&, const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    ga.middleCols(start, count) = g;
    t.accumulate(a, ga);
  });
}

Var detach(const Var& a) { return a.tape().constant(a.value()); }

Var bce_with_logits_sum(const Var& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw DimensionError("bce_with_logits_sum: logits " + shape(logits));
  }
  const auto& l = logits.value().array();
  // softplus(l) = max(l, 0) + log1p(exp(-|l|))
  const double total = (l.max(0.0) + (-l.abs()).exp().log1p() - targets.array() * l).sum();
  Matrix out(1, 1);
  out(0, 0) = total;
  return logits.tape().record(std::move(out), {logits}, [logits, targets](Tape& t, const Matrix&, const Matrix& g) {
    Matrix s = logits.value().unaryExpr([](double x) { return logistic(x); });
    t.accumulate(logits, g(0, 0) * (s - targets));
  });
}

}  // namespace dpsom::nd
