#include "dlvgen/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dlvgen/errors.hpp"

namespace dlvgen {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap view(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
MatrixMap view(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

std::string pair_shapes(const Tensor& a, const Tensor& b) {
  return shape_string(a.shape()) + " and " + shape_string(b.shape());
}

bool same_matrix_shape(const Tensor& a, const Tensor& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

bool broadcasts_over_rows(const Tensor& a, const Tensor& b) {
  return b.rows() == 1 && b.cols() == a.cols() && a.rows() > 1;
}

enum class Pairing { elementwise, row_broadcast };

Pairing check_binary(const char* op, const Tensor& a, const Tensor& b) {
  if (same_matrix_shape(a, b)) return Pairing::elementwise;
  if (broadcasts_over_rows(a, b)) return Pairing::row_broadcast;
  throw DimensionError(std::string(op) + ": incompatible shapes " + pair_shapes(a, b));
}

Shape with_cols(const Tensor& like, std::size_t cols) {
  if (like.rank() <= 1) return {cols};
  return {like.rows(), cols};
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows() || B.rank() > 2) {
    throw DimensionError("matmul: inner dimensions differ for " + pair_shapes(A, B));
  }
  Tensor out(with_cols(A, B.cols()));
  view(out).noalias() = view(A) * view(B);
  return a.graph().record(OpKind::matmul, std::move(out), {a, b}, [ia = a.id(), ib = b.id()](Graph& g, NodeId self) {
    const Tensor& dC = g.grad_buffer(self);
    if (g.needs_grad(ia)) view(g.grad_buffer(ia)).noalias() += view(dC) * view(g.value(ib)).transpose();
    if (g.needs_grad(ib)) view(g.grad_buffer(ib)).noalias() += view(g.value(ia)).transpose() * view(dC);
  });
}

Var matmul_bt(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.cols()) {
    throw DimensionError("matmul_bt: inner dimensions differ for " + pair_shapes(A, B));
  }
  Tensor out(with_cols(A, B.rows()));
  view(out).noalias() = view(A) * view(B).transpose();
  return a.graph().record(OpKind::matmul_bt, std::move(out), {a, b}, [ia = a.id(), ib = b.id()](Graph& g, NodeId self) {
    const Tensor& dC = g.grad_buffer(self);
    if (g.needs_grad(ia)) view(g.grad_buffer(ia)).noalias() += view(dC) * view(g.value(ib));
    if (g.needs_grad(ib)) view(g.grad_buffer(ib)).noalias() += view(dC).transpose() * view(g.value(ia));
  });
}

namespace {

// Shared implementation of add/sub: out = a + sign * b.
Var add_signed(Var a, Var b, double sign, OpKind kind, const char* name) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const auto pairing = check_binary(name, A, B);
  Tensor out = A;
  const std::size_t rows = A.rows(), cols = A.cols();
  if (pairing == Pairing::elementwise) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * B[i];
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += sign * B[c];
    }
  }
  return a.graph().record(kind, std::move(out), {a, b},
                          [ia = a.id(), ib = b.id(), sign, pairing, rows, cols](Graph& g, NodeId self) {
                            const Tensor& d = g.grad_buffer(self);
                            if (g.needs_grad(ia)) {
                              Tensor& da = g.grad_buffer(ia);
                              for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i];
                            }
                            if (g.needs_grad(ib)) {
                              Tensor& db = g.grad_buffer(ib);
                              if (pairing == Pairing::elementwise) {
                                for (std::size_t i = 0; i < d.size(); ++i) db[i] += sign * d[i];
                              } else {
                                for (std::size_t r = 0; r < rows; ++r) {
                                  for (std::size_t c = 0; c < cols; ++c) db[c] += sign * d[r * cols + c];
                                }
                              }
                            }
                          });
}

// Shared implementation of unary elementwise ops. `derivative` maps
// (input, output) to d(output)/d(input).
template <typename Forward, typename Derivative>
Var unary(Var a, OpKind kind, Forward forward, Derivative derivative) {
  const Tensor& A = a.value();
  Tensor out = A;
  for (auto& x : out.values()) x = forward(x);
  return a.graph().record(kind, std::move(out), {a}, [ia = a.id(), derivative](Graph& g, NodeId self) {
    const Tensor& d = g.grad_buffer(self);
    const Tensor& x = g.value(ia);
    const Tensor& y = g.value(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i] * derivative(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) { return add_signed(a, b, 1.0, OpKind::add, "add"); }
Var sub(Var a, Var b) { return add_signed(a, b, -1.0, OpKind::sub, "sub"); }

Var mul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const auto pairing = check_binary("mul", A, B);
  Tensor out = A;
  const std::size_t rows = A.rows(), cols = A.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out[i] *= pairing == Pairing::elementwise ? B[i] : B[c];
    }
  }
  return a.graph().record(OpKind::mul, std::move(out), {a, b},
                          [ia = a.id(), ib = b.id(), pairing, rows, cols](Graph& g, NodeId self) {
                            const Tensor& d = g.grad_buffer(self);
                            const Tensor& x = g.value(ia);
                            const Tensor& y = g.value(ib);
                            const bool need_a = g.needs_grad(ia), need_b = g.needs_grad(ib);
                            Tensor* da = need_a ? &g.grad_buffer(ia) : nullptr;
                            Tensor* db = need_b ? &g.grad_buffer(ib) : nullptr;
                            for (std::size_t r = 0; r < rows; ++r) {
                              for (std::size_t c = 0; c < cols; ++c) {
                                const std::size_t i = r * cols + c;
                                const std::size_t j = pairing == Pairing::elementwise ? i : c;
                                if (da) (*da)[i] += d[i] * y[j];
                                if (db) (*db)[j] += d[i] * x[i];
                              }
                            }
                          });
}

Var scale(Var a, double factor) {
  return unary(
      a, OpKind::scale, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double c) {
  return unary(
      a, OpKind::add_scalar, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var tanh(Var a) {
  return unary(
      a, OpKind::tanh, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary(
      a, OpKind::exp, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var reciprocal(Var a) {
  for (double x : a.value().values()) {
    if (std::abs(x) < 1e-12) {
      throw DomainError("reciprocal: |x| < 1e-12 (got " + std::to_string(x) + "); clamp before inverting");
    }
  }
  return unary(
      a, OpKind::reciprocal, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var gelu(Var a) {
  return unary(
      a, OpKind::gelu,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x))); },
      [](double x, double) {
        const double t = std::tanh(kGeluScale * (x + kGeluCubic * x * x * x));
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
      });
}

Var square(Var a) {
  return unary(
      a, OpKind::square, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(Var a) {
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  return a.graph().record(OpKind::sum, Tensor::scalar(total), {a}, [ia = a.id()](Graph& g, NodeId self) {
    const double d = g.grad_buffer(self)[0];
    for (auto& x : g.grad_buffer(ia).values()) x += d;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  return a.graph().record(OpKind::mean, Tensor::scalar(total / n), {a}, [ia = a.id(), n](Graph& g, NodeId self) {
    const double d = g.grad_buffer(self)[0] / n;
    for (auto& x : g.grad_buffer(ia).values()) x += d;
  });
}

Var l2_norm(Var a) {
  double sq = 0.0;
  for (double x : a.value().values()) sq += x * x;
  const double norm = std::sqrt(sq);
  return a.graph().record(OpKind::l2_norm, Tensor::scalar(norm), {a}, [ia = a.id(), norm](Graph& g, NodeId self) {
    if (norm == 0.0) return;
    const double d = g.grad_buffer(self)[0] / norm;
    const Tensor& x = g.value(ia);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < x.size(); ++i) da[i] += d * x[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  if (parts.size() > 4) {
    // Wider joins are built pairwise.
    Var left = concat_cols(parts.first(parts.size() / 2));
    Var right = concat_cols(parts.subspan(parts.size() / 2));
    return concat_cols(left, right);
  }
  const std::size_t rows = parts[0].value().rows();
  std::size_t total = 0;
  bool all_rank1 = true;
  for (const auto& p : parts) {
    if (p.value().rows() != rows) {
      throw DimensionError("concat_cols: row counts differ for " + pair_shapes(parts[0].value(), p.value()));
    }
    total += p.value().cols();
    all_rank1 = all_rank1 && p.value().rank() == 1;
  }
  Tensor out(all_rank1 ? Shape{total} : Shape{rows, total});
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data() + r * v.cols(), v.cols(), out.data() + r * total + offset);
    }
    offsets.push_back(offset);
    offset += v.cols();
  }
  // Record with the first operand, then append the rest so a single node
  // references every input.
  Graph& g = parts[0].graph();
  std::vector<NodeId> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  auto backward = [ids, offsets, rows, total](Graph& graph, NodeId self) {
    const Tensor& d = graph.grad_buffer(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!graph.needs_grad(ids[k])) continue;
      Tensor& dp = graph.grad_buffer(ids[k]);
      const std::size_t cols = dp.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) dp[r * cols + c] += d[r * total + offsets[k] + c];
      }
    }
  };
  if (parts.size() == 2) return g.record(OpKind::concat_cols, std::move(out), {parts[0], parts[1]}, backward);
  if (parts.size() == 1) return g.record(OpKind::concat_cols, std::move(out), {parts[0]}, backward);
  if (parts.size() == 3) {
    return g.record(OpKind::concat_cols, std::move(out), {parts[0], parts[1], parts[2]}, backward);
  }
  return g.record(OpKind::concat_cols, std::move(out), {parts[0], parts[1], parts[2], parts[3]}, backward);
}

Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(std::span<const Var>(parts));
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Tensor& A = a.value();
  if (count == 0 || begin + count > A.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_string(A.shape()));
  }
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor out(with_cols(A, count));
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(A.data() + r * cols + begin, count, out.data() + r * count);
  return a.graph().record(OpKind::slice_cols, std::move(out), {a},
                          [ia = a.id(), begin, count, rows, cols](Graph& g, NodeId self) {
                            const Tensor& d = g.grad_buffer(self);
                            Tensor& da = g.grad_buffer(ia);
                            for (std::size_t r = 0; r < rows; ++r) {
                              for (std::size_t c = 0; c < count; ++c) da[r * cols + begin + c] += d[r * count + c];
                            }
                          });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Tensor& A = a.value();
  if (count == 0 || begin + count > A.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_string(A.shape()));
  }
  const std::size_t cols = A.cols();
  Tensor out(Shape{count, cols});
  std::copy_n(A.data() + begin * cols, count * cols, out.data());
  return a.graph().record(OpKind::slice_rows, std::move(out), {a}, [ia = a.id(), begin, cols](Graph& g, NodeId self) {
    const Tensor& d = g.grad_buffer(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < d.size(); ++i) da[begin * cols + i] += d[i];
  });
}

Var gather_rows(Var table, std::span<const int> ids) {
  const Tensor& T = table.value();
  if (ids.empty()) throw ContractError("gather_rows: empty id sequence");
  const std::size_t cols = T.cols();
  const std::size_t vocab = T.rows();
  Tensor out(Shape{ids.size(), cols});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab) {
      throw IndexError("gather_rows: id " + std::to_string(ids[r]) + " outside [0, " + std::to_string(vocab) + ")");
    }
    std::copy_n(T.data() + static_cast<std::size_t>(ids[r]) * cols, cols, out.data() + r * cols);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return table.graph().record(OpKind::gather_rows, std::move(out), {table},
                              [it = table.id(), saved = std::move(saved), cols](Graph& g, NodeId self) {
                                const Tensor& d = g.grad_buffer(self);
                                Tensor& dt = g.grad_buffer(it);
                                for (std::size_t r = 0; r < saved.size(); ++r) {
                                  double* dst = dt.data() + static_cast<std::size_t>(saved[r]) * cols;
                                  for (std::size_t c = 0; c < cols; ++c) dst[c] += d[r * cols + c];
                                }
                              });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& X = x.value();
  const std::size_t rows = X.rows(), cols = X.cols();
  if (gain.value().size() != cols || bias.value().size() != cols) {
    throw DimensionError("layer_norm: gain/bias " + pair_shapes(gain.value(), bias.value()) + " for input " +
                         shape_string(X.shape()));
  }
  const Tensor& G = gain.value();
  const Tensor& B = bias.value();
  Tensor out(X.shape());
  Tensor normed(X.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = X.data() + r * cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += row[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double n = (row[c] - mu) * inv_std[r];
      normed[r * cols + c] = n;
      out[r * cols + c] = n * G[c] + B[c];
    }
  }
  return x.graph().record(
      OpKind::layer_norm, std::move(out), {x, gain, bias},
      [ix = x.id(), ig = gain.id(), ib = bias.id(), normed = std::move(normed), inv_std = std::move(inv_std), rows,
       cols](Graph& g, NodeId self) {
        const Tensor& d = g.grad_buffer(self);
        const Tensor& G = g.value(ig);
        if (g.needs_grad(ig)) {
          Tensor& dg = g.grad_buffer(ig);
          for (std::size_t i = 0; i < d.size(); ++i) dg[i % cols] += d[i] * normed[i];
        }
        if (g.needs_grad(ib)) {
          Tensor& db = g.grad_buffer(ib);
          for (std::size_t i = 0; i < d.size(); ++i) db[i % cols] += d[i];
        }
        if (g.needs_grad(ix)) {
          Tensor& dx = g.grad_buffer(ix);
          const double n = static_cast<double>(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dn = 0.0, mean_dn_n = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double dn = d[r * cols + c] * G[c];
              mean_dn += dn;
              mean_dn_n += dn * normed[r * cols + c];
            }
            mean_dn /= n;
            mean_dn_n /= n;
            for (std::size_t c = 0; c < cols; ++c) {
              const double dn = d[r * cols + c] * G[c];
              dx[r * cols + c] += inv_std[r] * (dn - mean_dn - normed[r * cols + c] * mean_dn_n);
            }
          }
        }
      });
}

Var softmax_rows(Var scores, bool causal, std::span<const char> key_valid) {
  const Tensor& S = scores.value();
  const std::size_t rows = S.rows(), cols = S.cols();
  if (!key_valid.empty() && key_valid.size() != cols) {
    throw DimensionError("softmax_rows: key mask length " + std::to_string(key_valid.size()) + " for scores " +
                         shape_string(S.shape()));
  }
  Tensor out(Shape{rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t visible_end = causal ? std::min(cols, r + 1) : cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < visible_end; ++c) {
      if (key_valid.empty() || key_valid[c]) mx = std::max(mx, S[r * cols + c]);
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (std::size_t c = 0; c < visible_end; ++c) {
      if (key_valid.empty() || key_valid[c]) {
        const double e = std::exp(S[r * cols + c] - mx);
        out[r * cols + c] = e;
        z += e;
      }
    }
    for (std::size_t c = 0; c < visible_end; ++c) out[r * cols + c] /= z;
  }
  return scores.graph().record(OpKind::softmax_rows, std::move(out), {scores},
                               [is = scores.id(), rows, cols](Graph& g, NodeId self) {
                                 const Tensor& d = g.grad_buffer(self);
                                 const Tensor& p = g.value(self);
                                 Tensor& ds = g.grad_buffer(is);
                                 for (std::size_t r = 0; r < rows; ++r) {
                                   double dot = 0.0;
                                   for (std::size_t c = 0; c < cols; ++c) dot += d[r * cols + c] * p[r * cols + c];
                                   for (std::size_t c = 0; c < cols; ++c) {
                                     ds[r * cols + c] += p[r * cols + c] * (d[r * cols + c] - dot);
                                   }
                                 }
                               });
}

Var mean_rows(Var x, std::span<const char> row_valid) {
  const Tensor& X = x.value();
  const std::size_t rows = X.rows(), cols = X.cols();
  if (row_valid.size() != rows) {
    throw DimensionError("mean_rows: mask length " + std::to_string(row_valid.size()) + " for input " +
                         shape_string(X.shape()));
  }
  const auto count = static_cast<std::size_t>(std::count_if(row_valid.begin(), row_valid.end(), [](char v) { return v != 0; }));
  if (count == 0) throw ContractError("mean_rows: no valid rows to pool");
  Tensor out(Shape{cols});
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_valid[r]) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += X[r * cols + c];
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (auto& v : out.values()) v *= inv;
  std::vector<char> mask(row_valid.begin(), row_valid.end());
  return x.graph().record(OpKind::mean_rows, std::move(out), {x},
                          [ix = x.id(), mask = std::move(mask), cols, inv](Graph& g, NodeId self) {
                            const Tensor& d = g.grad_buffer(self);
                            Tensor& dx = g.grad_buffer(ix);
                            for (std::size_t r = 0; r < mask.size(); ++r) {
                              if (!mask[r]) continue;
                              for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] += d[c] * inv;
                            }
                          });
}

Var log_softmax_nll(Var logits, std::span<const int> targets) {
  const Tensor& L = logits.value();
  const std::size_t rows = L.rows(), vocab = L.cols();
  if (targets.size() != rows) {
    throw DimensionError("log_softmax_nll: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_string(L.shape()));
  }
  Tensor probs(Shape{rows, vocab});
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw IndexError("log_softmax_nll: target " + std::to_string(t) + " outside [0, " + std::to_string(vocab) + ")");
    }
    const double* row = L.data() + r * vocab;
    const double mx = *std::max_element(row, row + vocab);
    double z = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) {
      const double e = std::exp(row[c] - mx);
      probs[r * vocab + c] = e;
      z += e;
    }
    for (std::size_t c = 0; c < vocab; ++c) probs[r * vocab + c] /= z;
    total += std::log(z) + mx - row[t];
  }
  const double n = static_cast<double>(rows);
  std::vector<int> saved(targets.begin(), targets.end());
  return logits.graph().record(
      OpKind::log_softmax_nll, Tensor::scalar(total / n), {logits},
      [il = logits.id(), probs = std::move(probs), saved = std::move(saved), vocab, n](Graph& g, NodeId self) {
        const double d = g.grad_buffer(self)[0] / n;
        Tensor& dl = g.grad_buffer(il);
        for (std::size_t r = 0; r < saved.size(); ++r) {
          for (std::size_t c = 0; c < vocab; ++c) dl[r * vocab + c] += d * probs[r * vocab + c];
          dl[r * vocab + static_cast<std::size_t>(saved[r])] -= d;
        }
      });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, OpKind::clamp, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var magnitude_floor(Var a, double floor) {
  return unary(
      a, OpKind::magnitude_floor,
      [floor](double x) {
        if (std::abs(x) >= floor) return x;
        return x < 0.0 ? -floor : floor;
      },
      [floor](double x, double) { return std::abs(x) >= floor ? 1.0 : 0.0; });
}

}  // namespace dlvgen
