// Copyright 2026 The layercut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LAYERCUT_GRAPH_HPP
#define LAYERCUT_GRAPH_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "layercut/error.hpp"
#include "layercut/mat.hpp"

namespace layercut {

/// Tape-based reverse-mode autodiff over Mat<T>. Nodes are recorded in
/// construction order, which is already a topological order, so backward()
/// walks the tape in reverse. With recording off, only values are computed
/// and the same code doubles as the inference path.
///
/// All kernels are single-threaded with a fixed summation order: identical
/// inputs give bitwise-identical outputs.
template <class T>
class Graph {
 public:
  using Id = std::uint32_t;

  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  const Mat<T>& value(Id id) const { return nodes_[id].value; }
  const Mat<T>& grad(Id id) const { return nodes_[id].grad; }

  Id input(Mat<T> value) { return push(std::move(value), {}); }

  Id add(Id a, Id b) {
    Mat<T> out = value(a);
    add_inplace(out, value(b));
    return push(std::move(out), [a, b](Graph& g, Id self) {
      add_inplace(g.nodes_[a].grad, g.nodes_[self].grad);
      add_inplace(g.nodes_[b].grad, g.nodes_[self].grad);
    });
  }

  // a + bias, bias a 1 x n row broadcast over the rows of a
  Id add_row(Id a, Id bias) {
    const Mat<T>& x = value(a);
    const Mat<T>& b = value(bias);
    Mat<T> out = x;
    for (std::size_t r = 0; r < out.rows; ++r)
      for (std::size_t c = 0; c < out.cols; ++c) out(r, c) += b(0, c);
    return push(std::move(out), [a, bias](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      add_inplace(g.nodes_[a].grad, dy);
      Mat<T>& db = g.nodes_[bias].grad;
      for (std::size_t r = 0; r < dy.rows; ++r)
        for (std::size_t c = 0; c < dy.cols; ++c) db(0, c) += dy(r, c);
    });
  }

  // a + c with c constant (no gradient flows into c)
  Id add_const(Id a, const Mat<T>& c) {
    Mat<T> out = value(a);
    add_inplace(out, c);
    return push(std::move(out), [a](Graph& g, Id self) {
      add_inplace(g.nodes_[a].grad, g.nodes_[self].grad);
    });
  }

  Id scale(Id a, T s) {
    Mat<T> out = value(a);
    for (T& x : out.v) x *= s;
    return push(std::move(out), [a, s](Graph& g, Id self) {
      axpy(g.nodes_[a].grad, s, g.nodes_[self].grad);
    });
  }

  Id matmul(Id a, Id b) {
    Mat<T> out = layercut::matmul(value(a), value(b));
    return push(std::move(out), [a, b](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      add_inplace(g.nodes_[a].grad, layercut::matmul_nt(dy, g.value(b)));
      add_inplace(g.nodes_[b].grad, layercut::matmul_tn(g.value(a), dy));
    });
  }

  // a * b^T; the natural shape for [out, in] weight matrices
  Id matmul_nt(Id a, Id b) {
    Mat<T> out = layercut::matmul_nt(value(a), value(b));
    return push(std::move(out), [a, b](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      add_inplace(g.nodes_[a].grad, layercut::matmul(dy, g.value(b)));
      add_inplace(g.nodes_[b].grad, layercut::matmul_tn(dy, g.value(a)));
    });
  }

  Id gather_rows(Id table, std::vector<std::size_t> idx) {
    const Mat<T>& t = value(table);
    Mat<T> out(idx.size(), t.cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < t.cols; ++c) out(r, c) = t(idx[r], c);
    return push(std::move(out), [table, idx = std::move(idx)](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      Mat<T>& dt = g.nodes_[table].grad;
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < dy.cols; ++c) dt(idx[r], c) += dy(r, c);
    });
  }

  Id slice_cols(Id a, std::size_t c0, std::size_t c1) {
    const Mat<T>& x = value(a);
    Mat<T> out(x.rows, c1 - c0);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = c0; c < c1; ++c) out(r, c - c0) = x(r, c);
    return push(std::move(out), [a, c0](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      Mat<T>& dx = g.nodes_[a].grad;
      for (std::size_t r = 0; r < dy.rows; ++r)
        for (std::size_t c = 0; c < dy.cols; ++c) dx(r, c0 + c) += dy(r, c);
    });
  }

  Id concat_cols(std::vector<Id> parts) {
    std::size_t total = 0;
    for (Id p : parts) total += value(p).cols;
    Mat<T> out(value(parts[0]).rows, total);
    std::size_t at = 0;
    for (Id p : parts) {
      const Mat<T>& x = value(p);
      for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) out(r, at + c) = x(r, c);
      at += x.cols;
    }
    return push(std::move(out), [parts = std::move(parts)](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      std::size_t at = 0;
      for (Id p : parts) {
        Mat<T>& dx = g.nodes_[p].grad;
        for (std::size_t r = 0; r < dx.rows; ++r)
          for (std::size_t c = 0; c < dx.cols; ++c) dx(r, c) += dy(r, at + c);
        at += dx.cols;
      }
    });
  }

  // row r of a as a 1 x n matrix
  Id pick_row(Id a, std::size_t r) {
    const Mat<T>& x = value(a);
    Mat<T> out(1, x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) out(0, c) = x(r, c);
    return push(std::move(out), [a, r](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      Mat<T>& dx = g.nodes_[a].grad;
      for (std::size_t c = 0; c < dy.cols; ++c) dx(r, c) += dy(0, c);
    });
  }

  // stack 1 x n rows into a k x n matrix
  Id vstack(std::vector<Id> rows) {
    Mat<T> out(rows.size(), value(rows[0]).cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < out.cols; ++c) out(r, c) = value(rows[r])(0, c);
    return push(std::move(out), [rows = std::move(rows)](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        Mat<T>& dx = g.nodes_[rows[r]].grad;
        for (std::size_t c = 0; c < dy.cols; ++c) dx(0, c) += dy(r, c);
      }
    });
  }

  // exact gelu: x * Phi(x) with Phi the standard normal CDF (erf form)
  Id gelu(Id a) {
    const Mat<T>& x = value(a);
    Mat<T> out = x;
    for (T& e : out.v) e = gelu_scalar(e);
    return push(std::move(out), [a](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      const Mat<T>& x = g.value(a);
      Mat<T>& dx = g.nodes_[a].grad;
      for (std::size_t i = 0; i < x.v.size(); ++i) {
        dx.v[i] += dy.v[i] * gelu_derivative_scalar(x.v[i]);
      }
    });
  }

  // row-wise softmax with max subtraction; masked logits arrive as large
  // negative biases added beforehand
  Id softmax_rows(Id a) {
    Mat<T> out = softmax_rows_value(value(a));
    return push(std::move(out), [a](Graph& g, Id self) {
      const Mat<T>& y = g.value(self);
      const Mat<T>& dy = g.nodes_[self].grad;
      Mat<T>& dx = g.nodes_[a].grad;
      for (std::size_t r = 0; r < y.rows; ++r) {
        T dot = T(0);
        for (std::size_t c = 0; c < y.cols; ++c) dot += dy(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols; ++c) {
          dx(r, c) += y(r, c) * (dy(r, c) - dot);
        }
      }
    });
  }

  // row-wise layer norm with population variance: (x - mu)/sqrt(var + eps)
  // scaled by gamma and shifted by beta (both 1 x n rows)
  Id layer_norm_rows(Id a, Id gamma, Id beta, T eps) {
    const Mat<T>& x = value(a);
    const Mat<T>& gm = value(gamma);
    const Mat<T>& bt = value(beta);
    const std::size_t n = x.cols;
    Mat<T> xhat(x.rows, n);
    Mat<T> inv_sigma(x.rows, 1);
    for (std::size_t r = 0; r < x.rows; ++r) {
      T mean = T(0);
      for (std::size_t c = 0; c < n; ++c) mean += x(r, c);
      mean /= static_cast<T>(n);
      T var = T(0);
      for (std::size_t c = 0; c < n; ++c) {
        const T d = x(r, c) - mean;
        var += d * d;
      }
      var /= static_cast<T>(n);
      const T inv = T(1) / std::sqrt(var + eps);
      inv_sigma(r, 0) = inv;
      for (std::size_t c = 0; c < n; ++c) xhat(r, c) = (x(r, c) - mean) * inv;
    }
    Mat<T> out(x.rows, n);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < n; ++c) out(r, c) = xhat(r, c) * gm(0, c) + bt(0, c);
    return push(std::move(out), [a, gamma, beta, xhat = std::move(xhat),
                                 inv_sigma = std::move(inv_sigma)](Graph& g, Id self) {
      const Mat<T>& dy = g.nodes_[self].grad;
      const Mat<T>& gm = g.value(gamma);
      Mat<T>& dx = g.nodes_[a].grad;
      Mat<T>& dgamma = g.nodes_[gamma].grad;
      Mat<T>& dbeta = g.nodes_[beta].grad;
      const std::size_t n = dy.cols;
      for (std::size_t r = 0; r < dy.rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          dgamma(0, c) += dy(r, c) * xhat(r, c);
          dbeta(0, c) += dy(r, c);
        }
        T sum_g = T(0);
        T sum_gx = T(0);
        for (std::size_t c = 0; c < n; ++c) {
          const T gch = dy(r, c) * gm(0, c);
          sum_g += gch;
          sum_gx += gch * xhat(r, c);
        }
        const T mean_g = sum_g / static_cast<T>(n);
        const T mean_gx = sum_gx / static_cast<T>(n);
        for (std::size_t c = 0; c < n; ++c) {
          const T gch = dy(r, c) * gm(0, c);
          dx(r, c) += inv_sigma(r, 0) * (gch - mean_g - xhat(r, c) * mean_gx);
        }
      }
    });
  }

  // mean softmax cross-entropy over rows of `logits` (k x C) against integer
  // labels; produces a 1 x 1 scalar
  Id mean_cross_entropy(Id logits, std::vector<std::size_t> labels) {
    const Mat<T>& z = value(logits);
    if (labels.size() != z.rows) throw Error("graph", "labels/logits row mismatch");
    const Mat<T> probs = softmax_rows_value(z);
    T loss = T(0);
    for (std::size_t r = 0; r < z.rows; ++r) {
      T m = z(r, 0);
      for (std::size_t c = 1; c < z.cols; ++c) m = std::max(m, z(r, c));
      T sum = T(0);
      for (std::size_t c = 0; c < z.cols; ++c) sum += std::exp(z(r, c) - m);
      loss += (m + std::log(sum)) - z(r, labels[r]);
    }
    loss /= static_cast<T>(z.rows);
    Mat<T> out(1, 1);
    out(0, 0) = loss;
    return push(std::move(out),
                [logits, probs, labels = std::move(labels)](Graph& g, Id self) {
      const T d = g.nodes_[self].grad(0, 0);
      Mat<T>& dz = g.nodes_[logits].grad;
      const T inv_rows = T(1) / static_cast<T>(probs.rows);
      for (std::size_t r = 0; r < probs.rows; ++r) {
        for (std::size_t c = 0; c < probs.cols; ++c) {
          T p = probs(r, c);
          if (c == labels[r]) p -= T(1);
          dz(r, c) += d * p * inv_rows;
        }
      }
    });
  }

  // Seeds d(loss)/d(loss) = 1 and accumulates into every node's grad.
  void backward(Id loss) {
    if (value(loss).size() != 1) throw Error("graph", "backward() needs a scalar loss");
    Mat<T> seed(1, 1, T(1));
    backward_with_seed(loss, seed);
  }

  // Backward pass from an arbitrary node with an explicit cotangent.
  void backward_with_seed(Id node, const Mat<T>& seed) {
    if (!recording_) throw Error("graph", "backward() on a non-recording graph");
    if (!seed.same_shape(value(node))) {
      throw Error("graph", "backward seed shape mismatch");
    }
    for (Node& n : nodes_) {
      n.grad = Mat<T>(n.value.rows, n.value.cols, T(0));
    }
    nodes_[node].grad = seed;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].backward) nodes_[i].backward(*this, static_cast<Id>(i));
    }
  }

  static T gelu_scalar(T x) {
    return T(0.5) * x * (T(1) + std::erf(x * T(0.70710678118654752440)));
  }
  static T gelu_derivative_scalar(T x) {
    const T phi = T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440)));
    const T pdf = std::exp(T(-0.5) * x * x) * T(0.39894228040143267794);
    return phi + x * pdf;
  }

  static Mat<T> softmax_rows_value(const Mat<T>& x) {
    Mat<T> out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
      T m = x(r, 0);
      for (std::size_t c = 1; c < x.cols; ++c) m = std::max(m, x(r, c));
      T sum = T(0);
      for (std::size_t c = 0; c < x.cols; ++c) {
        const T e = std::exp(x(r, c) - m);
        out(r, c) = e;
        sum += e;
      }
      const T inv = T(1) / sum;
      for (std::size_t c = 0; c < x.cols; ++c) out(r, c) *= inv;
    }
    return out;
  }

 private:
  struct Node {
    Mat<T> value;
    Mat<T> grad;
    std::function<void(Graph&, Id)> backward;
  };

  Id push(Mat<T> value, std::function<void(Graph&, Id)> backward) {
    Node n;
    n.value = std::move(value);
    if (recording_) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  bool recording_;
  std::vector<Node> nodes_;
};

}  // namespace layercut

#endif  // LAYERCUT_GRAPH_HPP
