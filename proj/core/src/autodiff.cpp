#include "vbuf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vbuf::ad {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

bool Tensor::all_finite() const
{
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

const Tensor& Var::val() const
{
  return g->value(id);
}

const Tensor& Var::grad() const
{
  return const_cast<Graph*>(g)->grad(id);
}

Var Graph::push(Tensor val, bool needs_grad,
                std::function<void(Graph&, int)> back)
{
  Node n;
  n.grad = Tensor(val.rows, val.cols, 0.0);
  n.val = std::move(val);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::check_same_graph(Var v) const
{
  if (v.g != this) {
    throw std::logic_error("autodiff: var belongs to a different graph");
  }
}

Var Graph::leaf(Tensor value, bool needs_grad)
{
  return push(std::move(value), needs_grad, nullptr);
}

Var Graph::matmul(Var a, Var b)
{
  check_same_graph(a);
  check_same_graph(b);
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  if (A.cols != B.rows) {
    throw std::invalid_argument("matmul: inner dimensions disagree");
  }
  Tensor out(A.rows, B.cols, 0.0);
  // ikj order keeps the inner loop contiguous.
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) {
        continue;
      }
      const double* brow = &B.v[static_cast<size_t>(k) * B.cols];
      double* orow = &out.v[static_cast<size_t>(i) * out.cols];
      for (int j = 0; j < B.cols; ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  const bool ng = needs_grad(a.id) || needs_grad(b.id);
  const int ia = a.id, ib = b.id;
  return push(std::move(out), ng, [ia, ib](Graph& g, int self) {
    const Tensor& A = g.value(ia);
    const Tensor& B = g.value(ib);
    const Tensor& G = g.grad(self);
    if (g.needs_grad(ia)) {
      Tensor& dA = g.grad(ia);
      for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < B.cols; ++j) {
          const double gij = G.at(i, j);
          if (gij == 0.0) {
            continue;
          }
          for (int k = 0; k < A.cols; ++k) {
            dA.at(i, k) += gij * B.at(k, j);
          }
        }
      }
    }
    if (g.needs_grad(ib)) {
      Tensor& dB = g.grad(ib);
      for (int i = 0; i < A.rows; ++i) {
        for (int k = 0; k < A.cols; ++k) {
          const double aik = A.at(i, k);
          if (aik == 0.0) {
            continue;
          }
          for (int j = 0; j < B.cols; ++j) {
            dB.at(k, j) += aik * G.at(i, j);
          }
        }
      }
    }
  });
}

Var Graph::transpose(Var a)
{
  check_same_graph(a);
  const Tensor& A = value(a.id);
  Tensor out(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) {
      out.at(j, i) = A.at(i, j);
    }
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    Tensor& dA = g.grad(ia);
    for (int i = 0; i < G.rows; ++i) {
      for (int j = 0; j < G.cols; ++j) {
        dA.at(j, i) += G.at(i, j);
      }
    }
  });
}

Var Graph::add(Var a, Var b)
{
  check_same_graph(a);
  check_same_graph(b);
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  if (!A.same_shape(B)) {
    throw std::invalid_argument("add: shape mismatch");
  }
  Tensor out = A;
  for (int i = 0; i < out.size(); ++i) {
    out.v[i] += B.v[i];
  }
  const int ia = a.id, ib = b.id;
  return push(std::move(out), needs_grad(ia) || needs_grad(ib),
              [ia, ib](Graph& g, int self) {
                const Tensor& G = g.grad(self);
                for (int id : {ia, ib}) {
                  if (g.needs_grad(id)) {
                    Tensor& d = g.grad(id);
                    for (int i = 0; i < G.size(); ++i) {
                      d.v[i] += G.v[i];
                    }
                  }
                }
              });
}

Var Graph::sub(Var a, Var b)
{
  return add(a, scale(b, -1.0));
}

Var Graph::mul(Var a, Var b)
{
  check_same_graph(a);
  check_same_graph(b);
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  if (!A.same_shape(B)) {
    throw std::invalid_argument("mul: shape mismatch");
  }
  Tensor out = A;
  for (int i = 0; i < out.size(); ++i) {
    out.v[i] *= B.v[i];
  }
  const int ia = a.id, ib = b.id;
  return push(std::move(out), needs_grad(ia) || needs_grad(ib),
              [ia, ib](Graph& g, int self) {
                const Tensor& G = g.grad(self);
                const Tensor& A = g.value(ia);
                const Tensor& B = g.value(ib);
                if (g.needs_grad(ia)) {
                  Tensor& d = g.grad(ia);
                  for (int i = 0; i < G.size(); ++i) {
                    d.v[i] += G.v[i] * B.v[i];
                  }
                }
                if (g.needs_grad(ib)) {
                  Tensor& d = g.grad(ib);
                  for (int i = 0; i < G.size(); ++i) {
                    d.v[i] += G.v[i] * A.v[i];
                  }
                }
              });
}

Var Graph::scale(Var a, double s)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (double& x : out.v) {
    x *= s;
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia, s](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.size(); ++i) {
      d.v[i] += s * G.v[i];
    }
  });
}

Var Graph::add_scalar(Var a, double s)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (double& x : out.v) {
    x += s;
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.size(); ++i) {
      d.v[i] += G.v[i];
    }
  });
}

Var Graph::add_rowvec(Var a, Var bias)
{
  check_same_graph(a);
  check_same_graph(bias);
  const Tensor& A = value(a.id);
  const Tensor& B = value(bias.id);
  if (B.rows != 1 || B.cols != A.cols) {
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  }
  Tensor out = A;
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) {
      out.at(i, j) += B.at(0, j);
    }
  }
  const int ia = a.id, ib = bias.id;
  return push(std::move(out), needs_grad(ia) || needs_grad(ib),
              [ia, ib](Graph& g, int self) {
                const Tensor& G = g.grad(self);
                if (g.needs_grad(ia)) {
                  Tensor& d = g.grad(ia);
                  for (int i = 0; i < G.size(); ++i) {
                    d.v[i] += G.v[i];
                  }
                }
                if (g.needs_grad(ib)) {
                  Tensor& d = g.grad(ib);
                  for (int i = 0; i < G.rows; ++i) {
                    for (int j = 0; j < G.cols; ++j) {
                      d.at(0, j) += G.at(i, j);
                    }
                  }
                }
              });
}

Var Graph::concat_cols(const std::vector<Var>& parts)
{
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: empty");
  }
  int rows = value(parts[0].id).rows;
  int cols = 0;
  bool ng = false;
  for (Var p : parts) {
    check_same_graph(p);
    const Tensor& T = value(p.id);
    if (T.rows != rows) {
      throw std::invalid_argument("concat_cols: row mismatch");
    }
    cols += T.cols;
    ng = ng || needs_grad(p.id);
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::vector<int> offsets;
  int off = 0;
  for (Var p : parts) {
    const Tensor& T = value(p.id);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < T.cols; ++j) {
        out.at(i, off + j) = T.at(i, j);
      }
    }
    ids.push_back(p.id);
    offsets.push_back(off);
    off += T.cols;
  }
  return push(std::move(out), ng, [ids, offsets](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!g.needs_grad(ids[k])) {
        continue;
      }
      Tensor& d = g.grad(ids[k]);
      for (int i = 0; i < d.rows; ++i) {
        for (int j = 0; j < d.cols; ++j) {
          d.at(i, j) += G.at(i, offsets[k] + j);
        }
      }
    }
  });
}

Var Graph::concat_rows(const std::vector<Var>& parts)
{
  if (parts.empty()) {
    throw std::invalid_argument("concat_rows: empty");
  }
  int cols = value(parts[0].id).cols;
  int rows = 0;
  bool ng = false;
  for (Var p : parts) {
    check_same_graph(p);
    const Tensor& T = value(p.id);
    if (T.cols != cols) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    rows += T.rows;
    ng = ng || needs_grad(p.id);
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::vector<int> offsets;
  int off = 0;
  for (Var p : parts) {
    const Tensor& T = value(p.id);
    for (int i = 0; i < T.rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        out.at(off + i, j) = T.at(i, j);
      }
    }
    ids.push_back(p.id);
    offsets.push_back(off);
    off += T.rows;
  }
  return push(std::move(out), ng, [ids, offsets](Graph& g, int self) {
    const Tensor& G = g.grad(self);
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!g.needs_grad(ids[k])) {
        continue;
      }
      Tensor& d = g.grad(ids[k]);
      for (int i = 0; i < d.rows; ++i) {
        for (int j = 0; j < d.cols; ++j) {
          d.at(i, j) += G.at(offsets[k] + i, j);
        }
      }
    }
  });
}

Var Graph::slice_cols(Var a, int start, int n)
{
  check_same_graph(a);
  const Tensor& A = value(a.id);
  if (start < 0 || n <= 0 || start + n > A.cols) {
    throw std::invalid_argument("slice_cols: out of range");
  }
  Tensor out(A.rows, n);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < n; ++j) {
      out.at(i, j) = A.at(i, start + j);
    }
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia, start, n](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.rows; ++i) {
      for (int j = 0; j < n; ++j) {
        d.at(i, start + j) += G.at(i, j);
      }
    }
  });
}

Var Graph::select_rows(Var a, std::vector<int> idx)
{
  check_same_graph(a);
  const Tensor& A = value(a.id);
  Tensor out(static_cast<int>(idx.size()), A.cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= A.rows) {
      throw std::invalid_argument("select_rows: index out of range");
    }
    for (int j = 0; j < A.cols; ++j) {
      out.at(static_cast<int>(i), j) = A.at(idx[i], j);
    }
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia),
              [ia, idx = std::move(idx)](Graph& g, int self) {
                if (!g.needs_grad(ia)) {
                  return;
                }
                const Tensor& G = g.grad(self);
                Tensor& d = g.grad(ia);
                for (size_t i = 0; i < idx.size(); ++i) {
                  for (int j = 0; j < G.cols; ++j) {
                    d.at(idx[i], j) += G.at(static_cast<int>(i), j);
                  }
                }
              });
}

Var Graph::zero_rows(Var a, std::vector<int> idx)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (int r : idx) {
    if (r < 0 || r >= out.rows) {
      throw std::invalid_argument("zero_rows: index out of range");
    }
    for (int j = 0; j < out.cols; ++j) {
      out.at(r, j) = 0.0;
    }
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia),
              [ia, idx = std::move(idx)](Graph& g, int self) {
                if (!g.needs_grad(ia)) {
                  return;
                }
                const Tensor& G = g.grad(self);
                Tensor& d = g.grad(ia);
                std::vector<bool> zeroed(G.rows, false);
                for (int r : idx) {
                  zeroed[r] = true;
                }
                for (int i = 0; i < G.rows; ++i) {
                  if (zeroed[i]) {
                    continue;
                  }
                  for (int j = 0; j < G.cols; ++j) {
                    d.at(i, j) += G.at(i, j);
                  }
                }
              });
}

Var Graph::gelu(Var a)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (double& x : out.v) {
    x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    const Tensor& A = g.value(ia);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.size(); ++i) {
      const double x = A.v[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      d.v[i] += G.v[i] * (cdf + x * pdf);
    }
  });
}

Var Graph::relu(Var a)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (double& x : out.v) {
    x = x > 0.0 ? x : 0.0;
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    const Tensor& A = g.value(ia);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.size(); ++i) {
      if (A.v[i] > 0.0) {
        d.v[i] += G.v[i];
      }
    }
  });
}

Var Graph::log(Var a)
{
  check_same_graph(a);
  Tensor out = value(a.id);
  for (double& x : out.v) {
    x = std::log(x);
  }
  const int ia = a.id;
  return push(std::move(out), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& G = g.grad(self);
    const Tensor& A = g.value(ia);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < G.size(); ++i) {
      d.v[i] += G.v[i] / A.v[i];
    }
  });
}

Var Graph::sum_all(Var a)
{
  check_same_graph(a);
  double s = 0.0;
  for (double x : value(a.id).v) {
    s += x;
  }
  const int ia = a.id;
  return push(Tensor::scalar(s), needs_grad(ia), [ia](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const double gval = g.grad(self).v[0];
    Tensor& d = g.grad(ia);
    for (double& x : d.v) {
      x += gval;
    }
  });
}

Var Graph::mean_all(Var a)
{
  const int n = value(a.id).size();
  return scale(sum_all(a), 1.0 / n);
}

Var Graph::softmax_rows(Var logits, double tau, const Tensor* noise)
{
  check_same_graph(logits);
  if (tau <= 0.0) {
    throw std::invalid_argument("softmax_rows: tau must be positive");
  }
  const Tensor& L = value(logits.id);
  if (noise != nullptr && !noise->same_shape(L)) {
    throw std::invalid_argument("softmax_rows: noise shape mismatch");
  }
  Tensor out(L.rows, L.cols);
  for (int i = 0; i < L.rows; ++i) {
    double mx = -1e300;
    for (int j = 0; j < L.cols; ++j) {
      const double z =
          (L.at(i, j) + (noise ? noise->at(i, j) : 0.0)) / tau;
      out.at(i, j) = z;
      mx = std::max(mx, z);
    }
    double denom = 0.0;
    for (int j = 0; j < L.cols; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      denom += out.at(i, j);
    }
    for (int j = 0; j < L.cols; ++j) {
      out.at(i, j) /= denom;
    }
  }
  const int ia = logits.id;
  return push(std::move(out), needs_grad(ia), [ia, tau](Graph& g, int self) {
    if (!g.needs_grad(ia)) {
      return;
    }
    const Tensor& Y = g.value(self);
    const Tensor& G = g.grad(self);
    Tensor& d = g.grad(ia);
    for (int i = 0; i < Y.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < Y.cols; ++j) {
        dot += G.at(i, j) * Y.at(i, j);
      }
      for (int j = 0; j < Y.cols; ++j) {
        d.at(i, j) += Y.at(i, j) * (G.at(i, j) - dot) / tau;
      }
    }
  });
}

Var Graph::mse_loss(Var pred, Var target)
{
  check_same_graph(pred);
  check_same_graph(target);
  const Tensor& P = value(pred.id);
  const Tensor& T = value(target.id);
  if (!P.same_shape(T)) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < P.size(); ++i) {
    const double e = P.v[i] - T.v[i];
    s += e * e;
  }
  const int n = P.size();
  const int ip = pred.id, it = target.id;
  return push(Tensor::scalar(s / n),
              needs_grad(ip) || needs_grad(it), [ip, it, n](Graph& g, int self) {
                const double gval = g.grad(self).v[0];
                const Tensor& P = g.value(ip);
                const Tensor& T = g.value(it);
                if (g.needs_grad(ip)) {
                  Tensor& d = g.grad(ip);
                  for (int i = 0; i < P.size(); ++i) {
                    d.v[i] += gval * 2.0 * (P.v[i] - T.v[i]) / n;
                  }
                }
                if (g.needs_grad(it)) {
                  Tensor& d = g.grad(it);
                  for (int i = 0; i < P.size(); ++i) {
                    d.v[i] -= gval * 2.0 * (P.v[i] - T.v[i]) / n;
                  }
                }
              });
}

Var Graph::focal_loss(Var probs, const Tensor& onehot, double gamma)
{
  check_same_graph(probs);
  const Tensor& P = value(probs.id);
  if (!P.same_shape(onehot)) {
    throw std::invalid_argument("focal_loss: target shape mismatch");
  }
  const int n = P.rows;
  double loss = 0.0;
  std::vector<double> p_true(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < P.cols; ++j) {
      p_true[i] += P.at(i, j) * onehot.at(i, j);
    }
    const double p = std::max(p_true[i], 1e-12);
    loss += -std::pow(1.0 - p, gamma) * std::log(p);
  }
  const int ip = probs.id;
  return push(
      Tensor::scalar(loss / n), needs_grad(ip),
      [ip, onehot, gamma, p_true, n](Graph& g, int self) {
        if (!g.needs_grad(ip)) {
          return;
        }
        const double gval = g.grad(self).v[0];
        Tensor& d = g.grad(ip);
        for (int i = 0; i < n; ++i) {
          const double p = std::max(p_true[i], 1e-12);
          const double q = 1.0 - p;
          // d/dp of -(1-p)^gamma log p
          double dp = -std::pow(q, gamma) / p;
          if (gamma > 0.0 && q > 0.0) {
            dp += gamma * std::pow(q, gamma - 1.0) * std::log(p);
          }
          for (int j = 0; j < d.cols; ++j) {
            d.at(i, j) += gval * dp * onehot.at(i, j) / n;
          }
        }
      });
}

Var Graph::contrastive_loss(Var embeddings, std::vector<PairLabel> pairs)
{
  check_same_graph(embeddings);
  const Tensor& E = value(embeddings.id);
  if (pairs.empty()) {
    return constant_scalar(0.0);
  }
  std::vector<double> norms(E.rows, 0.0);
  for (int i = 0; i < E.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < E.cols; ++j) {
      s += E.at(i, j) * E.at(i, j);
    }
    norms[i] = std::sqrt(s);
  }
  double loss = 0.0;
  for (const PairLabel& p : pairs) {
    if (norms[p.i] == 0.0 || norms[p.j] == 0.0) {
      throw std::domain_error("contrastive_loss: zero-norm embedding");
    }
    double dot = 0.0;
    for (int c = 0; c < E.cols; ++c) {
      dot += E.at(p.i, c) * E.at(p.j, c);
    }
    const double cosv = dot / (norms[p.i] * norms[p.j]);
    const double sim = 0.5 * (cosv + 1.0);
    const double inner =
        std::max(p.same ? sim : 1.0 - sim, 1e-12);
    loss += -std::log(inner);
  }
  const int n = static_cast<int>(pairs.size());
  const int ie = embeddings.id;
  return push(
      Tensor::scalar(loss / n), needs_grad(ie),
      [ie, pairs = std::move(pairs), norms, n](Graph& g, int self) {
        if (!g.needs_grad(ie)) {
          return;
        }
        const double gval = g.grad(self).v[0];
        const Tensor& E = g.value(ie);
        Tensor& d = g.grad(ie);
        for (const PairLabel& p : pairs) {
          double dot = 0.0;
          for (int c = 0; c < E.cols; ++c) {
            dot += E.at(p.i, c) * E.at(p.j, c);
          }
          const double ni = norms[p.i], nj = norms[p.j];
          const double cosv = dot / (ni * nj);
          const double sim = 0.5 * (cosv + 1.0);
          const double inner = std::max(p.same ? sim : 1.0 - sim, 1e-12);
          // dL/dsim, then dsim/dcos = 0.5, then cos gradient.
          const double dsim = gval * (p.same ? -1.0 : 1.0) / (inner * n);
          const double dcos = 0.5 * dsim;
          for (int c = 0; c < E.cols; ++c) {
            const double xi = E.at(p.i, c);
            const double xj = E.at(p.j, c);
            d.at(p.i, c) += dcos * (xj / (ni * nj) - cosv * xi / (ni * ni));
            d.at(p.j, c) += dcos * (xi / (ni * nj) - cosv * xj / (nj * nj));
          }
        }
      });
}

Var Graph::bbox_hpwl(Var points)
{
  check_same_graph(points);
  const Tensor& P = value(points.id);
  if (P.cols != 2 || P.rows < 1) {
    throw std::invalid_argument("bbox_hpwl: expects an Mx2 matrix");
  }
  int ix_max = 0, ix_min = 0, iy_max = 0, iy_min = 0;
  for (int i = 1; i < P.rows; ++i) {
    if (P.at(i, 0) > P.at(ix_max, 0)) ix_max = i;
    if (P.at(i, 0) < P.at(ix_min, 0)) ix_min = i;
    if (P.at(i, 1) > P.at(iy_max, 1)) iy_max = i;
    if (P.at(i, 1) < P.at(iy_min, 1)) iy_min = i;
  }
  const double w = (P.at(ix_max, 0) - P.at(ix_min, 0))
                   + (P.at(iy_max, 1) - P.at(iy_min, 1));
  const int ip = points.id;
  return push(Tensor::scalar(w), needs_grad(ip),
              [ip, ix_max, ix_min, iy_max, iy_min](Graph& g, int self) {
                if (!g.needs_grad(ip)) {
                  return;
                }
                const double gval = g.grad(self).v[0];
                Tensor& d = g.grad(ip);
                d.at(ix_max, 0) += gval;
                d.at(ix_min, 0) -= gval;
                d.at(iy_max, 1) += gval;
                d.at(iy_min, 1) -= gval;
              });
}

void Graph::backward(Var seed)
{
  check_same_graph(seed);
  const Tensor& S = value(seed.id);
  if (S.rows != 1 || S.cols != 1) {
    throw std::invalid_argument("backward: seed must be a 1x1 scalar");
  }
  grad(seed.id).v[0] = 1.0;
  for (int i = seed.id; i >= 0; --i) {
    if (nodes_[i].back && nodes_[i].needs_grad) {
      nodes_[i].back(*this, i);
    }
  }
}

void Graph::zero_grad()
{
  for (Node& n : nodes_) {
    std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
  }
}

}  // namespace vbuf::ad
