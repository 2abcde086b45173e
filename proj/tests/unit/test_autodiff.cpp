#include <cmath>

#include "doctest.h"
#include "vbuf/autodiff.hpp"
#include "vbuf/optimizer.hpp"
#include "vbuf/rng.hpp"

using namespace vbuf;
using ad::Graph;
using ad::Tensor;
using ad::Var;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0)
{
  Tensor t(r, c);
  for (double& x : t.v) {
    x = rng.uniform(-scale, scale);
  }
  return t;
}

// Central finite-difference check of d(sum of f))/d(input) against the
// backward pass, entry by entry.
template <typename Fn>
void fd_check(const Tensor& input, Fn&& build, double tol = 1e-4)
{
  Graph g;
  Var x = g.leaf(input, true);
  Var y = build(g, x);
  Var loss = g.sum_all(y);
  g.backward(loss);
  const Tensor analytic = x.grad();

  const double h = 1e-6;
  for (int i = 0; i < input.size(); ++i) {
    Tensor plus = input;
    Tensor minus = input;
    plus.v[i] += h;
    minus.v[i] -= h;
    Graph gp, gm;
    const double fp =
        gp.sum_all(build(gp, gp.leaf(plus, false))).scalar();
    const double fm =
        gm.sum_all(build(gm, gm.leaf(minus, false))).scalar();
    const double fd = (fp - fm) / (2 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(analytic.v[i])});
    CHECK(std::abs(analytic.v[i] - fd) / scale < tol);
  }
}

}  // namespace

TEST_CASE("dense layer forward identities")
{
  Graph g;
  Tensor eye(3, 3);
  for (int i = 0; i < 3; ++i) {
    eye.at(i, i) = 1.0;
  }
  Rng rng(7);
  const Tensor in = random_tensor(2, 3, rng);
  Var x = g.leaf(in, false);
  Var w = g.leaf(eye, false);
  Var out = g.matmul(x, w);
  for (int i = 0; i < in.size(); ++i) {
    CHECK(out.val().v[i] == doctest::Approx(in.v[i]));
  }

  // zero input + bias: every row equals the bias
  Tensor zero(2, 3, 0.0);
  Tensor bias = random_tensor(1, 3, rng);
  Var b = g.add_rowvec(g.leaf(zero, false), g.leaf(bias, false));
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(b.val().at(r, c) == doctest::Approx(bias.at(0, c)));
    }
  }
}

TEST_CASE("gradients of primitive ops match finite differences")
{
  Rng rng(11);
  const Tensor a = random_tensor(4, 4, rng);
  const Tensor w = random_tensor(4, 3, rng);

  fd_check(a, [&](Graph& g, Var x) {
    return g.matmul(x, g.leaf(w, false));
  });
  fd_check(a, [&](Graph& g, Var x) { return g.gelu(x); });
  fd_check(a, [&](Graph& g, Var x) { return g.transpose(x); });
  fd_check(a, [&](Graph& g, Var x) { return g.softmax_rows(x, 0.7); });
  fd_check(a, [&](Graph& g, Var x) {
    return g.mul(x, g.slice_cols(x, 0, 4));
  });
  fd_check(a, [&](Graph& g, Var x) {
    return g.concat_cols({x, g.scale(x, 2.0)});
  });
  fd_check(a, [&](Graph& g, Var x) {
    return g.select_rows(x, {2, 0, 2});
  });
  fd_check(a, [&](Graph& g, Var x) { return g.zero_rows(x, {1}); });

  const Tensor pts = random_tensor(5, 2, rng, 10.0);
  fd_check(pts, [&](Graph& g, Var x) { return g.bbox_hpwl(x); });

  const Tensor target = random_tensor(4, 4, rng);
  fd_check(a, [&](Graph& g, Var x) {
    return g.mse_loss(x, g.leaf(target, false));
  });
}

TEST_CASE("attention-shaped composite gradient")
{
  Rng rng(13);
  const Tensor x = random_tensor(3, 4, rng);
  const Tensor wq = random_tensor(4, 4, rng);
  const Tensor wk = random_tensor(4, 4, rng);
  const Tensor wv = random_tensor(4, 4, rng);
  fd_check(x, [&](Graph& g, Var in) {
    Var q = g.matmul(in, g.leaf(wq, false));
    Var k = g.matmul(in, g.leaf(wk, false));
    Var v = g.matmul(in, g.leaf(wv, false));
    Var scores = g.scale(g.matmul(q, g.transpose(k)), 0.5);
    return g.add(in, g.matmul(g.softmax_rows(scores, 1.0), v));
  });
}

TEST_CASE("self-attention is permutation-equivariant")
{
  // One row: softmax over a single score is exactly 1.
  Graph g;
  Rng rng(17);
  const Tensor row = random_tensor(1, 4, rng);
  Var x = g.leaf(row, false);
  Var scores = g.matmul(x, g.transpose(x));
  Var attn = g.softmax_rows(scores, 1.0);
  CHECK(attn.val().v[0] == doctest::Approx(1.0));
}

TEST_CASE("gumbel-softmax properties")
{
  Graph g;
  Rng rng(19);

  // equal logits, no noise: uniform rows
  Tensor logits(3, 5, 0.25);
  Var u = g.softmax_rows(g.leaf(logits, false), 1.0);
  for (int i = 0; i < u.val().size(); ++i) {
    CHECK(u.val().v[i] == doctest::Approx(0.2));
  }

  // tiny temperature: near-one-hot at the argmax. Rows are regenerated
  // until the top logit clears the rest by a margin; the sharpness claim
  // presumes untied logits.
  Tensor distinct = random_tensor(6, 5, rng);
  for (int r = 0; r < 6; ++r) {
    for (;;) {
      double best = -1e300, second = -1e300;
      for (int c = 0; c < 5; ++c) {
        const double v = distinct.at(r, c);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      if (best - second > 0.1) {
        break;
      }
      for (int c = 0; c < 5; ++c) {
        distinct.at(r, c) = rng.uniform(-1.0, 1.0);
      }
    }
  }
  Var sharp = g.softmax_rows(g.leaf(distinct, false), 0.01);
  for (int r = 0; r < 6; ++r) {
    int argmax = 0;
    double best = distinct.at(r, 0);
    for (int c = 1; c < 5; ++c) {
      if (distinct.at(r, c) > best) {
        best = distinct.at(r, c);
        argmax = c;
      }
    }
    CHECK(sharp.val().at(r, argmax) > 0.99);
  }

  // rows always normalize
  Tensor noise = random_tensor(6, 5, rng);
  Var noisy = g.softmax_rows(g.leaf(distinct, false), 0.37, &noise);
  for (int r = 0; r < 6; ++r) {
    double s = 0.0;
    for (int c = 0; c < 5; ++c) {
      s += noisy.val().at(r, c);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }

  // tau = 1, no noise: plain softmax
  Var plain = g.softmax_rows(g.leaf(distinct, false), 1.0);
  for (int r = 0; r < 6; ++r) {
    double denom = 0.0;
    double mx = distinct.at(r, 0);
    for (int c = 1; c < 5; ++c) {
      mx = std::max(mx, distinct.at(r, c));
    }
    for (int c = 0; c < 5; ++c) {
      denom += std::exp(distinct.at(r, c) - mx);
    }
    for (int c = 0; c < 5; ++c) {
      CHECK(plain.val().at(r, c)
            == doctest::Approx(std::exp(distinct.at(r, c) - mx) / denom)
                   .epsilon(1e-12));
    }
  }

  CHECK_THROWS(g.softmax_rows(g.leaf(distinct, false), 0.0));
}

TEST_CASE("focal loss values and gradient")
{
  Graph g;
  // gamma = 0 reduces to cross-entropy
  Tensor probs(1, 2);
  probs.at(0, 0) = 0.5;
  probs.at(0, 1) = 0.5;
  Tensor onehot(1, 2, 0.0);
  onehot.at(0, 0) = 1.0;
  CHECK(g.focal_loss(g.leaf(probs, false), onehot, 0.0).scalar()
        == doctest::Approx(std::log(2.0)));

  // p_true = 1 -> zero loss
  Tensor sure(1, 2, 0.0);
  sure.at(0, 0) = 1.0;
  CHECK(g.focal_loss(g.leaf(sure, false), onehot, 2.0).scalar()
        == doctest::Approx(0.0));

  // gamma = 2, p = 0.5: 0.25 * log 2
  CHECK(g.focal_loss(g.leaf(probs, false), onehot, 2.0).scalar()
        == doctest::Approx(0.25 * std::log(2.0)));

  // gradient through softmax + focal
  Rng rng(23);
  const Tensor raw = random_tensor(4, 6, rng);
  Tensor targets(4, 6, 0.0);
  for (int r = 0; r < 4; ++r) {
    targets.at(r, r % 6) = 1.0;
  }
  fd_check(raw, [&](Graph& gg, Var x) {
    return gg.focal_loss(gg.softmax_rows(x, 1.0), targets, 2.0);
  });
}

TEST_CASE("mse loss behaves")
{
  Graph g;
  Tensor a = Tensor::scalar(3.0);
  Tensor b = Tensor::scalar(1.0);
  CHECK(g.mse_loss(g.leaf(a, false), g.leaf(b, false)).scalar()
        == doctest::Approx(4.0));
  CHECK(g.mse_loss(g.leaf(b, false), g.leaf(a, false)).scalar()
        == doctest::Approx(4.0));
  CHECK(g.mse_loss(g.leaf(a, false), g.leaf(a, false)).scalar() == 0.0);
}

TEST_CASE("contrastive loss values and gradient")
{
  Graph g;
  Tensor e(3, 4, 0.0);
  // rows 0 and 1 identical, row 2 antipodal to them
  for (int c = 0; c < 4; ++c) {
    e.at(0, c) = 1.0;
    e.at(1, c) = 1.0;
    e.at(2, c) = -1.0;
  }
  CHECK(g.contrastive_loss(g.leaf(e, false), {{0, 1, true}}).scalar()
        == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(g.contrastive_loss(g.leaf(e, false), {{0, 2, false}}).scalar()
        == doctest::Approx(0.0).epsilon(1e-9));

  // orthogonal same-cluster pair: similarity 0.5 -> ln 2
  Tensor o(2, 2, 0.0);
  o.at(0, 0) = 1.0;
  o.at(1, 1) = 1.0;
  CHECK(g.contrastive_loss(g.leaf(o, false), {{0, 1, true}}).scalar()
        == doctest::Approx(std::log(2.0)));

  Tensor z(2, 2, 0.0);
  CHECK_THROWS(g.contrastive_loss(g.leaf(z, false), {{0, 1, true}}));

  Rng rng(29);
  const Tensor emb = random_tensor(5, 8, rng);
  std::vector<Graph::PairLabel> pairs{{0, 1, true},  {1, 2, false},
                                      {2, 3, true},  {3, 4, false},
                                      {0, 4, false}, {1, 3, true}};
  fd_check(emb, [&](Graph& gg, Var x) {
    return gg.contrastive_loss(x, pairs);
  });
}

TEST_CASE("adam step behavior")
{
  ad::ParameterStore store;
  store.add("w", Tensor::scalar(1.0));
  ad::AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;

  // zero gradient: nothing moves
  std::map<std::string, Tensor> grads;
  grads.emplace("w", Tensor::scalar(0.0));
  CHECK(adam_step(store, grads, cfg));
  CHECK(store.at("w").v[0] == doctest::Approx(1.0));

  // constant unit gradient: first step is about -lr after bias correction
  ad::ParameterStore s2;
  s2.add("w", Tensor::scalar(1.0));
  grads.clear();
  grads.emplace("w", Tensor::scalar(1.0));
  CHECK(adam_step(s2, grads, cfg));
  CHECK(s2.at("w").v[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));

  // identical stores and grads: identical results
  ad::ParameterStore s3;
  s3.add("w", Tensor::scalar(1.0));
  adam_step(s3, grads, cfg);
  CHECK(s3.at("w").v[0] == s2.at("w").v[0]);

  // non-finite gradient: refused
  grads.clear();
  grads.emplace("w", Tensor::scalar(std::nan("")));
  CHECK(!adam_step(s3, grads, cfg));
}

TEST_CASE("parameter store serialization round-trips bit-exactly")
{
  Rng rng(31);
  ad::ParameterStore store;
  store.add("a", random_tensor(3, 4, rng, 0.123456789123456789));
  store.add("b", random_tensor(1, 7, rng));
  store.step = 42;
  std::map<std::string, Tensor> grads;
  grads.emplace("a", random_tensor(3, 4, rng));
  adam_step(store, grads, {});

  const ad::ParameterStore back =
      ad::ParameterStore::from_json(store.to_json());
  CHECK(back.step == store.step);
  for (const auto& [name, e] : store.entries) {
    const auto& be = back.entries.at(name);
    REQUIRE(be.value.same_shape(e.value));
    for (int i = 0; i < e.value.size(); ++i) {
      CHECK(be.value.v[i] == e.value.v[i]);
      CHECK(be.m.v[i] == e.m.v[i]);
      CHECK(be.v.v[i] == e.v.v[i]);
    }
  }
}
