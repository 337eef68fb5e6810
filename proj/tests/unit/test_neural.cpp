#include "nsp/adam.hpp"
#include "nsp/errors.hpp"
#include "nsp/gru_model.hpp"
#include "nsp/trainer.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace nsp;
using Catch::Matchers::WithinAbs;

namespace {

GruParams zero_gru(Eigen::Index h, Eigen::Index d) {
  GruParams p;
  p.w_z = p.w_r = p.w_h = Eigen::MatrixXd::Zero(h, d);
  p.u_z = p.u_r = p.u_h = Eigen::MatrixXd::Zero(h, h);
  p.b_z = p.b_r = p.b_h = Eigen::VectorXd::Zero(h);
  return p;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Whole-model inference written element by element.
Eigen::VectorXd reference_logits(const ModelParams& m, const Eigen::MatrixXd& x) {
  const auto hid = m.gru.hidden(), d = m.gru.input_dim();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hid), sum = Eigen::VectorXd::Zero(hid);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    Eigen::VectorXd z(hid), r(hid), next(hid);
    for (Eigen::Index i = 0; i < hid; ++i) {
      double az = m.gru.b_z(i), ar = m.gru.b_r(i);
      for (Eigen::Index j = 0; j < d; ++j) {
        az += m.gru.w_z(i, j) * x(t, j);
        ar += m.gru.w_r(i, j) * x(t, j);
      }
      for (Eigen::Index j = 0; j < hid; ++j) {
        az += m.gru.u_z(i, j) * h(j);
        ar += m.gru.u_r(i, j) * h(j);
      }
      z(i) = sigmoid(az);
      r(i) = sigmoid(ar);
    }
    for (Eigen::Index i = 0; i < hid; ++i) {
      double ah = m.gru.b_h(i);
      for (Eigen::Index j = 0; j < d; ++j) ah += m.gru.w_h(i, j) * x(t, j);
      for (Eigen::Index j = 0; j < hid; ++j) ah += m.gru.u_h(i, j) * r(j) * h(j);
      next(i) = (1.0 - z(i)) * h(i) + z(i) * std::tanh(ah);
    }
    h = next;
    sum += h;
  }
  const Eigen::VectorXd pooled = m.pooling == Pooling::Average ? Eigen::VectorXd(sum / static_cast<double>(x.rows())) : h;
  Eigen::VectorXd dense(m.w_dense.rows());
  for (Eigen::Index i = 0; i < dense.size(); ++i) {
    double a = m.b_dense(i);
    for (Eigen::Index j = 0; j < hid; ++j) a += m.w_dense(i, j) * pooled(j);
    dense(i) = std::max(a, 0.0);
  }
  Eigen::VectorXd out(m.w_out.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double a = m.b_out(i);
    for (Eigen::Index j = 0; j < dense.size(); ++j) a += m.w_out(i, j) * dense(j);
    out(i) = a;
  }
  return out;
}

Split constant_sign_split(int per_class, int frames, int dim) {
  Split s;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2;
    s.push_back({"ex" + std::to_string(i), Eigen::MatrixXd::Constant(frames, dim, label == 0 ? 1.0 : -1.0), label});
  }
  return s;
}

ModelShape small_shape(int input_dim, int classes, Pooling pooling = Pooling::Average) {
  ModelShape shape;
  shape.input_dim = input_dim;
  shape.hidden = 8;
  shape.dense = 6;
  shape.classes = classes;
  shape.pooling = pooling;
  return shape;
}

}  // namespace

TEST_CASE("GRU step closed forms", "[neural]") {
  const GruParams zero = zero_gru(4, 3);
  CHECK(gru_step(zero, Eigen::Vector3d(1.0, -2.0, 3.0), Eigen::VectorXd::Zero(4)).isZero(0.0));

  GruParams p = zero_gru(1, 1);
  p.b_z(0) = 40.0;
  p.w_h(0, 0) = 1.0;
  const Eigen::VectorXd h = gru_step(p, Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Zero(1));
  CHECK_THAT(h(0), WithinAbs(std::tanh(0.5), 1e-12));
  CHECK_THAT(h(0), WithinAbs(0.4621, 1e-4));

  // Hand-evaluated step with a nonzero previous state.
  GruParams q = zero_gru(1, 1);
  q.w_z(0, 0) = 0.5;
  q.u_z(0, 0) = -1.0;
  q.w_r(0, 0) = 1.0;
  q.b_r(0) = 0.25;
  q.w_h(0, 0) = 2.0;
  q.u_h(0, 0) = 0.5;
  q.b_h(0) = -0.1;
  const double x = 0.3, hp = 0.4;
  const double z = sigmoid(0.5 * x - 1.0 * hp), r = sigmoid(x + 0.25);
  const double cand = std::tanh(2.0 * x + 0.5 * r * hp - 0.1);
  const Eigen::VectorXd got = gru_step(q, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, hp));
  CHECK_THAT(got(0), WithinAbs((1 - z) * hp + z * cand, 1e-15));

  CHECK_THROWS_AS(gru_step(zero, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(4)), Error);
}

TEST_CASE("hidden states stay inside [-1, 1]", "[neural]") {
  const ModelParams m = oracle::toy_model(3, 16, 4, 3, Pooling::Last, 9);
  // Large inputs saturate tanh to exactly +-1 in double precision.
  const auto loud = forward(m, oracle::random_matrix(50, 3, 10, 20.0), false);
  CHECK(loud.cache.h.cwiseAbs().maxCoeff() <= 1.0);
  const auto quiet = forward(m, oracle::random_matrix(50, 3, 10, 0.5), false);
  CHECK(quiet.cache.h.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("forward pass matches an element-wise reference", "[neural]") {
  for (Pooling pooling : {Pooling::Average, Pooling::Last}) {
    const ModelParams m = oracle::toy_model(4, 5, 6, 3, pooling, 3);
    const Eigen::MatrixXd x = oracle::random_matrix(7, 4, 4);
    const auto fr = forward(m, x, false);
    CHECK((fr.logits - reference_logits(m, x)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THAT(fr.probs.sum(), WithinAbs(1.0, 1e-9));
    if (pooling == Pooling::Average) {
      const Eigen::VectorXd mean = fr.cache.h.rightCols(7).rowwise().mean();
      CHECK((fr.cache.pooled - mean).cwiseAbs().maxCoeff() < 1e-15);
    } else {
      CHECK(fr.cache.pooled == fr.cache.h.col(7));
    }
  }
  // Mean of the hidden-state columns [1,3] and [3,5].
  Eigen::MatrixXd states(2, 2);
  states << 1, 3, 3, 5;
  CHECK(states.rowwise().mean() == Eigen::Vector2d(2.0, 4.0));
}

TEST_CASE("forward output properties", "[neural]") {
  ModelParams m = ModelParams::init(small_shape(3, 4), 1);
  m.w_out.setZero();
  const Eigen::MatrixXd x = oracle::random_matrix(5, 3, 2);
  const auto uniform = forward(m, x, false);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK_THAT(uniform.probs(i), WithinAbs(0.25, 1e-15));
  CHECK_THAT(loss_and_grads(m, x, 2, nullptr), WithinAbs(std::log(4.0), 1e-12));
  CHECK_THAT(std::log(4.0), WithinAbs(1.3863, 1e-4));

  const ModelParams trained = ModelParams::init(small_shape(3, 4), 5);
  const auto a = forward(trained, x, false);
  const auto b = forward(trained, x, false);
  CHECK(a.logits == b.logits);

  CHECK_THROWS_AS(forward(trained, oracle::random_matrix(5, 2, 1), false), Error);

  const ModelParams init = ModelParams::init(small_shape(3, 4), 11);
  CHECK(init.gru.w_z.cwiseAbs().maxCoeff() <= 0.08);
  CHECK(init.w_out.cwiseAbs().maxCoeff() <= 0.08);
  CHECK(init.gru.b_h.isZero(0.0));
  CHECK(init.b_out.isZero(0.0));
}

TEST_CASE("softmax is a distribution", "[neural]") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(5);
    for (auto& e : v) e = rng.normal(0.0, 10.0);
    const auto p = softmax(v);
    CHECK(p.minCoeff() > 0.0);
    CHECK(p.maxCoeff() < 1.0);
    CHECK_THAT(p.sum(), WithinAbs(1.0, 1e-9));
    CHECK((log_softmax(v).array().exp().matrix() - p).cwiseAbs().maxCoeff() < 1e-12);
  }
  const auto extreme = softmax(Eigen::Vector3d(1000.0, -1000.0, 0.0));
  CHECK(extreme.allFinite());
  CHECK_THAT(extreme.sum(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("perfect predictions have zero loss and output gradient", "[neural]") {
  ModelParams m = ModelParams::init(small_shape(2, 3), 2);
  m.w_out.setZero();
  m.b_out << -40.0, 40.0, -40.0;
  ModelParams g = m;
  const double loss = loss_and_grads(m, oracle::random_matrix(4, 2, 1), 1, &g);
  CHECK(loss < 1e-12);
  CHECK(g.w_out.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.b_out.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("BPTT gradients match central differences", "[neural]") {
  const Eigen::MatrixXd x = oracle::random_matrix(4, 2, 42);
  for (Pooling pooling : {Pooling::Average, Pooling::Last}) {
    for (int label = 0; label < 3; ++label) {
      const ModelParams m = oracle::toy_model(2, 3, 5, 3, pooling, 100 + static_cast<std::uint64_t>(label));
      const auto check = oracle::model_gradient_check(m, x, label);
      INFO(to_string(pooling) << " label " << label << " worst at " << check.where);
      CHECK(check.worst < 1e-4);
    }
  }
}

namespace {

// Single-tensor parameter pack for exercising the optimizer.
struct Wrap {
  Eigen::MatrixXd w;
  template <class F, class... Ps>
  static void zip(F&& f, Ps&... ps) {
    f("w", ps.w...);
  }
};

}  // namespace

TEST_CASE("Adam update rule", "[neural]") {
  AdamConfig cfg;

  Wrap params{Eigen::Vector2d(0.5, -0.5)};
  const Wrap before = params;
  auto state = AdamState<Wrap>::zeros_like(params);
  adam_step(state, params, Wrap{Eigen::MatrixXd::Zero(2, 1)}, cfg);
  CHECK(params.w == before.w);

  Wrap q{Eigen::MatrixXd::Constant(3, 1, 1.0)};
  auto qs = AdamState<Wrap>::zeros_like(q);
  Eigen::MatrixXd grad(3, 1);
  grad << 0.3, -2.0, 1e-3;
  adam_step(qs, q, Wrap{grad}, cfg);
  for (int i = 0; i < 3; ++i) {
    const double step = 1.0 - q.w(i, 0);
    CHECK_THAT(std::abs(step), WithinAbs(cfg.learning_rate, 0.01 * cfg.learning_rate));
    CHECK((step > 0) == (grad(i, 0) > 0));
  }

  // Second step by hand: m2 = b1 m1 + (1-b1) g2, v2 = b2 v1 + (1-b2) g2^2.
  Eigen::MatrixXd grad2(3, 1);
  grad2 << -0.1, -1.0, 0.5;
  const Eigen::MatrixXd w1 = q.w;
  adam_step(qs, q, Wrap{grad2}, cfg);
  for (int i = 0; i < 3; ++i) {
    const double g1 = grad(i, 0), g2 = grad2(i, 0);
    const double m2 = 0.9 * (0.1 * g1) + 0.1 * g2;
    const double v2 = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
    const double mhat = m2 / (1 - 0.81), vhat = v2 / (1 - 0.999 * 0.999);
    CHECK_THAT(q.w(i, 0), WithinAbs(w1(i, 0) - 0.001 * mhat / (std::sqrt(vhat) + 1e-8), 1e-15));
  }

  Eigen::MatrixXd bad = grad;
  bad(1, 0) = std::nan("");
  try {
    adam_step(qs, q, Wrap{bad}, cfg);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }
}

TEST_CASE("training separates constant-sign sequences", "[neural]") {
  const Split train_split = constant_sign_split(8, 5, 2);
  const Split val_split = constant_sign_split(2, 5, 2);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 3;
  const auto res = train(train_split, val_split, init_model(small_shape(2, 2), cfg.seed), cfg);
  CHECK(res.history.size() == 200);
  const auto first_perfect = std::find_if(res.history.begin(), res.history.end(),
                                          [](const EpochRecord& r) { return r.train_accuracy == 1.0; });
  CHECK(first_perfect != res.history.end());
  CHECK(evaluate(res.model, train_split) == 1.0);
  CHECK(res.history.back().epoch == 200);

  const auto again = train(train_split, val_split, init_model(small_shape(2, 2), cfg.seed), cfg);
  CHECK(again.model.gru.u_h == res.model.gru.u_h);
  CHECK(again.model.w_out == res.model.w_out);
  CHECK(again.history.back().train_loss == res.history.back().train_loss);

  int calls = 0;
  cfg.epochs = 3;
  cfg.on_epoch = [&](const EpochRecord& r) { CHECK(r.epoch == ++calls); };
  train(train_split, val_split, init_model(small_shape(2, 2), 1), cfg);
  CHECK(calls == 3);
}

TEST_CASE("untrained accuracy sits near chance", "[neural]") {
  Split data;
  Rng rng(8);
  for (int i = 0; i < 80; ++i) {
    data.push_back({"r" + std::to_string(i), oracle::random_matrix(6, 3, rng.next_u64()), i % 4});
  }
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto res = train(data, data, init_model(small_shape(3, 4), 42), cfg);
  CHECK(res.history.empty());
  const double acc = evaluate(res.model, data);
  CHECK(acc >= 0.1);
  CHECK(acc <= 0.5);
}

TEST_CASE("evaluation counts argmax hits", "[neural]") {
  ModelParams m = ModelParams::init(small_shape(2, 4), 1);
  m.w_out.setZero();
  m.b_out << 5.0, 0.0, 0.0, 0.0;
  Split s;
  for (int i = 0; i < 8; ++i) s.push_back({"e" + std::to_string(i), oracle::random_matrix(3, 2, static_cast<std::uint64_t>(i)), i % 4});
  CHECK(evaluate(m, s) == 0.25);
  Split reversed(s.rbegin(), s.rend());
  CHECK(evaluate(m, reversed) == 0.25);

  const ModelParams r = oracle::toy_model(2, 4, 5, 4, Pooling::Average, 6);
  ModelParams shifted = r;
  shifted.b_out.array() += 3.7;
  for (const auto& ex : s) CHECK(predict(r, ex.features) == predict(shifted, ex.features));

  CHECK_THROWS_AS(evaluate(m, Split{}), Error);
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    train(Split{}, s, m, cfg);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySplit);
  }
}

TEST_CASE("overfitting a single example", "[neural]") {
  ModelShape shape = small_shape(3, 3);
  shape.dropout_rate = 0.0;
  ModelParams m = ModelParams::init(shape, 21);
  const Eigen::MatrixXd x = oracle::random_matrix(6, 3, 22);
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  auto state = AdamState<ModelParams>::zeros_like(m);
  ModelParams g = m;
  double prev = loss_and_grads(m, x, 1, &g);
  double last = prev;
  for (int step = 0; step < 50; ++step) {
    adam_step(state, m, g, cfg);
    last = loss_and_grads(m, x, 1, &g);
    CHECK(last <= prev + 1e-12);
    prev = last;
  }
  CHECK(last < 0.01);
}
