#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <czero/net.hpp>

#include "support.hpp"

using namespace czero;
using testing::random_batch;
using testing::randomize;

namespace {

// Independent scalar re-implementation of the loss for one-hidden-layer nets.
double reference_loss(const TripleHeadNet& net, const std::vector<EpisodeSample>& batch, double lambda) {
  const auto& sh = net.shape();
  const auto p = net.parameters();
  const auto& l0 = net.trunk_layers()[0];
  double total = 0.0;
  for (const auto& s : batch) {
    std::vector<double> h(sh.width);
    for (std::size_t o = 0; o < sh.width; ++o) {
      double z = p[l0.bias + o];
      for (std::size_t i = 0; i < sh.input_size; ++i)
        z += p[l0.weights + o * sh.input_size + i] * (s.summary[i] - net.input_mean[i]) / net.input_std[i];
      h[o] = z > 0 ? z : 0;
    }
    auto head = [&](const TripleHeadNet::LayerView& v, std::size_t o) {
      double z = p[v.bias + o];
      for (std::size_t i = 0; i < sh.width; ++i) z += p[v.weights + o * sh.width + i] * h[i];
      return z;
    };
    std::vector<double> logits(sh.num_actions);
    double mx = -1e300;
    for (std::size_t a = 0; a < sh.num_actions; ++a) mx = std::max(mx, logits[a] = head(net.policy_head(), a));
    double z = 0.0;
    for (double& l : logits) z += std::exp(l - mx);
    double lp = 0.0;
    for (std::size_t a = 0; a < sh.num_actions; ++a) {
      const double pa = std::clamp(std::exp(logits[a] - mx) / z, kProbClamp, 1 - kProbClamp);
      lp -= s.tree_policy[a] * std::log(pa);
    }
    const double v = head(net.value_head(), 0);
    const double target = std::clamp((s.ret - net.value_norm.mean) / net.value_norm.std, -1.0, 1.0);
    const double f = std::clamp(1.0 / (1.0 + std::exp(-head(net.failure_head(), 0))), kProbClamp, 1 - kProbClamp);
    total += (v - target) * (v - target) + lp - (s.failure * std::log(f) + (1 - s.failure) * std::log(1 - f));
  }
  double norm = 0.0;
  for (double x : p) norm += x * x;
  return total / batch.size() + lambda * norm;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("zero-initialized heads give a neutral output") {
  Rng rng(1);
  TripleHeadNet net({2, 2, 16, 3}, rng);
  const auto out = net.forward(std::vector<double>{0.3, -1.2});
  for (double p : out.policy) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(out.value == 0.0);
  CHECK(out.failure == 0.5);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), ContractViolation);
}

TEST_CASE("forward invariants on random nets") {
  Rng rng(2);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    TripleHeadNet net({3, 2, 8, 4}, rng);
    randomize(net, rng, 2.0);
    net.value_norm = {3.0, 2.5};
    const std::vector<double> x{nd(rng), nd(rng), nd(rng)};
    const auto out = net.forward(x);
    double total = 0.0;
    for (double p : out.policy) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(out.failure >= 0.0);
    CHECK(out.failure <= 1.0);
    CHECK(out.value == out.value_raw * 2.5 + 3.0);
  }
}

TEST_CASE("loss examples") {
  TripleHeadNet net({1, 1, 4, 2});
  TrainSpec spec;
  spec.weight_decay = 0.0;
  EpisodeSample s{{0.0}, {0.25, 0.75}, 0.0, 1};
  auto l = loss_cz(net, std::vector<EpisodeSample>{s}, spec);
  CHECK(l.failure == doctest::Approx(std::log(2.0)));
  CHECK(l.value == 0.0);
  CHECK(l.policy == doctest::Approx(std::log(2.0)));

  // Perfect prediction: policy loss is the entropy of the target.
  TripleHeadNet fitted({1, 1, 1, 2});
  auto params = fitted.parameters();
  const auto& ph = fitted.policy_head();
  params[ph.bias + 1] = std::log(3.0);  // softmax(0, log 3) = (0.25, 0.75)
  EpisodeSample p{{0.0}, {0.25, 0.75}, 0.0, 0};
  fitted.value_norm = {0.0, 1.0};
  params[fitted.failure_head().bias] = -40.0;
  l = loss_cz(fitted, std::vector<EpisodeSample>{p}, spec);
  CHECK(l.policy == doctest::Approx(-(0.25 * std::log(0.25) + 0.75 * std::log(0.75))));
  CHECK(l.value == 0.0);
  CHECK(l.failure < 1e-6);
}

TEST_CASE("loss matches an independent scalar evaluator") {
  Rng rng(3);
  const NetShape shape{3, 1, 5, 3};
  for (int t = 0; t < 5; ++t) {
    TripleHeadNet net(shape, rng);
    randomize(net, rng, 0.7);
    net.value_norm = {0.1, 0.8};
    net.input_mean = {0.5, -0.2, 0.0};
    net.input_std = {1.5, 0.7, 1.0};
    const auto batch = random_batch(shape, 7, rng);
    TrainSpec spec;
    spec.weight_decay = 0.01;
    CHECK(loss_cz(net, batch, spec).total == doctest::Approx(reference_loss(net, batch, 0.01)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(4);
  const NetShape shape{3, 2, 6, 3};
  TripleHeadNet net(shape, rng);
  randomize(net, rng, 0.6);
  net.value_norm = {0.0, 0.5};
  const auto batch = random_batch(shape, 5, rng);
  TrainSpec spec;
  spec.weight_decay = 1e-3;
  std::vector<double> grad;
  loss_and_gradient(net, batch, spec, grad);
  const double h = 1e-4;
  for (std::size_t i = 0; i < net.num_parameters(); ++i) {
    TripleHeadNet plus = net;
    TripleHeadNet minus = net;
    plus.parameters()[i] += h;
    minus.parameters()[i] -= h;
    const double fd = (loss_cz(plus, batch, spec).total - loss_cz(minus, batch, spec).total) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
    CHECK(std::abs(fd - grad[i]) / denom < 1e-4);
  }
}

TEST_CASE("regularization gradient is 2 lambda theta") {
  TripleHeadNet zero({2, 1, 3, 2});
  TrainSpec spec;
  spec.weight_decay = 0.5;
  std::vector<EpisodeSample> batch{{{0.0, 0.0}, {0.5, 0.5}, 0.0, 0}};
  std::vector<double> g0;
  std::vector<double> g_base;
  loss_and_gradient(zero, batch, spec, g0);
  spec.weight_decay = 0.0;
  loss_and_gradient(zero, batch, spec, g_base);
  for (std::size_t i = 0; i < g0.size(); ++i) CHECK(g0[i] == g_base[i]);

  Rng rng(5);
  TripleHeadNet net({2, 1, 3, 2}, rng);
  randomize(net, rng, 1.0);
  std::vector<double> g1, g2, g3;
  spec.weight_decay = 0.0;
  loss_and_gradient(net, batch, spec, g1);
  spec.weight_decay = 0.1;
  loss_and_gradient(net, batch, spec, g2);
  spec.weight_decay = 0.2;
  loss_and_gradient(net, batch, spec, g3);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g2[i] - g1[i] == doctest::Approx(0.2 * net.parameters()[i]));
    CHECK(g3[i] - g1[i] == doctest::Approx(2.0 * (g2[i] - g1[i])));
  }
}

TEST_CASE("Adam hand trace") {
  TripleHeadNet net({1, 1, 1, 1});
  TrainSpec spec;
  spec.learning_rate = 0.1;
  const std::vector<double> zero(net.num_parameters(), 0.0);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  adam_step(net, zero, spec);
  CHECK(std::vector<double>(net.parameters().begin(), net.parameters().end()) == before);

  TripleHeadNet scalar({1, 1, 1, 1});
  scalar.parameters()[0] = 1.0;
  const double grads[] = {0.5, -1.0, 2.0};
  double m = 0.0, v = 0.0, theta = 1.0;
  for (int t = 1; t <= 3; ++t) {
    std::vector<double> g(scalar.num_parameters(), 0.0);
    g[0] = grads[t - 1];
    adam_step(scalar, g, spec);
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    theta -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    CHECK(scalar.parameters()[0] == doctest::Approx(theta).epsilon(1e-14));
  }
  // Step 1 by hand: m_hat = g, v_hat = g^2, so the update is -lr * sign(g).
  CHECK(scalar.adam_step == 3);

  TripleHeadNet steady({1, 1, 1, 1});
  std::vector<double> g(steady.num_parameters(), 0.3);
  for (int t = 0; t < 200; ++t) {
    const double prev = steady.parameters()[0];
    adam_step(steady, g, spec);
    CHECK(prev - steady.parameters()[0] == doctest::Approx(0.1).epsilon(1e-6));
  }
}

TEST_CASE("fit overfits a single sample and is deterministic") {
  const NetShape shape{2, 2, 16, 3};
  EpisodeSample s{{1.0, 2.0}, {0.1, 0.8, 0.1}, 42.0, 1};
  TrainSpec spec;
  spec.learning_rate = 1e-2;
  spec.epochs = 300;
  spec.weight_decay = 0.0;
  Rng init(6);
  TripleHeadNet a(shape, init);
  TripleHeadNet b = a;
  TripleHeadNet c = a;
  Rng r1(9), r2(9), r3(9);
  const auto h1 = fit(a, std::vector<EpisodeSample>{s}, spec, r1);
  const auto h2 = fit(b, std::vector<EpisodeSample>{s}, spec, r2);
  CHECK(a.forward(s.summary).value == doctest::Approx(42.0).epsilon(0.05 / 42.0));
  CHECK(h1.back().total < h1.front().total);
  REQUIRE(h1.size() == h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].total == h2[i].total);
  const auto h3 = fit(c, std::vector<EpisodeSample>(4, s), spec, r3);
  CHECK(c.forward(s.summary).value == doctest::Approx(42.0).epsilon(0.05 / 42.0));
  CHECK(h3.back().total < h3.front().total);
}

TEST_CASE("large weight decay drives parameters to zero") {
  Rng rng(7);
  const NetShape shape{2, 1, 8, 3};
  TripleHeadNet net(shape, rng);
  randomize(net, rng, 1.0);
  const auto data = random_batch(shape, 32, rng);
  TrainSpec spec;
  spec.weight_decay = 1e3;
  spec.learning_rate = 1e-2;
  spec.epochs = 1000;
  const double before = net.parameter_norm_squared();
  fit(net, data, spec, rng);
  CHECK(net.parameter_norm_squared() < 1e-3 * before);
  const auto out = net.forward(data[0].summary);
  for (double p : out.policy) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("return normalization") {
  CHECK(normalize_return(5.0, {1.0, 2.0}) == 1.0);
  CHECK(normalize_return(2.0, {1.0, 2.0}) == 0.5);
  CHECK(normalize_return(-9.0, {1.0, 2.0}) == -1.0);
}

TEST_CASE("checkpoint round trip and failure modes") {
  Rng rng(8);
  const NetShape shape{3, 2, 5, 2};
  TripleHeadNet net(shape, rng);
  randomize(net, rng, 1.0);
  net.value_norm = {1.5, 0.25};
  net.input_mean = {1, 2, 3};
  net.input_std = {0.5, 0.25, 2};
  std::vector<double> g(net.num_parameters(), 0.1);
  adam_step(net, g, TrainSpec{});

  const auto dir = std::filesystem::temp_directory_path() / "czero_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "net.bin";
  save_checkpoint(net, path);
  const auto back = load_checkpoint(path);
  CHECK(back.shape() == shape);
  CHECK(back.adam_step == 1);
  CHECK(back.adam_m == net.adam_m);
  CHECK(back.adam_v == net.adam_v);
  const std::vector<double> x{0.3, -0.7, 2.0};
  const auto o1 = net.forward(x);
  const auto o2 = back.forward(x);
  CHECK(o1.policy == o2.policy);
  CHECK(o1.value == o2.value);
  CHECK(o1.failure == o2.failure);

  auto bytes = serialize(net);
  auto bad_version = bytes;
  bad_version[4] = 99;
  try {
    deserialize(bad_version);
    FAIL("expected a version error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::Version);
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  try {
    deserialize(truncated);
    FAIL("expected a corrupt-file error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::Corrupt);
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize(flipped), CheckpointError);
  try {
    load_checkpoint(dir / "missing.bin");
    FAIL("expected an io error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::Io);
  }
  std::filesystem::remove_all(dir);
}

}
