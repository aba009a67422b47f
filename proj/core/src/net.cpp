#include "czero/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace czero {

namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double p) noexcept { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

bool in_clamp_range(double p) noexcept { return p > kProbClamp && p < 1.0 - kProbClamp; }

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : z) v /= total;
}

// y = W x + b for a LayerView into the flat parameter vector.
void affine(std::span<const double> params, const TripleHeadNet::LayerView& layer, std::span<const double> x,
            std::vector<double>& y) {
  y.assign(layer.out, 0.0);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double* w = params.data() + layer.weights + r * layer.in;
    double acc = params[layer.bias + r];
    for (std::size_t c = 0; c < layer.in; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

// Accumulates dW += dy x^T, db += dy, and (optionally) dx = W^T dy.
void affine_backward(std::span<const double> params, const TripleHeadNet::LayerView& layer, std::span<const double> x,
                     std::span<const double> dy, std::vector<double>& grad, std::vector<double>* dx) {
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double* gw = grad.data() + layer.weights + r * layer.in;
    for (std::size_t c = 0; c < layer.in; ++c) gw[c] += g * x[c];
    grad[layer.bias + r] += g;
  }
  if (dx != nullptr) {
    dx->assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double g = dy[r];
      if (g == 0.0) continue;
      const double* w = params.data() + layer.weights + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) (*dx)[c] += w[c] * g;
    }
  }
}

struct Activations {
  std::vector<std::vector<double>> layer_inputs;  // input to each trunk layer
  std::vector<std::vector<double>> pre;           // trunk pre-activations
  std::vector<double> features;                   // last trunk output
  std::vector<double> policy;
  double value_raw = 0.0;
  double failure_logit = 0.0;
  double failure = 0.5;
};

void check_sample(const TripleHeadNet& net, const EpisodeSample& s) {
  if (s.summary.size() != net.shape().input_size)
    throw ContractViolation("sample summary has length " + std::to_string(s.summary.size()) + ", network expects " +
                            std::to_string(net.shape().input_size));
  if (s.tree_policy.size() != net.shape().num_actions)
    throw ContractViolation("sample policy target length does not match the action count");
  if (s.failure != 0 && s.failure != 1) throw ContractViolation("failure label must be 0 or 1");
}

Activations run_forward(const TripleHeadNet& net, std::span<const double> summary) {
  const auto& shape = net.shape();
  if (summary.size() != shape.input_size)
    throw ContractViolation("forward: input has length " + std::to_string(summary.size()) + ", network expects " +
                            std::to_string(shape.input_size));
  const auto params = net.parameters();
  Activations act;
  std::vector<double> x(shape.input_size);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (summary[i] - net.input_mean[i]) / net.input_std[i];

  act.layer_inputs.reserve(shape.depth);
  act.pre.reserve(shape.depth);
  for (const auto& layer : net.trunk_layers()) {
    act.layer_inputs.push_back(x);
    std::vector<double> z;
    affine(params, layer, x, z);
    x.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] > 0.0 ? z[i] : 0.0;
    act.pre.push_back(std::move(z));
  }
  act.features = std::move(x);

  affine(params, net.policy_head(), act.features, act.policy);
  softmax_inplace(act.policy);

  std::vector<double> tmp;
  affine(params, net.value_head(), act.features, tmp);
  act.value_raw = tmp[0];
  affine(params, net.failure_head(), act.features, tmp);
  act.failure_logit = tmp[0];
  act.failure = sigmoid(act.failure_logit);
  return act;
}

}  // namespace

void TrainSpec::validate() const {
  if (!(learning_rate > 0.0)) throw ContractViolation("TrainSpec: learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ContractViolation("TrainSpec: Adam betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ContractViolation("TrainSpec: epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw ContractViolation("TrainSpec: weight_decay must be nonnegative");
  if (batch_size == 0) throw ContractViolation("TrainSpec: batch_size must be positive");
}

TripleHeadNet::TripleHeadNet(NetShape shape) : shape_(shape) {
  if (shape_.input_size == 0 || shape_.depth == 0 || shape_.width == 0 || shape_.num_actions == 0)
    throw ContractViolation("TripleHeadNet: all shape dimensions must be positive");
  build_layout();
  input_mean.assign(shape_.input_size, 0.0);
  input_std.assign(shape_.input_size, 1.0);
  adam_m.assign(params_.size(), 0.0);
  adam_v.assign(params_.size(), 0.0);
}

TripleHeadNet::TripleHeadNet(NetShape shape, Rng& rng) : TripleHeadNet(shape) {
  for (const auto& layer : trunk_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) params_[layer.weights + i] = dist(rng);
    for (std::size_t i = 0; i < layer.out; ++i) params_[layer.bias + i] = dist(rng);
  }
}

void TripleHeadNet::build_layout() {
  std::size_t offset = 0;
  auto place = [&offset](std::size_t in, std::size_t out) {
    LayerView v{offset, offset + in * out, in, out};
    offset += in * out + out;
    return v;
  };
  std::size_t in = shape_.input_size;
  for (std::size_t l = 0; l < shape_.depth; ++l) {
    trunk_.push_back(place(in, shape_.width));
    in = shape_.width;
  }
  policy_ = place(in, shape_.num_actions);
  value_ = place(in, 1);
  failure_ = place(in, 1);
  params_.assign(offset, 0.0);
}

TripleHeadNet::Output TripleHeadNet::forward(std::span<const double> summary) const {
  auto act = run_forward(*this, summary);
  Output out;
  out.policy = std::move(act.policy);
  out.value_raw = act.value_raw;
  out.value = act.value_raw * value_norm.std + value_norm.mean;
  out.failure = act.failure;
  return out;
}

double TripleHeadNet::parameter_norm_squared() const noexcept {
  return std::inner_product(params_.begin(), params_.end(), params_.begin(), 0.0);
}

double normalize_return(double g, const ValueNorm& norm) noexcept {
  return std::clamp((g - norm.mean) / norm.std, -1.0, 1.0);
}

namespace {

LossBreakdown evaluate(const TripleHeadNet& net, std::span<const EpisodeSample> batch, const TrainSpec& spec,
                       std::vector<double>* grad) {
  if (batch.empty()) throw ContractViolation("loss: batch must be nonempty");
  const auto params = net.parameters();
  if (grad != nullptr) grad->assign(net.num_parameters(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  LossBreakdown loss;

  for (const auto& sample : batch) {
    check_sample(net, sample);
    const auto act = run_forward(net, sample.summary);

    // Value.
    const double target = normalize_return(sample.ret, net.value_norm);
    const double diff = act.value_raw - target;
    double d_value = 0.0;
    if (spec.value_loss == ValueLoss::Squared) {
      loss.value += diff * diff;
      d_value = 2.0 * diff;
    } else {
      loss.value += std::abs(diff);
      d_value = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    }

    // Policy cross-entropy.
    const std::size_t na = act.policy.size();
    std::vector<double> d_prob(na, 0.0);
    for (std::size_t i = 0; i < na; ++i) {
      const double p = act.policy[i];
      loss.policy -= sample.tree_policy[i] * std::log(clamp_prob(p));
      if (in_clamp_range(p)) d_prob[i] = -sample.tree_policy[i] / p;
    }

    // Failure binary cross-entropy.
    const double e = static_cast<double>(sample.failure);
    const double f = act.failure;
    const double fc = clamp_prob(f);
    loss.failure += -e * std::log(fc) - (1.0 - e) * std::log(1.0 - fc);

    if (grad == nullptr) continue;

    std::vector<double> d_logits(na, 0.0);
    double dot = 0.0;
    for (std::size_t i = 0; i < na; ++i) dot += d_prob[i] * act.policy[i];
    for (std::size_t j = 0; j < na; ++j) d_logits[j] = act.policy[j] * (d_prob[j] - dot) * inv_n;

    double d_flogit = 0.0;
    if (in_clamp_range(f)) d_flogit = (-e / f + (1.0 - e) / (1.0 - f)) * f * (1.0 - f) * inv_n;
    const std::vector<double> d_v{d_value * inv_n};
    const std::vector<double> d_f{d_flogit};

    std::vector<double> d_feat(net.shape().width, 0.0);
    std::vector<double> tmp;
    affine_backward(params, net.policy_head(), act.features, d_logits, *grad, &tmp);
    for (std::size_t i = 0; i < d_feat.size(); ++i) d_feat[i] += tmp[i];
    affine_backward(params, net.value_head(), act.features, d_v, *grad, &tmp);
    for (std::size_t i = 0; i < d_feat.size(); ++i) d_feat[i] += tmp[i];
    affine_backward(params, net.failure_head(), act.features, d_f, *grad, &tmp);
    for (std::size_t i = 0; i < d_feat.size(); ++i) d_feat[i] += tmp[i];

    const auto& layers = net.trunk_layers();
    std::vector<double> d_out = std::move(d_feat);
    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& pre = act.pre[l];
      for (std::size_t i = 0; i < d_out.size(); ++i)
        if (!(pre[i] > 0.0)) d_out[i] = 0.0;
      std::vector<double> d_in;
      affine_backward(params, layers[l], act.layer_inputs[l], d_out, *grad, l > 0 ? &d_in : nullptr);
      d_out = std::move(d_in);
    }
  }

  loss.value *= inv_n;
  loss.policy *= inv_n;
  loss.failure *= inv_n;
  loss.regularization = spec.weight_decay * net.parameter_norm_squared();
  loss.total = loss.value + loss.policy + loss.failure + loss.regularization;

  if (grad != nullptr && spec.weight_decay != 0.0)
    for (std::size_t i = 0; i < params.size(); ++i) (*grad)[i] += 2.0 * spec.weight_decay * params[i];
  return loss;
}

}  // namespace

LossBreakdown loss_cz(const TripleHeadNet& net, std::span<const EpisodeSample> batch, const TrainSpec& spec) {
  return evaluate(net, batch, spec, nullptr);
}

LossBreakdown loss_and_gradient(const TripleHeadNet& net, std::span<const EpisodeSample> batch, const TrainSpec& spec,
                                std::vector<double>& grad) {
  return evaluate(net, batch, spec, &grad);
}

void adam_step(TripleHeadNet& net, std::span<const double> grad, const TrainSpec& spec) {
  auto params = net.parameters();
  if (grad.size() != params.size()) throw ContractViolation("adam_step: gradient size mismatch");
  net.adam_step += 1;
  const double t = static_cast<double>(net.adam_step);
  const double c1 = 1.0 - std::pow(spec.beta1, t);
  const double c2 = 1.0 - std::pow(spec.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = net.adam_m[i];
    double& v = net.adam_v[i];
    m = spec.beta1 * m + (1.0 - spec.beta1) * grad[i];
    v = spec.beta2 * v + (1.0 - spec.beta2) * grad[i] * grad[i];
    params[i] -= spec.learning_rate * (m / c1) / (std::sqrt(v / c2) + spec.epsilon);
  }
}

void refit_normalization(TripleHeadNet& net, std::span<const EpisodeSample> dataset) {
  if (dataset.empty()) throw ContractViolation("refit_normalization: dataset must be nonempty");
  const double n = static_cast<double>(dataset.size());
  double mean = 0.0;
  for (const auto& s : dataset) mean += s.ret;
  mean /= n;
  double var = 0.0;
  for (const auto& s : dataset) var += (s.ret - mean) * (s.ret - mean);
  var /= n;
  const double sd = std::sqrt(var);
  net.value_norm = {mean, sd > 1e-8 ? sd : 1.0};

  const std::size_t m = net.shape().input_size;
  std::vector<double> mu(m, 0.0);
  std::vector<double> sq(m, 0.0);
  for (const auto& s : dataset) {
    check_sample(net, s);
    for (std::size_t j = 0; j < m; ++j) mu[j] += s.summary[j];
  }
  for (double& v : mu) v /= n;
  for (const auto& s : dataset)
    for (std::size_t j = 0; j < m; ++j) sq[j] += (s.summary[j] - mu[j]) * (s.summary[j] - mu[j]);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = std::sqrt(sq[j] / n);
    net.input_mean[j] = mu[j];
    net.input_std[j] = s > 1e-8 ? s : 1.0;
  }
}

std::vector<LossBreakdown> fit(TripleHeadNet& net, std::span<const EpisodeSample> dataset, const TrainSpec& spec,
                               Rng& rng) {
  spec.validate();
  if (dataset.empty()) throw ContractViolation("fit: dataset must be nonempty");
  refit_normalization(net, dataset);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpisodeSample> batch;
  std::vector<double> grad;
  std::vector<LossBreakdown> history;
  history.reserve(spec.epochs);

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_loss;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + spec.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
      const auto l = loss_and_gradient(net, batch, spec, grad);
      adam_step(net, grad, spec);
      const double w = static_cast<double>(end - start) / static_cast<double>(order.size());
      epoch_loss.value += w * l.value;
      epoch_loss.policy += w * l.policy;
      epoch_loss.failure += w * l.failure;
      epoch_loss.regularization += w * l.regularization;
      epoch_loss.total += w * l.total;
    }
    history.push_back(epoch_loss);
  }
  return history;
}

}  // namespace czero
