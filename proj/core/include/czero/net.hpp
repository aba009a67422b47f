#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "czero/types.hpp"

namespace czero {

/// One training tuple (b~_t, pi_t, g_t, e_t).
struct EpisodeSample {
  std::vector<double> summary;
  std::vector<double> tree_policy;
  double ret = 0.0;
  int failure = 0;
};

struct NetShape {
  std::size_t input_size = 2;
  std::size_t depth = 2;
  std::size_t width = 64;
  std::size_t num_actions = 3;

  bool operator==(const NetShape&) const = default;
};

/// Affine map between raw returns and the value head's training scale.
struct ValueNorm {
  double mean = 0.0;
  double std = 1.0;
};

enum class ValueLoss { Squared, Absolute };

struct TrainSpec {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  ValueLoss value_loss = ValueLoss::Squared;

  void validate() const;
};

struct LossBreakdown {
  double value = 0.0;
  double policy = 0.0;
  double failure = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] inside logs.
inline constexpr double kProbClamp = 1e-7;

/// Fully connected trunk (ReLU) feeding three heads: a softmax policy over
/// actions, a linear value head followed by a denormalization affine, and a
/// sigmoid failure-probability head.
///
/// Parameters live in one flat vector. Layout, in order: for each trunk layer
/// W (rows = out, row-major) then b; then policy W, b; value W, b; failure W, b.
/// Inputs are standardized with a per-feature affine fitted alongside the
/// value normalization.
class TripleHeadNet {
 public:
  struct Output {
    std::vector<double> policy;
    double value = 0.0;
    double value_raw = 0.0;
    double failure = 0.5;
  };

  /// Zero-parameter net of the given shape.
  explicit TripleHeadNet(NetShape shape);

  /// Fan-in scaled uniform trunk initialization; heads start at zero so the
  /// first forward pass yields a uniform policy, neutral value, and p_fail = 0.5.
  TripleHeadNet(NetShape shape, Rng& rng);

  const NetShape& shape() const noexcept { return shape_; }
  std::size_t num_parameters() const noexcept { return params_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  ValueNorm value_norm;
  std::vector<double> input_mean;
  std::vector<double> input_std;

  /// Adam state.
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::size_t adam_step = 0;

  Output forward(std::span<const double> summary) const;

  double parameter_norm_squared() const noexcept;

  // Flat offsets of each block; exposed for tests and tooling.
  struct LayerView {
    std::size_t weights = 0;
    std::size_t bias = 0;
    std::size_t in = 0;
    std::size_t out = 0;
  };
  const std::vector<LayerView>& trunk_layers() const noexcept { return trunk_; }
  const LayerView& policy_head() const noexcept { return policy_; }
  const LayerView& value_head() const noexcept { return value_; }
  const LayerView& failure_head() const noexcept { return failure_; }

 private:
  void build_layout();

  NetShape shape_;
  std::vector<double> params_;
  std::vector<LayerView> trunk_;
  LayerView policy_;
  LayerView value_;
  LayerView failure_;
};

/// Normalized value target: clamp((g - mean) / std, -1, 1).
double normalize_return(double g, const ValueNorm& norm) noexcept;

/// Mean over the batch of L_V + L_P + L_F, plus lambda * ||theta||^2.
/// The value term compares the raw head output with the normalized return.
LossBreakdown loss_cz(const TripleHeadNet& net, std::span<const EpisodeSample> batch, const TrainSpec& spec);

/// Same loss, plus the exact gradient with respect to every parameter,
/// written into `grad` (resized to num_parameters()).
LossBreakdown loss_and_gradient(const TripleHeadNet& net, std::span<const EpisodeSample> batch, const TrainSpec& spec,
                                std::vector<double>& grad);

/// One bias-corrected Adam update; increments net.adam_step.
void adam_step(TripleHeadNet& net, std::span<const double> grad, const TrainSpec& spec);

/// Refits the value and input normalizations from the dataset, then runs
/// `spec.epochs` shuffled minibatch epochs. Returns the mean loss per epoch.
std::vector<LossBreakdown> fit(TripleHeadNet& net, std::span<const EpisodeSample> dataset, const TrainSpec& spec,
                               Rng& rng);

/// Recomputes value_norm and input standardization from a dataset.
void refit_normalization(TripleHeadNet& net, std::span<const EpisodeSample> dataset);

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Io, Version, Corrupt };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Versioned little-endian binary format: magic, version, shape, value norm,
/// input normalization, parameters, Adam state, trailing FNV-1a checksum.
void save_checkpoint(const TripleHeadNet& net, const std::filesystem::path& path);
TripleHeadNet load_checkpoint(const std::filesystem::path& path);

std::vector<unsigned char> serialize(const TripleHeadNet& net);
TripleHeadNet deserialize(std::span<const unsigned char> bytes);

}  // namespace czero
