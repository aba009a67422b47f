#pragma once

#include <vector>

#include <Eigen/Dense>

#include "czero/types.hpp"

namespace czero {

/// Multivariate normal belief.
class GaussianBelief {
 public:
  GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
};

/// x' = A x + offset + w, w ~ N(0, Q);  z = H x' + v, v ~ N(0, R).
/// `offset` carries the control input (B u) and any affine drift.
struct LinearGaussianModel {
  Eigen::MatrixXd transition;
  Eigen::VectorXd offset;
  Eigen::MatrixXd process_noise;
  Eigen::MatrixXd observation;
  Eigen::MatrixXd observation_noise;
};

/// Predict step only.
GaussianBelief kf_predict(const GaussianBelief& b, const LinearGaussianModel& model);

/// Predict-correct step of the linear Kalman filter. The posterior covariance
/// uses the Joseph form and is re-symmetrized. Throws FilterError when the
/// innovation covariance is singular.
GaussianBelief kf_update(const GaussianBelief& b, const LinearGaussianModel& model, const Eigen::VectorXd& z);

/// Draws x ~ N(mean, covariance); handles positive-semidefinite covariances.
Eigen::VectorXd sample_state(const GaussianBelief& b, Rng& rng);

/// Mean followed by the row-major flattened covariance (n + n*n entries).
std::vector<double> summarize(const GaussianBelief& b);

}  // namespace czero
