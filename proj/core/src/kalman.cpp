#include "czero/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace czero {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

}  // namespace

GaussianBelief::GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size())
    throw ContractViolation("GaussianBelief: covariance shape does not match mean");
  if (mean_.size() == 0) return;
  // Tolerances are relative to the largest entry so meter-scale and unit-scale states behave alike.
  const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
    throw ContractViolation("GaussianBelief: covariance is not symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kSymmetryTolerance * scale)
      throw ContractViolation("GaussianBelief: covariance is not positive semidefinite");
  }
}

GaussianBelief kf_predict(const GaussianBelief& b, const LinearGaussianModel& m) {
  Eigen::VectorXd mean = m.transition * b.mean() + m.offset;
  Eigen::MatrixXd cov = m.transition * b.covariance() * m.transition.transpose() + m.process_noise;
  cov = (0.5 * (cov + cov.transpose())).eval();
  return GaussianBelief(std::move(mean), std::move(cov));
}

GaussianBelief kf_update(const GaussianBelief& b, const LinearGaussianModel& m, const Eigen::VectorXd& z) {
  const GaussianBelief predicted = kf_predict(b, m);
  const Eigen::MatrixXd& P = predicted.covariance();
  const Eigen::MatrixXd& H = m.observation;
  const Eigen::MatrixXd S = H * P * H.transpose() + m.observation_noise;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const auto d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * scale)
    throw FilterError("kalman update: singular innovation covariance");

  // K = P H^T S^{-1}
  const Eigen::MatrixXd K = ldlt.solve(H * P).transpose();
  Eigen::VectorXd mean = predicted.mean() + K * (z - H * predicted.mean());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  const Eigen::MatrixXd IKH = I - K * H;
  Eigen::MatrixXd cov = IKH * P * IKH.transpose() + K * m.observation_noise * K.transpose();
  cov = (0.5 * (cov + cov.transpose())).eval();
  return GaussianBelief(std::move(mean), std::move(cov));
}

Eigen::VectorXd sample_state(const GaussianBelief& b, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.covariance());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(b.dim());
  for (Eigen::Index i = 0; i < b.dim(); ++i) z[i] = normal(rng);
  const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return b.mean() + eig.eigenvectors() * scale.cwiseProduct(z);
}

std::vector<double> summarize(const GaussianBelief& b) {
  const auto n = b.dim();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + n * n));
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(b.mean()[i]);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out.push_back(b.covariance()(r, c));
  return out;
}

}  // namespace czero
