#pragma once

// Feature extraction on epoched (class, time, channel) data: class averages,
// jumping means, signed r^2 maps, CSP and SPoC spatial filters, and flattening
// into feature vectors for the classifiers.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcitk/data.hpp"

namespace bcitk {

/// Mean over the epochs of each class; class axis holds the class names in
/// canonical order (classes without epochs are left out). Throws NoEpochs.
Data classwise_average(const Data& epo);

/// Per epoch and channel, the mean over the samples whose time lies in each
/// interval. The time axis is replaced by the interval midpoints, which must
/// increase. Throws EmptyIntervalWindow.
Data jumping_means(const Data& epo, std::span<const Interval> intervals);

struct SignedR2 {
  Data r2;  // epo without its class axis
  /// Points whose pooled variance was zero; their value is 0.
  std::size_t zero_variance_points = 0;
};

/// sign(r) r^2 of the point-biserial correlation per point, with the first
/// class in canonical order counted positive and the population standard
/// deviation over both classes. Throws NotTwoClasses.
SignedR2 signed_r_squared(const Data& epo);

struct CspModel {
  Eigen::MatrixXd W;        // channels x channels, column k is filter k
  Eigen::MatrixXd A;        // patterns, (W^-1)^T
  Eigen::VectorXd lambdas;  // descending, in [0, 1]
  LabelAxis channels;
  std::vector<std::string> class_names;
};

/// Solves Sigma1 w = lambda (Sigma1 + Sigma2) w by whitening the composite
/// covariance. Class covariances average the trace-normalised covariance of
/// every epoch. Each column is signed so its largest-magnitude entry is
/// positive. Throws NotTwoClasses / SingularCompositeCovariance.
CspModel train_csp(const Data& epo);

/// Projects the channel axis through the selected columns of W; the channel
/// axis becomes a "component" axis. Throws ChannelMismatch / ColumnOutOfRange.
Data apply_csp(const Data& epo, const CspModel& model, std::span<const std::size_t> columns);

/// The first and last `per_side` columns: [0, .., k-1, n-k, .., n-1].
std::vector<std::size_t> csp_extreme_columns(std::size_t n_channels, std::size_t per_side);

struct SpocModel {
  Eigen::MatrixXd W;  // columns satisfy w^T Cmean w == 1
  Eigen::MatrixXd A;
  Eigen::VectorXd lambdas;  // descending
  LabelAxis channels;
};

/// SPoC_lambda: Cz w = lambda Cmean w with the epoch covariances C_e,
/// Cmean = mean C_e and Cz = mean z_e C_e for standardised z.
/// Throws LengthMismatch / ZeroVariance / SingularMeanCovariance.
SpocModel train_spoc(const Data& epo, std::span<const double> z);

/// log of the sample variance along time; the time axis is removed.
Data log_variance(const Data& epo);

struct FeatureVectors {
  Data values;  // (observation, feature)
  /// Index into class_names per observation, -1 for labels outside it.
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t observations() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return values.shape()[1]; }
};

/// Flattens every axis after the first (row-major) into a "feature" axis whose
/// labels join the source coordinates with '|'. Throws NonFiniteValues.
FeatureVectors create_feature_vectors(const Data& data);

}  // namespace bcitk
