#pragma once

// Binary linear discriminant analysis, optionally with an analytically
// shrunk covariance.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcitk/data.hpp"
#include "bcitk/features.hpp"

namespace bcitk {

struct ShrinkageEstimate {
  Eigen::MatrixXd sigma;  // (1 - gamma) S + gamma nu I
  double gamma = 0.0;
  double nu = 0.0;  // trace(S) / d
};

/// Shrinkage towards nu I of the sample covariance (denominator n - 1) of the
/// rows of X. Without an override gamma is the Schaefer-Strimmer estimate,
/// clipped to [0, 1]. gamma == 0 and gamma == 1 return S and nu I exactly.
/// Throws TooFewObservations / InvalidArgument.
ShrinkageEstimate shrinkage_covariance(const Eigen::MatrixXd& X, std::optional<double> gamma = std::nullopt);

struct LdaModel {
  std::vector<double> w;
  double b = 0.0;
  double gamma = 0.0;  // 0 without shrinkage
  /// class_names[0] is the class with positive scores.
  std::vector<std::string> class_names;
};

struct LdaOptions {
  bool shrinkage = false;
  std::optional<double> gamma;  // fixed intensity instead of the estimate
};

/// w = Sigma^-1 (mu1 - mu2), b = -w^T (mu1 + mu2) / 2, with Sigma the pooled
/// within-class covariance (denominator n - 2). Observations labelled -1 are
/// ignored. Throws NotTwoClasses / SingularCovariance.
LdaModel train_lda(const FeatureVectors& fv, const LdaOptions& options);
LdaModel train_lda(const FeatureVectors& fv, bool use_shrinkage);

/// w^T x + b per observation. Throws FeatureCountMismatch.
std::vector<double> apply_lda(const LdaModel& model, const FeatureVectors& fv);

/// Scores >= 0 go to class_names[0].
std::size_t predicted_class(double score) noexcept;

/// Fraction of labelled observations whose predicted class matches.
double lda_accuracy(const std::vector<double>& scores, const std::vector<int>& labels);

Json lda_to_json(const LdaModel& model);
/// Throws InvalidArgument on a malformed object.
LdaModel lda_from_json(const Json& j);

}  // namespace bcitk
