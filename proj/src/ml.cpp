#include "bcitk/ml.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "bcitk/error.hpp"

namespace bcitk {

ShrinkageEstimate shrinkage_covariance(const Eigen::MatrixXd& X, std::optional<double> gamma) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2) fail(Errc::TooFewObservations, "covariance needs at least two observations");
  if (d < 1) fail(Errc::InvalidArgument, "no features");
  if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0)) fail(Errc::InvalidArgument, "gamma must lie in [0, 1]");

  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mean;
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd S = (Xc.transpose() * Xc) / (nd - 1.0);
  S = 0.5 * (S + S.transpose());
  const double nu = S.trace() / static_cast<double>(d);

  ShrinkageEstimate est;
  est.nu = nu;
  if (gamma) {
    est.gamma = *gamma;
  } else {
    // Sum over (i, j) of the unbiased variance over k of z_kij = xc_ki xc_kj.
    const Eigen::MatrixXd X2 = Xc.array().square().matrix();
    const Eigen::MatrixXd zbar = S * ((nd - 1.0) / nd);
    const double sum_z2 = (X2.transpose() * X2).sum();
    const double var_sum = (sum_z2 - nd * zbar.array().square().sum()) / (nd - 1.0);
    Eigen::MatrixXd target_gap = S;
    target_gap.diagonal().array() -= nu;
    const double den = target_gap.array().square().sum();
    const double g = den > 0.0 ? nd / ((nd - 1.0) * (nd - 1.0)) * var_sum / den : 1.0;
    est.gamma = std::clamp(g, 0.0, 1.0);
  }

  if (est.gamma == 0.0) {
    est.sigma = std::move(S);
  } else if (est.gamma == 1.0) {
    est.sigma = nu * Eigen::MatrixXd::Identity(d, d);
  } else {
    est.sigma = (1.0 - est.gamma) * S;
    est.sigma.diagonal().array() += est.gamma * nu;
  }
  return est;
}

LdaModel train_lda(const FeatureVectors& fv, const LdaOptions& options) {
  if (fv.class_names.size() != 2) {
    fail(Errc::NotTwoClasses, "LDA needs two classes, got " + std::to_string(fv.class_names.size()));
  }
  const auto d = static_cast<Eigen::Index>(fv.features());
  const auto vals = fv.values.values();
  std::vector<std::size_t> rows[2];
  for (std::size_t i = 0; i < fv.labels.size(); ++i) {
    if (fv.labels[i] == 0 || fv.labels[i] == 1) rows[fv.labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (rows[c].size() < 2) {
      fail(Errc::NotTwoClasses, "class '" + fv.class_names[static_cast<std::size_t>(c)] +
                                    "' has fewer than two observations");
    }
  }

  Eigen::VectorXd mu[2];
  const auto n = static_cast<Eigen::Index>(rows[0].size() + rows[1].size());
  Eigen::MatrixXd Xc(n, d);
  Eigen::Index r = 0;
  for (int c = 0; c < 2; ++c) {
    mu[c] = Eigen::VectorXd::Zero(d);
    for (std::size_t i : rows[c]) {
      for (Eigen::Index f = 0; f < d; ++f) mu[c](f) += vals[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(f)];
    }
    mu[c] /= static_cast<double>(rows[c].size());
    for (std::size_t i : rows[c]) {
      for (Eigen::Index f = 0; f < d; ++f) {
        Xc(r, f) = vals[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(f)] - mu[c](f);
      }
      ++r;
    }
  }

  const double nd = static_cast<double>(n);
  Eigen::MatrixXd sigma;
  double gamma = 0.0;
  if (options.shrinkage) {
    auto est = shrinkage_covariance(Xc, options.gamma);
    gamma = est.gamma;
    sigma = est.sigma * ((nd - 1.0) / (nd - 2.0));
  } else {
    if (n < 3) fail(Errc::TooFewObservations, "pooled covariance needs at least three observations");
    sigma = (Xc.transpose() * Xc) / (nd - 2.0);
    sigma = 0.5 * (sigma + sigma.transpose());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const double max = es.eigenvalues().maxCoeff();
  if (!(max > 0.0) || es.eigenvalues().minCoeff() <= 1e-10 * max) {
    fail(Errc::SingularCovariance, "pooled covariance is singular; enable shrinkage");
  }
  const Eigen::VectorXd w = sigma.ldlt().solve(mu[0] - mu[1]);

  LdaModel model;
  model.w.assign(w.data(), w.data() + w.size());
  model.b = -w.dot(mu[0] + mu[1]) / 2.0;
  model.gamma = gamma;
  model.class_names = fv.class_names;
  for (double v : model.w) {
    if (!std::isfinite(v)) fail(Errc::SingularCovariance, "weights are not finite");
  }
  return model;
}

LdaModel train_lda(const FeatureVectors& fv, bool use_shrinkage) {
  return train_lda(fv, LdaOptions{use_shrinkage, std::nullopt});
}

std::vector<double> apply_lda(const LdaModel& model, const FeatureVectors& fv) {
  const std::size_t d = fv.features();
  if (d != model.w.size()) {
    fail(Errc::FeatureCountMismatch, "model has " + std::to_string(model.w.size()) + " weights, data " +
                                         std::to_string(d) + " features");
  }
  const auto vals = fv.values.values();
  std::vector<double> scores(fv.observations());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double acc = 0.0;
    for (std::size_t f = 0; f < d; ++f) acc += model.w[f] * vals[i * d + f];
    scores[i] = acc + model.b;
  }
  return scores;
}

std::size_t predicted_class(double score) noexcept { return score >= 0.0 ? 0 : 1; }

double lda_accuracy(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) fail(Errc::LengthMismatch, "scores and labels differ in length");
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) continue;
    ++total;
    if (predicted_class(scores[i]) == static_cast<std::size_t>(labels[i])) ++hit;
  }
  if (total == 0) fail(Errc::NoEpochs, "no labelled observations");
  return static_cast<double>(hit) / static_cast<double>(total);
}

Json lda_to_json(const LdaModel& model) {
  return Json{{"w", model.w}, {"b", model.b}, {"gamma", model.gamma}, {"class_names", model.class_names}};
}

LdaModel lda_from_json(const Json& j) {
  try {
    LdaModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (m.class_names.size() != 2) fail(Errc::InvalidArgument, "model must name two classes");
    if (!(m.gamma >= 0.0 && m.gamma <= 1.0)) fail(Errc::InvalidArgument, "gamma outside [0, 1]");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("malformed LDA model: ") + e.what());
  }
}

}  // namespace bcitk
