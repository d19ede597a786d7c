#include "bcitk/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "bcitk/error.hpp"
#include "bcitk/kernels.hpp"

namespace bcitk {

namespace {

void require_epoched(const Data& epo, const char* op) {
  if (epo.rank() != 3 || epo.names()[0] != kClass || epo.names()[1] != kTime || epo.names()[2] != kChannel ||
      epo.is_numeric_axis(0)) {
    fail(Errc::DimensionMismatch, std::string(op) + " expects epoched (class, time, channel) data");
  }
}

// Index of each epoch's class in class_order(epo), -1 when absent.
std::vector<int> epoch_classes(const Data& epo, const std::vector<std::string>& order) {
  if (epo.rank() == 0 || epo.is_numeric_axis(0)) {
    fail(Errc::DimensionMismatch, "first axis must hold class labels");
  }
  std::vector<int> idx;
  for (const auto& label : epo.label_axis(0)) {
    auto it = std::find(order.begin(), order.end(), label);
    idx.push_back(it == order.end() ? -1 : static_cast<int>(it - order.begin()));
  }
  return idx;
}

Data drop_axis(const Data& data, std::size_t dim, std::vector<double> values) {
  DataParts parts = data.parts();
  parts.shape.erase(parts.shape.begin() + static_cast<std::ptrdiff_t>(dim));
  parts.axes.erase(parts.axes.begin() + static_cast<std::ptrdiff_t>(dim));
  parts.names.erase(parts.names.begin() + static_cast<std::ptrdiff_t>(dim));
  parts.units.erase(parts.units.begin() + static_cast<std::ptrdiff_t>(dim));
  parts.values = std::move(values);
  parts.markers.reset();
  return make_data(std::move(parts));
}

std::vector<Eigen::MatrixXd> covariances(const Data& epo) {
  const std::size_t ne = epo.shape()[0], nt = epo.shape()[1], nc = epo.shape()[2];
  if (nt < 2) fail(Errc::TooFewSamples, "covariance needs at least two samples per epoch");
  std::vector<double> flat(ne * nc * nc);
  kernels::omp::epoch_covariances(epo.values(), ne, nt, nc, flat);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(ne);
  const auto n = static_cast<Eigen::Index>(nc);
  for (std::size_t e = 0; e < ne; ++e) {
    out.emplace_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data() + e * nc * nc, n, n));
  }
  return out;
}

struct Whitening {
  Eigen::MatrixXd P;  // P^T C P == I
};

// Returns nothing when C is rank deficient at 1e-10 relative to its largest eigenvalue.
std::optional<Whitening> whiten(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const auto& d = es.eigenvalues();
  const double max = d.maxCoeff();
  if (!(max > 0.0) || d.minCoeff() < 1e-10 * max) return std::nullopt;
  return Whitening{es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal()};
}

// Eigenvectors of the symmetric m, whitened back by P, in descending
// eigenvalue order (stable on ties).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> sorted_filters(const Eigen::MatrixXd& P, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const auto n = sym.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
  Eigen::MatrixXd W(P.rows(), n);
  Eigen::VectorXd lambdas(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    Eigen::VectorXd w = P * es.eigenvectors().col(src);
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w(arg) < 0.0) w = -w;
    W.col(k) = w;
    lambdas(k) = ev(src);
  }
  return {std::move(W), std::move(lambdas)};
}

std::string coordinate_label(const Axis& axis, std::size_t i) {
  if (const auto* labels = std::get_if<LabelAxis>(&axis)) return (*labels)[i];
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::get<NumericAxis>(axis)[i]);
  return buf;
}

}  // namespace

Data classwise_average(const Data& epo) {
  const auto order = class_order(epo);
  const auto cls = epoch_classes(epo, order);
  const std::size_t stride = epo.stride(0);
  const auto vals = epo.values();

  std::vector<double> out;
  LabelAxis names;
  for (std::size_t c = 0; c < order.size(); ++c) {
    std::vector<double> sum(stride, 0.0);
    std::size_t count = 0;
    for (std::size_t e = 0; e < cls.size(); ++e) {
      if (cls[e] != static_cast<int>(c)) continue;
      for (std::size_t k = 0; k < stride; ++k) sum[k] += vals[e * stride + k];
      ++count;
    }
    if (count == 0) continue;
    for (double& v : sum) v /= static_cast<double>(count);
    out.insert(out.end(), sum.begin(), sum.end());
    names.push_back(order[c]);
  }
  if (names.empty()) fail(Errc::NoEpochs, "no epochs of any class");
  Shape shape = epo.shape();
  shape[0] = names.size();
  Data avg = with_replaced(epo, std::move(shape), std::move(out), {{0, names, {}, {}}});
  return with_attribute(avg, "class_names", names);
}

Data jumping_means(const Data& epo, std::span<const Interval> intervals) {
  const std::size_t dim = axis_index(epo, kTime);
  const auto& time = epo.numeric_axis(dim);
  if (intervals.empty()) fail(Errc::EmptyIntervalWindow, "no intervals given");

  std::vector<std::vector<std::size_t>> members;
  NumericAxis mids;
  for (const auto& iv : intervals) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < time.size(); ++t) {
      if (iv.contains(time[t])) idx.push_back(t);
    }
    if (idx.empty()) {
      fail(Errc::EmptyIntervalWindow, "interval [" + std::to_string(iv.start_ms) + ", " + std::to_string(iv.end_ms) +
                                          ") holds no samples");
    }
    members.push_back(std::move(idx));
    mids.push_back(0.5 * (iv.start_ms + iv.end_ms));
  }
  for (std::size_t i = 1; i < mids.size(); ++i) {
    if (!(mids[i] > mids[i - 1])) fail(Errc::InvalidArgument, "interval midpoints must increase");
  }

  std::size_t outer = 1, inner = epo.stride(dim);
  for (std::size_t d = 0; d < dim; ++d) outer *= epo.shape()[d];
  const std::size_t nt = time.size();
  const auto vals = epo.values();
  std::vector<double> out(outer * members.size() * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      for (std::size_t i = 0; i < inner; ++i) {
        double sum = 0.0;
        for (std::size_t t : members[j]) sum += vals[(o * nt + t) * inner + i];
        out[(o * members.size() + j) * inner + i] = sum / static_cast<double>(members[j].size());
      }
    }
  }
  Shape shape = epo.shape();
  shape[dim] = members.size();
  return with_replaced(epo, std::move(shape), std::move(out), {{dim, std::move(mids), {}, {}}});
}

SignedR2 signed_r_squared(const Data& epo) {
  const auto order = class_order(epo);
  if (order.size() != 2) fail(Errc::NotTwoClasses, "signed r^2 needs two classes, got " + std::to_string(order.size()));
  const auto cls = epoch_classes(epo, order);
  for (int c = 0; c < 2; ++c) {
    if (std::count(cls.begin(), cls.end(), c) < 2) {
      fail(Errc::NotTwoClasses, "class '" + order[static_cast<std::size_t>(c)] + "' has fewer than two epochs");
    }
  }
  // Kernel convention: label 0 is the positive class.
  const std::size_t points = epo.stride(0);
  std::vector<double> out(points);
  const std::size_t zero = kernels::omp::signed_r2(epo.values(), cls, points, out);
  return {drop_axis(epo, 0, std::move(out)), zero};
}

CspModel train_csp(const Data& epo) {
  require_epoched(epo, "train_csp");
  const auto order = class_order(epo);
  if (order.size() != 2) fail(Errc::NotTwoClasses, "CSP needs two classes, got " + std::to_string(order.size()));
  const auto cls = epoch_classes(epo, order);
  const auto covs = covariances(epo);
  const auto n = static_cast<Eigen::Index>(epo.shape()[2]);

  Eigen::MatrixXd sigma[2] = {Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  std::size_t count[2] = {0, 0};
  for (std::size_t e = 0; e < covs.size(); ++e) {
    if (cls[e] < 0) continue;
    const double tr = covs[e].trace();
    if (!(tr > 0.0)) continue;  // flat epoch carries no spatial information
    sigma[cls[e]] += covs[e] / tr;
    ++count[cls[e]];
  }
  for (int c = 0; c < 2; ++c) {
    if (count[c] == 0) fail(Errc::NotTwoClasses, "class '" + order[static_cast<std::size_t>(c)] + "' has no epochs");
    sigma[c] /= static_cast<double>(count[c]);
  }
  const Eigen::MatrixXd composite = sigma[0] + sigma[1];
  const auto white = whiten(composite);
  if (!white) fail(Errc::SingularCompositeCovariance, "composite class covariance is rank deficient");

  auto [W, lambdas] = sorted_filters(white->P, white->P.transpose() * sigma[0] * white->P);
  CspModel model;
  model.A = composite * W;
  model.W = std::move(W);
  model.lambdas = lambdas.cwiseMax(0.0).cwiseMin(1.0);
  model.channels = epo.label_axis(2);
  model.class_names = order;
  return model;
}

std::vector<std::size_t> csp_extreme_columns(std::size_t n_channels, std::size_t per_side) {
  if (2 * per_side > n_channels) {
    fail(Errc::ColumnOutOfRange, std::to_string(per_side) + " filters per side need at least " +
                                     std::to_string(2 * per_side) + " channels");
  }
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < per_side; ++k) cols.push_back(k);
  for (std::size_t k = n_channels - per_side; k < n_channels; ++k) cols.push_back(k);
  return cols;
}

Data apply_csp(const Data& epo, const CspModel& model, std::span<const std::size_t> columns) {
  const std::size_t dim = axis_index(epo, kChannel);
  const std::size_t nc = epo.shape()[dim];
  if (nc != static_cast<std::size_t>(model.W.rows())) {
    fail(Errc::ChannelMismatch, "data has " + std::to_string(nc) + " channels, filters expect " +
                                    std::to_string(model.W.rows()));
  }
  if (!model.channels.empty() && epo.label_axis(dim) != model.channels) {
    fail(Errc::ChannelMismatch, "channel names differ from the ones the filters were trained on");
  }
  if (dim + 1 != epo.rank()) fail(Errc::DimensionMismatch, "channel axis must be the last axis");
  LabelAxis names;
  for (std::size_t c : columns) {
    if (c >= nc) fail(Errc::ColumnOutOfRange, "filter column " + std::to_string(c) + " of " + std::to_string(nc));
    names.push_back("csp" + std::to_string(c));
  }
  const std::size_t rows = epo.size() / nc;
  const auto vals = epo.values();
  std::vector<double> out(rows * columns.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(columns[k]);
      double acc = 0.0;
      for (std::size_t c = 0; c < nc; ++c) acc += vals[r * nc + c] * model.W(static_cast<Eigen::Index>(c), col);
      out[r * columns.size() + k] = acc;
    }
  }
  Shape shape = epo.shape();
  shape[dim] = columns.size();
  return with_replaced(epo, std::move(shape), std::move(out), {{dim, std::move(names), "component", "#"}});
}

SpocModel train_spoc(const Data& epo, std::span<const double> z) {
  require_epoched(epo, "train_spoc");
  const std::size_t ne = epo.shape()[0];
  if (z.size() != ne) {
    fail(Errc::LengthMismatch, std::to_string(z.size()) + " target values for " + std::to_string(ne) + " epochs");
  }
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(ne);
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ne);
  if (!(var > 0.0)) fail(Errc::ZeroVariance, "target variable is constant");
  const double sd = std::sqrt(var);

  const auto covs = covariances(epo);
  const auto n = static_cast<Eigen::Index>(epo.shape()[2]);
  Eigen::MatrixXd cmean = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd cz = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < ne; ++e) {
    cmean += covs[e];
    cz += ((z[e] - mean) / sd) * covs[e];
  }
  cmean /= static_cast<double>(ne);
  cz /= static_cast<double>(ne);
  const auto white = whiten(cmean);
  if (!white) fail(Errc::SingularMeanCovariance, "mean epoch covariance is rank deficient");

  auto [W, lambdas] = sorted_filters(white->P, white->P.transpose() * cz * white->P);
  SpocModel model;
  model.A = cmean * W;
  model.W = std::move(W);
  model.lambdas = std::move(lambdas);
  model.channels = epo.label_axis(2);
  return model;
}

Data log_variance(const Data& epo) {
  const std::size_t dim = axis_index(epo, kTime);
  const std::size_t nt = epo.shape()[dim];
  if (nt < 2) fail(Errc::TooFewSamples, "variance needs at least two samples");
  std::size_t outer = 1;
  for (std::size_t d = 0; d < dim; ++d) outer *= epo.shape()[d];
  const std::size_t inner = epo.stride(dim);
  const auto vals = epo.values();
  std::vector<double> out(outer * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      double mean = 0.0;
      for (std::size_t t = 0; t < nt; ++t) mean += vals[(o * nt + t) * inner + i];
      mean /= static_cast<double>(nt);
      double ss = 0.0;
      for (std::size_t t = 0; t < nt; ++t) {
        const double d = vals[(o * nt + t) * inner + i] - mean;
        ss += d * d;
      }
      out[o * inner + i] = std::log(ss / static_cast<double>(nt - 1));
    }
  }
  return drop_axis(epo, dim, std::move(out));
}

FeatureVectors create_feature_vectors(const Data& data) {
  if (data.rank() == 0) fail(Errc::DimensionMismatch, "need an observation axis");
  for (double v : data.values()) {
    if (!std::isfinite(v)) fail(Errc::NonFiniteValues, "feature data contains NaN or Inf");
  }
  const std::size_t n_obs = data.shape()[0];
  const std::size_t n_feat = data.stride(0);

  LabelAxis names(n_feat);
  for (std::size_t f = 0; f < n_feat; ++f) {
    std::size_t rem = f;
    std::string label;
    for (std::size_t d = data.rank(); d-- > 1;) {
      const std::size_t i = rem % data.shape()[d];
      rem /= data.shape()[d];
      label = coordinate_label(data.axes()[d], i) + (label.empty() ? "" : "|" + label);
    }
    names[f] = label.empty() ? "value" : label;
  }

  FeatureVectors fv{make_data(DataParts{{n_obs, n_feat},
                                        std::vector<double>(data.values().begin(), data.values().end()),
                                        {data.axes()[0], std::move(names)},
                                        {data.names()[0], "feature"},
                                        {data.units()[0], "#"},
                                        data.extra(),
                                        std::nullopt}),
                    {},
                    {}};
  if (!data.is_numeric_axis(0)) {
    fv.class_names = class_order(data);
    fv.labels = epoch_classes(data, fv.class_names);
  } else {
    fv.labels.assign(n_obs, -1);
  }
  return fv;
}

}  // namespace bcitk
