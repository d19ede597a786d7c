#include "bcitk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "bcitk/buffers.hpp"
#include "bcitk/error.hpp"

namespace bcitk {

namespace {

using Clock = std::chrono::steady_clock;

bool is_trial_marker(const std::string& label) { return label.rfind("trial:", 0) == 0 && label.size() == 7; }

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::size_t subsample_factor(const PipelineConfig& cfg, double fs) {
  if (cfg.subsample_hz <= 0.0) return 1;
  return static_cast<std::size_t>(std::llround(fs / cfg.subsample_hz));
}

// Marker labels that open an epoch, each mapped to itself.
ClassDefs trigger_defs(const TrainedPipeline& p) {
  ClassDefs defs;
  if (p.config.kind == FeatureKind::JumpingMeans) {
    for (const char* kind : {"R", "C"}) {
      for (int i = 0; i < 6; ++i) {
        const std::string label = kind + std::to_string(i);
        defs.emplace_back(label, label);
      }
    }
  } else {
    for (const auto& c : p.lda.class_names) defs.emplace_back(c, c);
  }
  return defs;
}

bool is_trigger(const ClassDefs& defs, const std::string& label) {
  return std::any_of(defs.begin(), defs.end(), [&](const auto& d) { return d.first == label; });
}

// Turns epoch scores into decisions; shared by the offline and online paths so
// both group speller characters identically.
class DecisionBuilder {
 public:
  explicit DecisionBuilder(const TrainedPipeline& p) : p_(p) {}

  void trial() { pending_.clear(); }

  void epoch(const Marker& m, double score, double latency_ms, std::vector<Decision>& out) {
    Decision d;
    d.kind = Decision::Kind::Epoch;
    d.time_ms = m.time_ms;
    d.label = p_.lda.class_names[predicted_class(score)];
    d.stimulus = m.label;
    d.scores = {score};
    d.latency_ms = latency_ms;
    out.push_back(std::move(d));

    const std::size_t reps = p_.config.repetitions;
    if (p_.config.kind != FeatureKind::JumpingMeans || reps == 0 || !parse_stimulus(m.label)) return;
    pending_.push_back({m.label, score});
    if (pending_.size() < 12 * reps) return;
    try {
      const auto r = speller_decision(pending_, reps);
      Decision c;
      c.kind = Decision::Kind::Character;
      c.time_ms = m.time_ms;
      c.label = std::string(1, r.character);
      c.scores.assign(r.row_sums.begin(), r.row_sums.end());
      c.scores.insert(c.scores.end(), r.col_sums.begin(), r.col_sums.end());
      c.latency_ms = latency_ms;
      out.push_back(std::move(c));
    } catch (const Error& e) {
      if (e.code() != Errc::IncompleteSequence) throw;
    }
    pending_.clear();
  }

 private:
  const TrainedPipeline& p_;
  std::vector<StimulusScore> pending_;
};

void check_input(const Data& data, const TrainedPipeline& p) {
  const double fs = sampling_rate(data);
  if (std::abs(fs - p.fs_hz) > 1e-9 * p.fs_hz) {
    fail(Errc::ConfigMismatch, "pipeline trained for " + std::to_string(p.fs_hz) + " Hz, data is " +
                                   std::to_string(fs) + " Hz");
  }
  if (data.label_axis(axis_index(data, kChannel)) != p.channels) {
    fail(Errc::ConfigMismatch, "channels differ from the ones the pipeline was trained on");
  }
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
      fail(Errc::ConfigMismatch, "ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

// Labels of fv re-indexed against the model's class order.
std::vector<int> labels_against(const FeatureVectors& fv, const std::vector<std::string>& classes) {
  std::vector<int> out;
  for (int l : fv.labels) {
    if (l < 0) {
      out.push_back(-1);
      continue;
    }
    const auto& name = fv.class_names[static_cast<std::size_t>(l)];
    auto it = std::find(classes.begin(), classes.end(), name);
    out.push_back(it == classes.end() ? -1 : static_cast<int>(it - classes.begin()));
  }
  return out;
}

}  // namespace

PipelineConfig erp_defaults() {
  PipelineConfig cfg;
  cfg.kind = FeatureKind::JumpingMeans;
  cfg.band = {0.5, 30.0};
  cfg.filter_order = 4;
  cfg.subsample_hz = 120.0;
  cfg.epoch = {0.0, 400.0};
  for (int k = 0; k < 8; ++k) cfg.intervals.push_back({50.0 * k, 50.0 * (k + 1)});
  cfg.shrinkage = true;
  cfg.repetitions = 15;
  return cfg;
}

PipelineConfig csp_defaults() {
  PipelineConfig cfg;
  cfg.kind = FeatureKind::CspLogVariance;
  cfg.band = {8.0, 30.0};
  cfg.filter_order = 5;
  cfg.subsample_hz = 0.0;
  cfg.epoch = {500.0, 3000.0};
  cfg.csp_per_side = 3;
  cfg.shrinkage = false;
  cfg.repetitions = 0;
  return cfg;
}

void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.band.low_hz > 0.0 && cfg.band.low_hz < cfg.band.high_hz)) {
    fail(Errc::ConfigMismatch, "band needs 0 < low < high");
  }
  if (cfg.filter_order < 1) fail(Errc::ConfigMismatch, "filter order must be at least 1");
  if (!(cfg.subsample_hz >= 0.0)) fail(Errc::ConfigMismatch, "subsample rate must be >= 0");
  if (!(cfg.epoch.end_ms > cfg.epoch.start_ms)) fail(Errc::ConfigMismatch, "epoch window must have end > start");
  if (cfg.subsample_hz > 0.0 && !(cfg.band.high_hz < cfg.subsample_hz / 2.0)) {
    fail(Errc::ConfigMismatch, "band edge " + std::to_string(cfg.band.high_hz) + " Hz aliases at " +
                                   std::to_string(cfg.subsample_hz) + " Hz");
  }
  if (cfg.kind == FeatureKind::JumpingMeans) {
    if (cfg.intervals.empty()) fail(Errc::ConfigMismatch, "jumping means need at least one interval");
    double last_mid = -std::numeric_limits<double>::infinity();
    for (const auto& iv : cfg.intervals) {
      if (!(iv.end_ms > iv.start_ms) || iv.start_ms < cfg.epoch.start_ms || iv.end_ms > cfg.epoch.end_ms) {
        fail(Errc::ConfigMismatch, "feature intervals must be non-empty and inside the epoch window");
      }
      const double mid = 0.5 * (iv.start_ms + iv.end_ms);
      if (!(mid > last_mid)) fail(Errc::ConfigMismatch, "feature intervals must be sorted");
      last_mid = mid;
    }
  } else if (cfg.csp_per_side == 0) {
    fail(Errc::ConfigMismatch, "need at least one CSP filter per side");
  }
}

void validate_config(const PipelineConfig& cfg, double fs_hz) {
  validate_config(cfg);
  if (!(cfg.band.high_hz < fs_hz / 2.0)) {
    fail(Errc::ConfigMismatch, "band edge " + std::to_string(cfg.band.high_hz) + " Hz is not below Nyquist of " +
                                   std::to_string(fs_hz) + " Hz");
  }
  if (cfg.subsample_hz > 0.0) {
    const double ratio = fs_hz / cfg.subsample_hz;
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      fail(Errc::ConfigMismatch, std::to_string(fs_hz) + " Hz does not subsample to " +
                                     std::to_string(cfg.subsample_hz) + " Hz by an integer factor");
    }
  }
}

Json config_to_json(const PipelineConfig& cfg) {
  Json j;
  j["kind"] = cfg.kind == FeatureKind::JumpingMeans ? "erp" : "csp";
  j["band_hz"] = {cfg.band.low_hz, cfg.band.high_hz};
  j["filter_order"] = cfg.filter_order;
  j["subsample_hz"] = cfg.subsample_hz;
  j["epoch_ms"] = {cfg.epoch.start_ms, cfg.epoch.end_ms};
  Json iv = Json::array();
  for (const auto& i : cfg.intervals) iv.push_back({i.start_ms, i.end_ms});
  j["intervals_ms"] = std::move(iv);
  j["csp_per_side"] = cfg.csp_per_side;
  j["shrinkage"] = cfg.shrinkage;
  j["repetitions"] = cfg.repetitions;
  return j;
}

PipelineConfig config_from_json(const Json& j) {
  try {
    if (!j.is_object()) fail(Errc::ConfigMismatch, "configuration must be a JSON object");
    const std::string kind = j.value("kind", "erp");
    if (kind != "erp" && kind != "csp") fail(Errc::ConfigMismatch, "kind must be 'erp' or 'csp'");
    PipelineConfig cfg = kind == "erp" ? erp_defaults() : csp_defaults();
    auto pair_of = [](const Json& v) {
      if (!v.is_array() || v.size() != 2) fail(Errc::ConfigMismatch, "expected a [start, end] pair");
      return std::make_pair(v[0].get<double>(), v[1].get<double>());
    };
    if (j.contains("band_hz")) {
      auto [lo, hi] = pair_of(j["band_hz"]);
      cfg.band = {lo, hi};
    }
    if (j.contains("epoch_ms")) {
      auto [a, b] = pair_of(j["epoch_ms"]);
      cfg.epoch = {a, b};
    }
    if (j.contains("intervals_ms")) {
      cfg.intervals.clear();
      for (const auto& v : j["intervals_ms"]) {
        auto [a, b] = pair_of(v);
        cfg.intervals.push_back({a, b});
      }
    }
    cfg.filter_order = j.value("filter_order", cfg.filter_order);
    cfg.subsample_hz = j.value("subsample_hz", cfg.subsample_hz);
    cfg.csp_per_side = j.value("csp_per_side", cfg.csp_per_side);
    cfg.shrinkage = j.value("shrinkage", cfg.shrinkage);
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    validate_config(cfg);
    return cfg;
  } catch (const Json::exception& e) {
    fail(Errc::ConfigMismatch, std::string("malformed configuration: ") + e.what());
  }
}

Json pipeline_to_json(const TrainedPipeline& p) {
  Json j;
  j["config"] = config_to_json(p.config);
  j["fs_hz"] = p.fs_hz;
  j["channels"] = p.channels;
  j["lda"] = lda_to_json(p.lda);
  if (p.csp) {
    const auto& lambdas = p.csp->lambdas;
    j["csp"] = {{"W", matrix_to_json(p.csp->W)},
                {"A", matrix_to_json(p.csp->A)},
                {"lambdas", std::vector<double>(lambdas.data(), lambdas.data() + lambdas.size())},
                {"channels", p.csp->channels},
                {"class_names", p.csp->class_names}};
  } else {
    j["csp"] = nullptr;
  }
  return j;
}

TrainedPipeline pipeline_from_json(const Json& j) {
  try {
    TrainedPipeline p;
    p.config = config_from_json(j.at("config"));
    p.fs_hz = j.at("fs_hz").get<double>();
    p.channels = j.at("channels").get<LabelAxis>();
    try {
      p.lda = lda_from_json(j.at("lda"));
    } catch (const Error& e) {
      fail(Errc::ConfigMismatch, e.what());
    }
    if (const auto& c = j.at("csp"); !c.is_null()) {
      CspModel m;
      m.W = matrix_from_json(c.at("W"));
      m.A = matrix_from_json(c.at("A"));
      const auto l = c.at("lambdas").get<std::vector<double>>();
      m.lambdas = Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
      m.channels = c.at("channels").get<LabelAxis>();
      m.class_names = c.at("class_names").get<std::vector<std::string>>();
      p.csp = std::move(m);
    }
    if (p.config.kind == FeatureKind::CspLogVariance && !p.csp) {
      fail(Errc::ConfigMismatch, "CSP pipeline without spatial filters");
    }
    validate_config(p.config, p.fs_hz);
    return p;
  } catch (const Json::exception& e) {
    fail(Errc::ConfigMismatch, std::string("malformed pipeline: ") + e.what());
  }
}

Data preprocess(const Data& data, const PipelineConfig& cfg) {
  const double fs = sampling_rate(data);
  validate_config(cfg, fs);
  const auto coeffs = design_bandpass(cfg.band.low_hz, cfg.band.high_hz, fs, cfg.filter_order);
  Data out = with_attribute(apply_filter(data, coeffs).first, "fs", fs);
  if (subsample_factor(cfg, fs) > 1) out = subsample(out, cfg.subsample_hz);
  return out;
}

MarkerList erp_target_markers(const MarkerList& markers) {
  MarkerList out;
  std::optional<std::pair<std::size_t, std::size_t>> target;
  for (const auto& m : markers) {
    if (is_trial_marker(m.label)) {
      target = speller_position(m.label.back());
      continue;
    }
    const auto stim = parse_stimulus(m.label);
    if (!stim || !target) continue;
    const bool hit = stim->first ? stim->second == target->first : stim->second == target->second;
    out.add(m.time_ms, hit ? "target" : "nontarget");
  }
  return out;
}

FeatureVectors pipeline_features(const Data& epo, const TrainedPipeline& p) {
  FeatureVectors fv = [&] {
    if (p.config.kind == FeatureKind::JumpingMeans) {
      return create_feature_vectors(jumping_means(epo, p.config.intervals));
    }
    if (!p.csp) fail(Errc::ConfigMismatch, "CSP pipeline without spatial filters");
    const auto cols = csp_extreme_columns(static_cast<std::size_t>(p.csp->W.cols()), p.config.csp_per_side);
    return create_feature_vectors(log_variance(apply_csp(epo, *p.csp, cols)));
  }();
  if (!p.lda.w.empty() && fv.features() != p.lda.w.size()) {
    fail(Errc::ConfigMismatch, std::to_string(fv.features()) + " features but the classifier expects " +
                                   std::to_string(p.lda.w.size()));
  }
  return fv;
}

TrainedPipeline train_erp_pipeline(const Data& recording, const PipelineConfig& cfg,
                                   std::optional<std::uint64_t> shuffle_seed) {
  if (cfg.kind != FeatureKind::JumpingMeans) fail(Errc::ConfigMismatch, "ERP training needs a jumping-means config");
  if (!recording.markers()) fail(Errc::ConfigMismatch, "recording has no markers");
  TrainedPipeline p;
  p.config = cfg;
  p.fs_hz = sampling_rate(recording);
  p.channels = recording.label_axis(axis_index(recording, kChannel));

  const Data pre = preprocess(recording, cfg);
  Data epo = segment(pre, erp_target_markers(*recording.markers()), {{"target", "target"}, {"nontarget", "nontarget"}},
                     cfg.epoch);
  if (shuffle_seed) {
    LabelAxis labels = epo.label_axis(0);
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    epo = with_replaced(epo, epo.shape(), std::vector<double>(epo.values().begin(), epo.values().end()),
                        {{0, std::move(labels), {}, {}}});
  }
  const auto fv = pipeline_features(epo, p);
  p.lda = train_lda(fv, cfg.shrinkage);
  return p;
}

TrainedPipeline train_csp_pipeline(const Data& epochs, const PipelineConfig& cfg) {
  if (cfg.kind != FeatureKind::CspLogVariance) fail(Errc::ConfigMismatch, "CSP training needs a CSP config");
  TrainedPipeline p;
  p.config = cfg;
  p.fs_hz = sampling_rate(epochs);
  p.channels = epochs.label_axis(axis_index(epochs, kChannel));
  const Data pre = select_time(preprocess(epochs, cfg), cfg.epoch);
  p.csp = train_csp(pre);
  const auto fv = pipeline_features(pre, p);
  p.lda = train_lda(fv, cfg.shrinkage);
  return p;
}

std::vector<Decision> offline_decisions(const Data& recording, const TrainedPipeline& p) {
  check_input(recording, p);
  std::vector<Decision> out;
  if (!recording.markers() || recording.markers()->empty()) return out;
  const auto defs = trigger_defs(p);
  const Data pre = preprocess(recording, p.config);
  const MarkerList& markers = *recording.markers();

  std::vector<Marker> triggers;
  std::vector<std::size_t> trigger_of;  // marker index -> trigger index
  for (const auto& m : markers) {
    trigger_of.push_back(triggers.size());
    if (is_trigger(defs, m.label)) triggers.push_back(m);
  }
  const MarkerList trig(triggers);
  const auto windows = epoch_windows(pre, trig, defs, p.config.epoch);
  std::vector<double> scores;
  if (!windows.empty()) scores = apply_lda(p.lda, pipeline_features(segment(pre, trig, defs, p.config.epoch), p));
  std::vector<std::optional<double>> score_of(triggers.size());
  for (std::size_t e = 0; e < windows.size(); ++e) score_of[windows[e].marker_index] = scores[e];

  DecisionBuilder builder(p);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& m = markers[i];
    if (p.config.kind == FeatureKind::JumpingMeans && is_trial_marker(m.label)) {
      builder.trial();
    } else if (is_trigger(defs, m.label)) {
      if (const auto& s = score_of[trigger_of[i]]) builder.epoch(m, *s, 0.0, out);
    }
  }
  return out;
}

namespace {

// Ordered, unbounded hand-off between the replay thread and the pipeline.
class ChunkQueue {
 public:
  void push(std::optional<Chunk> c) {
    {
      std::lock_guard lock(mu_);
      q_.push_back(std::move(c));
    }
    cv_.notify_one();
  }
  std::optional<Chunk> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !q_.empty(); });
    auto c = std::move(q_.front());
    q_.pop_front();
    return c;
  }
  void set_error(std::exception_ptr e) {
    std::lock_guard lock(mu_);
    error_ = std::move(e);
  }
  std::exception_ptr error() {
    std::lock_guard lock(mu_);
    return error_;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::optional<Chunk>> q_;
  std::exception_ptr error_;
};

class OnlineRun {
 public:
  OnlineRun(const TrainedPipeline& p, double fs, std::size_t block_samples)
      : p_(p),
        defs_(trigger_defs(p)),
        coeffs_(design_bandpass(p.config.band.low_hz, p.config.band.high_hz, fs, p.config.filter_order)),
        factor_(subsample_factor(p.config, fs)),
        fs_out_(fs / static_cast<double>(factor_)),
        n_epoch_(epoch_length(fs_out_, p.config.epoch)),
        blocks_(factor_),
        ring_(ring_capacity_ms(p.config, fs, fs_out_, block_samples, factor_)),
        builder_(p) {}

  void feed(const Chunk& chunk, Clock::time_point arrival, std::vector<Decision>& out) {
    Data tagged = with_markers(chunk.data, chunk.markers);
    auto [blocks, drained] = block_append_drain(std::move(blocks_), tagged);
    blocks_ = std::move(blocks);
    process(drained, arrival, false, out);
  }

  void finish(Clock::time_point arrival, std::vector<Decision>& out) {
    if (blocks_.residue()) {
      auto [blocks, rest] = block_flush(std::move(blocks_));
      blocks_ = std::move(blocks);
      process(rest, arrival, true, out);
    } else {
      drain_pending(arrival, true, out);
    }
  }

 private:
  static double ring_capacity_ms(const PipelineConfig& cfg, double fs, double fs_out, std::size_t block,
                                 std::size_t factor) {
    const double span = cfg.epoch.end_ms - std::min(cfg.epoch.start_ms, 0.0);
    return span + static_cast<double>(block + factor) * 1000.0 / fs + 4.0 * 1000.0 / fs_out + 100.0;
  }

  void process(const Data& raw, Clock::time_point arrival, bool end_of_stream, std::vector<Decision>& out) {
    if (raw.markers()) {
      for (const auto& m : *raw.markers()) pending_.push_back(m);
    }
    if (raw.shape()[0] > 0) {
      auto [filtered, state] = apply_filter(raw, coeffs_, state_);
      state_ = std::move(state);
      Data sub = factor_ > 1 ? subsample(filtered, fs_out_) : with_attribute(filtered, "fs", fs_out_);
      sub = with_markers(sub, std::nullopt);
      if (sub.shape()[0] > 0) {
        last_time_ = sub.numeric_axis(0).back();
        ring_ = ring_append(std::move(ring_), sub, MarkerList{});
        have_data_ = true;
      }
    }
    drain_pending(arrival, end_of_stream, out);
  }

  void drain_pending(Clock::time_point arrival, bool end_of_stream, std::vector<Decision>& out) {
    const double dt = 1000.0 / fs_out_;
    while (!pending_.empty()) {
      const Marker m = pending_.front();
      if (p_.config.kind == FeatureKind::JumpingMeans && is_trial_marker(m.label)) {
        builder_.trial();
        pending_.pop_front();
        continue;
      }
      if (!is_trigger(defs_, m.label)) {
        pending_.pop_front();
        continue;
      }
      const double t0 = m.time_ms + p_.config.epoch.start_ms;
      if (!have_data_) {
        if (end_of_stream) {
          pending_.pop_front();
          continue;
        }
        break;
      }
      if (!end_of_stream && last_time_ < t0 + (static_cast<double>(n_epoch_) - 1.5) * dt) break;

      const Data window = ring_window(ring_);
      const MarkerList one(std::vector<Marker>{m});
      if (epoch_windows(window, one, defs_, p_.config.epoch).empty()) {
        const bool never = t0 < window.numeric_axis(0).front() - kMarkerSnapMs;
        if (never || end_of_stream) {
          pending_.pop_front();
          continue;
        }
        break;
      }
      const auto fv = pipeline_features(segment(window, one, defs_, p_.config.epoch), p_);
      const double score = apply_lda(p_.lda, fv).front();
      builder_.epoch(m, score, elapsed_ms(arrival), out);
      pending_.pop_front();
    }
  }

  const TrainedPipeline& p_;
  ClassDefs defs_;
  IirCoefficients coeffs_;
  std::size_t factor_;
  double fs_out_;
  std::size_t n_epoch_;
  BlockBuffer blocks_;
  RingBuffer ring_;
  std::optional<FilterState> state_;
  std::deque<Marker> pending_;
  double last_time_ = 0.0;
  bool have_data_ = false;
  DecisionBuilder builder_;
};

}  // namespace

std::vector<Decision> run_online(const ReplaySource& src, const TrainedPipeline& p, const OnlineOptions& options) {
  check_input(src.source, p);
  validate_config(p.config, p.fs_hz);
  if (src.block_samples == 0) fail(Errc::ConfigMismatch, "block size must be at least one sample");
  OnlineRun run(p, p.fs_hz, src.block_samples);
  std::vector<Decision> out;

  if (!options.threaded) {
    Replayer replay(src);
    while (auto chunk = replay.next()) run.feed(*chunk, Clock::now(), out);
    run.finish(Clock::now(), out);
    return out;
  }

  ChunkQueue queue;
  std::thread producer([&] {
    try {
      Replayer replay(src);
      while (auto chunk = replay.next()) queue.push(std::move(chunk));
    } catch (...) {
      queue.set_error(std::current_exception());
    }
    queue.push(std::nullopt);
  });
  try {
    while (auto chunk = queue.pop()) run.feed(*chunk, Clock::now(), out);
  } catch (...) {
    // Let the producer run out before propagating.
    while (queue.pop()) {
    }
    producer.join();
    throw;
  }
  producer.join();
  if (auto e = queue.error()) std::rethrow_exception(e);
  run.finish(Clock::now(), out);
  return out;
}

ErpReport evaluate_erp(const TrainedPipeline& p, const Data& test) {
  ErpReport r;
  r.gamma = p.lda.gamma;
  if (test.markers()) {
    for (const auto& m : *test.markers()) {
      if (is_trial_marker(m.label)) r.expected.push_back(m.label.back());
    }
  }
  for (const auto& d : offline_decisions(test, p)) {
    if (d.kind == Decision::Kind::Character) r.predicted += d.label;
  }
  r.letters = r.expected.size();
  for (std::size_t i = 0; i < std::min(r.letters, r.predicted.size()); ++i) {
    if (r.expected[i] == r.predicted[i]) ++r.correct;
  }
  r.letter_accuracy = r.letters == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.letters);
  return r;
}

ErpReport pipeline_erp(const Data& train, const Data& test, const PipelineConfig& cfg,
                       std::optional<std::uint64_t> shuffle_seed) {
  return evaluate_erp(train_erp_pipeline(train, cfg, shuffle_seed), test);
}

double evaluate_csp(const TrainedPipeline& p, const Data& test_epochs) {
  check_input(test_epochs, p);
  const Data pre = select_time(preprocess(test_epochs, p.config), p.config.epoch);
  const auto fv = pipeline_features(pre, p);
  return lda_accuracy(apply_lda(p.lda, fv), labels_against(fv, p.lda.class_names));
}

CspReport pipeline_csp(const Data& train_epochs, const Data& test_epochs, const PipelineConfig& cfg) {
  const auto p = train_csp_pipeline(train_epochs, cfg);
  CspReport r;
  r.train_epochs = train_epochs.shape()[0];
  r.test_epochs = test_epochs.shape()[0];
  r.train_accuracy = evaluate_csp(p, train_epochs);
  r.accuracy = evaluate_csp(p, test_epochs);
  return r;
}

Json decision_to_json(const Decision& d) {
  return Json{{"kind", d.kind == Decision::Kind::Epoch ? "epoch" : "character"},
              {"time_ms", d.time_ms},
              {"label", d.label},
              {"stimulus", d.stimulus},
              {"scores", d.scores},
              {"latency_ms", d.latency_ms}};
}

}  // namespace bcitk
