#pragma once

// The two example pipelines (ERP speller, CSP motor imagery), their offline
// batch evaluation and the online runner fed by a Replayer.
//
// Offline and online paths share every processing step. Filtering is causal
// in both, so a score computed online equals the offline score of the same
// epoch, whatever the chunking.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcitk/data.hpp"
#include "bcitk/features.hpp"
#include "bcitk/ml.hpp"
#include "bcitk/online.hpp"
#include "bcitk/sigproc.hpp"

namespace bcitk {

enum class FeatureKind {
  JumpingMeans,    // ERP: means over time intervals
  CspLogVariance,  // motor imagery: log-variance of CSP components
};

struct PipelineConfig {
  FeatureKind kind = FeatureKind::JumpingMeans;
  Band band{0.5, 30.0};
  int filter_order = 4;
  double subsample_hz = 120.0;  // 0 keeps the input rate
  /// Epoch window relative to the marker. For epoched input to the CSP
  /// pipeline this is the crop window on the epoch time axis.
  Interval epoch{0.0, 400.0};
  std::vector<Interval> intervals;  // jumping means
  std::size_t csp_per_side = 3;
  bool shrinkage = true;
  /// Intensification blocks per speller character; 0 disables character decisions.
  std::size_t repetitions = 15;
};

/// Band-pass 0.5-30 Hz order 4, 120 Hz, eight 50 ms means over [0, 400) ms,
/// shrinkage LDA, 15 repetitions.
PipelineConfig erp_defaults();
/// Band-pass 8-30 Hz order 5, no subsampling, window [500, 3000) ms, 3 CSP
/// filters per side, log-variance, LDA without shrinkage.
PipelineConfig csp_defaults();

/// Throws ConfigMismatch.
void validate_config(const PipelineConfig& cfg);
/// Also checks the band and subsampling factor against the input rate.
void validate_config(const PipelineConfig& cfg, double fs_hz);

Json config_to_json(const PipelineConfig& cfg);
/// Missing keys keep the defaults of the kind. Throws ConfigMismatch.
PipelineConfig config_from_json(const Json& j);

struct TrainedPipeline {
  PipelineConfig config;
  double fs_hz = 0.0;  // input rate the pipeline was trained for
  LabelAxis channels;
  LdaModel lda;
  std::optional<CspModel> csp;
};

Json pipeline_to_json(const TrainedPipeline& p);
/// Throws ConfigMismatch.
TrainedPipeline pipeline_from_json(const Json& j);

/// Causal band-pass from rest followed by subsampling.
Data preprocess(const Data& data, const PipelineConfig& cfg);

/// Stimulus markers relabelled "target" / "nontarget" according to the
/// character announced by the preceding "trial:<char>" marker; other markers
/// are dropped.
MarkerList erp_target_markers(const MarkerList& markers);

/// Trains on a continuous speller recording. With a shuffle seed the epoch
/// labels are permuted before training (chance-level control).
TrainedPipeline train_erp_pipeline(const Data& recording, const PipelineConfig& cfg,
                                   std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Trains on epoched two-class data.
TrainedPipeline train_csp_pipeline(const Data& epochs, const PipelineConfig& cfg);

/// Feature vectors of preprocessed epochs. Throws ConfigMismatch when the
/// features do not fit the classifier.
FeatureVectors pipeline_features(const Data& epo, const TrainedPipeline& p);

struct Decision {
  enum class Kind { Epoch, Character };
  Kind kind = Kind::Epoch;
  double time_ms = 0.0;  // marker time (last intensification for characters)
  std::string label;     // predicted class, or the selected character
  std::string stimulus;  // marker label of the epoch; empty for characters
  std::vector<double> scores;  // one score, or 6 row + 6 column sums
  double latency_ms = 0.0;
};

/// Batch processing of a whole continuous recording.
std::vector<Decision> offline_decisions(const Data& recording, const TrainedPipeline& p);

struct OnlineOptions {
  /// Run the replay on a producer thread connected by a queue.
  bool threaded = false;
};

/// Streams the replay through block buffer, stateful filter, subsampling and
/// ring buffer, classifies every epoch once its window is complete and
/// groups speller characters. Throws ConfigMismatch.
std::vector<Decision> run_online(const ReplaySource& src, const TrainedPipeline& p, const OnlineOptions& options = {});

struct ErpReport {
  std::size_t letters = 0;
  std::size_t correct = 0;
  double letter_accuracy = 0.0;
  std::string expected;
  std::string predicted;
  double gamma = 0.0;
};

/// Letter accuracy on a test recording whose "trial:<char>" markers carry the
/// true characters.
ErpReport evaluate_erp(const TrainedPipeline& p, const Data& test);
ErpReport pipeline_erp(const Data& train, const Data& test, const PipelineConfig& cfg,
                       std::optional<std::uint64_t> shuffle_seed = std::nullopt);

struct CspReport {
  std::size_t train_epochs = 0;
  std::size_t test_epochs = 0;
  double train_accuracy = 0.0;
  double accuracy = 0.0;
};

double evaluate_csp(const TrainedPipeline& p, const Data& test_epochs);
CspReport pipeline_csp(const Data& train_epochs, const Data& test_epochs, const PipelineConfig& cfg);

Json decision_to_json(const Decision& d);

}  // namespace bcitk
