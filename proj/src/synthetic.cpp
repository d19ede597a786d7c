#include "bcitk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bcitk/error.hpp"
#include "bcitk/io.hpp"
#include "bcitk/online.hpp"

namespace bcitk {

namespace {

using Rng = std::mt19937_64;

// x[n] = phi x[n-1] + e[n], scaled to unit variance.
class Ar1 {
 public:
  explicit Ar1(double phi) : phi_(phi), scale_(std::sqrt(1.0 - phi * phi)) {}
  double next(Rng& rng, std::normal_distribution<double>& g) {
    x_ = phi_ * x_ + scale_ * g(rng);
    return x_;
  }

 private:
  double phi_, scale_, x_ = 0.0;
};

// Narrow-band AR(2) resonator, scaled to unit variance.
class Resonator {
 public:
  Resonator(double freq_hz, double fs_hz, double r)
      : a1_(2.0 * r * std::cos(2.0 * std::numbers::pi * freq_hz / fs_hz)), a2_(-r * r) {
    const double gamma0 = (1.0 - a2_) / ((1.0 + a2_) * ((1.0 - a2_) * (1.0 - a2_) - a1_ * a1_));
    scale_ = 1.0 / std::sqrt(gamma0);
  }
  double next(Rng& rng, std::normal_distribution<double>& g) {
    const double x = a1_ * x1_ + a2_ * x2_ + scale_ * g(rng);
    x2_ = x1_;
    x1_ = x;
    return x;
  }

 private:
  double a1_, a2_, scale_ = 1.0, x1_ = 0.0, x2_ = 0.0;
};

double gauss(double t, double mu, double sigma) { return std::exp(-(t - mu) * (t - mu) / (2.0 * sigma * sigma)); }

}  // namespace

Data synth_p300(const P300SynthConfig& cfg) {
  if (cfg.characters == 0 && cfg.text.empty()) fail(Errc::InvalidArgument, "nothing to spell");
  if (!(cfg.fs_hz > 0.0) || !(cfg.isi_ms > 0.0) || cfg.repetitions == 0) {
    fail(Errc::InvalidArgument, "sampling rate, ISI and repetitions must be positive");
  }
  Rng rng(cfg.seed);
  std::normal_distribution<double> g(0.0, 1.0);

  std::string text = cfg.text;
  if (text.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, kSpellerMatrix.size() - 1);
    for (std::size_t i = 0; i < cfg.characters; ++i) text.push_back(kSpellerMatrix[pick(rng)]);
  }
  for (char c : text) {
    if (kSpellerMatrix.find(c) == std::string_view::npos) {
      fail(Errc::InvalidArgument, std::string("character '") + c + "' is not in the speller matrix");
    }
  }

  const LabelAxis channels{"Fz", "FC1", "FC2", "C3", "Cz", "C4", "CP1", "CP2",
                           "P7", "P3",  "Pz",  "P4", "P8", "PO7", "Oz", "PO8"};
  const std::size_t nc = channels.size();
  const auto layout = standard_1020_layout();
  const auto pz = *layout.find("Pz");
  const auto oz = *layout.find("Oz");
  std::vector<double> w_p300(nc), w_visual(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto e = *layout.find(channels[c]);
    w_p300[c] = gauss(std::hypot(e.x - pz.x, e.y - pz.y), 0.0, 0.4);
    w_visual[c] = gauss(std::hypot(e.x - oz.x, e.y - oz.y), 0.0, 0.35);
  }

  const double ms_per_sample = 1000.0 / cfg.fs_hz;
  auto sample_at = [&](double t_ms) { return static_cast<std::size_t>(std::llround(t_ms * cfg.fs_hz / 1000.0)); };
  const double lead_ms = 1000.0, tail_ms = 1000.0;
  const double char_ms = cfg.pause_ms + 12.0 * static_cast<double>(cfg.repetitions) * cfg.isi_ms;
  const std::size_t n = sample_at(lead_ms + static_cast<double>(text.size()) * char_ms + tail_ms);

  // Background: shared slow sources with random smooth topographies, per-channel
  // drift and white sensor noise; roughly unit variance per channel.
  constexpr std::size_t kShared = 4;
  std::vector<double> mix(nc * kShared);
  {
    Rng subject(cfg.subject);
    for (double& m : mix) m = g(subject);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    double norm = 0.0;
    for (std::size_t k = 0; k < kShared; ++k) norm += mix[c * kShared + k] * mix[c * kShared + k];
    for (std::size_t k = 0; k < kShared; ++k) mix[c * kShared + k] /= std::sqrt(norm);
  }
  std::vector<Ar1> shared(kShared, Ar1(0.98));
  std::vector<Ar1> local(nc, Ar1(0.9));
  std::vector<double> values(n * nc);
  std::vector<double> s(kShared);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < kShared; ++k) s[k] = shared[k].next(rng, g);
    for (std::size_t c = 0; c < nc; ++c) {
      double v = 0.0;
      for (std::size_t k = 0; k < kShared; ++k) v += mix[c * kShared + k] * s[k];
      values[t * nc + c] = 0.6 * v + 0.6 * local[c].next(rng, g) + 0.5 * g(rng);
    }
  }

  const std::size_t resp_len = sample_at(800.0);
  std::vector<double> p300(resp_len), visual(resp_len);
  for (std::size_t j = 0; j < resp_len; ++j) {
    const double t = static_cast<double>(j) * ms_per_sample;
    p300[j] = gauss(t, 300.0, 60.0);
    visual[j] = -gauss(t, 140.0, 30.0) + 0.5 * gauss(t, 220.0, 35.0);
  }

  std::vector<Marker> markers;
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::vector<int> order(12);
  for (std::size_t ch = 0; ch < text.size(); ++ch) {
    const double t0 = lead_ms + static_cast<double>(ch) * char_ms;
    markers.push_back({static_cast<double>(sample_at(t0)) * ms_per_sample, std::string("trial:") + text[ch]});
    const auto pos = kSpellerMatrix.find(text[ch]);
    const int row = static_cast<int>(pos / 6), col = static_cast<int>(pos % 6);
    std::size_t flash = 0;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      for (int i = 0; i < 12; ++i) order[static_cast<std::size_t>(i)] = i;
      std::shuffle(order.begin(), order.end(), rng);
      for (int stim : order) {
        const std::size_t s0 = sample_at(t0 + cfg.pause_ms + static_cast<double>(flash++) * cfg.isi_ms);
        const bool is_row = stim < 6;
        const int idx = is_row ? stim : stim - 6;
        markers.push_back({static_cast<double>(s0) * ms_per_sample, (is_row ? "R" : "C") + std::to_string(idx)});
        const bool target = is_row ? idx == row : idx == col;
        const double amp = target ? cfg.snr * jitter(rng) : 0.0;
        for (std::size_t j = 0; j < resp_len && s0 + j < n; ++j) {
          for (std::size_t c = 0; c < nc; ++c) {
            values[(s0 + j) * nc + c] += amp * w_p300[c] * p300[j] + 0.5 * w_visual[c] * visual[j];
          }
        }
      }
    }
  }

  NumericAxis time(n);
  for (std::size_t t = 0; t < n; ++t) time[t] = static_cast<double>(t) * ms_per_sample;
  DataParts parts{{n, nc},
                  std::move(values),
                  {std::move(time), channels},
                  {std::string(kTime), std::string(kChannel)},
                  {"ms", "#"},
                  Json{{"fs", cfg.fs_hz}, {"paradigm", "p300"}, {"text", text}},
                  MarkerList(std::move(markers))};
  return make_data(std::move(parts));
}

Data synth_motor_imagery(const MotorImagerySynthConfig& cfg) {
  if (cfg.trials < 2 || !(cfg.fs_hz > 0.0) || !(cfg.trial_ms > 0.0) || !(cfg.modulation >= 1.0)) {
    fail(Errc::InvalidArgument, "need at least two trials, positive rate and duration, modulation >= 1");
  }
  Rng rng(cfg.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr std::size_t kChannels = 64;
  constexpr std::size_t kTask = 2, kBackground = 8, kSources = kTask + kBackground;
  const auto nt = static_cast<std::size_t>(std::llround(cfg.trial_ms * cfg.fs_hz / 1000.0));

  Rng subject(cfg.subject);
  std::vector<double> mixing(kChannels * kSources);
  for (double& m : mixing) m = g(subject);

  std::vector<std::string> labels(cfg.trials);
  for (std::size_t i = 0; i < cfg.trials; ++i) labels[i] = i % 2 == 0 ? "finger" : "tongue";
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_real_distribution<double> band(8.0, 25.0);
  std::vector<double> bg_freq(kBackground / 2);
  for (double& f : bg_freq) f = band(subject);

  const double active = std::sqrt(cfg.modulation);
  std::vector<double> values(cfg.trials * nt * kChannels);
  std::vector<double> src(kSources);
  for (std::size_t e = 0; e < cfg.trials; ++e) {
    std::vector<Resonator> task(kTask, Resonator(11.0, cfg.fs_hz, 0.96));
    std::vector<Ar1> slow(kBackground / 2, Ar1(0.95));
    std::vector<Resonator> rhythm;
    for (double f : bg_freq) rhythm.emplace_back(f, cfg.fs_hz, 0.95);
    for (int warm = 0; warm < 200; ++warm) {
      for (auto& r : task) r.next(rng, g);
      for (auto& a : slow) a.next(rng, g);
      for (auto& r : rhythm) r.next(rng, g);
    }
    const std::size_t hot = labels[e] == "finger" ? 0 : 1;
    std::vector<double> gain(kSources);
    for (std::size_t k = 0; k < kSources; ++k) {
      gain[k] = k < kTask ? (k == hot ? active : 1.0) : std::exp(0.2 * g(rng));
    }
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t k = 0; k < kTask; ++k) src[k] = task[k].next(rng, g);
      for (std::size_t k = 0; k < slow.size(); ++k) src[kTask + k] = slow[k].next(rng, g);
      for (std::size_t k = 0; k < rhythm.size(); ++k) src[kTask + slow.size() + k] = rhythm[k].next(rng, g);
      double* row = values.data() + (e * nt + t) * kChannels;
      for (std::size_t c = 0; c < kChannels; ++c) {
        double v = 0.0;
        for (std::size_t k = 0; k < kSources; ++k) v += mixing[c * kSources + k] * gain[k] * src[k];
        row[c] = v + 0.5 * g(rng);
      }
    }
  }

  NumericAxis time(nt);
  for (std::size_t t = 0; t < nt; ++t) time[t] = static_cast<double>(t) * 1000.0 / cfg.fs_hz;
  LabelAxis channels;
  for (std::size_t c = 0; c < kChannels; ++c) channels.push_back("E" + std::to_string(c + 1));
  DataParts parts{{cfg.trials, nt, kChannels},
                  std::move(values),
                  {LabelAxis(labels), std::move(time), std::move(channels)},
                  {std::string(kClass), std::string(kTime), std::string(kChannel)},
                  {"#", "ms", "#"},
                  Json{{"fs", cfg.fs_hz}, {"class_names", {"finger", "tongue"}}, {"paradigm", "motor_imagery"}},
                  std::nullopt};
  return make_data(std::move(parts));
}

}  // namespace bcitk
