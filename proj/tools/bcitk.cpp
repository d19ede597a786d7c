// Command-line front end. Reports go to stdout as JSON; errors go to stderr.
// Exit status: 0 success, 2 invalid input or arguments, 1 anything else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcitk/bcitk.hpp"

namespace fs = std::filesystem;
using namespace bcitk;

namespace {

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

Json shape_json(const Data& d) {
  Json j;
  j["shape"] = d.shape();
  j["names"] = d.names();
  if (d.extra().contains("fs")) j["fs_hz"] = d.extra()["fs"];
  j["markers"] = d.markers() ? d.markers()->size() : 0;
  return j;
}

Json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(Errc::IoFailure, "cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(Errc::ConfigMismatch, p.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const fs::path& p) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  if (!out) fail(Errc::IoFailure, "cannot write " + p.string());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ElectrodeLayout pick_layout(const std::string& layout_file, const std::string& grid, const LabelAxis& channels) {
  if (!layout_file.empty()) return read_layout(layout_file);
  if (!grid.empty()) {
    std::size_t rows = 0, cols = 0;
    if (std::sscanf(grid.c_str(), "%zux%zu", &rows, &cols) != 2) fail(Errc::InvalidArgument, "--grid wants ROWSxCOLS");
    return grid_layout(channels, rows, cols);
  }
  return standard_1020_layout();
}

PipelineConfig load_config(const std::string& path, FeatureKind kind) {
  if (path.empty()) return kind == FeatureKind::JumpingMeans ? erp_defaults() : csp_defaults();
  Json j = read_json_file(path);
  if (!j.contains("kind")) j["kind"] = kind == FeatureKind::JumpingMeans ? "erp" : "csp";
  PipelineConfig cfg = config_from_json(j);
  if (cfg.kind != kind) fail(Errc::ConfigMismatch, "configuration is for the other pipeline kind");
  return cfg;
}

Json decisions_json(const std::vector<Decision>& decisions, bool include_epochs) {
  Json list = Json::array();
  std::string spelled;
  double max_latency = 0.0;
  std::size_t epochs = 0;
  for (const auto& d : decisions) {
    max_latency = std::max(max_latency, d.latency_ms);
    if (d.kind == Decision::Kind::Character) spelled += d.label;
    if (d.kind == Decision::Kind::Epoch) ++epochs;
    if (include_epochs || d.kind == Decision::Kind::Character) list.push_back(decision_to_json(d));
  }
  return {{"epochs", epochs}, {"spelled", spelled}, {"max_latency_ms", max_latency}, {"decisions", std::move(list)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BCI signal processing toolkit"};
  app.require_subcommand(1);

  // convert
  std::string signal_path, marker_path, out_path, in_path, model_path, config_path, channel_list;
  double fs_hz = 0.0;
  auto* convert = app.add_subcommand("convert", "Whitespace-separated ASCII matrix (+ markers) to a container");
  convert->add_option("signal", signal_path, "One row per sample")->required()->check(CLI::ExistingFile);
  convert->add_option("out", out_path, "Output container directory")->required();
  convert->add_option("--markers", marker_path, "Tab-separated 'time_ms<TAB>label' file")->check(CLI::ExistingFile);
  convert->add_option("--fs", fs_hz, "Sampling rate in Hz")->required()->check(CLI::PositiveNumber);
  convert->add_option("--channels", channel_list, "Comma-separated channel names");

  // filter
  std::vector<double> band;
  int order = 4;
  bool zero_phase = false;
  double subsample_hz = 0.0;
  auto* filter = app.add_subcommand("filter", "Butterworth band-pass, optionally subsampled");
  filter->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  filter->add_option("out", out_path)->required();
  filter->add_option("--band", band, "Low and high edge in Hz")->required()->expected(2);
  filter->add_option("--order", order, "Prototype order")->check(CLI::Range(1, 12));
  filter->add_flag("--zero-phase", zero_phase, "Forward-backward filtering");
  filter->add_option("--subsample", subsample_hz, "Target rate in Hz after filtering");

  // epoch
  std::vector<std::string> class_defs;
  std::vector<double> interval, baseline;
  auto* epoch = app.add_subcommand("epoch", "Cut epochs around markers");
  epoch->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  epoch->add_option("out", out_path)->required();
  epoch->add_option("--class", class_defs, "MARKER=CLASS, repeatable")->required();
  epoch->add_option("--interval", interval, "Start and end in ms relative to the marker")->required()->expected(2);
  epoch->add_option("--baseline", baseline, "Reference interval in ms to subtract")->expected(2);

  // train-erp / train-csp
  std::uint64_t shuffle_seed = 0;
  bool shuffle = false;
  auto* train_erp = app.add_subcommand("train-erp", "Train the speller pipeline on a continuous recording");
  train_erp->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  train_erp->add_option("--out", model_path, "Model file (JSON)")->required();
  train_erp->add_option("--config", config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  auto* shuffle_opt = train_erp->add_option("--shuffle-seed", shuffle_seed, "Permute training labels (chance control)");

  auto* train_csp_cmd = app.add_subcommand("train-csp", "Train the CSP pipeline on epoched two-class data");
  train_csp_cmd->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  train_csp_cmd->add_option("--out", model_path, "Model file (JSON)")->required();
  train_csp_cmd->add_option("--config", config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);

  // classify / simulate-online
  bool all_epochs = false;
  auto* classify = app.add_subcommand("classify", "Apply a trained pipeline offline");
  classify->add_option("model", model_path)->required()->check(CLI::ExistingFile);
  classify->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  classify->add_flag("--epochs", all_epochs, "List every epoch decision, not only characters");

  std::size_t block_samples = 12;
  bool realtime = false, threaded = false;
  auto* simulate = app.add_subcommand("simulate-online", "Replay a recording through the online pipeline");
  simulate->add_option("model", model_path)->required()->check(CLI::ExistingFile);
  simulate->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  simulate->add_option("--block-samples", block_samples, "Samples per replayed chunk")->check(CLI::PositiveNumber);
  simulate->add_flag("--realtime", realtime, "Pace chunks at the sampling rate");
  simulate->add_flag("--threaded", threaded, "Replay on a separate thread");
  simulate->add_flag("--epochs", all_epochs, "List every epoch decision, not only characters");

  // plots
  std::string layout_file, grid;
  double at_ms = 300.0;
  std::string class_name;
  std::size_t resolution = 64;
  auto* plot_scalp = app.add_subcommand("plot-scalp", "Scalp map of the class average at one time point");
  plot_scalp->add_option("in", in_path, "Epoched container")->required()->check(CLI::ExistingDirectory);
  plot_scalp->add_option("out", out_path, ".png or .svg")->required();
  plot_scalp->add_option("--time", at_ms, "Time in ms (nearest sample)");
  plot_scalp->add_option("--class", class_name, "Class to show (default: first)");
  plot_scalp->add_option("--layout", layout_file, "CSV 'name,x,y' electrode positions")->check(CLI::ExistingFile);
  plot_scalp->add_option("--grid", grid, "ROWSxCOLS lattice in channel order (ECoG)");
  plot_scalp->add_option("--resolution", resolution)->check(CLI::Range(8, 1024));

  std::string channels_opt;
  auto* plot_tc = app.add_subcommand("plot-timecourse", "Per-channel time courses (SVG)");
  plot_tc->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  plot_tc->add_option("out", out_path)->required();
  plot_tc->add_option("--channels", channels_opt, "Comma-separated channel names")->required();

  auto* plot_r2 = app.add_subcommand("plot-r2", "Signed r^2 map of two-class epochs");
  plot_r2->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);
  plot_r2->add_option("out", out_path, ".png or .svg")->required();
  plot_r2->add_option("--order", channels_opt, "Comma-separated row order (default: front to back when known)");

  // reproduce
  std::string data_dir;
  auto* reproduce = app.add_subcommand("reproduce", "Competition data evaluation");
  reproduce->require_subcommand(1);
  auto* rep_erp = reproduce->add_subcommand("erp", "Speller: erp_train/, erp_test/ under --data-dir");
  auto* rep_csp = reproduce->add_subcommand("csp", "Motor imagery: csp_train/, csp_test/ under --data-dir");
  for (auto* sub : {rep_erp, rep_csp}) {
    sub->add_option("--data-dir", data_dir, "Directory with converted containers")->required();
    sub->add_option("--config", config_path)->check(CLI::ExistingFile);
  }

  // synth
  P300SynthConfig p300;
  MotorImagerySynthConfig mi;
  auto* synth = app.add_subcommand("synth", "Write a synthetic recording");
  synth->require_subcommand(1);
  auto* synth_erp = synth->add_subcommand("erp", "Row/column speller recording");
  synth_erp->add_option("out", out_path)->required();
  synth_erp->add_option("--characters", p300.characters);
  synth_erp->add_option("--text", p300.text, "Characters to spell");
  synth_erp->add_option("--repetitions", p300.repetitions);
  synth_erp->add_option("--snr", p300.snr);
  synth_erp->add_option("--subject", p300.subject);
  synth_erp->add_option("--seed", p300.seed);
  auto* synth_csp = synth->add_subcommand("csp", "Two-class motor imagery epochs");
  synth_csp->add_option("out", out_path)->required();
  synth_csp->add_option("--trials", mi.trials);
  synth_csp->add_option("--modulation", mi.modulation);
  synth_csp->add_option("--subject", mi.subject);
  synth_csp->add_option("--seed", mi.seed);

  auto* info = app.add_subcommand("info", "Summary of a container");
  info->add_option("in", in_path)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  shuffle = shuffle_opt->count() > 0;

  try {
    if (*convert) {
      const Data d = import_ascii_matrix(signal_path, marker_path, fs_hz, split_list(channel_list));
      save_data(d, out_path);
      emit(shape_json(d));
    } else if (*filter) {
      const Data d = load_data(in_path);
      const auto c = design_bandpass(band[0], band[1], sampling_rate(d), order);
      Data out = zero_phase ? filtfilt(d, c) : apply_filter(d, c).first;
      if (subsample_hz > 0.0) out = subsample(out, subsample_hz);
      save_data(out, out_path);
      Json j = shape_json(out);
      j["b"] = c.b;
      j["a"] = c.a;
      j["stable"] = is_stable(c);
      emit(j);
    } else if (*epoch) {
      ClassDefs defs;
      for (const auto& s : class_defs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
          fail(Errc::InvalidArgument, "--class wants MARKER=CLASS, got '" + s + "'");
        }
        defs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
      }
      Data epo = segment(load_data(in_path), defs, {interval[0], interval[1]});
      if (!baseline.empty()) epo = remove_baseline(epo, {baseline[0], baseline[1]});
      save_data(epo, out_path);
      Json j = shape_json(epo);
      j["class_names"] = class_order(epo);
      emit(j);
    } else if (*train_erp) {
      const auto cfg = load_config(config_path, FeatureKind::JumpingMeans);
      const auto p = train_erp_pipeline(load_data(in_path), cfg,
                                        shuffle ? std::optional<std::uint64_t>(shuffle_seed) : std::nullopt);
      write_json_file(pipeline_to_json(p), model_path);
      emit({{"model", model_path}, {"features", p.lda.w.size()}, {"gamma", p.lda.gamma}, {"classes", p.lda.class_names}});
    } else if (*train_csp_cmd) {
      const auto cfg = load_config(config_path, FeatureKind::CspLogVariance);
      const Data epo = load_data(in_path);
      const auto p = train_csp_pipeline(epo, cfg);
      write_json_file(pipeline_to_json(p), model_path);
      const auto& l = p.csp->lambdas;
      emit({{"model", model_path},
            {"features", p.lda.w.size()},
            {"lambdas", std::vector<double>(l.data(), l.data() + l.size())},
            {"train_accuracy", evaluate_csp(p, epo)},
            {"classes", p.lda.class_names}});
    } else if (*classify) {
      const auto p = pipeline_from_json(read_json_file(model_path));
      const Data d = load_data(in_path);
      if (d.names()[0] == kClass) {
        emit({{"accuracy", evaluate_csp(p, d)}, {"epochs", d.shape()[0]}});
      } else {
        Json j = decisions_json(offline_decisions(d, p), all_epochs);
        if (p.config.kind == FeatureKind::JumpingMeans && d.markers()) {
          const auto r = evaluate_erp(p, d);
          j["expected"] = r.expected;
          j["letter_accuracy"] = r.letter_accuracy;
        }
        emit(j);
      }
    } else if (*simulate) {
      const auto p = pipeline_from_json(read_json_file(model_path));
      const auto decisions = run_online({load_data(in_path), block_samples, realtime}, p, {.threaded = threaded});
      Json j = decisions_json(decisions, all_epochs);
      j["block_samples"] = block_samples;
      emit(j);
    } else if (*plot_scalp) {
      const Data avg = classwise_average(load_data(in_path));
      const auto classes = avg.label_axis(0);
      std::size_t ci = 0;
      if (!class_name.empty()) {
        auto it = std::find(classes.begin(), classes.end(), class_name);
        if (it == classes.end()) fail(Errc::InvalidArgument, "no class '" + class_name + "'");
        ci = static_cast<std::size_t>(it - classes.begin());
      }
      const auto& time = avg.numeric_axis(1);
      std::size_t ti = 0;
      for (std::size_t t = 1; t < time.size(); ++t) {
        if (std::abs(time[t] - at_ms) < std::abs(time[ti] - at_ms)) ti = t;
      }
      const auto& channels = avg.label_axis(2);
      const std::size_t nc = channels.size();
      std::vector<double> v(avg.values().begin() + static_cast<std::ptrdiff_t>((ci * time.size() + ti) * nc),
                            avg.values().begin() + static_cast<std::ptrdiff_t>((ci * time.size() + ti + 1) * nc));
      const auto field = interpolate_scalp(v, channels, pick_layout(layout_file, grid, channels), resolution);
      render_scalp(field, out_path);
      emit({{"out", out_path}, {"class", classes[ci]}, {"time_ms", time[ti]}});
    } else if (*plot_tc) {
      render_timecourse(load_data(in_path), split_list(channels_opt), out_path);
      emit({{"out", out_path}});
    } else if (*plot_r2) {
      const auto r = signed_r_squared(load_data(in_path));
      std::vector<std::string> order_list = split_list(channels_opt);
      if (order_list.empty()) {
        const auto& ch = r.r2.label_axis(axis_index(r.r2, kChannel));
        try {
          order_list = frontal_to_occipital(ch, standard_1020_layout());
        } catch (const Error&) {
          // Unknown positions: keep the data order.
        }
      }
      render_r2_map(r.r2, order_list, out_path);
      const auto vals = r.r2.values();
      const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
      emit({{"out", out_path}, {"min", *mn}, {"max", *mx}, {"zero_variance_points", r.zero_variance_points}});
    } else if (*reproduce) {
      const fs::path dir = data_dir;
      const bool erp = rep_erp->parsed();
      const char* names[2] = {erp ? "erp_train" : "csp_train", erp ? "erp_test" : "csp_test"};
      for (const char* n : names) {
        if (!fs::exists(dir / n / "meta.json")) {
          fail(Errc::IoFailure, (dir / n).string() + " not found; convert the competition files first (see README)");
        }
      }
      const Data train = load_data(dir / names[0]);
      const Data test = load_data(dir / names[1]);
      if (erp) {
        const auto r = pipeline_erp(train, test, load_config(config_path, FeatureKind::JumpingMeans));
        emit({{"letters", r.letters},
              {"correct", r.correct},
              {"letter_accuracy", r.letter_accuracy},
              {"expected", r.expected},
              {"predicted", r.predicted},
              {"gamma", r.gamma}});
      } else {
        const auto r = pipeline_csp(train, test, load_config(config_path, FeatureKind::CspLogVariance));
        emit({{"train_epochs", r.train_epochs},
              {"test_epochs", r.test_epochs},
              {"train_accuracy", r.train_accuracy},
              {"accuracy", r.accuracy}});
      }
    } else if (*synth) {
      const Data d = synth_erp->parsed() ? synth_p300(p300) : synth_motor_imagery(mi);
      save_data(d, out_path);
      emit(shape_json(d));
    } else if (*info) {
      const Data d = load_data(in_path);
      Json j = shape_json(d);
      j["units"] = d.units();
      j["extra"] = d.extra();
      emit(j);
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
