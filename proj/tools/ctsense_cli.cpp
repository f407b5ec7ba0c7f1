// Command-line front end for the corrugated-tube strain sensor pipeline.
//
// Subcommands: simulate, dataset, train, eval, similarity, slopes, finger.
// Failures exit nonzero and print a machine-readable error JSON on stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctsense/dsp.hpp"
#include "ctsense/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string sensor = "pdual";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--sensor", opts.sensor, "Sensor preset: p31|p41|pdual");
  cmd->add_option("--seed", opts.seed, "Master random seed");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--config", opts.config_path, "Protocol config JSON");
  cmd->add_option("--workers", opts.workers, "Worker thread count (0 = auto)");
}

ctsense::ProtocolSpec make_spec(const CommonOpts& opts) {
  ctsense::ProtocolSpec spec;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
    json j;
    in >> j;
    spec = ctsense::ProtocolSpec::from_json(j);
  }
  spec.preset = ctsense::preset_from_string(opts.sensor);
  spec.master_seed = opts.seed;
  if (opts.workers > 0) spec.workers = opts.workers;
  return spec;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << j.dump(2) << "\n";
}

ctsense::GradientBoostingModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path.string());
  json j;
  in >> j;
  return ctsense::GradientBoostingModel::from_json(j);
}

int cmd_simulate(const CommonOpts& opts, double inlet_mm, double outlet_mm) {
  const auto spec = make_spec(opts);
  const ctsense::StretchState stretch{inlet_mm, outlet_mm};
  const auto geom =
      apply_stretch(ctsense::build_sensor(spec.preset), stretch);
  const auto vm = ctsense::preset_vortex_model(spec.preset, geom);
  const auto sweep = ctsense::linear_sweep(
      spec.sweep_duration_s, spec.u_max_mps, spec.sweep_interval_s);
  const auto audio = ctsense::synthesize(
      geom, sweep, vm, {spec.noise_floor, spec.master_seed}, spec.acoustics);
  const auto sg = ctsense::stft(audio, spec.stft_window, spec.stft_hop);

  fs::create_directories(opts.out_dir);
  ctsense::write_wav((fs::path(opts.out_dir) / "recording.wav").string(), audio);
  ctsense::write_csv((fs::path(opts.out_dir) / "spectrogram.csv").string(), sg);
  json geometry_json = geom.base;
  write_json(fs::path(opts.out_dir) / "geometry.json", geometry_json);
  std::printf("wrote recording.wav and spectrogram.csv to %s\n",
              opts.out_dir.c_str());
  return 0;
}

int cmd_dataset(const CommonOpts& opts) {
  const auto spec = make_spec(opts);
  const auto dataset = ctsense::generate_dataset(spec);
  fs::create_directories(opts.out_dir);
  const fs::path out = fs::path(opts.out_dir) / "features.csv";
  ctsense::write_csv(out.string(), dataset);
  write_json(fs::path(opts.out_dir) / "protocol.json", spec.to_json());
  std::printf("%zu rows -> %s\n", dataset.size(), out.string().c_str());
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& features_csv,
              const ctsense::GbrParams& params) {
  const auto dataset = ctsense::read_dataset_csv(features_csv);
  auto [train, test] = ctsense::train_test_split(dataset, 0.8, opts.seed);
  fs::create_directories(opts.out_dir);
  for (auto target : {ctsense::Target::Inlet, ctsense::Target::Outlet,
                      ctsense::Target::Total}) {
    const auto model = ctsense::fit_gbr(train, target, params);
    const fs::path out =
        fs::path(opts.out_dir) / ("model_" + to_string(target) + ".json");
    write_json(out, model.to_json());
  }
  std::printf("trained 3 models on %zu rows -> %s\n", train.rows.size(),
              opts.out_dir.c_str());
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& features_csv,
             const std::string& model_dir) {
  const auto dataset = ctsense::read_dataset_csv(features_csv);
  ctsense::EvalReport report;
  if (!model_dir.empty()) {
    report = ctsense::evaluate_models(
        dataset, load_model(fs::path(model_dir) / "model_inlet.json"),
        load_model(fs::path(model_dir) / "model_outlet.json"),
        load_model(fs::path(model_dir) / "model_total.json"));
  } else {
    report = ctsense::run_evaluation(dataset, opts.seed);
  }
  fs::create_directories(opts.out_dir);
  write_json(fs::path(opts.out_dir) / "eval_report.json", report.to_json());
  for (const auto& t : report.targets)
    std::printf("MAE %-6s %.3f mm\n", to_string(t.target).c_str(), t.mae_mm);
  return 0;
}

int cmd_similarity(const CommonOpts& opts) {
  const auto spec = make_spec(opts);
  const auto rep = ctsense::mutual_similarity(spec.preset, spec);
  fs::create_directories(opts.out_dir);
  write_json(fs::path(opts.out_dir) / "similarity.json", rep.to_json());
  std::printf("%s: mean correlation %.3f, mean entropy %.2f bits\n",
              opts.sensor.c_str(), rep.mean_correlation, rep.mean_entropy_bits);
  return 0;
}

int cmd_slopes(const CommonOpts& opts) {
  const auto spec = make_spec(opts);
  std::vector<ctsense::StretchState> conditions;
  for (double d : {0.0, 5.0, 10.0}) {
    conditions.push_back({d, d});
    if (d > 0.0) {
      conditions.push_back({d, 0.0});
      conditions.push_back({0.0, d});
    }
  }
  const auto rows = ctsense::slope_table(spec.preset, conditions, spec);
  fs::create_directories(opts.out_dir);
  const fs::path out = fs::path(opts.out_dir) / "slopes.csv";
  std::FILE* f = std::fopen(out.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write: " + out.string());
  std::fprintf(f, "dL_inlet_mm,dL_outlet_mm,slope_hz_per_mps,"
                  "mean_freq_near_5500hz\n");
  for (const auto& r : rows)
    std::fprintf(f, "%.10g,%.10g,%.10g,%.10g\n", r.stretch.inlet_mm,
                 r.stretch.outlet_mm, r.slope_hz_per_mps,
                 r.mean_freq_near_ref_hz);
  std::fclose(f);
  for (const auto& r : rows)
    std::printf("(%4.1f, %4.1f) mm  slope %.1f Hz/(m/s)\n", r.stretch.inlet_mm,
                r.stretch.outlet_mm, r.slope_hz_per_mps);
  return 0;
}

int cmd_finger(const CommonOpts& opts, const std::string& model_dir) {
  auto spec = make_spec(opts);

  ctsense::GradientBoostingModel inlet, outlet, total;
  if (!model_dir.empty()) {
    inlet = load_model(fs::path(model_dir) / "model_inlet.json");
    outlet = load_model(fs::path(model_dir) / "model_outlet.json");
    total = load_model(fs::path(model_dir) / "model_total.json");
  } else {
    std::printf("no --model-dir given; training on a fresh dataset...\n");
    const auto dataset = ctsense::generate_dataset(spec);
    auto [train, test] = ctsense::train_test_split(dataset, 0.8, opts.seed);
    inlet = ctsense::fit_gbr(train, ctsense::Target::Inlet);
    outlet = ctsense::fit_gbr(train, ctsense::Target::Outlet);
    total = ctsense::fit_gbr(train, ctsense::Target::Total);
  }

  const double bend = ctsense::kPi / 3.0;
  const std::vector<ctsense::JointConfig> poses = {
      {0.0, 0.0, 6.0},    // at rest
      {bend, bend, 6.0},  // both joints
      {bend, 0.0, 6.0},   // proximal only
      {0.0, bend, 6.0},   // distal only
  };
  const auto rows =
      ctsense::finger_scenario(poses, spec, inlet, outlet, total);

  fs::create_directories(opts.out_dir);
  const fs::path out = fs::path(opts.out_dir) / "finger.csv";
  std::FILE* f = std::fopen(out.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write: " + out.string());
  std::fprintf(f, "proximal_rad,distal_rad,dL_inlet_mm,dL_outlet_mm,clamped,"
                  "slope_hz_per_mps,pred_inlet_mm,pred_outlet_mm,"
                  "pred_total_mm\n");
  for (const auto& r : rows)
    std::fprintf(f, "%.10g,%.10g,%.10g,%.10g,%d,%.10g,%.10g,%.10g,%.10g\n",
                 r.pose.proximal_angle_rad, r.pose.distal_angle_rad,
                 r.stretch.inlet_mm, r.stretch.outlet_mm, r.clamped ? 1 : 0,
                 r.slope_hz_per_mps, r.predicted_inlet_mm,
                 r.predicted_outlet_mm, r.predicted_total_mm);
  std::fclose(f);
  for (const auto& r : rows)
    std::printf("pose (%.2f, %.2f) rad  slope %.1f  predicted "
                "(%.2f, %.2f) mm\n",
                r.pose.proximal_angle_rad, r.pose.distal_angle_rad,
                r.slope_hz_per_mps, r.predicted_inlet_mm,
                r.predicted_outlet_mm);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corrugated-tube acoustic strain sensor pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  double inlet_mm = 0.0, outlet_mm = 0.0;
  std::string features_csv, model_dir;
  ctsense::GbrParams gbr;

  auto* simulate = app.add_subcommand(
      "simulate", "Synthesize one stretch state to WAV + spectrogram CSV");
  add_common(simulate, opts);
  simulate->add_option("--inlet", inlet_mm, "Inlet stretch dL_I, mm");
  simulate->add_option("--outlet", outlet_mm, "Outlet stretch dL_O, mm");

  auto* dataset = app.add_subcommand(
      "dataset", "Run the data-collection protocol to a features CSV");
  add_common(dataset, opts);

  auto* train =
      app.add_subcommand("train", "Train three stretch regressors from a CSV");
  add_common(train, opts);
  train->add_option("--features", features_csv, "Input features CSV")
      ->required();
  train->add_option("--trees", gbr.n_estimators, "Boosting rounds");
  train->add_option("--learning-rate", gbr.learning_rate, "Shrinkage");
  train->add_option("--depth", gbr.max_depth, "Tree depth");

  auto* eval = app.add_subcommand("eval", "Evaluate MAE on a features CSV");
  add_common(eval, opts);
  eval->add_option("--features", features_csv, "Input features CSV")
      ->required();
  eval->add_option("--model-dir", model_dir,
                   "Directory of model_*.json (default: split + train)");

  auto* similarity = app.add_subcommand(
      "similarity", "Mutual-stretch spectrogram correlation over the grid");
  add_common(similarity, opts);

  auto* slopes =
      app.add_subcommand("slopes", "F-U slope table per stretch condition");
  add_common(slopes, opts);

  auto* finger = app.add_subcommand(
      "finger", "Finger-joint scenario: poses, slopes, model predictions");
  add_common(finger, opts);
  finger->add_option("--model-dir", model_dir, "Directory of model_*.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(opts, inlet_mm, outlet_mm);
    if (dataset->parsed()) return cmd_dataset(opts);
    if (train->parsed()) return cmd_train(opts, features_csv, gbr);
    if (eval->parsed()) return cmd_eval(opts, features_csv, model_dir);
    if (similarity->parsed()) return cmd_similarity(opts);
    if (slopes->parsed()) return cmd_slopes(opts);
    if (finger->parsed()) return cmd_finger(opts, model_dir);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
