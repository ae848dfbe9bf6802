// Copyright 2026 The snnforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "snnforge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "snnforge/analysis.hpp"
#include "snnforge/calibrate.hpp"
#include "snnforge/convert.hpp"
#include "snnforge/error.hpp"
#include "snnforge/format.hpp"
#include "snnforge/io.hpp"
#include "snnforge/network.hpp"
#include "snnforge/snn.hpp"

namespace snnforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTestFraction = 0.2;
const std::vector<int> kDefaultTList = {1, 2, 4, 8, 16, 32, 64};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  for (const std::string& part : split(text, ',')) {
    const double v = parse_number(part);
    if (v < 1 || v != std::floor(v)) throw UsageError("bad shape '" + text + "'");
    shape.push_back(static_cast<std::size_t>(v));
  }
  return shape;
}

bool looks_like_shape(const std::string& text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(c) || c == ','; });
}

// Train/test holdout shared by train, eval and analyze so that the same
// --seed always yields the same test set.
std::pair<Dataset, Dataset> holdout(const Dataset& data, std::uint64_t seed) {
  auto parts = stratified_split(data, kTestFraction, derive_key({label_key("test-holdout"), seed}));
  parts.first.provenance += "/train";
  parts.second.provenance += "/test";
  return parts;
}

struct TrainFlags {
  std::string data = "synth:spirals";
  std::string arch = "mlp-64-64";
  TrainConfig cfg;
  CalibrationConfig cal;
  bool no_calibrate = false;
  std::string out = "snnforge-out";
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "dataset reference (synth:NAME[:N], idx:IMG,LBL, csv:PATH[:C,H,W])")
      ->capture_default_str();
  cmd->add_option("--arch", f.arch, "architecture (mlp-H1-..., cnn-C1-...[-dH])")->capture_default_str();
  cmd->add_option("--L", f.cfg.levels, "quantization steps L")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tau", f.cal.tau, "noise-induction time step (default: L)")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", f.cfg.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lr", f.cfg.lr0, "initial learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--wd", f.cfg.weight_decay, "weight decay")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--momentum", f.cfg.momentum)->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--batch", f.cfg.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--val-frac", f.cal.val_fraction, "validation fraction in (0, 0.5)")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  cmd->add_option("--seed", f.cfg.seed)->capture_default_str();
  cmd->add_option("--lambda-init", f.cfg.lambda_init, "initial activation threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--recalibrate-every", f.cal.recalibrate_every, "epochs between noise inductions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--no-calibrate", f.no_calibrate, "pin delta to 0 (QCFS baseline)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
}

void finalize_train_flags(CLI::App* cmd, TrainFlags& f) {
  if (cmd->count("--tau") == 0) f.cal.tau = f.cfg.levels;
  if (!(f.cal.val_fraction > 0.0 && f.cal.val_fraction < 0.5)) {
    throw UsageError("--val-frac must lie strictly between 0 and 0.5");
  }
  f.cfg.tau = f.cal.tau;
  f.cfg.val_fraction = f.cal.val_fraction;
  f.cal.enabled = !f.no_calibrate;
}

json train_flags_json(const TrainFlags& f) {
  return {{"data", f.data},
          {"arch", f.arch},
          {"L", f.cfg.levels},
          {"tau", f.cal.tau},
          {"epochs", f.cfg.epochs},
          {"lr", f.cfg.lr0},
          {"wd", f.cfg.weight_decay},
          {"momentum", f.cfg.momentum},
          {"batch", f.cfg.batch_size},
          {"val_frac", f.cal.val_fraction},
          {"test_frac", kTestFraction},
          {"seed", f.cfg.seed},
          {"lambda_init", f.cfg.lambda_init},
          {"recalibrate_every", f.cal.recalibrate_every},
          {"calibrate", f.cal.enabled}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

NetworkDef init_network(const TrainFlags& f, const Dataset& data) {
  QuantActParams act{f.cfg.lambda_init, f.cfg.levels, 0.0f};
  NetworkDef net = build_network(f.arch, data.input_shape, data.class_count, act, f.cfg.seed);
  net.meta.dataset = f.data;
  return net;
}

int cmd_train(const TrainFlags& f, const std::vector<std::string>& argv, std::ostream& out) {
  const fs::path dir = f.out;
  fs::create_directories(dir);
  json manifest{{"command", "train"},
                {"argv", argv},
                {"seed", f.cfg.seed},
                {"config", train_flags_json(f)},
                {"started_at", timestamp()},
                {"outputs",
                 {{"history", "history.csv"},
                  {"best_ann", "best_ann.snnf"},
                  {"best_snn", "best_snn.snnf"},
                  {"best_snn_source", "best_snn_source.snnf"}}}};
  write_json(dir / "manifest.json", manifest);

  const Dataset data = resolve_dataset(f.data, f.cfg.seed);
  const auto [train, test] = holdout(data, f.cfg.seed);
  const TrainResult result = train_with_compensation(
      train, test, init_network(f, data), f.cfg, f.cal, [&](const EpochRecord& r) {
        out << "epoch " << r.epoch << "  loss " << format_number(r.train_loss) << "  ann "
            << format_number(r.ann_acc) << "  snn@" << f.cal.tau << " "
            << format_number(r.snn_acc) << '\n';
      });

  {
    std::ofstream hist = open_out(dir / "history.csv");
    write_history_csv(hist, result.history);
  }
  save_model(result.best_ann, dir / "best_ann.snnf");
  save_model(result.best_snn, dir / "best_snn.snnf");
  save_model(result.best_snn_source, dir / "best_snn_source.snnf");
  manifest["finished_at"] = timestamp();
  manifest["best_ann_epoch"] = result.best_ann_epoch;
  manifest["best_snn_epoch"] = result.best_snn_epoch;
  write_json(dir / "manifest.json", manifest);
  out << "best ANN epoch " << result.best_ann_epoch << ", best SNN epoch "
      << result.best_snn_epoch << '\n';
  return kExitOk;
}

std::vector<int> parse_t_list(const std::string& text) {
  std::vector<int> ts;
  for (const std::string& part : split(text, ',')) {
    double v = 0.0;
    try {
      v = parse_number(part);
    } catch (const FormatError&) {
      throw UsageError("--T-list: '" + part + "' is not an integer");
    }
    if (v < 1 || v != std::floor(v)) throw UsageError("--T-list entries must be integers >= 1");
    ts.push_back(static_cast<int>(v));
  }
  return ts;
}

std::string t_list_string(const std::vector<int>& ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? "," : "") + std::to_string(ts[i]);
  return s;
}

Dataset eval_split(const std::string& data_ref, const std::string& split_name, std::uint64_t seed) {
  Dataset data = resolve_dataset(data_ref, seed);
  if (split_name == "all") return data;
  if (split_name == "test") return holdout(data, seed).second;
  if (split_name == "train") return holdout(data, seed).first;
  throw UsageError("--split must be test, train or all");
}

int cmd_eval(const std::string& model_path, const std::string& data_ref, const std::string& split_name,
             const std::vector<int>& ts, std::uint64_t seed, const std::string& out_path,
             std::ostream& out) {
  const Dataset data = eval_split(data_ref, split_name, seed);
  std::string ann_acc;
  SpikingNetwork snn;
  if (peek_model_kind(model_path) == ModelKind::ann) {
    const NetworkDef ann = load_ann(model_path);
    ann_acc = format_number(evaluate_ann(ann, data));
    snn = convert(ann);
  } else {
    snn = load_snn(model_path);
  }
  std::ostringstream csv;
  csv << "model,ann_acc";
  for (int t : ts) csv << ",T=" << t;
  csv << '\n' << fs::path(model_path).filename().string() << ',' << ann_acc;
  for (int t : ts) csv << ',' << format_number(evaluate_snn(snn, data, t));
  csv << '\n';
  if (out_path.empty()) {
    out << csv.str();
  } else {
    open_out(out_path) << csv.str();
  }
  return kExitOk;
}

void emit_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    open_out(path) << text;
  }
}

}  // namespace

Dataset resolve_dataset(const std::string& ref, std::uint64_t seed) {
  const std::size_t colon = ref.find(':');
  if (colon == std::string::npos) throw UsageError("dataset reference '" + ref + "' lacks a scheme");
  const std::string scheme = ref.substr(0, colon);
  const std::string rest = ref.substr(colon + 1);
  if (scheme == "synth") {
    const std::vector<std::string> parts = split(rest, ':');
    std::size_t n = 1000;
    if (parts.size() > 1) n = static_cast<std::size_t>(parse_number(parts[1]));
    return synth(parts[0], n, seed);
  }
  if (scheme == "idx") {
    const std::vector<std::string> files = split(rest, ',');
    if (files.size() != 2) throw UsageError("idx: expects IMAGES,LABELS");
    return load_idx(files[0], files[1]);
  }
  if (scheme == "csv") {
    const std::size_t last = rest.rfind(':');
    if (last != std::string::npos && looks_like_shape(rest.substr(last + 1))) {
      return load_csv(rest.substr(0, last), parse_shape(rest.substr(last + 1)));
    }
    return load_csv(rest);
  }
  throw UsageError("unknown dataset scheme '" + scheme + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"snnforge: noise-compensated ANN training and ANN-to-SNN conversion"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  CLI::App* train_cmd = app.add_subcommand("train", "train a source ANN with error compensation");
  add_train_flags(train_cmd, train_flags);

  std::string conv_in, conv_out;
  CLI::App* convert_cmd = app.add_subcommand("convert", "convert an ANN model file to an SNN");
  convert_cmd->add_option("--model", conv_in, "ANN model file")->required();
  convert_cmd->add_option("--out", conv_out, "SNN model file")->required();

  std::string eval_model, eval_data, eval_split_name = "test", eval_out, eval_t = t_list_string(kDefaultTList);
  std::uint64_t eval_seed = 1;
  CLI::App* eval_cmd = app.add_subcommand("eval", "ANN accuracy and SNN accuracy over a T sweep");
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--split", eval_split_name, "test, train or all")->capture_default_str();
  eval_cmd->add_option("--T-list", eval_t, "comma-separated time steps")->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed, "seed of the train/test holdout")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "CSV path (default: stdout)");

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "conversion-error analyses");
  analyze_cmd->require_subcommand(1);

  std::string an_model, an_data, an_split = "test", an_out, an_format = "csv";
  int an_T = 0;
  std::uint64_t an_seed = 1;
  auto add_model_flags = [&](CLI::App* c) {
    c->add_option("--model", an_model, "ANN model file")->required();
    c->add_option("--data", an_data)->required();
    c->add_option("--split", an_split)->capture_default_str();
    c->add_option("--T", an_T, "time steps (default: L of the first activation layer)")
        ->check(CLI::PositiveNumber);
    c->add_option("--seed", an_seed)->capture_default_str();
    c->add_option("--out", an_out, "output path (default: stdout)");
  };
  CLI::App* residual_cmd = analyze_cmd->add_subcommand("residual", "per-layer residual histograms");
  add_model_flags(residual_cmd);
  CLI::App* decompose_cmd = analyze_cmd->add_subcommand("decompose", "clipping/quantization/residual report");
  add_model_flags(decompose_cmd);
  decompose_cmd->add_option("--format", an_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  bool th_grid = false;
  int th_T = 4, th_L = 4;
  double th_delta = 0.0, th_theta = 1.0, th_k = 4.0;
  std::size_t th_n = 100000;
  std::uint64_t th_seed = 1;
  std::string th_out;
  CLI::App* theorem_cmd = analyze_cmd->add_subcommand("theorem1", "Monte Carlo check of zero-mean conversion error");
  theorem_cmd->add_flag("--grid", th_grid, "full {T,L} x delta grid (48 configurations)");
  theorem_cmd->add_option("--T", th_T)->check(CLI::PositiveNumber)->capture_default_str();
  theorem_cmd->add_option("--L", th_L)->check(CLI::PositiveNumber)->capture_default_str();
  theorem_cmd->add_option("--delta", th_delta)->check(CLI::NonNegativeNumber)->capture_default_str();
  theorem_cmd->add_option("--theta", th_theta)->check(CLI::PositiveNumber)->capture_default_str();
  theorem_cmd->add_option("--n", th_n)->check(CLI::Range(std::size_t{10000}, std::size_t{100000000}))->capture_default_str();
  theorem_cmd->add_option("--k", th_k, "pass if |mean| <= k * stderr")->capture_default_str();
  theorem_cmd->add_option("--seed", th_seed)->capture_default_str();
  theorem_cmd->add_option("--out", th_out, "CSV path (default: stdout)");

  TrainFlags ov_flags;
  ov_flags.data = "csv:data/digits8x8.csv:1,8,8";
  ov_flags.arch = "cnn-8-16-d32";
  ov_flags.cfg.epochs = 3;
  CLI::App* overhead_cmd = analyze_cmd->add_subcommand("overhead", "per-epoch wall time with and without calibration");
  add_train_flags(overhead_cmd, ov_flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" ? "" : e.get_name());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    err << "error: " << e.what() << '\n' << failing->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      finalize_train_flags(train_cmd, train_flags);
      return cmd_train(train_flags, args, out);
    }
    if (convert_cmd->parsed()) {
      save_model(convert(load_ann(conv_in)), conv_out);
      out << "wrote " << conv_out << '\n';
      return kExitOk;
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_model, eval_data, eval_split_name, parse_t_list(eval_t), eval_seed,
                      eval_out, out);
    }
    if (theorem_cmd->parsed()) {
      std::vector<Theorem1Row> rows;
      if (th_grid) {
        rows = theorem1_grid(th_n, th_seed, static_cast<float>(th_theta));
      } else {
        RandomSource rs(th_seed, label_key("theorem1-single"));
        rows.push_back({th_T, th_L, th_delta,
                        theorem1_mc(static_cast<float>(th_theta), th_L, th_T,
                                    static_cast<float>(th_delta), th_n, rs)});
      }
      std::ostringstream csv;
      write_theorem1_csv(csv, rows, th_k);
      emit_text(th_out, csv.str(), out);
      const auto passed = std::count_if(rows.begin(), rows.end(),
                                        [&](const Theorem1Row& r) { return r.result.within(th_k); });
      err << passed << "/" << rows.size() << " configurations within " << th_k << " stderr\n";
      return passed == static_cast<std::ptrdiff_t>(rows.size()) ? kExitOk : kExitRuntime;
    }
    if (residual_cmd->parsed() || decompose_cmd->parsed()) {
      const NetworkDef ann = load_ann(an_model);
      const Dataset data = eval_split(an_data, an_split, an_seed);
      int T = an_T;
      if (T == 0) {
        const auto acts = ann.activation_indices();
        if (acts.empty()) throw UsageError("model has no activation layer; pass --T");
        T = ann.layers[acts.front()].act.levels;
      }
      RandomSource rs(an_seed, label_key("analyze"));
      const ErrorReport report = error_decompose(ann, convert(ann), data, T, rs);
      if (decompose_cmd->parsed()) {
        const ReportFormat fmt = an_format == "json" ? ReportFormat::json : ReportFormat::csv;
        if (an_out.empty()) {
          if (fmt == ReportFormat::csv) {
            write_report_csv(out, report);
          } else {
            write_report_json(out, report);
          }
        } else {
          emit_report(report, an_out, fmt);
        }
        return kExitOk;
      }
      std::ostringstream csv;
      csv << "layer,bin,bin_lo,bin_hi,count,residual_mean,residual_std\n";
      for (const LayerErrorReport& l : report.layers) {
        const Histogram& h = l.residual_hist;
        const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
          csv << l.layer << ',' << b << ',' << format_number(h.lo + width * b) << ','
              << format_number(h.lo + width * (b + 1)) << ',' << h.counts[b] << ','
              << format_number(l.residual_mean) << ',' << format_number(l.residual_std) << '\n';
        }
      }
      emit_text(an_out, csv.str(), out);
      return kExitOk;
    }
    if (overhead_cmd->parsed()) {
      finalize_train_flags(overhead_cmd, ov_flags);
      const Dataset data = resolve_dataset(ov_flags.data, ov_flags.cfg.seed);
      const auto [train, test] = holdout(data, ov_flags.cfg.seed);
      const OverheadResult r =
          measure_overhead(train, test, init_network(ov_flags, data), ov_flags.cfg, ov_flags.cal);
      std::ostringstream csv;
      csv << "baseline_epoch_seconds,calibrated_epoch_seconds,ratio\n"
          << format_number(r.baseline_seconds) << ',' << format_number(r.calibrated_seconds)
          << ',' << format_number(r.ratio()) << '\n';
      out << csv.str();
      if (overhead_cmd->count("--out")) {
        fs::create_directories(ov_flags.out);
        open_out(fs::path(ov_flags.out) / "overhead.csv") << csv.str();
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace snnforge
