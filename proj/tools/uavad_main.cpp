#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uavad/checkpoint.hpp"
#include "uavad/detector.hpp"
#include "uavad/error.hpp"
#include "uavad/evaluation.hpp"
#include "uavad/gradcheck.hpp"
#include "uavad/jsonl.hpp"
#include "uavad/log.hpp"
#include "uavad/sim.hpp"
#include "uavad/train.hpp"
#include "uavad/world.hpp"

namespace fs = std::filesystem;
using namespace uavad;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} not found: {}", what, p.string()));
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw ConfigError(fmt::format("{} not found: {}", what, p.string()));
}

void require_parent(const fs::path& out) {
  const auto parent = out.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ConfigError("output directory does not exist: " + parent.string());
  }
}

// Grid spec for a loose grid file: the dataset manifest next to it when
// present, else the default spec.
GridSpec spec_near(const fs::path& file) {
  const auto manifest = file.parent_path() / "manifest.json";
  if (fs::is_regular_file(manifest)) {
    const auto j = read_json(manifest);
    if (j.contains("grid")) return grid_spec_from_json(j.at("grid"));
  }
  return GridSpec::default_spec();
}

struct GenerateArgs {
  std::string world;
  std::size_t n = 15000;
  std::string out;
  std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& a) {
  require_file(a.world, "world file");
  const auto world = load_world(a.world);
  if (a.n < 10) throw ConfigError("--n must be at least 10");
  fs::create_directories(a.out);
  const auto data = build_dataset(world, a.n, a.seed, a.out);
  fmt::print("wrote {} train, {} val, {} test scenes to {} (seed {})\n", data.train.size(), data.val.size(),
             data.test.size(), a.out, a.seed);
  return 0;
}

struct InjectArgs {
  std::string world;
  std::string data;
  int task = 1;
  std::string out;
  std::uint64_t seed = 0;
};

int run_inject(const InjectArgs& a) {
  require_file(a.world, "world file");
  require_file(a.data, "scene file");
  require_parent(a.out);
  const auto world = load_world(a.world);
  const auto task = task_from_number(a.task);
  const auto scenes = read_grid_file(a.data, world.grid);
  const auto bench = build_benchmark(world, scenes, task, a.seed);
  write_benchmark(a.out, bench.records);
  fmt::print("{}: {} cases from {} scenes ({} skipped), seed {}\n", task_name(task), bench.records.size(),
             scenes.size(), bench.skipped, a.seed);
  return 0;
}

struct TrainArgs {
  std::string variant;
  std::string data;
  std::string out;
  std::string history;
  int n_h = 32;
  TrainConfig tc;
};

int run_train(TrainArgs a) {
  const auto variant = variant_from_name(a.variant);
  require_dir(a.data, "dataset directory");
  require_parent(a.out);
  a.tc.validate();
  if (a.n_h < 1) throw ConfigError("--n-h must be positive");
  const auto data = load_dataset(a.data);
  auto config = ModelConfig::for_variant(variant, a.n_h);
  config.grid = data.grid;

  const fs::path history = a.history.empty() ? fs::path(a.out).replace_extension(".history.jsonl") : fs::path(a.history);
  require_parent(history);
  const auto result = train(config, data.train, data.val, a.tc);
  save_checkpoint(result.checkpoint, a.out);
  std::vector<nlohmann::json> rows;
  for (const auto& s : result.history) rows.push_back(to_json(s));
  write_jsonl(history, rows);
  fmt::print("{}: {} epochs, best val loss {:.6f}, seed {}; checkpoint {}, history {}\n", a.variant,
             result.history.size(), result.checkpoint.meta.best_val_loss, a.tc.seed, a.out, history.string());
  return 0;
}

struct DetectArgs {
  std::string ckpt;
  std::string in;
  std::string out;
  double threshold = kDefaultThreshold;
};

int run_detect(const DetectArgs& a) {
  require_file(a.ckpt, "checkpoint");
  require_file(a.in, "input file");
  require_parent(a.out);
  if (!(a.threshold > 0.0 && a.threshold < 1.0)) throw ConfigError("--threshold must lie in (0, 1)");
  const auto ckpt = load_checkpoint(a.ckpt);
  const auto reports = detect_batch(ckpt.model, a.in, a.threshold);
  std::vector<nlohmann::json> rows;
  std::size_t flagged = 0;
  for (const auto& r : reports) {
    rows.push_back(to_json(r));
    flagged += r.anomalies.size();
  }
  write_jsonl(a.out, rows);
  fmt::print("{} reports, {} anomalous cells\n", reports.size(), flagged);
  return 0;
}

struct EvalArgs {
  std::string world;
  std::string data;
  std::vector<std::string> ckpts;
  std::string bench;
  std::string out;
  double threshold = kDefaultThreshold;
};

int run_eval(const EvalArgs& a) {
  require_file(a.world, "world file");
  require_dir(a.data, "dataset directory");
  require_dir(a.bench, "benchmark directory");
  for (const auto& c : a.ckpts) require_file(c, "checkpoint");
  require_parent(a.out);
  if (a.ckpts.empty() || a.ckpts.size() > 4) throw ConfigError("--ckpts takes one to four checkpoints");
  const auto world = load_world(a.world);
  const auto data = load_dataset(a.data);
  std::vector<Model> models;
  for (const auto& c : a.ckpts) models.push_back(load_checkpoint(c).model);
  const auto benchmarks = load_benchmarks(a.bench, world.grid);
  const auto result = run_benchmark(world, data, models, benchmarks, a.threshold);
  auto doc = to_json(result);
  doc["threshold"] = a.threshold;
  write_json(a.out, doc);
  fmt::print("{}", format_table(result));
  return 0;
}

struct RenderArgs {
  std::string in;
  std::size_t index = 0;
};

int run_render(const RenderArgs& a) {
  require_file(a.in, "input file");
  const auto spec = spec_near(a.in);
  std::optional<GridRecord> found;
  std::size_t count = 0;
  for_each_jsonl(a.in, [&](const nlohmann::json& j, std::size_t) {
    if (count++ == a.index) found = parse_grid_record(j, spec);
  });
  if (!found) throw ConfigError(fmt::format("--index {} out of range: {} has {} records", a.index, a.in, count));
  fmt::print("{}", render_text(found->grid));
  return 0;
}

int run_gradcheck_cmd(std::uint64_t seed) {
  double worst = 0.0;
  bool ok = true;
  for (const auto& item : uavad::run_gradcheck(seed)) {
    fmt::print("{:<24} components {:>4}  max rel err {:.3e}  (tol {:.0e}) {}\n", item.name, item.components,
               item.max_rel_error, item.tolerance, item.passed() ? "ok" : "FAIL");
    worst = std::max(worst, item.max_rel_error);
    ok = ok && item.passed();
  }
  fmt::print("max rel err {:.3e}\n", worst);
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-based anomaly detection for aerial scenes"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a normal-scene dataset from a world file");
  generate->add_option("--world", gen.world, "World JSON file")->required();
  generate->add_option("--n", gen.n, "Number of scenes")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--seed", gen.seed, "Sampling seed")->required();

  InjectArgs inj;
  auto* inject = app.add_subcommand("inject", "Build an anomaly benchmark from held-out scenes");
  inject->add_option("--world", inj.world, "World JSON file")->required();
  inject->add_option("--data", inj.data, "Scene JSON Lines file")->required();
  inject->add_option("--task", inj.task, "Task number")->required()->check(CLI::Range(1, 3));
  inject->add_option("--out", inj.out, "Benchmark JSON Lines output")->required();
  inject->add_option("--seed", inj.seed, "Injection seed")->required();

  TrainArgs tr;
  auto* trainc = app.add_subcommand("train", "Train one model variant");
  trainc->add_option("--variant", tr.variant, "uav_adnet, uav_adnet_wo_gps, cvae or vae")->required();
  trainc->add_option("--data", tr.data, "Dataset directory")->required();
  trainc->add_option("--out", tr.out, "Checkpoint output")->required();
  trainc->add_option("--history", tr.history, "Per-epoch history JSON Lines (default: <out>.history.jsonl)");
  trainc->add_option("--n-h", tr.n_h, "Latent size")->capture_default_str();
  trainc->add_option("--lr", tr.tc.lr, "Learning rate")->capture_default_str();
  trainc->add_option("--batch", tr.tc.batch_size, "Batch size")->capture_default_str();
  trainc->add_option("--patience", tr.tc.patience, "Early-stopping patience")->capture_default_str();
  trainc->add_option("--max-epochs", tr.tc.max_epochs, "Epoch limit")->capture_default_str();
  trainc->add_option("--seed", tr.tc.seed, "Training seed")->required();

  DetectArgs det;
  auto* detectc = app.add_subcommand("detect", "Report anomalous cells for each record of a file");
  detectc->add_option("--ckpt", det.ckpt, "Checkpoint")->required();
  detectc->add_option("--in", det.in, "Grid or benchmark JSON Lines file")->required();
  detectc->add_option("--out", det.out, "Report JSON Lines output")->required();
  detectc->add_option("--threshold", det.threshold, "Reconstruction probability threshold")->capture_default_str();

  EvalArgs ev;
  auto* evalc = app.add_subcommand("eval", "Score checkpoints on reconstruction and the anomaly tasks");
  evalc->add_option("--world", ev.world, "World JSON file")->required();
  evalc->add_option("--data", ev.data, "Dataset directory")->required();
  evalc->add_option("--ckpts", ev.ckpts, "Checkpoints, one per variant")->required();
  evalc->add_option("--bench", ev.bench, "Directory with task1.jsonl, task2.jsonl, task3.jsonl")->required();
  evalc->add_option("--out", ev.out, "Result JSON output")->required();
  evalc->add_option("--threshold", ev.threshold, "Reconstruction probability threshold")->capture_default_str();

  RenderArgs ren;
  auto* renderc = app.add_subcommand("render", "Print one scene as text");
  renderc->add_option("--in", ren.in, "Grid or benchmark JSON Lines file")->required();
  renderc->add_option("--index", ren.index, "Record index")->capture_default_str();

  std::uint64_t gc_seed = 1;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gradcheck->add_option("--seed", gc_seed, "Seed for the random instances")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    (void)logger();
    if (*generate) return run_generate(gen);
    if (*inject) return run_inject(inj);
    if (*trainc) return run_train(tr);
    if (*detectc) return run_detect(det);
    if (*evalc) return run_eval(ev);
    if (*renderc) return run_render(ren);
    if (*gradcheck) return run_gradcheck_cmd(gc_seed);
  } catch (const DivergenceError& e) {
    logger().error("{}", e.what());
    return kExitRuntime;
  } catch (const InjectionInfeasible& e) {
    logger().error("{}", e.what());
    return kExitRuntime;
  } catch (const ConfigError& e) {
    logger().error("{}", e.what());
    return kExitConfig;
  } catch (const ShapeError& e) {
    logger().error("{}", e.what());
    return kExitConfig;
  } catch (const CheckpointVersionError& e) {
    logger().error("{}", e.what());
    return kExitConfig;
  } catch (const CheckpointShapeError& e) {
    logger().error("{}", e.what());
    return kExitConfig;
  } catch (const CorruptFileError& e) {
    logger().error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    logger().error("{}", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
