// Command-line front end: train, eval, grid, sweep-samples, gen-synthetic.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "miggt/io/csv.hpp"
#include "miggt/io/dataset.hpp"
#include "miggt/io/params.hpp"
#include "miggt/io/report.hpp"
#include "miggt/io/synthetic.hpp"
#include "miggt/miggt.hpp"

namespace fs = std::filesystem;
using namespace miggt;

namespace {

io::LoadedDataset load_run_dataset(const io::RunConfig& run) {
  auto loaded = io::load_dataset(io::DatasetManifest::load(run.manifest_path), run.split);
  if (loaded.duplicates > 0)
    std::cerr << "note: dropped " << loaded.duplicates << " duplicate interactions\n";
  return loaded;
}

std::vector<std::string> metric_header(const std::string& prefix) {
  return {prefix + "recall@10", prefix + "recall@20", prefix + "ndcg@10", prefix + "ndcg@20"};
}

std::vector<std::string> metric_fields(const MetricReport& r) {
  return {io::format_double(r.recall(10)), io::format_double(r.recall(20)),
          io::format_double(r.ndcg(10)), io::format_double(r.ndcg(20))};
}

void write_grid_csv(const std::string& path, const GridResult& grid) {
  std::vector<std::string> header;
  for (const auto& [key, value] : grid.rows.front().settings) header.push_back(key);
  for (const auto& h : metric_header("val_")) header.push_back(h);
  for (const auto& h : metric_header("test_")) header.push_back(h);
  header.push_back("best_epoch");
  header.push_back("selected");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& row = grid.rows[i];
    std::vector<std::string> fields;
    for (const auto& [key, value] : row.settings) fields.push_back(value);
    for (const auto& f : metric_fields(row.valid)) fields.push_back(f);
    for (const auto& f : metric_fields(row.test)) fields.push_back(f);
    fields.push_back(std::to_string(row.best_epoch));
    fields.push_back(i == grid.best ? "1" : "0");
    rows.push_back(std::move(fields));
  }
  io::write_csv(path, header, rows);
}

int run_train(const std::string& config_path) {
  const auto run = io::RunConfig::load(config_path);
  const auto loaded = load_run_dataset(run);
  fs::create_directories(run.output_dir);
  const fs::path out(run.output_dir);
  io::write_id_list((out / "users.txt").string(), loaded.users.ids());
  io::write_id_list((out / "items.txt").string(), loaded.items.ids());
  io::train_config_document(run.train).save((out / "train_config.cfg").string());

  Model model(GraphData::build(loaded.data.train, loaded.data.features), run.train);
  std::ofstream log((out / "train_log.jsonl").string());
  const auto result = train(model, loaded.data, [&](const EpochRecord& rec) {
    log << io::epoch_log_line(rec) << '\n';
    log.flush();
    std::cerr << "epoch " << rec.epoch << " loss " << rec.loss.total << " val ndcg@20 "
              << rec.valid.ndcg(20) << '\n';
  });
  io::save_parameters((out / "params.bin").string(), model.params().all());
  const auto test = evaluate_model(model, make_test_split(loaded.data.train, loaded.data.valid,
                                                          loaded.data.test));
  io::report_document(test).save((out / "test_report.cfg").string());
  std::cout << "best epoch " << result.best_epoch << " of " << result.epochs_run
            << ", test recall@20 " << test.recall(20) << ", ndcg@20 " << test.ndcg(20) << '\n';
  return 0;
}

int run_eval(const std::string& config_path, const std::string& params_path, std::string out_path) {
  const auto run = io::RunConfig::load(config_path);
  const auto loaded = load_run_dataset(run);
  Model model(GraphData::build(loaded.data.train, loaded.data.features), run.train);
  io::apply_parameters(model, io::load_parameters(params_path));
  const auto report = evaluate_model(
      model, make_test_split(loaded.data.train, loaded.data.valid, loaded.data.test));
  if (out_path.empty()) {
    fs::create_directories(run.output_dir);
    out_path = (fs::path(run.output_dir) / "report.cfg").string();
  }
  io::report_document(report).save(out_path);
  std::cout << io::report_document(report).to_string();
  return 0;
}

int run_grid(const std::string& config_path, const std::string& grid_path) {
  const auto run = io::RunConfig::load(config_path);
  const auto doc = io::KeyValueDocument::load(grid_path);
  GridSpec spec;
  for (const auto& [key, value] : doc.entries()) {
    if (key == "max_cells") {
      spec.max_cells = miggt::detail::parse_value<std::size_t>(key, value);
      continue;
    }
    TrainConfig probe = run.train;
    const auto values = io::split_list(value);
    for (const auto& v : values)
      if (!set_train_option(probe, key, v)) throw FormatError("unknown grid key '" + key + "'");
    spec.axes.emplace_back(key, values);
  }
  grid_cells(spec);  // rejects an oversized grid before loading anything
  const auto loaded = load_run_dataset(run);
  const auto grid = grid_search(spec, run.train, loaded.data, run.workers);
  fs::create_directories(run.output_dir);
  const auto path = (fs::path(run.output_dir) / "grid.csv").string();
  write_grid_csv(path, grid);
  std::cout << "wrote " << grid.rows.size() << " rows to " << path << '\n';
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& values_text) {
  const auto run = io::RunConfig::load(config_path);
  std::vector<std::size_t> values;
  for (const auto& v : io::split_list(values_text))
    values.push_back(miggt::detail::parse_value<std::size_t>("--values", v));
  if (values.empty()) throw Error("--values is empty");
  const auto loaded = load_run_dataset(run);
  const auto grid = sweep_samples(values, run.train, loaded.data, run.workers);
  fs::create_directories(run.output_dir);
  const auto path = (fs::path(run.output_dir) / "sweep_samples.csv").string();
  write_grid_csv(path, grid);
  std::cout << "wrote " << grid.rows.size() << " rows to " << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal graph recommender with per-modality receptive fields and a sampled global transformer"};
  app.require_subcommand(1);

  std::string config_path, params_path, grid_path, values = "5,10,15,20,25", report_path;

  auto* train_cmd = app.add_subcommand("train", "Train a model and write parameters and a log");
  train_cmd->add_option("--config", config_path, "Run configuration")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Score saved parameters on the test split");
  eval_cmd->add_option("--config", config_path, "Run configuration")->required();
  eval_cmd->add_option("--params", params_path, "Parameter file")->required();
  eval_cmd->add_option("--out", report_path, "Report path (default <output_dir>/report.cfg)");

  auto* grid_cmd = app.add_subcommand("grid", "Grid search over hyperparameters");
  grid_cmd->add_option("--config", config_path, "Run configuration")->required();
  grid_cmd->add_option("--grid", grid_path, "Grid file: key = v1,v2,...")->required();

  auto* sweep_cmd = app.add_subcommand("sweep-samples", "Sweep the number of sampled vertices");
  sweep_cmd->add_option("--config", config_path, "Run configuration")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated sample counts");

  io::SyntheticSpec syn;
  std::string syn_out, syn_modalities = "text:16,visual:24";
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a block-structured synthetic dataset");
  gen_cmd->add_option("--out", syn_out, "Output directory")->required();
  gen_cmd->add_option("--user-groups", syn.user_groups);
  gen_cmd->add_option("--item-groups", syn.item_groups);
  gen_cmd->add_option("--users-per-group", syn.users_per_group);
  gen_cmd->add_option("--items-per-group", syn.items_per_group);
  gen_cmd->add_option("--affinity", syn.affinity);
  gen_cmd->add_option("--noise", syn.noise);
  gen_cmd->add_option("--modalities", syn_modalities, "label:dim list");
  gen_cmd->add_flag("--global-likes", syn.global_likes, "Each user likes one extra uniformly drawn item");
  gen_cmd->add_option("--seed", syn.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return run_train(config_path);
    if (*eval_cmd) return run_eval(config_path, params_path, report_path);
    if (*grid_cmd) return run_grid(config_path, grid_path);
    if (*sweep_cmd) return run_sweep(config_path, values);
    if (*gen_cmd) {
      syn.modalities.clear();
      for (const auto& entry : io::split_list(syn_modalities)) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos) throw FormatError("modality '" + entry + "' needs label:dim");
        syn.modalities.emplace_back(entry.substr(0, colon),
                                    miggt::detail::parse_value<std::size_t>("--modalities", entry.substr(colon + 1)));
      }
      const auto path = io::write_synthetic(io::generate_synthetic(syn), syn_out);
      std::cout << "wrote " << path << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
