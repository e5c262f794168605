// pumpfit: experiment driver for the surrogate study.
//
// Exit codes: 0 success, 2 usage/config/data error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "pumpfit/augmentation.hpp"
#include "pumpfit/config.hpp"
#include "pumpfit/design_space.hpp"
#include "pumpfit/metrics.hpp"
#include "pumpfit/oracle.hpp"
#include "pumpfit/pipeline.hpp"
#include "pumpfit/predictor.hpp"

namespace fs = std::filesystem;
using namespace pumpfit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Options shared by every subcommand that depends on the run configuration.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "YAML run configuration");
    app->add_option("--seed", seed, "run seed (overrides the config)");
  }
  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    if (seed) c.seed = *seed;
    return c;
  }
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

void emit_csv(const Dataset& d, const std::string& out, const CsvMetadata& meta) { emit(to_csv(d, meta), out); }

// Rebuilds the provenance an augmented CSV carries in its comment columns.
AugmentedDataset augmented_from_document(const CsvDocument& doc) {
  const CsvMetadata::CommentColumn *source = nullptr, *sign = nullptr;
  for (const auto& c : doc.meta.comment_columns) {
    if (c.name == kSourceColumn) source = &c;
    if (c.name == kSignColumn) sign = &c;
  }
  if (!source || !sign) throw DataError("augmented CSV lacks #source/#sign provenance columns (use --provenance)");
  AugmentedDataset a;
  a.data = doc.data;
  std::vector<std::size_t> originals;
  for (std::size_t r = 0; r < doc.data.n_rows(); ++r) {
    RowProvenance p;
    try {
      p.source = std::stoul(source->cells[r]);
    } catch (const std::exception&) {
      throw DataError("bad #source cell '" + source->cells[r] + "'");
    }
    const auto& s = sign->cells[r];
    p.sign = s == "+" ? 1 : s == "-" ? -1 : 0;
    if (p.sign == 0) {
      if (p.source != originals.size()) throw DataError("original rows must come first, in source order");
      originals.push_back(r);
    }
    a.provenance.push_back(p);
  }
  for (const auto& p : a.provenance) {
    if (p.source >= originals.size()) throw DataError("#source refers to a missing original row");
  }
  a.original = doc.data.select_rows(originals);
  return a;
}

std::vector<double> parse_defaults(const std::string& spec, const DesignSpace& space) {
  auto x = space.midpoint();
  if (spec == "mid") return x;
  for (const auto& item : split_list(spec)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--defaults entries must be name=value (got '" + item + "')");
    const auto name = item.substr(0, eq);
    if (!space.contains(name)) throw ConfigError("unknown design variable '" + name + "'");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad value in --defaults entry '" + item + "'");
    }
    x[space.index_of(name)] = v;
  }
  return x;
}

int exit_code_for(const StageError& e) {
  return e.cause() == StageError::Cause::numerical ? kExitNumerical : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pumpfit: surrogate models for centrifugal-pump performance"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pumpfit 0.1.0");

  // sample ---------------------------------------------------------------
  Common sample_common;
  std::size_t sample_count = 0;
  std::string sample_vars, sample_stream = "train", sample_out;
  auto* sample = app.add_subcommand("sample", "Latin Hypercube design points over the design bounds");
  sample_common.add_to(sample);
  sample->add_option("--count", sample_count, "number of points (default: config sample count)");
  sample->add_option("--vars", sample_vars, "comma-separated variable subset (default: config)");
  sample->add_option("--stream", sample_stream, "seed stream")->check(CLI::IsMember({"train", "test"}));
  sample->add_option("-o,--out", sample_out, "output CSV (default: stdout)");

  // evaluate-oracle --------------------------------------------------------
  Common eval_common;
  std::string eval_in, eval_out, eval_stream = "train";
  std::optional<double> eval_noise;
  bool eval_eff = false;
  auto* eval = app.add_subcommand("evaluate-oracle", "Fill output columns with the synthetic oracle");
  eval_common.add_to(eval);
  eval->add_option("-i,--in", eval_in, "input CSV")->required();
  eval->add_option("-o,--out", eval_out, "output CSV (default: stdout)");
  eval->add_option("--stream", eval_stream, "noise stream")->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--noise", eval_noise, "relative noise sigma (overrides the config)");
  eval->add_flag("--efficiency", eval_eff, "also emit the efficiency column");

  // train ----------------------------------------------------------------
  Common train_common;
  std::string train_model, train_data, train_out, train_report;
  auto* train = app.add_subcommand("train", "Fit one model to a dataset");
  train_common.add_to(train);
  train->add_option("-m,--model", train_model, "rsf | rbf | krg | nn | nnda")
      ->required()
      ->check(CLI::IsMember({"rsf", "rbf", "krg", "nn", "nnda"}));
  train->add_option("-d,--data", train_data, "training CSV (augmented CSV with provenance for nnda)")->required();
  train->add_option("-o,--out", train_out, "model JSON")->required();
  train->add_option("--report", train_report, "training-history JSON (networks only)");

  // predict --------------------------------------------------------------
  std::string pred_model, pred_in, pred_out;
  auto* predict = app.add_subcommand("predict", "Evaluate a fitted model on input rows");
  predict->add_option("-m,--model", pred_model, "model JSON")->required();
  predict->add_option("-i,--in", pred_in, "input CSV")->required();
  predict->add_option("-o,--out", pred_out, "output CSV (default: stdout)");

  // compare --------------------------------------------------------------
  Common cmp_common;
  std::string cmp_models, cmp_test, cmp_out, cmp_csv, cmp_plots, cmp_prefix = "comparison";
  auto* cmpc = app.add_subcommand("compare", "Score fitted models on a test set");
  cmp_common.add_to(cmpc);
  cmpc->add_option("--models", cmp_models, "comma-separated model JSON files")->required();
  cmpc->add_option("-t,--test", cmp_test, "test CSV")->required();
  cmpc->add_option("-o,--out", cmp_out, "report JSON (default: stdout)");
  cmpc->add_option("--csv", cmp_csv, "flat report CSV");
  cmpc->add_option("--plots", cmp_plots, "directory for per-objective plot CSVs");
  cmpc->add_option("--plot-prefix", cmp_prefix, "plot file prefix");

  // augment --------------------------------------------------------------
  Common aug_common;
  std::string aug_in, aug_out, aug_pairing;
  std::optional<double> aug_if;
  bool aug_prov = false, aug_force = false;
  auto* aug = app.add_subcommand("augment", "Triple a dataset by nearest-gap interpolation");
  aug_common.add_to(aug);
  aug->add_option("-i,--in", aug_in, "dataset CSV")->required();
  aug->add_option("-o,--out", aug_out, "augmented CSV (default: stdout)");
  aug->add_option("--if", aug_if, "interpolation factor, 0 < IF < 0.5 (default: config)");
  aug->add_option("--pairing", aug_pairing, "plus_minus | independent")
      ->check(CLI::IsMember({"plus_minus", "independent"}));
  aug->add_flag("--provenance", aug_prov, "append #source/#sign comment columns");
  aug->add_flag("--force", aug_force, "allow augmenting an already augmented dataset");

  // sensitivity ----------------------------------------------------------
  Common sens_common;
  std::string sens_defaults, sens_out, sens_rank = "efficiency,head";
  double sens_delta = 0.02;
  auto* sens = app.add_subcommand("sensitivity", "One-at-a-time sensitivity of the oracle responses");
  sens_common.add_to(sens);
  sens->add_option("--defaults", sens_defaults, "'mid' or name=value,... (others at mid)")->required();
  sens->add_option("--perturbation", sens_delta, "relative step");
  sens->add_option("--rank", sens_rank, "responses entering the ranking");
  sens->add_option("-o,--out", sens_out, "report JSON (default: stdout)");

  // pipeline -------------------------------------------------------------
  Common pipe_common;
  std::string pipe_out;
  bool pipe_no_aug = false;
  auto* pipe = app.add_subcommand("pipeline", "Run the whole study and write every artifact");
  pipe_common.add_to(pipe);
  pipe->add_option("-o,--out", pipe_out, "output directory (default: config output.directory)");
  pipe->add_flag("--no-augment", pipe_no_aug, "skip augmentation and NNDA");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sample) {
      auto cfg = sample_common.resolve();
      if (sample->count("--count")) cfg.train_samples = cfg.test_samples = sample_count;
      if (!sample_vars.empty()) cfg.variables = split_list(sample_vars);
      if (sample->count("--count") && sample_count == 0) throw ConfigError("--count must be >= 1");
      const std::size_t count = sample_stream == "test" ? cfg.test_samples : cfg.train_samples;
      if (count < 1) throw ConfigError("sample count must be >= 1");
      const auto space = cfg.design_space();
      for (const auto& v : cfg.variables) {
        if (!space.contains(v)) throw ConfigError("unknown design variable '" + v + "'");
      }
      const auto d = run_stage("sample", [&] { return sample_stage(cfg, sample_stream); });
      emit_csv(d, sample_out, run_metadata(cfg, "sample/" + sample_stream));
    } else if (*eval) {
      auto cfg = eval_common.resolve();
      if (eval_noise) cfg.noise_sigma = *eval_noise;
      if (!(cfg.noise_sigma >= 0.0 && cfg.noise_sigma < 1.0)) throw ConfigError("--noise must lie in [0, 1)");
      const auto inputs = load_csv(eval_in, {.require_outputs = false});
      const auto d = run_stage("evaluate-oracle", [&] {
        if (eval_eff) {
          return SyntheticPumpOracle(cfg.oracle_options("oracle/" + eval_stream)).evaluate(inputs, true);
        }
        return evaluate_stage(cfg, inputs, eval_stream);
      });
      emit_csv(d, eval_out, run_metadata(cfg, "evaluate-oracle/" + eval_stream));
    } else if (*train) {
      const auto cfg = train_common.resolve();
      run_stage("config", [&] { cfg.validate(); });
      TrainedModel t;
      if (train_model == "nnda") {
        const auto doc = load_csv_document(train_data);
        t = run_stage("train nnda", [&] { return train_nnda_stage(cfg, augmented_from_document(doc)); });
      } else {
        const auto data = load_csv(train_data);
        const auto kind = model_kind_from_string(train_model);
        t = run_stage("train " + train_model, [&] { return train_stage(cfg, kind, data); });
      }
      save_predictor(*t.predictor, train_out);
      if (!train_report.empty()) {
        if (t.reports.empty()) throw ConfigError("--report applies to networks only");
        fs::path csv = fs::path(train_report).replace_extension(".csv");
        write_training_report(t.reports, cfg, train_report, csv);
      }
    } else if (*predict) {
      const auto model = load_predictor(pred_model);
      const auto inputs = load_csv(pred_in, {.require_outputs = false});
      const auto d = run_stage("predict", [&] { return model->predict(inputs); });
      CsvMetadata meta;
      meta.lines.push_back("model=" + model->label() + " config_digest=" +
                           model->meta().value("config_digest", std::string("none")) +
                           " seed=" + (model->meta().contains("seed") ? model->meta()["seed"].dump() : "none"));
      emit_csv(d, pred_out, meta);
    } else if (*cmpc) {
      const auto cfg = cmp_common.resolve();
      std::vector<std::unique_ptr<Predictor>> models;
      for (const auto& path : split_list(cmp_models)) models.push_back(load_predictor(path));
      if (models.empty()) throw ConfigError("--models needs at least one file");
      std::vector<const Predictor*> ptrs;
      for (const auto& m : models) ptrs.push_back(m.get());
      const auto test = load_csv(cmp_test);
      auto report = run_stage("compare", [&] { return compare(ptrs, test); });
      report.metadata = run_meta_json(cfg);
      report.metadata["test_digest"] = digest(test);
      emit(report.to_json().dump(2) + "\n", cmp_out);
      if (!cmp_csv.empty()) write_text(cmp_csv, report.to_csv());
      if (!cmp_plots.empty()) write_plots(report, cmp_plots, cmp_prefix);
    } else if (*aug) {
      auto cfg = aug_common.resolve();
      if (aug_if) cfg.augment.interpolation_factor = *aug_if;
      if (!aug_pairing.empty()) cfg.augment.pairing = pairing_from_string(aug_pairing);
      cfg.augment.validate();
      const auto doc = load_csv_document(aug_in, {.require_outputs = false});
      if (is_augmented(doc.meta) && !aug_force) {
        throw ConfigError("input is already augmented; pass --force to augment it again");
      }
      const auto a = run_stage("augment", [&] { return augment_stage(cfg, doc.data); });
      auto meta = run_metadata(cfg, "augmented");
      meta.lines.push_back(std::string(kAugmentedKey) + "=" + format_double(cfg.augment.interpolation_factor) +
                           " pairing=" + std::string(to_string(cfg.augment.pairing)));
      if (aug_prov) meta.comment_columns = provenance_columns(a);
      emit_csv(a.data, aug_out, meta);
    } else if (*sens) {
      const auto cfg = sens_common.resolve();
      const auto space = cfg.design_space();
      const auto x0 = parse_defaults(sens_defaults, space);
      SensitivityOptions opt;
      opt.perturbation = sens_delta;
      opt.ranked_responses = split_list(sens_rank);
      const SyntheticPumpOracle oracle(cfg.oracle_options("oracle/sensitivity"));
      const auto r = run_stage("sensitivity", [&] { return sensitivity(oracle.response_oracle(), space, x0, opt); });
      nlohmann::json j = r;
      j["metadata"] = run_meta_json(cfg);
      emit(j.dump(2) + "\n", sens_out);
    } else if (*pipe) {
      auto cfg = pipe_common.resolve();
      if (pipe_no_aug) cfg.augmentation = false;
      if (!pipe_out.empty()) cfg.output_dir = pipe_out;
      const fs::path dir = resolve_output_dir(cfg.output_dir);
      const auto res = run_pipeline(cfg, dir);
      std::cerr << "pipeline: wrote " << res.manifest["artifacts"].size() << " artifacts to " << dir.string()
                << " (config digest " << cfg.digest().substr(0, 12) << ", seed " << cfg.seed << ")\n";
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
