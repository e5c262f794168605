#include "pumpfit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pumpfit/digest.hpp"
#include "pumpfit/oracle.hpp"

namespace pumpfit {
namespace fs = std::filesystem;

StageError::StageError(std::string stage, Cause cause, const std::string& what)
    : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)), cause_(cause) {}

Dataset sample_stage(const RunConfig& cfg, std::string_view stream) {
  const std::size_t count = stream == "test" ? cfg.test_samples : cfg.train_samples;
  return lhs_sample(cfg.design_space(), cfg.variables, count, cfg.stream_seed("lhs/" + std::string(stream)));
}

Dataset evaluate_stage(const RunConfig& cfg, const Dataset& inputs, std::string_view stream) {
  return SyntheticPumpOracle(cfg.oracle_options("oracle/" + std::string(stream))).evaluate(inputs);
}

SplitIndices nn_split_indices(const RunConfig& cfg, std::size_t rows) {
  SplitSpec s = cfg.split;
  s.seed = cfg.stream_seed("split");
  return split_indices(rows, s);
}

namespace {

SurrogateOptions seeded_surrogate(const RunConfig& cfg) {
  SurrogateOptions o = cfg.surrogate;
  o.rbf.seed = cfg.stream_seed("rbf");
  o.krg.seed = cfg.stream_seed("kriging");
  return o;
}

NeuralOptions seeded_neural(const RunConfig& cfg) {
  NeuralOptions o = cfg.neural;
  // NN and NNDA share initial weights so their comparison isolates the data.
  o.train.seed = cfg.stream_seed("nn");
  return o;
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace

TrainedModel train_stage(const RunConfig& cfg, ModelKind kind, const Dataset& train) {
  TrainedModel t;
  if (kind == ModelKind::nn) {
    const auto idx = nn_split_indices(cfg, train.n_rows());
    auto fit = fit_neural(train.select_rows(idx.train), train.select_rows(idx.val), seeded_neural(cfg));
    t.predictor = std::move(fit.predictor);
    t.reports = std::move(fit.reports);
  } else {
    t.predictor = std::make_unique<SurrogatePredictor>(fit_surrogate(kind, train, seeded_surrogate(cfg)));
  }
  t.predictor->set_meta(run_meta_json(cfg));
  return t;
}

AugmentedDataset augment_stage(const RunConfig& cfg, const Dataset& train) {
  AugmentConfig a = cfg.augment;
  a.seed = cfg.stream_seed("augment");
  return augment(train, a);
}

TrainedModel train_nnda_stage(const RunConfig& cfg, const AugmentedDataset& augmented) {
  const auto idx = nn_split_indices(cfg, augmented.original.n_rows());
  const std::set<std::size_t> train_rows(idx.train.begin(), idx.train.end());
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < augmented.provenance.size(); ++r) {
    if (train_rows.count(augmented.provenance[r].source)) rows.push_back(r);
  }
  auto fit = fit_neural(augmented.data.select_rows(rows), augmented.original.select_rows(idx.val), seeded_neural(cfg));
  TrainedModel t;
  t.predictor = std::move(fit.predictor);
  t.predictor->set_label("NNDA");
  t.predictor->set_meta(run_meta_json(cfg));
  t.reports = std::move(fit.reports);
  return t;
}

nlohmann::json run_meta_json(const RunConfig& cfg) {
  return {{"config_digest", cfg.digest()}, {"seed", cfg.seed}};
}

CsvMetadata run_metadata(const RunConfig& cfg, std::string_view artifact) {
  CsvMetadata m;
  m.lines.push_back("config_digest=" + cfg.digest() + " seed=" + std::to_string(cfg.seed) + " artifact=" +
                    std::string(artifact));
  return m;
}

const Predictor& PipelineResult::model(std::string_view label) const {
  if (nnda && nnda->label() == label) return *nnda;
  for (const auto& m : models) {
    if (m->label() == label) return *m;
  }
  throw DataError("pipeline has no model '" + std::string(label) + "'");
}

// ---------------------------------------------------------------------------
// Writers

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

void write_report(const ValidationReport& r, const fs::path& json_path, const fs::path& csv_path) {
  write_text(json_path, r.to_json().dump(2) + "\n");
  write_text(csv_path, r.to_csv());
}

void write_plots(const ValidationReport& r, const fs::path& dir, std::string_view prefix) {
  for (const auto& obj : r.objectives()) {
    write_text(dir / (std::string(prefix) + "_" + obj + ".csv"), r.plot_csv(obj));
  }
}

void write_training_report(const std::vector<TrainReport>& reports, const RunConfig& cfg, const fs::path& json_path,
                           const fs::path& csv_path) {
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& r : reports) nets.push_back(to_json(r));
  write_text(json_path, nlohmann::json{{"metadata", run_meta_json(cfg)}, {"networks", nets}}.dump(2) + "\n");

  std::string csv;
  for (const auto& line : run_metadata(cfg, "training").lines) csv += "## " + line + "\n";
  csv += "network,epoch,objective,performance,data_error,weight_error,gradient,mu,gamma,alpha,beta,val_performance,"
         "objective_rose\n";
  for (std::size_t n = 0; n < reports.size(); ++n) {
    for (const auto& e : reports[n].epochs) {
      csv += std::to_string(n) + "," + std::to_string(e.epoch) + "," + format_double(e.objective) + "," +
             format_double(e.performance) + "," + format_double(e.data_error) + "," + format_double(e.weight_error) +
             "," + format_double(e.gradient_norm) + "," + format_double(e.mu) + "," + format_double(e.gamma) + "," +
             format_double(e.alpha) + "," + format_double(e.beta) + "," + format_double(e.val_performance) + "," +
             (e.objective_rose ? "1" : "0") + "\n";
    }
  }
  write_text(csv_path, csv);
}

// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const RunConfig& cfg, const std::optional<fs::path>& out) {
  run_stage("config", [&] { cfg.validate(); });
  PipelineResult res;

  const Dataset train_x = run_stage("sample", [&] { return sample_stage(cfg, "train"); });
  const Dataset test_x = run_stage("sample", [&] { return sample_stage(cfg, "test"); });
  res.train = run_stage("evaluate-oracle", [&] { return evaluate_stage(cfg, train_x, "train"); });
  res.test = run_stage("evaluate-oracle", [&] { return evaluate_stage(cfg, test_x, "test"); });
  res.nn_split = nn_split_indices(cfg, res.train.n_rows());

  for (ModelKind kind : cfg.models) {
    auto t = run_stage("train " + std::string(to_string(kind)), [&] { return train_stage(cfg, kind, res.train); });
    if (kind == ModelKind::nn) res.nn_reports = std::move(t.reports);
    res.models.push_back(std::move(t.predictor));
  }

  std::vector<const Predictor*> ptrs;
  for (const auto& m : res.models) ptrs.push_back(m.get());
  const auto meta = [&] {
    auto j = run_meta_json(cfg);
    j["train_digest"] = digest(res.train);
    j["test_digest"] = digest(res.test);
    return j;
  };
  res.comparison = run_stage("compare", [&] { return compare(ptrs, res.test); });
  res.comparison.metadata = meta();

  if (cfg.augmentation) {
    res.augmented = run_stage("augment", [&] { return augment_stage(cfg, res.train); });
    auto t = run_stage("train nnda", [&] { return train_nnda_stage(cfg, *res.augmented); });
    res.nnda = std::move(t.predictor);
    res.nnda_reports = std::move(t.reports);
    const Predictor* pair[] = {&res.model("NN"), res.nnda.get()};
    res.augmentation = run_stage("compare", [&] { return compare(pair, res.test); });
    res.augmentation->metadata = meta();
    res.augmentation->metadata["augmented_digest"] = digest(res.augmented->data);
    res.augmentation->metadata["interpolation_factor"] = cfg.augment.interpolation_factor;
    res.augmentation->metadata["pairing"] = std::string(to_string(cfg.augment.pairing));
  }

  nlohmann::json split = {{"train", res.nn_split.train}, {"val", res.nn_split.val}, {"test", res.nn_split.test}};
  res.manifest = {{"metadata", run_meta_json(cfg)}, {"config", cfg.to_json()}, {"nn_split", split}};
  res.manifest["config"].erase("output");

  if (!out) return res;
  run_stage("write", [&] {
    const fs::path dir = *out;
    std::vector<std::string> written;
    auto at = [&](const std::string& rel) {
      written.push_back(rel);
      return dir / rel;
    };
    save_csv(res.train, at("dataset/train.csv"), run_metadata(cfg, "train"));
    save_csv(res.test, at("dataset/test.csv"), run_metadata(cfg, "test"));
    for (const auto& m : res.models) save_predictor(*m, at("models/" + std::string(to_string(m->kind())) + ".json"));
    write_report(res.comparison, at("reports/comparison.json"), at("reports/comparison.csv"));
    for (const auto& obj : res.comparison.objectives()) {
      write_text(at("plots/comparison_" + obj + ".csv"), res.comparison.plot_csv(obj));
    }
    if (!res.nn_reports.empty()) {
      write_training_report(res.nn_reports, cfg, at("reports/training_nn.json"), at("plots/training_nn.csv"));
    }
    if (res.augmented) {
      auto m = run_metadata(cfg, "augmented");
      m.lines.push_back(std::string(kAugmentedKey) + "=" + format_double(cfg.augment.interpolation_factor) +
                        " pairing=" + std::string(to_string(cfg.augment.pairing)));
      m.comment_columns = provenance_columns(*res.augmented);
      save_csv(res.augmented->data, at("dataset/augmented.csv"), m);
      save_predictor(*res.nnda, at("models/nnda.json"));
      write_report(*res.augmentation, at("reports/augmentation.json"), at("reports/augmentation.csv"));
      for (const auto& obj : res.augmentation->objectives()) {
        write_text(at("plots/augmentation_" + obj + ".csv"), res.augmentation->plot_csv(obj));
      }
      write_training_report(res.nnda_reports, cfg, at("reports/training_nnda.json"), at("plots/training_nnda.csv"));
    }

    // File digests let a reader confirm the artifacts belong to this run.
    std::sort(written.begin(), written.end());
    nlohmann::json files = nlohmann::json::object();
    for (const auto& rel : written) files[rel] = file_digest(dir / rel);
    res.manifest["artifacts"] = files;
    write_text(dir / "reports/run.json", res.manifest.dump(2) + "\n");
  });
  return res;
}

}  // namespace pumpfit
