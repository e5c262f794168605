#include "pumpfit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pumpfit/error.hpp"

namespace pumpfit {
namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) throw DataError("metric inputs differ in length");
  if (a.size() < min_len) throw DataError("metric needs at least " + std::to_string(min_len) + " values");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double nonzero_mean(std::span<const double> reference) {
  const double m = mean(reference);
  if (m == 0.0) throw DataError("reference mean is zero");
  return m;
}

// Scalar metadata entries as "## key=value" lines.
std::string metadata_lines(const nlohmann::json& meta) {
  std::string out;
  for (const auto& [k, v] : meta.items()) {
    if (v.is_structured()) continue;
    out += "## " + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  }
  return out;
}

}  // namespace

double rmse_paper(std::span<const double> reference, std::span<const double> predicted) {
  check_lengths(reference, predicted, 1);
  const double m = nonzero_mean(reference);
  return std::sqrt(sse(reference, predicted)) / (static_cast<double>(reference.size()) * m);
}

double rmse_conventional(std::span<const double> reference, std::span<const double> predicted) {
  check_lengths(reference, predicted, 1);
  const double m = nonzero_mean(reference);
  return std::sqrt(sse(reference, predicted) / static_cast<double>(reference.size())) / m;
}

double r_squared(std::span<const double> reference, std::span<const double> predicted) {
  check_lengths(reference, predicted, 2);
  const double m = mean(reference);
  double total = 0.0;
  for (double y : reference) total += (y - m) * (y - m);
  if (total == 0.0) throw DataError("zero total variance");
  return 1.0 - sse(reference, predicted) / total;
}

double mean_error(std::span<const double> reference, std::span<const double> predicted) {
  check_lengths(reference, predicted, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) s += std::abs(predicted[i] - reference[i]);
  return s / static_cast<double>(reference.size());
}

// ---------------------------------------------------------------------------

const MetricRow& ValidationReport::at(std::string_view model, std::string_view objective) const {
  for (const auto& r : rows) {
    if (r.model == model && r.objective == objective) return r;
  }
  throw DataError("report has no row for " + std::string(model) + "/" + std::string(objective));
}

std::vector<std::string> ValidationReport::models() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

std::vector<std::string> ValidationReport::objectives() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.objective) == out.end()) out.push_back(r.objective);
  }
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    rs.push_back({{"model", r.model},
                  {"objective", r.objective},
                  {"rmse_paper_pct", 100.0 * r.rmse_paper},
                  {"rmse_conventional_pct", 100.0 * r.rmse_conventional},
                  {"r_squared_pct", 100.0 * r.r_squared},
                  {"mean_error", r.mean_error},
                  {"reference", r.reference},
                  {"predicted", r.predicted},
                  {"delta", r.delta}});
  }
  return {{"metadata", metadata}, {"rows", rs}};
}

std::string ValidationReport::to_csv() const {
  std::string out = metadata_lines(metadata);
  out += "model,objective,rmse_paper_pct,rmse_conventional_pct,r_squared_pct,mean_error\n";
  for (const auto& r : rows) {
    out += r.model + "," + r.objective + "," + format_double(100.0 * r.rmse_paper) + "," +
           format_double(100.0 * r.rmse_conventional) + "," + format_double(100.0 * r.r_squared) + "," +
           format_double(r.mean_error) + "\n";
  }
  return out;
}

std::string ValidationReport::plot_csv(std::string_view objective) const {
  std::vector<const MetricRow*> sel;
  for (const auto& r : rows) {
    if (r.objective == objective) sel.push_back(&r);
  }
  if (sel.empty()) throw DataError("report has no objective '" + std::string(objective) + "'");
  std::string out = metadata_lines(metadata);
  out += "sample,reference";
  for (const auto* r : sel) out += "," + r->model + "_predicted," + r->model + "_delta";
  out += "\n";
  for (std::size_t i = 0; i < sel[0]->reference.size(); ++i) {
    out += std::to_string(i) + "," + format_double(sel[0]->reference[i]);
    for (const auto* r : sel) out += "," + format_double(r->predicted[i]) + "," + format_double(r->delta[i]);
    out += "\n";
  }
  return out;
}

ValidationReport compare(std::span<const Predictor* const> models, const Dataset& test) {
  const auto objectives = test.names(Role::output);
  if (objectives.empty()) throw DataError("test data has no output columns");
  ValidationReport report;
  for (const Predictor* p : models) {
    for (const auto& name : p->input_names()) {
      if (!test.has(name) || test.attributes()[test.index_of(name)].role != Role::input) {
        throw DataError("schema mismatch: " + p->label() + " needs input '" + name + "'");
      }
    }
    std::vector<std::size_t> out_pos;
    for (const auto& obj : objectives) {
      const auto& outs = p->output_names();
      const auto it = std::find(outs.begin(), outs.end(), obj);
      if (it == outs.end()) throw DataError("schema mismatch: " + p->label() + " does not predict '" + obj + "'");
      out_pos.push_back(static_cast<std::size_t>(it - outs.begin()));
    }
    const Dataset pred = p->predict(test);
    for (std::size_t k = 0; k < objectives.size(); ++k) {
      MetricRow r;
      r.model = p->label();
      r.objective = objectives[k];
      r.reference = test.column(test.index_of(objectives[k]));
      r.predicted = pred.column(p->input_names().size() + out_pos[k]);
      for (std::size_t i = 0; i < r.reference.size(); ++i) r.delta.push_back(r.predicted[i] - r.reference[i]);
      r.rmse_paper = rmse_paper(r.reference, r.predicted);
      r.rmse_conventional = rmse_conventional(r.reference, r.predicted);
      r.r_squared = r_squared(r.reference, r.predicted);
      r.mean_error = mean_error(r.reference, r.predicted);
      report.rows.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace pumpfit
