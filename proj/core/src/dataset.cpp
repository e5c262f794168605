#include "pumpfit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pumpfit/digest.hpp"
#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {

std::string_view to_string(Role role) { return role == Role::input ? "in" : "out"; }

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<AttributeSpec> attributes, std::vector<double> values)
    : attributes_(std::move(attributes)), values_(std::move(values)) {
  validate();
}

Dataset::Dataset(std::vector<AttributeSpec> attributes,
                 const std::vector<std::vector<double>>& rows)
    : attributes_(std::move(attributes)) {
  values_.reserve(rows.size() * attributes_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != attributes_.size()) {
      throw DataError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " values for " + std::to_string(attributes_.size()) + " attributes");
    }
    values_.insert(values_.end(), rows[i].begin(), rows[i].end());
  }
  validate();
}

void Dataset::validate() const {
  if (attributes_.empty()) throw DataError("dataset has no attributes");
  std::set<std::string_view> seen;
  bool any_input = false;
  for (const auto& a : attributes_) {
    if (a.name.empty()) throw DataError("empty attribute name");
    if (!seen.insert(a.name).second) throw DataError("duplicate attribute name '" + a.name + "'");
    any_input = any_input || a.role == Role::input;
  }
  if (!any_input) throw DataError("dataset has no input attribute");
  if (values_.size() % attributes_.size() != 0) {
    throw DataError("value count is not a multiple of the attribute count");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DataError("non-finite value in row " + std::to_string(k / attributes_.size()) +
                      ", attribute '" + attributes_[k % attributes_.size()].name + "'");
    }
  }
}

std::span<const double> Dataset::row(std::size_t i) const {
  return {values_.data() + i * attributes_.size(), attributes_.size()};
}

bool Dataset::has(std::string_view name) const {
  return std::any_of(attributes_.begin(), attributes_.end(),
                     [&](const AttributeSpec& a) { return a.name == name; });
}

std::size_t Dataset::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < attributes_.size(); ++k) {
    if (attributes_[k].name == name) return k;
  }
  throw DataError("unknown attribute '" + std::string(name) + "'");
}

std::vector<std::size_t> Dataset::indices(Role role) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < attributes_.size(); ++k) {
    if (attributes_[k].role == role) out.push_back(k);
  }
  return out;
}

std::vector<std::string> Dataset::names(Role role) const {
  std::vector<std::string> out;
  for (const auto& a : attributes_) {
    if (a.role == role) out.push_back(a.name);
  }
  return out;
}

std::vector<double> Dataset::column(std::size_t attribute) const {
  std::vector<double> out(n_rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, attribute);
  return out;
}

Eigen::MatrixXd Dataset::matrix(const std::vector<std::size_t>& attribute_indices) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n_rows()),
                    static_cast<Eigen::Index>(attribute_indices.size()));
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (std::size_t j = 0; j < attribute_indices.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, attribute_indices[j]);
    }
  }
  return m;
}

Eigen::MatrixXd Dataset::matrix(Role role) const { return matrix(indices(role)); }

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> v;
  v.reserve(rows.size() * attributes_.size());
  for (std::size_t r : rows) {
    if (r >= n_rows()) throw DataError("row index " + std::to_string(r) + " out of range");
    auto src = row(r);
    v.insert(v.end(), src.begin(), src.end());
  }
  return Dataset(attributes_, std::move(v));
}

Dataset Dataset::concat(const Dataset& other) const {
  if (other.attributes_ != attributes_) throw DataError("cannot concatenate datasets with different schemas");
  std::vector<double> v = values_;
  v.insert(v.end(), other.values_.begin(), other.values_.end());
  return Dataset(attributes_, std::move(v));
}

std::string digest(const Dataset& d) { return sha256_hex(to_csv(d)); }

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0, number = 1;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    auto end = pos == std::string_view::npos ? text.size() : pos;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back({number, line});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
    ++number;
  }
  return lines;
}

bool is_comment_column(std::string_view name) { return !name.empty() && name.front() == '#'; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  return std::string(buf, res.ptr);
}

std::optional<std::string> CsvMetadata::value(std::string_view key) const {
  for (const auto& line : lines) {
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const auto token = rest.substr(0, sp);
      if (token.size() > key.size() && token.starts_with(key) && token[key.size()] == '=') {
        return std::string(token.substr(key.size() + 1));
      }
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
  }
  return std::nullopt;
}

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  return parse_csv_document(text, options).data;
}

CsvDocument parse_csv_document(std::string_view text, const CsvOptions& options) {
  CsvDocument doc;
  auto lines = split_lines(text);
  std::size_t pos = 0;
  for (; pos < lines.size() && lines[pos].text.starts_with("##"); ++pos) {
    doc.meta.lines.emplace_back(trim(lines[pos].text.substr(2)));
  }
  if (lines.size() < pos + 2) throw DataError("csv needs a header row and a role row");

  const auto header = split_cells(lines[pos].text);
  const auto roles = split_cells(lines[pos + 1].text);
  if (roles.size() != header.size()) {
    throw DataError("ragged row at line " + std::to_string(lines[pos + 1].number));
  }
  pos += 2;

  std::vector<std::string_view> units;
  if (pos < lines.size() && lines[pos].text.starts_with('#')) {
    units = split_cells(lines[pos].text.substr(1));
    if (units.size() != header.size()) {
      throw DataError("ragged row at line " + std::to_string(lines[pos].number));
    }
    ++pos;
  }

  std::vector<AttributeSpec> attrs;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> comment;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (is_comment_column(header[c])) {
      comment.push_back(c);
      doc.meta.comment_columns.push_back({std::string(header[c]), {}});
      continue;
    }
    AttributeSpec a;
    a.name = std::string(header[c]);
    if (roles[c] == "in") {
      a.role = Role::input;
    } else if (roles[c] == "out") {
      a.role = Role::output;
    } else {
      throw DataError("bad role tag '" + std::string(roles[c]) + "' for column '" + a.name +
                      "' (expected 'in' or 'out')");
    }
    if (!units.empty()) a.unit = std::string(units[c]);
    attrs.push_back(std::move(a));
    keep.push_back(c);
  }
  if (std::none_of(attrs.begin(), attrs.end(), [](auto& a) { return a.role == Role::input; })) {
    throw DataError("csv declares no input attribute");
  }
  if (options.require_outputs &&
      std::none_of(attrs.begin(), attrs.end(), [](auto& a) { return a.role == Role::output; })) {
    throw DataError("csv declares no output attribute");
  }

  std::vector<double> values;
  for (; pos < lines.size(); ++pos) {
    const auto cells = split_cells(lines[pos].text);
    if (cells.size() != header.size()) {
      throw DataError("ragged row at line " + std::to_string(lines[pos].number));
    }
    for (std::size_t c : keep) {
      double v = 0.0;
      auto cell = cells[c];
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw DataError("non-numeric cell '" + std::string(cells[c]) + "' at line " +
                        std::to_string(lines[pos].number));
      }
      values.push_back(v);
    }
    for (std::size_t k = 0; k < comment.size(); ++k) {
      doc.meta.comment_columns[k].cells.emplace_back(cells[comment[k]]);
    }
  }
  doc.data = Dataset(std::move(attrs), std::move(values));
  return doc;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), options);
}

CsvDocument load_csv_document(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv_document(ss.str(), options);
}

std::string to_csv(const Dataset& d, const CsvMetadata& meta) {
  std::string out;
  for (const auto& m : meta.lines) out += "## " + m + "\n";
  const auto& attrs = d.attributes();
  const auto& extra = meta.comment_columns;
  for (const auto& c : extra) {
    if (!is_comment_column(c.name)) throw DataError("comment column '" + c.name + "' must start with '#'");
    if (c.cells.size() != d.n_rows()) throw DataError("comment column '" + c.name + "' has the wrong length");
  }
  auto join = [&](auto&& field, auto&& extra_field) {
    for (std::size_t k = 0; k < attrs.size(); ++k) {
      if (k) out += ',';
      out += field(attrs[k]);
    }
    for (const auto& c : extra) out += ',' + extra_field(c);
    out += '\n';
  };
  join([](const AttributeSpec& a) { return a.name; }, [](const auto& c) { return c.name; });
  join([](const AttributeSpec& a) { return std::string(to_string(a.role)); }, [](const auto&) { return std::string("-"); });
  if (std::any_of(attrs.begin(), attrs.end(), [](auto& a) { return !a.unit.empty(); })) {
    out += '#';
    join([](const AttributeSpec& a) { return a.unit; }, [](const auto&) { return std::string(); });
  }
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    auto r = d.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out += ',';
      out += format_double(r[k]);
    }
    for (const auto& c : extra) out += ',' + c.cells[i];
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const CsvMetadata& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_csv(d, meta);
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw DataError("split fractions must be nonnegative");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1");
  }
}

SplitIndices split_indices(std::size_t n_rows, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "split"));
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto n = static_cast<double>(n_rows);
  auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * n));
  auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * n));
  if (n_val + n_test > n_rows) n_test = n_rows - n_val;

  SplitIndices out;
  out.val.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val),
                  perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split split(const Dataset& d, const SplitSpec& spec) {
  if (d.n_rows() < 3) throw DataError("split needs at least 3 rows");
  Split s;
  s.indices = split_indices(d.n_rows(), spec);
  s.train = d.select_rows(s.indices.train);
  s.val = d.select_rows(s.indices.val);
  s.test = d.select_rows(s.indices.test);
  return s;
}

// ---------------------------------------------------------------------------
// Normalization

Normalizer::Normalizer(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw DataError("normalizer min/max size mismatch");
  for (std::size_t k = 0; k < min_.size(); ++k) {
    if (!(max_[k] >= min_[k])) throw DataError("normalizer max < min");
  }
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& m) {
  std::vector<double> lo(static_cast<std::size_t>(m.cols())), hi(lo.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m.rows() == 0) throw DataError("cannot fit a normalizer on zero rows");
    lo[static_cast<std::size_t>(j)] = m.col(j).minCoeff();
    hi[static_cast<std::size_t>(j)] = m.col(j).maxCoeff();
  }
  return Normalizer(std::move(lo), std::move(hi));
}

double Normalizer::apply(double v, std::size_t k) const {
  const double span = max_[k] - min_[k];
  if (span == 0.0) return 0.0;
  return 2.0 * (v - min_[k]) / span - 1.0;
}

double Normalizer::invert(double v, std::size_t k) const {
  const double span = max_[k] - min_[k];
  if (span == 0.0) return min_[k];
  return min_[k] + 0.5 * (v + 1.0) * span;
}

std::vector<double> Normalizer::apply(std::span<const double> v) const {
  if (v.size() != size()) throw DataError("normalizer dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = apply(v[k], k);
  return out;
}

std::vector<double> Normalizer::invert(std::span<const double> v) const {
  if (v.size() != size()) throw DataError("normalizer dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = invert(v[k], k);
  return out;
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& m) const {
  if (static_cast<std::size_t>(m.cols()) != size()) throw DataError("normalizer dimension mismatch");
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = apply(m(i, j), static_cast<std::size_t>(j));
  return out;
}

Eigen::MatrixXd Normalizer::invert(const Eigen::MatrixXd& m) const {
  if (static_cast<std::size_t>(m.cols()) != size()) throw DataError("normalizer dimension mismatch");
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = invert(m(i, j), static_cast<std::size_t>(j));
  return out;
}

Normalizer fit_normalizer(const Dataset& d) {
  std::vector<std::size_t> all(d.n_attributes());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return Normalizer::fit(d.matrix(all));
}

Normalizer fit_normalizer(const Dataset& d, Role role) { return Normalizer::fit(d.matrix(role)); }

Dataset apply(const Normalizer& n, const Dataset& d) {
  if (n.size() != d.n_attributes()) throw DataError("normalizer does not match dataset");
  std::vector<double> v(d.values().size());
  for (std::size_t i = 0; i < d.n_rows(); ++i)
    for (std::size_t k = 0; k < d.n_attributes(); ++k) v[i * d.n_attributes() + k] = n.apply(d.at(i, k), k);
  return Dataset(d.attributes(), std::move(v));
}

Dataset invert(const Normalizer& n, const Dataset& d) {
  if (n.size() != d.n_attributes()) throw DataError("normalizer does not match dataset");
  std::vector<double> v(d.values().size());
  for (std::size_t i = 0; i < d.n_rows(); ++i)
    for (std::size_t k = 0; k < d.n_attributes(); ++k) v[i * d.n_attributes() + k] = n.invert(d.at(i, k), k);
  return Dataset(d.attributes(), std::move(v));
}

}  // namespace pumpfit
