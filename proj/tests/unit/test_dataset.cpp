#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "pumpfit/dataset.hpp"
#include "pumpfit/error.hpp"
#include "test_util.hpp"

using namespace pumpfit;
using pumpfit::testing::random_dataset;
using pumpfit::testing::TempDir;

namespace {

Dataset two_by_two() {
  return Dataset({{"a", Role::input, "m"}, {"b", Role::output, "kW"}}, std::vector<double>{1, 2, 3, 4});
}

std::string five_col_csv(std::size_t rows) {
  std::string s = "D2,b2,beta2,head,power\nin,in,in,out,out\n#m,m,deg,m,kW\n";
  for (std::size_t i = 0; i < rows; ++i) {
    s += std::to_string(0.27 + 0.0001 * i) + ",0.01,20," + std::to_string(80 + i) + ",30\n";
  }
  return s;
}

}  // namespace

TEST(Dataset, RejectsDuplicateNames) {
  EXPECT_THROW(Dataset({{"a", Role::input, ""}, {"a", Role::output, ""}}, std::vector<double>{1, 2}), DataError);
}

TEST(Dataset, RejectsNonFiniteValues) {
  EXPECT_THROW(Dataset({{"a", Role::input, ""}}, std::vector<double>{1, std::nan("")}), DataError);
}

TEST(Dataset, RejectsRaggedRows) {
  std::vector<std::vector<double>> rows{{1, 2}, {3}};
  EXPECT_THROW(Dataset({{"a", Role::input, ""}, {"b", Role::output, ""}}, rows), DataError);
}

TEST(Dataset, RequiresAnInput) {
  EXPECT_THROW(Dataset({{"y", Role::output, ""}}, std::vector<double>{1}), DataError);
}

TEST(Dataset, RoleQueries) {
  const auto d = random_dataset(4, 3, 2, 1);
  EXPECT_EQ(d.count(Role::input), 3u);
  EXPECT_EQ(d.count(Role::output), 2u);
  EXPECT_EQ(d.names(Role::output), (std::vector<std::string>{"y0", "y1"}));
  EXPECT_EQ(d.matrix(Role::input).cols(), 3);
  EXPECT_EQ(d.index_of("y1"), 4u);
  EXPECT_THROW(d.index_of("nope"), DataError);
}

TEST(Dataset, ConcatNeedsMatchingSchema) {
  const auto d = two_by_two();
  EXPECT_EQ(d.concat(d).n_rows(), 4u);
  EXPECT_THROW(d.concat(random_dataset(2, 1, 1, 0)), DataError);
}

// ---------------------------------------------------------------------------
// CSV

TEST(Csv, LoadsDeclaredShape) {
  const auto d = parse_csv(five_col_csv(60));
  EXPECT_EQ(d.n_attributes(), 5u);
  EXPECT_EQ(d.n_rows(), 60u);
  EXPECT_EQ(d.attributes()[2].unit, "deg");
  EXPECT_EQ(d.attributes()[3].role, Role::output);
}

TEST(Csv, RaggedRowNamesTheLine) {
  auto text = five_col_csv(2) + "1,2,3,4\n";
  try {
    parse_csv(text);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "ragged row at line 6");
  }
}

TEST(Csv, RejectsNonNumericCell) {
  EXPECT_THROW(parse_csv("a,b\nin,out\n1,x\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\nin,out\n1,2,5\n"), DataError);
}

TEST(Csv, RejectsDuplicateHeaders) { EXPECT_THROW(parse_csv("a,a\nin,out\n1,2\n"), DataError); }

TEST(Csv, RequiresBothRolesUnlessRelaxed) {
  EXPECT_THROW(parse_csv("a,b\nin,in\n1,2\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\nout,out\n1,2\n"), DataError);
  EXPECT_EQ(parse_csv("a,b\nin,in\n1,2\n", {.require_outputs = false}).n_rows(), 1u);
}

TEST(Csv, AcceptsCrlfAndEmitsLf) {
  const auto d = parse_csv("a,b\r\nin,out\r\n1.5,2\r\n");
  EXPECT_EQ(d.at(0, 0), 1.5);
  const auto text = to_csv(d);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Csv, MissingFileIsDataError) { EXPECT_THROW(load_csv("/nonexistent/file.csv"), DataError); }

TEST(Csv, RoundTripIsExactOnRandomTables) {
  TempDir tmp;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto d = random_dataset(17, 3, 2, seed, -1e6, 1e6);
    const auto p = tmp / ("t" + std::to_string(seed) + ".csv");
    save_csv(d, p);
    const auto back = load_csv(p);
    EXPECT_EQ(back, d);
    save_csv(back, p);
    EXPECT_EQ(load_csv(p), d);
  }
}

TEST(Csv, FormatDoubleRoundTripsExtremes) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5e-7, 123456789.123456789}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Csv, MetadataAndCommentColumnsSurvive) {
  const auto d = two_by_two();
  CsvMetadata meta;
  meta.lines = {"config_digest=abc seed=3", "augmented=0.025"};
  meta.comment_columns = {{"#source", {"0", "1"}}};
  const auto doc = parse_csv_document(to_csv(d, meta));
  EXPECT_EQ(doc.data, d);
  EXPECT_EQ(doc.meta.lines, meta.lines);
  EXPECT_EQ(doc.meta.value("seed"), "3");
  EXPECT_EQ(doc.meta.value("augmented"), "0.025");
  EXPECT_FALSE(doc.meta.value("missing").has_value());
  ASSERT_EQ(doc.meta.comment_columns.size(), 1u);
  EXPECT_EQ(doc.meta.comment_columns[0].cells, (std::vector<std::string>{"0", "1"}));
}

TEST(Csv, CommentColumnMustMatchRowCount) {
  CsvMetadata meta;
  meta.comment_columns = {{"#source", {"0"}}};
  EXPECT_THROW(to_csv(two_by_two(), meta), DataError);
  meta.comment_columns = {{"source", {"0", "1"}}};
  EXPECT_THROW(to_csv(two_by_two(), meta), DataError);
}

// ---------------------------------------------------------------------------
// Split

TEST(Split, SixtyRowsGivePaperSizes) {
  const auto s = split_indices(60, {0.8, 0.1, 0.1, 7});
  EXPECT_EQ(s.train.size(), 48u);
  EXPECT_EQ(s.val.size(), 6u);
  EXPECT_EQ(s.test.size(), 6u);
}

TEST(Split, AllTrain) {
  const auto d = random_dataset(10, 2, 1, 3);
  const auto s = split(d, {1.0, 0.0, 0.0, 0});
  EXPECT_EQ(s.train.n_rows(), 10u);
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(Split, RemainderGoesToTrain) {
  // round(0.15·7) = 1 each for val and test.
  const auto s = split_indices(7, {0.7, 0.15, 0.15, 1});
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.train.size(), 5u);
}

TEST(Split, DeterministicAndSeedSensitive) {
  std::set<std::vector<std::size_t>> distinct;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SplitSpec spec{0.8, 0.1, 0.1, seed};
    const auto a = split_indices(60, spec), b = split_indices(60, spec);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.train.size(), 48u);
    distinct.insert(a.val);
  }
  EXPECT_GT(distinct.size(), 90u);
}

TEST(Split, PartitionIsDisjointAndExhaustive) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = split_indices(23, {0.6, 0.2, 0.2, seed});
    std::vector<std::size_t> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
      all.insert(all.end(), part->begin(), part->end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(23);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    EXPECT_EQ(all, expect);
  }
}

TEST(Split, RowsFollowIndices) {
  const auto d = random_dataset(30, 2, 1, 9);
  const auto s = split(d, {0.8, 0.1, 0.1, 4});
  for (std::size_t i = 0; i < s.indices.val.size(); ++i) {
    const auto a = s.val.row(i), b = d.row(s.indices.val[i]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Split, InvalidFractions) {
  EXPECT_THROW(split_indices(10, {0.5, 0.1, 0.1, 0}), DataError);
  EXPECT_THROW(split_indices(10, {1.2, -0.1, -0.1, 0}), DataError);
  EXPECT_THROW(split(random_dataset(2, 1, 1, 0), {}), DataError);
}

// ---------------------------------------------------------------------------
// Normalizer

TEST(Normalizer, MapsRangeOntoUnitInterval) {
  Eigen::MatrixXd m(2, 1);
  m << 2, 4;
  const auto n = Normalizer::fit(m);
  EXPECT_EQ(n.apply(2.0, 0), -1.0);
  EXPECT_EQ(n.apply(4.0, 0), 1.0);
  EXPECT_EQ(n.apply(3.0, 0), 0.0);
  // No clamping outside the fitted range.
  EXPECT_DOUBLE_EQ(n.apply(6.0, 0), 3.0);
}

TEST(Normalizer, ConstantColumnMapsToZero) {
  Eigen::MatrixXd m(3, 1);
  m << 5, 5, 5;
  const auto n = Normalizer::fit(m);
  EXPECT_EQ(n.apply(5.0, 0), 0.0);
  EXPECT_EQ(n.invert(0.0, 0), 5.0);
}

TEST(Normalizer, RoundTripOnRandomTables) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto d = random_dataset(40, 3, 2, seed, -100.0, 100.0);
    const auto n = fit_normalizer(d);
    const auto back = invert(n, apply(n, d));
    for (std::size_t k = 0; k < d.values().size(); ++k) {
      EXPECT_NEAR(back.values()[k], d.values()[k], 1e-12);
    }
  }
}

TEST(Normalizer, RoleRestricted) {
  const auto d = random_dataset(10, 3, 2, 2);
  EXPECT_EQ(fit_normalizer(d, Role::input).size(), 3u);
  EXPECT_EQ(fit_normalizer(d, Role::output).size(), 2u);
  EXPECT_THROW(apply(fit_normalizer(d, Role::input), d), DataError);
}

TEST(Digest, SensitiveToEveryValue) {
  const auto d = random_dataset(5, 2, 1, 0);
  auto v = d.values();
  v[7] = std::nextafter(v[7], 1e9);
  const Dataset e(d.attributes(), v);
  EXPECT_EQ(digest(d), digest(d));
  EXPECT_NE(digest(d), digest(e));
  EXPECT_EQ(digest(d).size(), 64u);
}
