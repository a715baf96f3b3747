#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/data/csv.hpp"
#include "ptgnn/data/features.hpp"
#include "ptgnn/data/preprocess.hpp"
#include "ptgnn/data/synth.hpp"
#include "test_support.hpp"

using namespace ptgnn;
using namespace ptgnn::data;
using testsupport::TempDir;

namespace {

void write_rows(const std::filesystem::path& p, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  std::ofstream out(p);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

std::vector<double> row_with_target(double q_over_pt, double base = 0.1) {
  std::vector<double> r(kRawFeatures + 1);
  for (std::size_t i = 0; i < kRawFeatures; ++i) r[i] = base * static_cast<double>(i + 1);
  r.back() = q_over_pt;
  return r;
}

// Pearson correlation, computed directly.
double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("canonical schema has 31 features and the target") {
  const auto& cols = canonical_columns();
  REQUIRE(cols.size() == kRawFeatures + 1);
  CHECK(cols.back() == "q_over_pt");
  CHECK(std::set<std::string>(cols.begin(), cols.end()).size() == cols.size());
}

TEST_CASE("parse_csv") {
  TempDir dir("csv");
  SUBCASE("three well-formed rows") {
    write_rows(dir / "a.csv", canonical_columns(), {row_with_target(0.5), row_with_target(-0.25), row_with_target(0.1)});
    const auto t = parse_csv(dir / "a.csv");
    CHECK(t.rows.size() == 3);
    CHECK(t.dropped == 0);
    CHECK(t.rows[1].q_over_pt == -0.25);
    CHECK(t.rows[0].station_features[3] == doctest::Approx(0.4));
    CHECK(t.rows[0].road_features[0] == doctest::Approx(2.9));
  }
  SUBCASE("zero q/pT row is dropped and counted") {
    write_rows(dir / "b.csv", canonical_columns(), {row_with_target(0.5), row_with_target(0.0), row_with_target(0.1)});
    const auto t = parse_csv(dir / "b.csv");
    CHECK(t.rows.size() == 2);
    CHECK(t.dropped == 1);
  }
  SUBCASE("30 feature columns is a header mismatch") {
    auto header = canonical_columns();
    header.erase(header.begin() + 5);
    std::vector<double> r = row_with_target(0.5);
    r.erase(r.begin() + 5);
    write_rows(dir / "c.csv", header, {r});
    CHECK_THROWS_AS(parse_csv(dir / "c.csv"), DataError);
  }
  SUBCASE("short row") {
    std::vector<double> r = row_with_target(0.5);
    r.pop_back();
    write_rows(dir / "d.csv", canonical_columns(), {r});
    CHECK_THROWS_AS(parse_csv(dir / "d.csv"), DataError);
  }
  SUBCASE("missing file names the path") {
    try {
      parse_csv(dir / "nope.csv");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
    }
  }
  SUBCASE("schema mapping reorders foreign headers") {
    auto foreign = canonical_columns();
    for (auto& c : foreign) c = "x_" + c;
    std::vector<std::string> header(foreign.rbegin(), foreign.rend());
    header.push_back("extra");
    std::vector<double> r = row_with_target(0.5);
    std::vector<double> reversed(r.rbegin(), r.rend());
    reversed.push_back(123.0);
    write_rows(dir / "e.csv", header, {reversed});
    {
      std::ofstream m(dir / "schema.txt");
      m << "# foreign layout\n";
      for (const auto& c : foreign) m << c << '\n';
    }
    const auto t = parse_csv(dir / "e.csv", CsvSchema::load(dir / "schema.txt"));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].q_over_pt == 0.5);
    CHECK(t.rows[0].station_features[0] == r[0]);
  }
  SUBCASE("write then parse is lossless") {
    const auto table = synth_generate(50, 3);
    write_csv(dir / "s.csv", table);
    const auto back = parse_csv(dir / "s.csv");
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      CHECK(back.rows[i].station_features == table.rows[i].station_features);
      CHECK(back.rows[i].road_features == table.rows[i].road_features);
      CHECK(back.rows[i].q_over_pt == table.rows[i].q_over_pt);
    }
  }
}

TEST_CASE("compute_target_pt") {
  CHECK(compute_target_pt(-0.5) == 2.0);
  CHECK(compute_target_pt(0.1) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(compute_target_pt(0.0), DataError);
  CHECK_THROWS_AS(compute_target_pt(std::nan("")), DataError);
}

TEST_CASE("eta_from_theta") {
  CHECK(std::abs(eta_from_theta(M_PI / 2)) < 1e-15);
  CHECK(eta_from_theta(2 * std::atan(std::exp(-1.0))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eta_from_theta(2 * std::atan(std::exp(2.0))) == doctest::Approx(-2.0).epsilon(1e-12));
  bool clamped = false;
  CHECK(std::isfinite(eta_from_theta(0.0, &clamped)));
  CHECK(clamped);
  clamped = false;
  CHECK(std::isfinite(eta_from_theta(M_PI, &clamped)));
  CHECK(clamped);
  clamped = false;
  eta_from_theta(1.0, &clamped);
  CHECK_FALSE(clamped);
}

TEST_CASE("engineer_features") {
  RawEvent ev;
  for (std::size_t i = 0; i < kFullFeatures; ++i) ev.station_features[i] = 0.05 * static_cast<double>(i + 1);
  ev.station(StationFeature::Phi, 0) = 0.0;
  ev.station(StationFeature::Theta, 0) = M_PI / 2;
  ev.station(StationFeature::Bend, 2) = -0.7;
  ev.q_over_pt = 0.25;
  const auto e = engineer_features(ev);
  CHECK(e.pt_true == 4.0);
  CHECK(e.features_compact[compact_index(0, CompactFeature::SinPhi)] == 0.0);
  CHECK(e.features_compact[compact_index(0, CompactFeature::CosPhi)] == 1.0);
  CHECK(std::abs(e.features_compact[compact_index(0, CompactFeature::Eta)]) < 1e-15);
  CHECK(e.features_full == ev.station_features);
  CHECK_FALSE(e.standardized);
  for (std::size_t s = 0; s < kStations; ++s) {
    const double sp = e.features_compact[compact_index(s, CompactFeature::SinPhi)];
    const double cp = e.features_compact[compact_index(s, CompactFeature::CosPhi)];
    CHECK(std::abs(sp * sp + cp * cp - 1.0) < 1e-12);
    CHECK(e.phi[s] == ev.station(StationFeature::Phi, s));
    CHECK(std::isfinite(e.eta[s]));
  }
  CHECK(std::abs(e.features_compact[compact_index(2, CompactFeature::Bend)]) == 0.7);

  ev.station(StationFeature::Theta, 1) = 0.0;
  EngineeringCounters counters;
  const auto c = engineer_features(ev, &counters);
  CHECK(counters.theta_clamps == 1);
  CHECK(std::isfinite(c.eta[1]));
}

TEST_CASE("quantile and IQR filter") {
  const std::vector<double> sorted{1, 2, 3, 4, 100};
  CHECK(quantile_linear(sorted, 0.25) == 2.0);
  CHECK(quantile_linear(sorted, 0.75) == 4.0);
  CHECK(quantile_linear(sorted, 0.5) == 3.0);
  CHECK(quantile_linear(std::vector<double>{0, 10}, 0.25) == 2.5);

  const std::vector<double> v{1, 2, 3, 4, 100};
  const auto r = iqr_filter(v);
  CHECK(r.q1 == 2.0);
  CHECK(r.q3 == 4.0);
  CHECK(r.upper == 7.0);
  CHECK(r.lower == -1.0);
  CHECK(r.kept == std::vector<std::size_t>{0, 1, 2, 3});

  const std::vector<double> flat{5, 5, 5, 5};
  const auto f = iqr_filter(flat);
  CHECK(f.kept.size() == 4);
  CHECK(f.lower == 5.0);
  CHECK(f.upper == 5.0);

  // Order of the input does not matter; indices refer to the input.
  const std::vector<double> shuffled{100, 3, 1, 4, 2};
  CHECK(iqr_filter(shuffled).kept == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK_THROWS_AS(iqr_filter(std::vector<double>{}), DataError);
}

TEST_CASE("standardizer") {
  const auto rows = ad::Tensor::matrix(2, 1, {1.0, 3.0});
  const auto stats = fit_standardizer(rows);
  CHECK(stats.means[0] == 2.0);
  CHECK(stats.stds[0] == 1.0);
  CHECK(apply_standardizer(stats, ad::Tensor::matrix(1, 1, {2.0}))[0] == 0.0);

  Rng rng(5);
  auto train = testsupport::random_matrix(rng, 200, 3, 4.0);
  for (std::size_t r = 0; r < train.rows(); ++r) train(r, 1) = 7.5;  // constant column
  const auto s = fit_standardizer(train);
  CHECK_FALSE(s.degenerate[0]);
  CHECK(s.degenerate[1]);
  CHECK(s.stds[1] == 1.0);
  const auto z = apply_standardizer(s, train);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, q = 0;
    for (std::size_t r = 0; r < z.rows(); ++r) m += z(r, c);
    m /= static_cast<double>(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r) q += (z(r, c) - m) * (z(r, c) - m);
    const double sd = std::sqrt(q / static_cast<double>(z.rows()));
    CHECK(std::abs(m) < 1e-12);
    if (c == 1) {
      CHECK(sd == 0.0);
      CHECK(z(0, c) == 0.0);
    } else {
      CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  std::vector<double> mean_row = s.means;
  standardize_in_place(s, mean_row);
  for (double v : mean_row) CHECK(std::abs(v) < 1e-15);

  KeyValueDoc doc;
  write_feature_stats(doc, "x", s);
  const auto back = read_feature_stats(KeyValueDoc::parse(doc.to_string()), "x");
  CHECK(back.means == s.means);
  CHECK(back.stds == s.stds);
  CHECK(back.degenerate == s.degenerate);
  CHECK_THROWS_AS(apply_standardizer(s, ad::Tensor::zeros(1, 2)), DataError);
}

TEST_CASE("train_test_split") {
  const auto a = train_test_split(10, {0.8, 11});
  CHECK(a.train.size() == 8);
  CHECK(a.test.size() == 2);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(10);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);

  const auto b = train_test_split(10, {0.8, 11});
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const auto c = train_test_split(10, {0.8, 12});
  CHECK((a.train != c.train || a.test != c.test));

  const auto big = train_test_split(1179356, {0.8, 1});
  CHECK(big.train.size() == 943484);
  CHECK(big.test.size() == 235872);

  CHECK_THROWS_AS(train_test_split(1, {0.8, 1}), DataError);
  CHECK_THROWS_AS(train_test_split(10, {1.0, 1}), DataError);
}

TEST_CASE("synthetic generator") {
  const auto t = synth_generate(100, 9);
  CHECK(t.rows.size() == 100);
  for (const auto& r : t.rows) {
    CHECK(std::isfinite(r.q_over_pt));
    CHECK(compute_target_pt(r.q_over_pt) > 0.0);
    for (double v : r.station_features) CHECK(std::isfinite(v));
  }
  const auto u = synth_generate(100, 9);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(t.rows[i].station_features == u.rows[i].station_features);
    CHECK(t.rows[i].q_over_pt == u.rows[i].q_over_pt);
  }
  CHECK(synth_generate(100, 10).rows[0].q_over_pt != t.rows[0].q_over_pt);

  const auto big = synth_generate(10000, 1);
  std::vector<double> bend, inv;
  for (const auto& r : big.rows) {
    bend.push_back(r.station(StationFeature::Bend, 0));
    inv.push_back(std::abs(r.q_over_pt));
  }
  CHECK(correlation(bend, inv) > 0.3);
}
