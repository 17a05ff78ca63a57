#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "alertscreen/errors.hpp"
#include "alertscreen/ingest.hpp"
#include "alertscreen/text.hpp"

using namespace alertscreen;
using namespace alertscreen::ingest;

namespace {

std::vector<EventRecord> numbered(const std::vector<int>& labels) {
  std::vector<EventRecord> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i].index = i;
    out[i].timestamp_ms = static_cast<std::int64_t>(i) * 10;
    out[i].label = labels[i];
  }
  return out;
}

Manifest simple_manifest() {
  Manifest m;
  m.categorical = {"feat_cat"};
  m.numeric = {"feat_num"};
  return m;
}

}  // namespace

TEST_CASE("explicit drop columns are removed") {
  CHECK(apply_leakage_filter({"attack_type", "feat_severity"}) == std::vector<std::string>{"feat_severity"});
}

TEST_CASE("denylist matches case-insensitively") {
  CHECK(apply_leakage_filter({"Verdict_Final", "feat_src_port"}) == std::vector<std::string>{"feat_src_port"});
}

TEST_CASE("the documented feature set survives intact") {
  const std::vector<std::string> cols = {"feat_alert_category", "feat_severity", "feat_src_port", "feat_dest_port",
                                         "feat_time_since_last_alert"};
  CHECK(apply_leakage_filter(cols) == cols);
}

TEST_CASE("filtering everything away is an error") {
  CHECK_THROWS_AS(apply_leakage_filter({"label", "fold_id", "is_malicious"}), DataError);
}

TEST_CASE("time since previous event") {
  CHECK(compute_time_since({10, 10, 25}) == std::vector<double>{0, 0, 15});
  CHECK(compute_time_since({7}) == std::vector<double>{0});
  CHECK(compute_time_since({0, 1000}) == std::vector<double>{0, 1000});
  CHECK_THROWS_AS(compute_time_since({5, 3}), std::invalid_argument);
}

TEST_CASE("timestamps parse from integers and ISO-8601") {
  CHECK(parse_timestamp_ms("1500") == 1500);
  CHECK(parse_timestamp_ms("1970-01-01T00:00:01Z") == 1000);
  CHECK(parse_timestamp_ms("1970-01-01 00:00:01.250") == 1250);
  CHECK(parse_timestamp_ms("1970-01-01T01:00:00+01:00") == 0);
  CHECK(parse_timestamp_ms("2000-03-01T00:00:00Z") == 951868800000);
  CHECK_THROWS_AS(parse_timestamp_ms("yesterday"), DataError);
}

TEST_CASE("numeric imputation precedes standardization") {
  const std::string csv =
      "timestamp,feat_cat,feat_num,label\n"
      "1,a,1,0\n"
      "2,a,3,1\n"
      "3,b,,0\n";
  const Dataset ds = parse_csv(csv, simple_manifest());
  const Preprocessor prep = fit_preprocessor(ds.events, ds);
  const auto& num = prep.columns[1];
  CHECK(num.name == "feat_num");
  CHECK(num.median == 2.0);
  CHECK(num.mean == 2.0);
  // Population std of {1, 3, 2}.
  CHECK(num.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));
  const auto& cat = prep.columns[0];
  CHECK(cat.vocab == std::vector<std::string>{"a", "b"});
  CHECK(cat.mode == "a");
  CHECK(prep.width() == 4);  // a, b, UNSEEN, feat_num
}

TEST_CASE("constant numeric column keeps stddev 1") {
  const std::string csv =
      "timestamp,feat_cat,feat_num,label\n"
      "1,a,5,0\n2,a,5,1\n3,a,5,0\n";
  const Dataset ds = parse_csv(csv, simple_manifest());
  const Preprocessor prep = fit_preprocessor(ds.events, ds);
  CHECK(prep.columns[1].stddev == 1.0);
}

TEST_CASE("transform centres, scales, and routes unseen categories") {
  const std::string csv =
      "timestamp,feat_cat,feat_num,label\n"
      "1,a,1,0\n2,b,3,1\n3,z,4,0\n";
  const Dataset ds = parse_csv(csv, simple_manifest());
  const std::vector<EventRecord> train(ds.events.begin(), ds.events.begin() + 2);
  const Preprocessor prep = fit_preprocessor(train, ds);
  const Matrix x = transform(ds.events, prep);
  const double mu = prep.columns[1].mean;
  const double sd = prep.columns[1].stddev;
  CHECK(x(0, 3) == doctest::Approx((1 - mu) / sd));
  CHECK(x(1, 3) == doctest::Approx(1.0));  // mu + sd
  CHECK(x(2, 0) == 0.0);
  CHECK(x(2, 1) == 0.0);
  CHECK(x(2, 2) == 1.0);
}

TEST_CASE("value equal to the mean standardizes to zero") {
  const std::string csv = "timestamp,feat_cat,feat_num,label\n1,a,2,0\n2,a,4,1\n3,a,3,0\n";
  const Dataset ds = parse_csv(csv, simple_manifest());
  const Preprocessor prep = fit_preprocessor(ds.events, ds);
  CHECK(transform(ds.events, prep)(2, 2) == 0.0);
}

TEST_CASE("split takes the smallest prefix holding the target positives") {
  const Split s = chronological_split(numbered({0, 1, 0, 1, 0, 0}), SplitSpec{1});
  CHECK(s.train.size() == 2);
  CHECK(s.stream.size() == 4);
  CHECK(s.train_positives == 1);
  CHECK(s.stream_positives == 1);
}

TEST_CASE("target equal to all positives leaves none in the stream") {
  const Split s = chronological_split(numbered({0, 1, 0, 1, 0}), SplitSpec{2});
  CHECK(s.stream_positives == 0);
  CHECK(s.stream.size() == 1);
  CHECK_THROWS_AS(chronological_split(numbered({0, 1, 0}), SplitSpec{2}), DataError);
}

TEST_CASE("a 5,821-positive dataset leaves 5,721 positives after a 100-positive prefix") {
  std::vector<int> labels(200000, 0);
  for (std::size_t k = 0; k < 5821; ++k) labels[k * 34 + 7] = 1;
  const Split s = chronological_split(numbered(labels), SplitSpec{100});
  CHECK(s.train_positives == 100);
  CHECK(s.stream_positives == 5721);
  CHECK(s.train.size() == 99 * 34 + 8);
}

TEST_CASE("rows are sorted chronologically and given dense indices") {
  const std::string csv =
      "timestamp,feat_cat,feat_num,label\n"
      "30,a,1,0\n10,b,2,1\n20,a,3,malicious\n10,c,4,benign\n";
  const Dataset ds = parse_csv(csv, simple_manifest());
  REQUIRE(ds.events.size() == 4);
  CHECK(ds.events[0].raw_fields.at("feat_cat") == "b");
  CHECK(ds.events[1].raw_fields.at("feat_cat") == "c");
  CHECK(ds.events[2].label == 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ds.events[i].index == i);
}

TEST_CASE("derived time-since column is appended as numeric") {
  Manifest m = simple_manifest();
  m.derive_time_since = "feat_time_since_last";
  const std::string csv = "timestamp,feat_cat,feat_num,label\n10,a,1,0\n25,a,1,1\n";
  const Dataset ds = parse_csv(csv, m);
  CHECK(ds.features.back() == "feat_time_since_last");
  CHECK(ds.events[1].raw_fields.at("feat_time_since_last") == "15");
}

TEST_CASE("bad inputs raise data errors") {
  CHECK_THROWS_AS(parse_csv("timestamp,feat_cat,feat_num\n1,a,1\n", simple_manifest()), DataError);
  CHECK_THROWS_AS(parse_csv("timestamp,feat_cat,feat_num,label\n1,a,1,maybe\n", simple_manifest()), DataError);
  CHECK_THROWS_AS(parse_csv("timestamp,feat_cat,feat_num,label\n1,a\n", simple_manifest()), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", simple_manifest()), DataError);
}

TEST_CASE("manifest round-trips through its text form") {
  Manifest m = simple_manifest();
  m.derive_time_since = "feat_gap";
  const Manifest back = Manifest::parse(m.serialize());
  CHECK(back.serialize() == m.serialize());
  CHECK_THROWS_AS(Manifest::parse("colour=blue\n"), ConfigError);
}

TEST_CASE("CSV fields honour quotes") {
  CHECK(text::split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
}
