#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "smart_hands/errors.hpp"
#include "smart_hands/evaluation.hpp"
#include "smart_hands/rng.hpp"

using namespace smart_hands;
using namespace smart_hands::eval;
using perception::BoundingBox;

namespace {

ConfusionMatrix load_fixture(const char* name) {
  std::ifstream in(std::string(FIXTURES_DIR) + "/" + name);
  REQUIRE(in.good());
  return ConfusionMatrix::from_csv(in);
}

DetectionSample random_sample(SplitMix64& rng) {
  DetectionSample s;
  const int gt_count = static_cast<int>(rng.uniform_int(1, 4));
  for (int g = 0; g < gt_count; ++g) {
    const double x = rng.next_double() * 80;
    const double y = rng.next_double() * 80;
    const double w = 5 + rng.next_double() * 30;
    const double h = 5 + rng.next_double() * 30;
    s.ground_truth.push_back({x, y, x + w, y + h, 1.0});

    if (rng.bernoulli(0.8)) {  // a prediction loosely on this box
      const double dx = (rng.next_double() - 0.5) * w;
      const double dy = (rng.next_double() - 0.5) * h;
      s.predictions.push_back(
          {x + dx, y + dy, x + w + dx, y + h + dy, rng.next_double()});
    }
  }
  const int extra = static_cast<int>(rng.uniform_int(0, 3));
  for (int p = 0; p < extra; ++p) {
    const double x = rng.next_double() * 90;
    const double y = rng.next_double() * 90;
    s.predictions.push_back(
        {x, y, x + 4 + rng.next_double() * 20, y + 4 + rng.next_double() * 20,
         rng.next_double()});
  }
  return s;
}

}  // namespace

TEST_CASE("published matrices reproduce their accuracies") {
  struct Expect {
    const char* file;
    double accuracy;
  };
  const Expect cases[] = {
      {"left_location_matrix.csv", 0.9928},
      {"right_location_matrix.csv", 0.9924},
      {"left_object_matrix.csv", 0.9864},
      {"right_object_matrix.csv", 0.9924},
  };
  for (const auto& c : cases) {
    CAPTURE(c.file);
    const ConfusionMatrix m = load_fixture(c.file);
    CHECK(std::abs(m.accuracy() - c.accuracy) <= 0.0005);
  }

  const ConfusionMatrix left = load_fixture("left_location_matrix.csv");
  CHECK(left.total() == 9'193);
  CHECK(left.trace() == 9'127);
}

TEST_CASE("accuracy basics") {
  ConfusionMatrix m({"a", "b"});
  CHECK_THROWS_AS(m.accuracy(), EmptyMatrix);
  m.add(0, 0, 3);
  m.add(1, 1, 7);
  CHECK(m.accuracy() == 1.0);
  m.add(0, 1, 10);
  CHECK(m.accuracy() == doctest::Approx(0.5));
}

TEST_CASE("per-class precision and recall") {
  SUBCASE("radio recall on the right-location matrix") {
    const ConfusionMatrix m = load_fixture("right_location_matrix.csv");
    const auto radio = m.index_of("radio");
    REQUIRE(radio.has_value());
    const auto metrics = m.per_class_metrics();
    REQUIRE(metrics[*radio].recall.has_value());
    CHECK(*metrics[*radio].recall == doctest::Approx(302.0 / 310.0));
  }
  SUBCASE("identity matrix scores ones") {
    ConfusionMatrix m({"a", "b", "c"});
    for (std::size_t i = 0; i < 3; ++i) m.add(i, i, 2);
    for (const auto& metric : m.per_class_metrics()) {
      CHECK(metric.precision == 1.0);
      CHECK(metric.recall == 1.0);
    }
  }
  SUBCASE("single-class matrix") {
    ConfusionMatrix m({"only"});
    m.add(0, 0, 5);
    const auto metrics = m.per_class_metrics();
    CHECK(metrics[0].precision == 1.0);
    CHECK(metrics[0].recall == 1.0);
  }
  SUBCASE("empty column reports absent precision") {
    ConfusionMatrix m({"a", "b"});
    m.add(1, 0, 4);  // nothing predicted as "b"
    const auto metrics = m.per_class_metrics();
    CHECK_FALSE(metrics[1].precision.has_value());
    CHECK(metrics[1].recall == 0.0);
  }
}

TEST_CASE("accuracy is invariant under joint label permutation") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_below(4);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("c" + std::to_string(i));
    ConfusionMatrix m(labels);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) m.add(r, c, rng.next_below(20));
    }
    if (m.total() == 0) continue;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.next_below(i)]);
    }
    ConfusionMatrix permuted(labels);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        permuted.add(perm[r], perm[c], m.at(r, c));
      }
    }
    CHECK(permuted.accuracy() == m.accuracy());
  }
}

TEST_CASE("matrix CSV round trip") {
  const ConfusionMatrix m = load_fixture("left_object_matrix.csv");
  std::stringstream buffer;
  m.write_csv(buffer);
  const ConfusionMatrix back = ConfusionMatrix::from_csv(buffer);
  CHECK(back == m);

  SUBCASE("ragged rows are rejected") {
    std::istringstream bad("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(ConfusionMatrix::from_csv(bad), ParseError);
  }
  SUBCASE("sparse cells read as zero") {
    std::istringstream sparse("a,b\n1,\n,4\n");
    const ConfusionMatrix s = ConfusionMatrix::from_csv(sparse);
    CHECK(s.at(0, 1) == 0);
    CHECK(s.at(1, 1) == 4);
  }
}

TEST_CASE("iou") {
  const BoundingBox unit{0, 0, 1, 1, 1.0};
  CHECK(iou(unit, unit) == 1.0);
  CHECK(iou(unit, BoundingBox{5, 5, 6, 6, 1.0}) == 0.0);
  // Unit squares offset by half overlap 0.5; union is 1.5.
  CHECK(iou(unit, BoundingBox{0.5, 0, 1.5, 1, 1.0}) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(iou(unit, BoundingBox{0.5, 0.5, 1.5, 1.5, 1.0}) ==
        doctest::Approx(0.25 / 1.75));
}

TEST_CASE("map50 degenerate cases") {
  SUBCASE("perfect single detection") {
    DetectionSample s;
    s.ground_truth.push_back({10, 10, 50, 50, 1.0});
    s.predictions.push_back({10, 10, 50, 50, 0.9});
    CHECK(map50(std::vector<DetectionSample>{s}) == 1.0);
  }
  SUBCASE("overlap below the threshold scores zero") {
    DetectionSample s;
    s.ground_truth.push_back({0, 0, 10, 10, 1.0});
    // 40% overlap: intersection 4x10 = 40, union 100.
    s.predictions.push_back({6, 0, 16, 10, 0.9});
    REQUIRE(iou(s.ground_truth[0], s.predictions[0]) ==
            doctest::Approx(0.25));
    s.predictions[0] = {4, 0, 14, 10, 0.9};
    REQUIRE(iou(s.ground_truth[0], s.predictions[0]) ==
            doctest::Approx(6.0 / 14.0));
    CHECK(map50(std::vector<DetectionSample>{s}) == 0.0);
  }
  SUBCASE("no ground truth anywhere is an error") {
    DetectionSample s;
    s.predictions.push_back({0, 0, 1, 1, 0.5});
    CHECK_THROWS_AS(map50(std::vector<DetectionSample>{s}), NoGroundTruth);
  }
  SUBCASE("no predictions means zero AP") {
    DetectionSample s;
    s.ground_truth.push_back({0, 0, 1, 1, 1.0});
    CHECK(map50(std::vector<DetectionSample>{s}) == 0.0);
  }
}

TEST_CASE("map50 on a fixed 3-ground-truth, 4-prediction instance") {
  // Mixed hits: one tight match, one borderline, one miss, one duplicate.
  DetectionSample s;
  s.ground_truth.push_back({0, 0, 20, 20, 1.0});
  s.ground_truth.push_back({40, 0, 60, 20, 1.0});
  s.ground_truth.push_back({0, 40, 20, 60, 1.0});
  s.predictions.push_back({1, 1, 21, 21, 0.95});   // IoU ~0.82 with gt0
  s.predictions.push_back({46, 0, 66, 20, 0.90});  // IoU ~0.54 with gt1
  s.predictions.push_back({2, 2, 22, 22, 0.80});   // gt0 already matched
  s.predictions.push_back({70, 70, 90, 90, 0.60}); // hits nothing

  const std::vector<DetectionSample> samples{s};
  REQUIRE(iou(s.ground_truth[0], s.predictions[0]) > 0.5);
  REQUIRE(iou(s.ground_truth[1], s.predictions[1]) > 0.5);
  const double ap = map50(samples);
  CHECK(ap == oracles::average_precision_ref(samples, 0.5));
  // Two hits at ranks 1 and 2 out of 3 ground truths:
  // AP = (1/3)*1 + (1/3)*1 + (1/3)*0 = 2/3.
  CHECK(ap == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("map50 equals the exhaustive PR oracle on random instances") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DetectionSample> samples;
    const int n_samples = static_cast<int>(rng.uniform_int(1, 3));
    for (int i = 0; i < n_samples; ++i) samples.push_back(random_sample(rng));

    const double got = map50(samples);
    const double expected = oracles::average_precision_ref(samples, 0.5);
    REQUIRE(got == expected);  // same pinned protocol, bit for bit
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("map50 order invariance and junk-prediction monotonicity") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DetectionSample> samples{random_sample(rng)};
    auto& s = samples[0];
    if (s.predictions.empty()) continue;
    const double base = map50(samples);

    // Shuffle predictions; confidences are continuous draws, so distinct.
    std::vector<DetectionSample> shuffled = samples;
    auto& preds = shuffled[0].predictions;
    for (std::size_t i = preds.size(); i > 1; --i) {
      std::swap(preds[i - 1], preds[rng.next_below(i)]);
    }
    CHECK(map50(shuffled) == base);

    // A zero-IoU prediction below every confidence never helps.
    std::vector<DetectionSample> junked = samples;
    junked[0].predictions.push_back({500, 500, 510, 510, 1e-9});
    CHECK(map50(junked) <= base);
  }
}

TEST_CASE("throughput composition") {
  const StageProfile detect_then_pose{
      {{"detector", 28.8}, {"pose", 22.7}}};
  const double sequential =
      compose_throughput(detect_then_pose, ComposeMode::Sequential);
  CHECK(sequential == doctest::Approx(12.69).epsilon(0.001));
  CHECK(std::abs(sequential - 1.0 / (1.0 / 28.8 + 1.0 / 22.7)) < 1e-12);
  CHECK(compose_throughput(detect_then_pose, ComposeMode::Pipelined) == 22.7);

  const StageProfile single{{{"only", 30.0}}};
  CHECK(compose_throughput(single, ComposeMode::Sequential) == 30.0);
  CHECK(compose_throughput(single, ComposeMode::Pipelined) == 30.0);

  SUBCASE("sequential <= pipelined <= max rate") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      StageProfile profile;
      double max_rate = 0;
      const int stages = static_cast<int>(rng.uniform_int(1, 6));
      for (int i = 0; i < stages; ++i) {
        const double rate = 1.0 + rng.next_double() * 99.0;
        profile.stages.push_back({"s", rate});
        max_rate = std::max(max_rate, rate);
      }
      const double seq = compose_throughput(profile, ComposeMode::Sequential);
      const double pipe = compose_throughput(profile, ComposeMode::Pipelined);
      CHECK(seq <= pipe + 1e-12);
      CHECK(pipe <= max_rate + 1e-12);
    }
  }
  SUBCASE("bad profiles are rejected") {
    CHECK_THROWS_AS(compose_throughput({}, ComposeMode::Sequential),
                    std::invalid_argument);
    CHECK_THROWS_AS(compose_throughput({{{"s", 0.0}}}, ComposeMode::Pipelined),
                    std::invalid_argument);
  }
}

TEST_CASE("fleet impact arithmetic") {
  const FleetImpact current = fleet_impact(4'300'000, 287'000'000, 0.0, 0);
  CHECK(current.penetration == doctest::Approx(0.015).epsilon(0.04));
  CHECK(std::abs(current.penetration * 100 - 1.5) < 0.05);

  const FleetImpact projected =
      fleet_impact(4'300'000, 287'000'000, 0.027, 680'000);
  CHECK(projected.prevented_accidents == 18'360);

  CHECK(fleet_impact(1, 2, 0.5, 0).prevented_accidents == 0);
  CHECK_THROWS_AS(fleet_impact(1, 0, 0.5, 10), std::invalid_argument);
  CHECK_THROWS_AS(fleet_impact(1, 2, 1.5, 10), std::invalid_argument);
}

TEST_CASE("dataset splitting") {
  SUBCASE("ten equal sequences split 8/1/1") {
    std::vector<SequenceInfo> seqs;
    for (int i = 0; i < 10; ++i) seqs.push_back({"s" + std::to_string(i), 100});
    const DatasetSplit split = split_dataset(seqs, {0.8, 0.1, 0.1});
    CHECK(split.train.size() == 8);
    CHECK(split.val.size() == 1);
    CHECK(split.test.size() == 1);
    CHECK(split.train.front() == 0);
    CHECK(split.test.back() == 9);
  }
  SUBCASE("19 equal sequences over an 81k-frame corpus land within 2%") {
    std::vector<SequenceInfo> seqs;
    std::uint64_t total = 0;
    for (int i = 0; i < 19; ++i) {
      seqs.push_back({"subject" + std::to_string(i), 4'263});
      total += 4'263;
    }
    REQUIRE(total > 80'000);
    const DatasetSplit split = split_dataset(seqs, {0.8, 0.1, 0.1});
    auto frames_of = [&](const std::vector<std::size_t>& ids) {
      std::uint64_t n = 0;
      for (std::size_t i : ids) n += seqs[i].frames;
      return static_cast<double>(n) / static_cast<double>(total);
    };
    CHECK(std::abs(frames_of(split.train) - 0.8) <= 0.02);
    CHECK(std::abs(frames_of(split.val) - 0.1) <= 0.02);
    CHECK(std::abs(frames_of(split.test) - 0.1) <= 0.02);
  }
  SUBCASE("any input partitions all frames") {
    SplitMix64 rng(66);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = static_cast<int>(rng.uniform_int(3, 20));
      std::vector<SequenceInfo> seqs;
      for (int i = 0; i < n; ++i) {
        seqs.push_back({"s" + std::to_string(i),
                        static_cast<std::uint64_t>(rng.uniform_int(1, 500))});
      }
      const DatasetSplit split = split_dataset(seqs, {0.8, 0.1, 0.1});
      CHECK(!split.train.empty());
      CHECK(!split.val.empty());
      CHECK(!split.test.empty());
      std::vector<bool> seen(n, false);
      for (const auto* part : {&split.train, &split.val, &split.test}) {
        for (std::size_t idx : *part) {
          REQUIRE(idx < static_cast<std::size_t>(n));
          REQUIRE_FALSE(seen[idx]);  // disjoint
          seen[idx] = true;
        }
      }
      CHECK(std::count(seen.begin(), seen.end(), false) == 0);  // exhaustive
    }
  }
  SUBCASE("bad inputs") {
    std::vector<SequenceInfo> two{{"a", 10}, {"b", 10}};
    CHECK_THROWS_AS(split_dataset(two, {0.8, 0.1, 0.1}), InsufficientData);
    std::vector<SequenceInfo> three{{"a", 10}, {"b", 10}, {"c", 10}};
    CHECK_THROWS_AS(split_dataset(three, {0.8, 0.1, 0.2}),
                    std::invalid_argument);
  }
}
