#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "smart_hands/errors.hpp"
#include "smart_hands/rng.hpp"
#include "smart_hands/stream_sync.hpp"

using namespace smart_hands;
using sync::StreamSynchronizer;
using sync::SyncedFrameSet;

namespace {

Frame tiny_frame(ViewId v, std::int64_t ts) {
  return Frame::blank(v, ts, 2, 2);
}

std::vector<SyncedFrameSet> ingest_all(
    StreamSynchronizer& s, const std::vector<oracles::OracleFrame>& frames) {
  std::vector<SyncedFrameSet> sets;
  for (const auto& f : frames) {
    for (auto& set : s.ingest(tiny_frame(kAllViews[f.view], f.ts))) {
      sets.push_back(std::move(set));
    }
  }
  for (auto& set : s.flush()) sets.push_back(std::move(set));
  return sets;
}

void check_against_oracle(const std::vector<SyncedFrameSet>& sets,
                          const std::vector<oracles::OracleGroup>& groups) {
  REQUIRE(sets.size() == groups.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(sets[i].reference_timestamp_us == groups[i].reference);
    CHECK(sets[i].present_count() ==
          static_cast<int>(groups[i].members.size()));
    for (const auto& member : groups[i].members) {
      const auto& frame = sets[i].frames[member.view];
      REQUIRE(frame.has_value());
      CHECK(frame->timestamp_us == member.ts);
    }
  }
}

}  // namespace

TEST_CASE("four frames at the same instant form one complete set") {
  StreamSynchronizer s{PipelineConfig{}};
  std::vector<SyncedFrameSet> sets;
  for (ViewId v : kAllViews) {
    for (auto& set : s.ingest(tiny_frame(v, 1'000'000))) {
      sets.push_back(std::move(set));
    }
  }
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].tick_index == 0);
  CHECK(sets[0].reference_timestamp_us == 1'000'000);
  CHECK(sets[0].missing.empty());
  CHECK(sets[0].present_count() == 4);
}

TEST_CASE("an out-of-tolerance frame seeds the next tick") {
  // One frame per view at 0 / 5000 / 10000 / 40000 with tolerance 16667:
  // the first three group, the last starts its own set.
  const std::vector<oracles::OracleFrame> frames{
      {0, 0}, {1, 5'000}, {2, 10'000}, {3, 40'000}};
  const auto expected = oracles::group_frames(frames, 16'667);
  REQUIRE(expected.size() == 2);
  REQUIRE(expected[0].members.size() == 3);
  REQUIRE(expected[1].members.size() == 1);

  StreamSynchronizer s{PipelineConfig{}};
  const auto sets = ingest_all(s, frames);
  check_against_oracle(sets, expected);
  CHECK(sets[0].missing == std::vector<ViewId>{ViewId::MirrorCam});
  CHECK(sets[1].reference_timestamp_us == 40'000);
}

TEST_CASE("dropped-frame scenario matches the simulation oracle") {
  // 300 ticks at 30 fps; the mirror camera misses every 10th frame.
  const std::int64_t period = PipelineConfig{}.frame_period_us();
  std::vector<oracles::OracleFrame> frames;
  for (int tick = 0; tick < 300; ++tick) {
    for (int vi = 0; vi < kViewCount; ++vi) {
      if (vi == view_index(ViewId::MirrorCam) && tick % 10 == 9) continue;
      frames.push_back({vi, tick * period});
    }
  }
  const auto expected = oracles::group_frames(frames, 16'667);

  StreamSynchronizer s{PipelineConfig{}};
  const auto sets = ingest_all(s, frames);
  check_against_oracle(sets, expected);

  CHECK(sets.size() == 300);
  int partial = 0;
  for (const auto& set : sets) {
    if (!set.missing.empty()) {
      ++partial;
      CHECK(set.missing == std::vector<ViewId>{ViewId::MirrorCam});
    }
  }
  CHECK(partial == 30);

  const auto& st = s.stats();
  for (int vi = 0; vi < kViewCount; ++vi) {
    CHECK(st.dropped_late[vi] == 0);
    CHECK(st.dropped_duplicate[vi] == 0);
  }
  CHECK(st.accepted[view_index(ViewId::MirrorCam)] == 270);
  CHECK(st.accepted[view_index(ViewId::WheelCam)] == 300);
}

TEST_CASE("stats snapshots") {
  StreamSynchronizer s{PipelineConfig{}};
  SUBCASE("fresh synchronizer reports zeros") {
    for (int vi = 0; vi < kViewCount; ++vi) {
      CHECK(s.stats().ingested[vi] == 0);
      CHECK(s.stats().accepted[vi] == 0);
      CHECK(s.stats().dropped_late[vi] == 0);
      CHECK(s.stats().dropped_duplicate[vi] == 0);
    }
  }
  SUBCASE("ten aligned ticks accept ten frames per view") {
    const std::int64_t period = PipelineConfig{}.frame_period_us();
    for (int tick = 0; tick < 10; ++tick) {
      for (ViewId v : kAllViews) s.ingest(tiny_frame(v, tick * period));
    }
    for (int vi = 0; vi < kViewCount; ++vi) {
      CHECK(s.stats().accepted[vi] == 10);
      CHECK(s.stats().ingested[vi] == 10);
    }
  }
}

TEST_CASE("timestamp regressions are errors, repeats are duplicate drops") {
  StreamSynchronizer s{PipelineConfig{}};
  s.ingest(tiny_frame(ViewId::WheelCam, 1'000));
  CHECK_THROWS_AS(s.ingest(tiny_frame(ViewId::WheelCam, 999)), OutOfOrderFrame);

  CHECK(s.ingest(tiny_frame(ViewId::WheelCam, 1'000)).empty());
  CHECK(s.stats().dropped_duplicate[view_index(ViewId::WheelCam)] == 1);
  CHECK(s.stats().ingested[view_index(ViewId::WheelCam)] == 2);
  CHECK(s.stats().accepted[view_index(ViewId::WheelCam)] == 1);
}

TEST_CASE("per-view buffer cap trips BufferOverflow") {
  StreamSynchronizer s{PipelineConfig{}};  // cap 8, timeout ~66 ms
  for (int i = 0; i < 8; ++i) {
    CHECK(s.ingest(tiny_frame(ViewId::WheelCam, i * 1'000)).empty());
  }
  CHECK_THROWS_AS(s.ingest(tiny_frame(ViewId::WheelCam, 9'000)),
                  BufferOverflow);
  // The rejected frame is not counted; conservation still holds.
  CHECK(s.stats().ingested[view_index(ViewId::WheelCam)] == 8);
}

TEST_CASE("frames behind the emitted reference are dropped late") {
  const std::int64_t period = PipelineConfig{}.frame_period_us();
  StreamSynchronizer s{PipelineConfig{}};
  // Three views march ahead; their sets eventually time out and emit.
  for (int tick = 0; tick < 10; ++tick) {
    for (ViewId v : {ViewId::WheelCam, ViewId::DashDriverCam,
                     ViewId::DashCenterCam}) {
      s.ingest(tiny_frame(v, tick * period));
    }
  }
  // The mirror camera finally delivers ancient frames.
  CHECK(s.ingest(tiny_frame(ViewId::MirrorCam, 0)).empty());
  CHECK(s.ingest(tiny_frame(ViewId::MirrorCam, period)).empty());
  CHECK(s.stats().dropped_late[view_index(ViewId::MirrorCam)] == 2);
}

TEST_CASE("conservation and tolerance hold over randomized streams") {
  SplitMix64 rng(2024);
  const PipelineConfig cfg;
  const std::int64_t period = cfg.frame_period_us();

  StreamSynchronizer s{cfg};
  std::array<std::uint64_t, kViewCount> sent{};
  std::array<std::uint64_t, kViewCount> appeared{};
  std::vector<SyncedFrameSet> sets;
  std::array<std::int64_t, kViewCount> last_sent{-1, -1, -1, -1};

  for (int tick = 0; tick < 2'000; ++tick) {
    for (ViewId v : kAllViews) {
      const int vi = view_index(v);
      if (rng.bernoulli(0.08)) continue;  // dropped at the source
      std::int64_t ts = tick * period + rng.uniform_int(-4'000, 4'000);
      if (ts <= last_sent[vi]) ts = last_sent[vi] + 1;
      last_sent[vi] = ts;
      ++sent[vi];
      for (auto& set : s.ingest(tiny_frame(v, ts))) {
        sets.push_back(std::move(set));
      }
      if (rng.bernoulli(0.01)) {  // occasional duplicate delivery
        ++sent[vi];
        s.ingest(tiny_frame(v, ts));
      }
    }
  }
  for (auto& set : s.flush()) sets.push_back(std::move(set));

  std::uint64_t last_tick = 0;
  std::int64_t last_ref = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& set = sets[i];
    if (i > 0) {
      CHECK(set.tick_index > last_tick);
      CHECK(set.reference_timestamp_us >= last_ref);
    }
    last_tick = set.tick_index;
    last_ref = set.reference_timestamp_us;

    int present = 0;
    for (int vi = 0; vi < kViewCount; ++vi) {
      if (!set.frames[vi]) continue;
      ++present;
      ++appeared[vi];
      const std::int64_t delta =
          set.frames[vi]->timestamp_us - set.reference_timestamp_us;
      CHECK(delta >= 0);
      CHECK(delta <= cfg.sync_tolerance_us);
    }
    CHECK(present + static_cast<int>(set.missing.size()) == kViewCount);
  }

  const auto& st = s.stats();
  for (int vi = 0; vi < kViewCount; ++vi) {
    CHECK(st.ingested[vi] == sent[vi]);
    CHECK(st.ingested[vi] ==
          st.accepted[vi] + st.dropped_late[vi] + st.dropped_duplicate[vi]);
    // After the flush, every accepted frame sits in exactly one set.
    CHECK(appeared[vi] == st.accepted[vi]);
  }
}

TEST_CASE("identical timestamps with no drops give complete sets") {
  const std::int64_t period = PipelineConfig{}.frame_period_us();
  StreamSynchronizer s{PipelineConfig{}};
  std::size_t emitted = 0;
  for (int tick = 0; tick < 64; ++tick) {
    for (ViewId v : kAllViews) {
      for (auto& set : s.ingest(tiny_frame(v, tick * period))) {
        CHECK(set.missing.empty());
        ++emitted;
      }
    }
  }
  CHECK(emitted == 64);
  CHECK(s.flush().empty());
}
