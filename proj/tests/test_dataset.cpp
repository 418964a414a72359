#include "weakvid/dataset.hpp"
#include "weakvid/error.hpp"
#include "weakvid/rng.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <map>

using namespace weakvid;

namespace {

std::vector<VideoMeta> tiny_manifest() {
    return {
        {"vA", "alice", VideoSource::webcam, 3, 100, 80, "frames/vA"},
        {"vB", "bob", VideoSource::camcorder, 2, 100, 80, "frames/vB"},
    };
}

std::map<std::string, std::map<int, DetectionRecord>> tiny_best() {
    std::map<std::string, std::map<int, DetectionRecord>> best;
    best["vA"][0] = {"vA", 0, {10, 10, 20, 20}, 0.9};
    best["vA"][1] = {"vA", 1, {-5, 70, 20, 20}, 0.4}; // sticks out; clamps to 15x10
    best["vA"][2] = {"vA", 2, {95, 20, 30, 30}, 0.7}; // clamps to 5 wide
    best["vB"][0] = {"vB", 0, {0, 0, 100, 80}, 0.55};
    best["vB"][1] = {"vB", 1, {200, 0, 10, 10}, 0.95}; // entirely outside: dropped under ROI
    return best;
}

} // namespace

TEST_CASE("build_dataset thresholds by score and copies weak labels") {
    auto samples = build_dataset(tiny_manifest(), tiny_best(), {false, 0.5});
    REQUIRE(samples.size() == 4); // 0.9, 0.7, 0.55, 0.95 pass; 0.4 fails
    for (const auto& s : samples) {
        CHECK(s.score >= 0.5);
        CHECK(s.label == (s.video_id == "vA" ? "alice" : "bob"));
        CHECK(!s.crop.has_value());
    }
}

TEST_CASE("threshold comparison is inclusive") {
    auto best = tiny_best();
    best["vA"][0].score = 0.5;
    auto samples = build_dataset(tiny_manifest(), best, {false, 0.5});
    bool found = false;
    for (const auto& s : samples)
        if (s.sample_id == "vA:000000") found = true;
    CHECK(found);
}

TEST_CASE("ROI variant clamps boxes and drops empty intersections") {
    auto samples = build_dataset(tiny_manifest(), tiny_best(), {true, 0.0});
    std::map<std::string, Sample> by_id;
    for (const auto& s : samples) by_id[s.sample_id] = s;

    REQUIRE(by_id.count("vA:000000"));
    CHECK(*by_id["vA:000000"].crop == BBox{10, 10, 20, 20});
    CHECK(*by_id["vA:000001"].crop == BBox{0, 70, 15, 10});
    CHECK(*by_id["vA:000002"].crop == BBox{95, 20, 5, 30});
    CHECK(*by_id["vB:000000"].crop == BBox{0, 0, 100, 80});
    CHECK(!by_id.count("vB:000001")); // no intersection with the frame
}

TEST_CASE("unknown video is an error; empty result is only a warning") {
    std::map<std::string, std::map<int, DetectionRecord>> best;
    best["vZ"][0] = {"vZ", 0, {0, 0, 5, 5}, 0.5};
    CHECK_THROWS_WITH_AS(build_dataset(tiny_manifest(), best, {false, 0.0}), doctest::Contains("UnknownVideo"),
                         Error);

    auto samples = build_dataset(tiny_manifest(), tiny_best(), {false, 1.0});
    CHECK(samples.empty());
}

TEST_CASE("subset monotonicity: higher threshold gives a field-identical subset") {
    auto manifest = tiny_manifest();
    auto best = tiny_best();
    auto low = build_dataset(manifest, best, {true, 0.0});
    auto high = build_dataset(manifest, best, {true, 0.5});
    CHECK(high.size() < low.size());
    std::map<std::string, Sample> low_by_id;
    for (const auto& s : low) low_by_id[s.sample_id] = s;
    for (const auto& s : high) {
        REQUIRE(low_by_id.count(s.sample_id));
        CHECK(low_by_id[s.sample_id] == s);
    }
}

TEST_CASE("ROI toggling changes only the crop field") {
    auto with_roi = build_dataset(tiny_manifest(), tiny_best(), {true, 0.3});
    auto without = build_dataset(tiny_manifest(), tiny_best(), {false, 0.3});
    // The ROI build drops the off-frame box, so compare by id.
    std::map<std::string, Sample> roi_by_id;
    for (const auto& s : with_roi) roi_by_id[s.sample_id] = s;
    for (const auto& s : without) {
        if (!roi_by_id.count(s.sample_id)) continue;
        Sample stripped = roi_by_id[s.sample_id];
        stripped.crop.reset();
        CHECK(stripped == s);
    }
}

TEST_CASE("dataset_stats counts exactly") {
    CHECK(dataset_stats({}).total == 0);

    std::vector<Sample> samples;
    for (int i = 0; i < 3; ++i) samples.push_back({"a" + std::to_string(i), "vA", i, "A", 1.0, "x", {}});
    samples.push_back({"b0", "vB", 0, "B", 1.0, "x", {}});
    auto stats = dataset_stats(samples);
    CHECK(stats.total == 4);
    CHECK(stats.per_class.at("A") == 3);
    CHECK(stats.per_class.at("B") == 1);
    CHECK(stats.min_class == 1);
    CHECK(stats.max_class == 3);
}

TEST_CASE("dataset_stats matches an independent one-pass recount") {
    Rng rng(7);
    std::vector<Sample> samples;
    const char* labels[4] = {"w", "x", "y", "z"};
    for (int i = 0; i < 500; ++i) {
        Sample s;
        s.sample_id = "s" + std::to_string(i);
        s.label = labels[rng.next_u64() % 4];
        samples.push_back(s);
    }
    std::map<std::string, std::size_t> recount;
    for (const auto& s : samples) ++recount[s.label];

    auto stats = dataset_stats(samples);
    CHECK(stats.total == samples.size());
    CHECK(stats.per_class == recount);
}

TEST_CASE("dataset JSON round-trip") {
    testutil::TempDir tmp("dataset");
    auto samples = build_dataset(tiny_manifest(), tiny_best(), {true, 0.0});
    DatasetVariant variant{true, 0.0};
    save_dataset(variant, samples, tmp.path() / "dataset.json");
    auto loaded = load_dataset(tmp.path() / "dataset.json");
    CHECK(loaded.variant.use_roi == variant.use_roi);
    CHECK(loaded.variant.score_threshold == variant.score_threshold);
    CHECK(loaded.samples == samples);
}

TEST_CASE("variant selectors parse and print") {
    auto v = DatasetVariant::parse("roi,s0.5");
    CHECK(v.use_roi);
    CHECK(v.score_threshold == doctest::Approx(0.5));
    CHECK(v.name() == "roi,s0.5");
    CHECK(DatasetVariant::parse("noroi,s0").name() == "noroi,s0");
    CHECK_THROWS_AS(DatasetVariant::parse("roi"), Error);
    CHECK_THROWS_AS(DatasetVariant::parse("both,s0"), Error);
    CHECK_THROWS_AS(DatasetVariant::parse("roi,s1.5"), Error);
}
