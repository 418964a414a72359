#include "weakvid/metrics.hpp"
#include "weakvid/error.hpp"
#include "weakvid/rng.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <map>

using namespace weakvid;

namespace {

const std::vector<std::string> kSix{"c0", "c1", "c2", "c3", "c4", "c5"};

} // namespace

TEST_CASE("perfect predictions give a diagonal matrix") {
    std::vector<std::string> truth{"a", "b", "b", "a", "a"};
    auto cm = confusion_matrix(truth, truth, {"a", "b"});
    CHECK(cm.at(0, 0) == 3);
    CHECK(cm.at(1, 1) == 2);
    CHECK(cm.at(0, 1) == 0);
    CHECK(cm.at(1, 0) == 0);
    auto m = metrics(cm);
    CHECK(m.accuracy == 1.0);
    CHECK(m.mean_class_accuracy == 1.0);
}

TEST_CASE("all-majority predictions put mass in one column") {
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 90; ++i) truth.push_back("maj");
    for (int i = 0; i < 10; ++i) truth.push_back("min");
    pred.assign(100, "maj");
    auto cm = confusion_matrix(truth, pred, {"maj", "min"});
    CHECK(cm.at(0, 0) == 90);
    CHECK(cm.at(1, 0) == 10);
    CHECK(cm.at(0, 1) == 0);
    CHECK(cm.at(1, 1) == 0);
    auto m = metrics(cm);
    CHECK(m.accuracy == 0.9);
    CHECK(m.mean_class_accuracy == 0.5);
}

TEST_CASE("confusion matrix matches an independent per-pair recount") {
    Rng rng(50);
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 1000; ++i) {
        truth.push_back(kSix[rng.next_u64() % 6]);
        pred.push_back(kSix[rng.next_u64() % 6]);
    }
    auto cm = confusion_matrix(truth, pred, kSix);

    std::map<std::pair<std::string, std::string>, std::size_t> recount;
    for (int i = 0; i < 1000; ++i) ++recount[{truth[i], pred[i]}];
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t p = 0; p < 6; ++p) {
            auto it = recount.find({kSix[t], kSix[p]});
            CHECK(cm.at(t, p) == (it == recount.end() ? 0 : it->second));
        }
    CHECK(cm.total() == 1000);
}

TEST_CASE("metrics match direct-formula oracles on random matrices") {
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        ConfusionMatrix cm;
        cm.classes = kSix;
        cm.counts.assign(36, 0);
        for (auto& c : cm.counts) c = rng.next_u64() % 40;

        std::size_t total = 0, trace = 0;
        double recall_sum = 0.0;
        int present = 0;
        for (int t = 0; t < 6; ++t) {
            std::size_t row = 0;
            for (int p = 0; p < 6; ++p) row += cm.at(t, p);
            total += row;
            trace += cm.at(t, t);
            if (row > 0) {
                recall_sum += static_cast<double>(cm.at(t, t)) / static_cast<double>(row);
                ++present;
            }
        }
        if (total == 0) continue;
        auto m = metrics(cm);
        CHECK(std::abs(m.accuracy - static_cast<double>(trace) / static_cast<double>(total)) < 1e-12);
        CHECK(std::abs(m.mean_class_accuracy - recall_sum / present) < 1e-12);
    }
}

TEST_CASE("avgT ignores class duplication; accuracy does not") {
    ConfusionMatrix cm;
    cm.classes = {"a", "b"};
    cm.counts = {8, 2, 3, 7};
    auto before = metrics(cm);

    ConfusionMatrix dup = cm;
    dup.counts = {80, 20, 3, 7}; // class a rows scaled by 10
    auto after = metrics(dup);
    CHECK(after.mean_class_accuracy == doctest::Approx(before.mean_class_accuracy).epsilon(1e-15));
    CHECK(after.accuracy != doctest::Approx(before.accuracy));
}

TEST_CASE("class permutation permutes the matrix") {
    Rng rng(52);
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 200; ++i) {
        truth.push_back(kSix[rng.next_u64() % 6]);
        pred.push_back(kSix[rng.next_u64() % 6]);
    }
    auto cm = confusion_matrix(truth, pred, kSix);

    // sigma: rotate class names by one.
    auto sigma = [&](const std::string& c) {
        for (std::size_t i = 0; i < 6; ++i)
            if (kSix[i] == c) return kSix[(i + 1) % 6];
        return c;
    };
    std::vector<std::string> truth2, pred2;
    for (int i = 0; i < 200; ++i) {
        truth2.push_back(sigma(truth[i]));
        pred2.push_back(sigma(pred[i]));
    }
    auto cm2 = confusion_matrix(truth2, pred2, kSix);
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t p = 0; p < 6; ++p) CHECK(cm2.at((t + 1) % 6, (p + 1) % 6) == cm.at(t, p));
}

TEST_CASE("confusion matrix validates inputs") {
    CHECK_THROWS_WITH_AS(confusion_matrix({"a"}, {}, {"a"}), doctest::Contains("LengthMismatch"), Error);
    CHECK_THROWS_WITH_AS(confusion_matrix({"zz"}, {"a"}, {"a"}), doctest::Contains("UnknownLabel"), Error);
    ConfusionMatrix empty;
    empty.classes = {"a"};
    empty.counts = {0};
    CHECK_THROWS_WITH_AS(metrics(empty), doctest::Contains("EmptyMatrix"), Error);
}

TEST_CASE("report CSV round-trips the records") {
    std::vector<ResultRecord> records{
        {"rf", "noroi,s0", "cv", {{"cv_mean", 0.9999}, {"fold_0", 1.0}}},
        {"rf", "noroi,s0", "split", {{"train", 1.0}, {"val", 0.55}, {"test", 0.65}, {"avg_test", 0.49}}},
        {"cnn_fine_tune", "roi,s0", "split", {{"train", 0.96}, {"val", 0.6}, {"test", 0.75}, {"avg_test", 0.63}}},
    };
    auto csv = render_report_csv(records);
    auto parsed = parse_report_csv(csv);
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(parsed[i].model == records[i].model);
        CHECK(parsed[i].dataset == records[i].dataset);
        CHECK(parsed[i].protocol == records[i].protocol);
        CHECK(parsed[i].values == records[i].values);
    }
}

TEST_CASE("text report flags the best non-train cells and extends tied digits") {
    std::vector<ResultRecord> records{
        {"rf", "noroi,s0", "split", {{"train", 1.0}, {"val", 0.55}, {"test", 0.6501}, {"avg_test", 0.49}}},
        {"rf", "roi,s0", "split", {{"train", 1.0}, {"val", 0.56}, {"test", 0.6503}, {"avg_test", 0.47}}},
    };
    auto text = render_report_text(records);
    CHECK(text.find("0.560*") != std::string::npos);     // best val flagged
    CHECK(text.find("0.6503*") != std::string::npos);    // tie at 3 digits extended
    CHECK(text.find("0.6501") != std::string::npos);
    CHECK(text.find("0.490*") != std::string::npos);     // best avgT

    std::vector<ResultRecord> single{{"nb", "noroi,s0", "split", {{"train", 0.8}}}};
    auto one = render_report_text(single);
    CHECK(one.find("nb") != std::string::npos);
}

TEST_CASE("confusion artifacts write without error") {
    testutil::TempDir tmp("confout");
    std::vector<std::string> truth{"a", "a", "b"}, pred{"a", "b", "b"};
    auto cm = confusion_matrix(truth, pred, {"a", "b"});
    save_confusion_csv(cm, tmp.path() / "cm.csv");
    save_confusion_heatmap(cm, tmp.path() / "cm.ppm", 8);
    CHECK(std::filesystem::exists(tmp.path() / "cm.csv"));
    CHECK(std::filesystem::file_size(tmp.path() / "cm.ppm") > 0);
}
