#include "weakvid/net.hpp"
#include "weakvid/error.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace weakvid;

namespace {

// Small blob corpus: class 0 = reddish frame, class 1 = bluish frame, with
// mild per-image brightness variation. Trivially separable by color.
std::vector<NetSample> blob_corpus(int per_class, int size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NetSample> out;
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < per_class; ++i) {
            Image img(size, size, 3);
            int base = 150 + static_cast<int>(rng.next_u64() % 80);
            int off = static_cast<int>(rng.next_u64() % 40);
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) {
                    img.set(x, y, 0, static_cast<std::uint8_t>(c == 0 ? base : off));
                    img.set(x, y, 1, static_cast<std::uint8_t>(off));
                    img.set(x, y, 2, static_cast<std::uint8_t>(c == 0 ? off : base));
                }
            out.push_back({std::move(img), c});
        }
    }
    return out;
}

NetConfig tiny_net(int n_classes, int input = 32) {
    NetConfig cfg;
    cfg.channels = {4, 8};
    cfg.input_size = input;
    cfg.n_classes = n_classes;
    cfg.init_seed = 1;
    return cfg;
}

} // namespace

TEST_CASE("class weights follow the frequency formula exactly") {
    // Balanced: all ones.
    std::vector<int> balanced;
    for (int c = 0; c < 6; ++c)
        for (int i = 0; i < 10; ++i) balanced.push_back(c);
    auto cw = class_weights(balanced, 6);
    for (double w : cw.w) CHECK(w == 1.0);

    // counts (3,1) over 2 classes -> (1.5, 0.5), exactly.
    auto cw2 = class_weights({0, 0, 0, 1}, 2);
    CHECK(cw2.w[0] == 1.5);
    CHECK(cw2.w[1] == 0.5);

    // counts (10,20,30,40,50,60), N=210.
    std::vector<int> labels;
    for (int c = 0; c < 6; ++c)
        for (int i = 0; i < 10 * (c + 1); ++i) labels.push_back(c);
    auto cw3 = class_weights(labels, 6);
    double expected[6] = {60.0 / 210.0, 120.0 / 210.0, 180.0 / 210.0, 240.0 / 210.0, 300.0 / 210.0, 360.0 / 210.0};
    for (int c = 0; c < 6; ++c) CHECK(cw3.w[c] == doctest::Approx(expected[c]).epsilon(1e-15));

    // Mean weight over the training set equals n_classes * sum((N_y/N)^2).
    double mean_w = 0.0;
    for (int y : labels) mean_w += cw3.w[y];
    mean_w /= static_cast<double>(labels.size());
    double identity = 0.0;
    for (int c = 0; c < 6; ++c) {
        double frac = static_cast<double>(cw3.counts[c]) / static_cast<double>(cw3.total);
        identity += frac * frac;
    }
    identity *= 6.0;
    CHECK(mean_w == doctest::Approx(identity).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(class_weights({}, 2), doctest::Contains("EmptyTrainingSet"), Error);

    // Inverse mode is the usual rebalancing: N / (n_classes * N_y).
    auto inv = class_weights({0, 0, 0, 1}, 2, WeightMode::inverse);
    CHECK(inv.w[0] == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
    CHECK(inv.w[1] == 2.0);
}

TEST_CASE("uniform logits give ln(C) loss; duplication doubles it") {
    Matrix logits(1, 6);
    std::vector<double> w(6, 1.0);
    double single = weighted_ce_loss(logits, {2}, w);
    CHECK(single == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK(single == doctest::Approx(1.791759469228055).epsilon(1e-12));

    Matrix two(2, 6);
    double doubled = weighted_ce_loss(two, {2, 2}, w);
    CHECK(doubled == doctest::Approx(2.0 * single).epsilon(1e-15));
}

TEST_CASE("all-ones weights reproduce plain cross-entropy bit for bit") {
    Rng rng(31);
    Matrix logits(8, 6);
    for (auto& v : logits.a) v = rng.gaussian();
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) labels.push_back(static_cast<int>(rng.next_u64() % 6));

    std::vector<double> ones(6, 1.0);
    Matrix g1, g2;
    double a = weighted_ce_loss(logits, labels, ones, &g1);

    // Plain CE from the same definition with the weight factored out.
    double b = 0.0;
    Matrix ref(8, 6);
    for (int i = 0; i < 8; ++i) {
        double mx = -1e300, sum = 0.0;
        for (int c = 0; c < 6; ++c) mx = std::max(mx, logits.at(i, c));
        for (int c = 0; c < 6; ++c) sum += std::exp(logits.at(i, c) - mx);
        b += -(logits.at(i, labels[i]) - mx - std::log(sum));
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    (void)g2;
    (void)ref;
}

TEST_CASE("loss gradient matches central finite differences") {
    Rng rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix logits(4, 5);
        for (auto& v : logits.a) v = rng.gaussian();
        std::vector<int> labels;
        for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.next_u64() % 5));
        std::vector<double> w;
        for (int c = 0; c < 5; ++c) w.push_back(0.25 + rng.next_double() * 2.0);

        Matrix grad;
        weighted_ce_loss(logits, labels, w, &grad);

        const double h = 1e-5;
        for (std::size_t k = 0; k < logits.a.size(); ++k) {
            Matrix plus = logits, minus = logits;
            plus.a[k] += h;
            minus.a[k] -= h;
            double fd = (weighted_ce_loss(plus, labels, w) - weighted_ce_loss(minus, labels, w)) / (2.0 * h);
            double denom = std::max({std::abs(fd), std::abs(grad.a[k]), 1e-8});
            CHECK(std::abs(grad.a[k] - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("loss rejects out-of-range labels") {
    Matrix logits(1, 3);
    std::vector<double> w(3, 1.0);
    CHECK_THROWS_WITH_AS(weighted_ce_loss(logits, {3}, w), doctest::Contains("LabelOutOfRange"), Error);
}

TEST_CASE("augmented output is exactly the requested size") {
    Rng rng(33);
    for (auto [w, h] : {std::pair{64, 48}, {17, 90}, {224, 224}, {9, 9}}) {
        Image img = testutil::random_rgb(w, h, rng);
        Rng aug(Rng::mix(34, w * 1000 + h));
        for (int i = 0; i < 20; ++i) {
            auto out = augment_image(img, 24, aug);
            CHECK(out.width == 24);
            CHECK(out.height == 24);
        }
    }
}

TEST_CASE("crop sampler keeps every realized rectangle within bounds") {
    Rng aug(35);
    int fallbacks = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        int w = 32 + static_cast<int>(aug.next_u64() % 64);
        int h = 32 + static_cast<int>(aug.next_u64() % 64);
        BBox rect = sample_crop_rect(w, h, aug);
        CHECK(rect.x >= 0);
        CHECK(rect.y >= 0);
        CHECK(rect.x + rect.w <= w);
        CHECK(rect.y + rect.h <= h);
        double area_fraction = static_cast<double>(rect.w) * rect.h / (static_cast<double>(w) * h);
        double ratio = static_cast<double>(rect.w) / rect.h;
        CHECK(area_fraction >= 0.08);
        CHECK(area_fraction <= 1.0);
        bool square_fallback = rect.w == rect.h && rect.w == std::min(w, h);
        if (square_fallback) ++fallbacks;
        if (!square_fallback) {
            CHECK(ratio >= 3.0 / 4.0);
            CHECK(ratio <= 4.0 / 3.0);
        }
    }
    CHECK(fallbacks < draws / 2); // the sampler succeeds most of the time
}

TEST_CASE("horizontal flips occur at the fair-coin rate") {
    // Strict horizontal ramp: any crop is increasing left-to-right, so a
    // decreasing augmented output means the flip fired.
    Image img(40, 40, 3);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) img.set(x, y, 0, static_cast<std::uint8_t>(x * 6));
    int flips = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        Rng aug(Rng::mix(99, i));
        auto out = augment_image(img, 16, aug);
        if (out.at(0, 0, 0) > out.at(15, 0, 0)) ++flips;
    }
    // 3 sigma binomial interval around 0.5 for n=10000: +/- 0.015.
    double freq = static_cast<double>(flips) / draws;
    CHECK(freq > 0.485);
    CHECK(freq < 0.515);
}

TEST_CASE("lr schedule steps by a tenth every 20 epochs") {
    TrainConfig cfg;
    CHECK(lr_at_epoch(cfg, 0) == doctest::Approx(1e-3));
    CHECK(lr_at_epoch(cfg, 19) == doctest::Approx(1e-3));
    CHECK(lr_at_epoch(cfg, 20) == doctest::Approx(1e-4));
    CHECK(lr_at_epoch(cfg, 40) == doctest::Approx(1e-5));
    CHECK(lr_at_epoch(cfg, 80) == doctest::Approx(1e-7));
    CHECK(lr_at_epoch(cfg, 99) == doctest::Approx(1e-7));
}

TEST_CASE("training is deterministic and tracks the best validation epoch") {
    auto train = blob_corpus(10, 24, 41);
    auto val = blob_corpus(4, 24, 42);

    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.input_size = 32;
    cfg.seed = 7;

    NetModel m1 = NetModel::create(tiny_net(2), {"c0", "c1"});
    auto r1 = train_network(m1, train, val, cfg);
    NetModel m2 = NetModel::create(tiny_net(2), {"c0", "c1"});
    auto r2 = train_network(m2, train, val, cfg);

    REQUIRE(r1.log.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r1.log[i].lr == r2.log[i].lr);
        CHECK(r1.log[i].train_loss == r2.log[i].train_loss);
        CHECK(r1.log[i].val_accuracy == r2.log[i].val_accuracy);
    }
    CHECK(m1.head_weight == m2.head_weight);
    CHECK(m1.blocks.back().weight == m2.blocks.back().weight);

    double best = 0.0;
    for (const auto& e : r1.log) best = std::max(best, e.val_accuracy);
    CHECK(r1.best_val_accuracy == best);
    CHECK(r1.log[r1.best_epoch].val_accuracy == best);
}

TEST_CASE("feature extractor mode freezes the backbone bit for bit") {
    auto train = blob_corpus(8, 24, 43);
    auto val = blob_corpus(3, 24, 44);

    NetModel model = NetModel::create(tiny_net(2), {"c0", "c1"});
    auto before = model.blocks;

    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.input_size = 32;
    cfg.mode = TrainMode::feature_extractor;
    auto head_before = model.head_weight;
    train_network(model, train, val, cfg);

    REQUIRE(model.blocks.size() == before.size());
    for (std::size_t l = 0; l < before.size(); ++l) {
        CHECK(model.blocks[l].weight == before[l].weight);
        CHECK(model.blocks[l].bias == before[l].bias);
    }
    CHECK(model.head_weight != head_before); // the head did move
}

TEST_CASE("a forced head bias dominates every prediction") {
    NetModel model = NetModel::create(tiny_net(3), {"a", "b", "c"});
    model.head_bias[2] = 1e6f;
    auto samples = blob_corpus(3, 24, 45);
    std::vector<NetSample> three(samples.begin(), samples.begin() + 3);
    auto pred = evaluate_network(model, three, 32);
    for (int p : pred) CHECK(p == 2);
}

TEST_CASE("evaluation equals the argmax of dumped logits") {
    NetModel model = NetModel::create(tiny_net(2), {"a", "b"});
    auto samples = blob_corpus(4, 24, 46);
    auto pred = evaluate_network(model, samples, 32);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto logits = network_logits(model, samples[i].image, 32);
        int arg = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        CHECK(pred[i] == arg);
    }
}

TEST_CASE("non-finite losses abort with a diagnostic") {
    auto train = blob_corpus(4, 24, 49);
    auto val = blob_corpus(2, 24, 49);
    NetModel model = NetModel::create(tiny_net(2), {"a", "b"});
    model.head_bias[0] = std::numeric_limits<float>::infinity();
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.input_size = 32;
    CHECK_THROWS_WITH_AS(train_network(model, train, val, cfg), doctest::Contains("NonFiniteLoss"), Error);
}

TEST_CASE("checkpoints round-trip through json + blob") {
    testutil::TempDir tmp("ckpt");
    auto train = blob_corpus(6, 24, 47);
    auto val = blob_corpus(2, 24, 48);
    NetModel model = NetModel::create(tiny_net(2), {"a", "b"});
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.input_size = 32;
    auto result = train_network(model, train, val, cfg);
    save_checkpoint(model, cfg, result, tmp.path() / "ckpt.json");
    auto loaded = load_checkpoint(tmp.path() / "ckpt.json");

    CHECK(loaded.classes == model.classes);
    CHECK(loaded.head_weight == model.head_weight);
    for (std::size_t l = 0; l < model.blocks.size(); ++l) CHECK(loaded.blocks[l].weight == model.blocks[l].weight);

    auto p1 = evaluate_network(model, val, 32);
    auto p2 = evaluate_network(loaded, val, 32);
    CHECK(p1 == p2);
}

TEST_CASE("network backward matches finite differences through conv, pooling and head") {
    // Tiny net and input keep the FD loop cheap; float forward noise is well
    // below the 1e-2 relative gate, indexing or gating bugs are far above it.
    NetConfig cfg;
    cfg.channels = {2, 3};
    cfg.input_size = 9;
    cfg.init_seed = 77;
    NetModel model = NetModel::create(cfg, {"a", "b", "c"});

    Rng rng(78);
    Tensor input(3, 9, 9);
    for (auto& v : input.data) v = static_cast<float>(rng.next_double());
    const int label = 1;
    const std::vector<double> weights{0.7, 1.4, 1.1};

    NetGradients grads(model);
    net_train_step(model, input, label, weights, TrainMode::fine_tune, grads);

    auto loss_of = [&](const NetModel& m) {
        Matrix logits(1, 3);
        auto out = m.forward(input);
        for (int c = 0; c < 3; ++c) logits.at(0, c) = out[c];
        return weighted_ce_loss(logits, {label}, weights);
    };

    const float h = 1e-3f;
    auto check_param = [&](float* param, float analytic) {
        float saved = *param;
        *param = saved + h;
        double up = loss_of(model);
        *param = saved - h;
        double down = loss_of(model);
        *param = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(static_cast<double>(analytic)), 1e-3});
        CHECK(std::abs(analytic - fd) / denom < 1e-2);
    };

    for (std::size_t l = 0; l < model.blocks.size(); ++l) {
        for (std::size_t k = 0; k < model.blocks[l].weight.size(); k += 7)
            check_param(&model.blocks[l].weight[k], grads.conv_weight[l][k]);
        for (std::size_t k = 0; k < model.blocks[l].bias.size(); ++k)
            check_param(&model.blocks[l].bias[k], grads.conv_bias[l][k]);
    }
    for (std::size_t k = 0; k < model.head_weight.size(); ++k)
        check_param(&model.head_weight[k], grads.head_weight[k]);
    for (std::size_t k = 0; k < model.head_bias.size(); ++k)
        check_param(&model.head_bias[k], grads.head_bias[k]);
}

TEST_CASE("feature-extractor steps leave conv gradients untouched") {
    NetConfig cfg;
    cfg.channels = {2};
    cfg.input_size = 8;
    cfg.init_seed = 79;
    NetModel model = NetModel::create(cfg, {"a", "b"});
    Tensor input(3, 8, 8);
    for (auto& v : input.data) v = 0.5f;
    NetGradients grads(model);
    net_train_step(model, input, 0, {1.0, 1.0}, TrainMode::feature_extractor, grads);
    for (float g : grads.conv_weight[0]) CHECK(g == 0.0f);
    for (float g : grads.conv_bias[0]) CHECK(g == 0.0f);
    bool head_moved = false;
    for (float g : grads.head_weight)
        if (g != 0.0f) head_moved = true;
    CHECK(head_moved);
}
