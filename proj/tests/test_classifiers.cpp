#include "weakvid/classifiers.hpp"
#include "weakvid/error.hpp"
#include "weakvid/rng.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace weakvid;

namespace {

struct Blobs {
    Matrix X;
    std::vector<std::string> y;
};

// Two well-separated gaussian blobs in 2-D.
Blobs separable_blobs(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    Blobs data;
    data.X = Matrix(2 * per_class, 2);
    for (int i = 0; i < 2 * per_class; ++i) {
        bool second = i >= per_class;
        data.X.at(i, 0) = (second ? 6.0 : -6.0) + rng.gaussian();
        data.X.at(i, 1) = (second ? 6.0 : -6.0) + rng.gaussian();
        data.y.push_back(second ? "pos" : "neg");
    }
    return data;
}

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng, double scale = 1.0) {
    Matrix X(n, d);
    for (auto& v : X.a) v = rng.gaussian() * scale;
    return X;
}

double accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == pred[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

} // namespace

TEST_CASE("logistic regression separates two blobs perfectly") {
    auto data = separable_blobs(30, 1);
    ClassifierSpec spec;
    spec.algo = Algo::lr;
    auto model = fit(spec, data.X, data.y);
    CHECK(accuracy(data.y, predict(model, data.X)) == 1.0);
}

TEST_CASE("KNN with k=1 reproduces training labels") {
    Rng rng(2);
    auto X = random_matrix(40, 5, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) y.push_back(i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c"));
    ClassifierSpec spec;
    spec.algo = Algo::knn;
    spec.knn_k = 1;
    auto model = fit(spec, X, y);
    CHECK(predict(model, X) == y);
}

TEST_CASE("gaussian NB matches the from-definition oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = random_matrix(50, 4, rng);
        std::vector<std::string> y;
        for (int i = 0; i < 50; ++i) y.push_back(rng.next_double() < 0.4 ? "u" : (rng.next_double() < 0.5 ? "v" : "w"));
        if (std::set<std::string>(y.begin(), y.end()).size() < 2) continue;
        auto Xte = random_matrix(20, 4, rng);

        ClassifierSpec spec;
        spec.algo = Algo::nb;
        auto model = fit(spec, X, y);
        CHECK(predict(model, Xte) == testutil::nb_oracle(X, y, Xte, spec.nb_var_smoothing));
    }
}

TEST_CASE("KNN matches brute-force distance sorting on a hand-built plane") {
    Matrix X(5, 2);
    double pts[5][2] = {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}};
    for (int i = 0; i < 5; ++i) {
        X.at(i, 0) = pts[i][0];
        X.at(i, 1) = pts[i][1];
    }
    std::vector<std::string> y{"near", "near", "near", "far", "far"};
    ClassifierSpec spec;
    spec.algo = Algo::knn;
    spec.knn_k = 3;
    auto model = fit(spec, X, y);

    Matrix q(3, 2);
    q.at(0, 0) = 0.2;
    q.at(0, 1) = 0.2;
    q.at(1, 0) = 5.4;
    q.at(1, 1) = 5.1;
    q.at(2, 0) = 2.5;
    q.at(2, 1) = 2.5;
    CHECK(predict(model, q) == testutil::knn_oracle(X, y, q, 3));
    CHECK(predict(model, q)[0] == "near");
    CHECK(predict(model, q)[1] == "far");
}

TEST_CASE("KNN matches the oracle on random instances") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = random_matrix(30, 3, rng);
        std::vector<std::string> y;
        for (int i = 0; i < 30; ++i) y.push_back(rng.next_double() < 0.5 ? "a" : "b");
        if (std::set<std::string>(y.begin(), y.end()).size() < 2) continue;
        auto Xte = random_matrix(15, 3, rng);
        ClassifierSpec spec;
        spec.algo = Algo::knn;
        spec.knn_k = 5;
        auto model = fit(spec, X, y);
        CHECK(predict(model, Xte) == testutil::knn_oracle(X, y, Xte, 5));
    }
}

TEST_CASE("KNN predictions are invariant to uniform feature scaling") {
    Rng rng(5);
    auto X = random_matrix(40, 4, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) y.push_back(rng.next_double() < 0.5 ? "a" : "b");
    auto Xte = random_matrix(10, 4, rng);

    ClassifierSpec spec;
    spec.algo = Algo::knn;
    auto base = predict(fit(spec, X, y), Xte);

    Matrix Xs = X, Xts = Xte;
    for (auto& v : Xs.a) v *= 3.5;
    for (auto& v : Xts.a) v *= 3.5;
    CHECK(predict(fit(spec, Xs, y), Xts) == base);
}

TEST_CASE("CART grown to purity has zero training error on distinct rows") {
    Rng rng(6);
    auto X = random_matrix(60, 3, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 60; ++i) y.push_back(rng.next_double() < 0.33 ? "a" : (rng.next_double() < 0.5 ? "b" : "c"));
    ClassifierSpec spec;
    spec.algo = Algo::cart;
    auto model = fit(spec, X, y);
    CHECK(predict(model, X) == y);
}

TEST_CASE("CART splits XOR-style data to purity") {
    Matrix X(8, 2);
    std::vector<std::string> y;
    int row = 0;
    for (double a : {0.0, 1.0})
        for (double b : {0.0, 1.0})
            for (int rep = 0; rep < 2; ++rep) {
                X.at(row, 0) = a + 0.01 * rep;
                X.at(row, 1) = b + 0.01 * rep;
                y.push_back(a != b ? "odd" : "even");
                ++row;
            }
    ClassifierSpec spec;
    spec.algo = Algo::cart;
    auto model = fit(spec, X, y);
    CHECK(predict(model, X) == y);
}

TEST_CASE("single-tree unbootstrapped forest equals CART") {
    Rng rng(7);
    auto X = random_matrix(50, 4, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 50; ++i) y.push_back(rng.next_double() < 0.5 ? "a" : "b");
    auto Xte = random_matrix(25, 4, rng);

    ClassifierSpec cart_spec;
    cart_spec.algo = Algo::cart;
    ClassifierSpec rf_spec;
    rf_spec.algo = Algo::rf;
    rf_spec.rf_trees = 1;
    rf_spec.rf_bootstrap = false;
    rf_spec.rf_features_per_split = 4; // full feature set

    CHECK(predict(fit(cart_spec, X, y), Xte) == predict(fit(rf_spec, X, y), Xte));
}

TEST_CASE("random forest is deterministic given the seed") {
    Rng rng(8);
    auto X = random_matrix(60, 6, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 60; ++i) y.push_back(rng.next_double() < 0.5 ? "a" : "b");
    auto Xte = random_matrix(30, 6, rng);

    ClassifierSpec spec;
    spec.algo = Algo::rf;
    spec.rf_trees = 20;
    spec.seed = 99;
    auto p1 = predict(fit(spec, X, y), Xte);
    auto p2 = predict(fit(spec, X, y), Xte);
    CHECK(p1 == p2);
}

TEST_CASE("NB predictions survive class relabeling") {
    Rng rng(9);
    auto X = random_matrix(40, 3, rng);
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) y.push_back(rng.next_double() < 0.5 ? "aa" : "zz");
    auto Xte = random_matrix(12, 3, rng);

    ClassifierSpec spec;
    spec.algo = Algo::nb;
    auto base = predict(fit(spec, X, y), Xte);

    // Swap the label strings; predictions must swap along.
    std::vector<std::string> y2;
    for (const auto& l : y) y2.push_back(l == "aa" ? "zz" : "aa");
    auto swapped = predict(fit(spec, X, y2), Xte);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(swapped[i] == (base[i] == "aa" ? "zz" : "aa"));
}

TEST_CASE("LDA and SVM separate the blob data") {
    auto data = separable_blobs(25, 10);
    for (Algo algo : {Algo::lda, Algo::svm}) {
        ClassifierSpec spec;
        spec.algo = algo;
        auto model = fit(spec, data.X, data.y);
        CHECK(accuracy(data.y, predict(model, data.X)) == 1.0);
    }
}

TEST_CASE("fit validates its inputs") {
    Matrix X(4, 2);
    std::vector<std::string> one_class{"a", "a", "a", "a"};
    ClassifierSpec spec;
    spec.algo = Algo::nb;
    CHECK_THROWS_WITH_AS(fit(spec, X, one_class), doctest::Contains("SingleClass"), Error);

    std::vector<std::string> mismatched{"a", "b"};
    CHECK_THROWS_WITH_AS(fit(spec, X, mismatched), doctest::Contains("DimensionMismatch"), Error);

    Matrix bad(2, 2);
    bad.at(0, 0) = std::nan("");
    CHECK_THROWS_WITH_AS(fit(spec, bad, {"a", "b"}), doctest::Contains("NonFiniteFeature"), Error);

    auto data = separable_blobs(5, 11);
    auto model = fit(spec, data.X, data.y);
    Matrix wrong_dim(1, 3);
    CHECK_THROWS_WITH_AS(predict(model, wrong_dim), doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("cross_validate scores every fold and averages") {
    // Constant-label-per-cluster data: any sane classifier is perfect.
    auto data = separable_blobs(20, 12);
    FeatureMatrix features;
    features.dim = 2;
    features.values = data.X.a;
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        features.sample_ids.push_back("s" + std::to_string(i));
        features.labels.push_back(data.y[i]);
        features.video_ids.push_back("v" + std::to_string(i % 4));
    }
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        Sample s;
        s.sample_id = features.sample_ids[i];
        s.label = features.labels[i];
        samples.push_back(s);
    }
    auto folds = kfold_frame_split(samples, 5, 0);

    ClassifierSpec spec;
    spec.algo = Algo::knn;
    spec.knn_k = 1;
    auto cv = cross_validate(spec, features, folds);
    REQUIRE(cv.fold_accuracy.size() == 5);
    for (double acc : cv.fold_accuracy) CHECK(acc == 1.0);
    CHECK(cv.mean_accuracy == 1.0);

    // Mean equals the arithmetic mean of the folds by construction.
    double mean = std::accumulate(cv.fold_accuracy.begin(), cv.fold_accuracy.end(), 0.0) / 5.0;
    CHECK(cv.mean_accuracy == doctest::Approx(mean));
}

TEST_CASE("models round-trip through JSON") {
    testutil::TempDir tmp("models");
    auto data = separable_blobs(15, 13);
    auto Xte = [&] {
        Rng rng(14);
        return random_matrix(10, 2, rng, 6.0);
    }();

    for (Algo algo : {Algo::lr, Algo::lda, Algo::nb, Algo::knn, Algo::svm, Algo::cart, Algo::rf}) {
        ClassifierSpec spec;
        spec.algo = algo;
        spec.rf_trees = 10;
        auto model = fit(spec, data.X, data.y);
        auto path = tmp.path() / (to_string(algo) + ".json");
        save_model(model, path);
        auto loaded = load_model(path);
        CHECK(predict(loaded, Xte) == predict(model, Xte));
    }
}

TEST_CASE("single-row prediction yields a single label") {
    auto data = separable_blobs(10, 15);
    ClassifierSpec spec;
    spec.algo = Algo::cart;
    auto model = fit(spec, data.X, data.y);
    Matrix one(1, 2);
    one.at(0, 0) = -6.0;
    one.at(0, 1) = -6.0;
    auto pred = predict(model, one);
    REQUIRE(pred.size() == 1);
    CHECK(pred[0] == "neg");
}

TEST_CASE("jacobi eigendecomposition reconstructs symmetric matrices") {
    Rng rng(16);
    for (std::size_t n : {5, 50, 120}) {
        Matrix A(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double v = rng.gaussian();
                A.at(i, j) = v;
                A.at(j, i) = v;
            }
        std::vector<double> w;
        Matrix V;
        jacobi_eigen_symmetric(A, w, V);

        // V diag(w) V^T == A and V^T V == I, within float noise.
        double worst_recon = 0.0, worst_ortho = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double recon = 0.0, ortho = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    recon += V.at(i, k) * w[k] * V.at(j, k);
                    ortho += V.at(k, i) * V.at(k, j);
                }
                worst_recon = std::max(worst_recon, std::abs(recon - A.at(i, j)));
                worst_ortho = std::max(worst_ortho, std::abs(ortho - (i == j ? 1.0 : 0.0)));
            }
        }
        CHECK(worst_recon < 1e-9);
        CHECK(worst_ortho < 1e-11);
    }
}

TEST_CASE("LDA stays accurate in high dimension with few samples") {
    // 40 samples, 80 features: rank-deficient covariance exercises the ridge.
    Rng rng(17);
    Matrix X(40, 80);
    std::vector<std::string> y;
    for (int i = 0; i < 40; ++i) {
        bool second = i >= 20;
        for (int j = 0; j < 80; ++j) X.at(i, j) = rng.gaussian() + (second && j < 5 ? 4.0 : 0.0);
        y.push_back(second ? "pos" : "neg");
    }
    ClassifierSpec spec;
    spec.algo = Algo::lda;
    auto model = fit(spec, X, y);
    auto pred = predict(model, X);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++ok;
    CHECK(ok == y.size());
}
