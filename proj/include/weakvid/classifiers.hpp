#ifndef WEAKVID_CLASSIFIERS_HPP
#define WEAKVID_CLASSIFIERS_HPP

#include "weakvid/features.hpp"
#include "weakvid/matrix.hpp"
#include "weakvid/splits.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weakvid {

enum class Algo { lr, lda, nb, knn, svm, cart, rf };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& s);

// Hyperparameters for all seven algorithms. Every trained artifact embeds the
// full spec so runs stay comparable.
struct ClassifierSpec {
    Algo algo = Algo::rf;
    std::uint64_t seed = 0;

    double lr_l2 = 1.0;     // multinomial softmax regression, L2 on weights
    double lr_tol = 1e-4;   // stop when max |gradient| falls below this
    int lr_max_iter = 1000;

    double lda_ridge = 1e-6; // added to the pooled covariance diagonal

    double nb_var_smoothing = 1e-9; // times the largest feature variance

    int knn_k = 5;

    double svm_lambda = 1e-4; // one-vs-rest linear SVM, hinge + L2
    int svm_epochs = 20;

    int rf_trees = 100;
    bool rf_bootstrap = true;
    int rf_features_per_split = 0; // 0 = floor(sqrt(d)), CART always uses all

    int max_depth = 0; // 0 = grow to purity (CART and forest trees)
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root
};

struct TrainedClassifier {
    ClassifierSpec spec;
    std::vector<std::string> classes; // sorted; internal label ints index this
    std::size_t dim = 0;

    // z-score statistics from the training rows (LR and SVM only)
    std::vector<double> feat_mean;
    std::vector<double> feat_scale;

    // linear models (LR, LDA, SVM): score_c(x) = coef.row(c) . x + intercept[c]
    Matrix coef;
    std::vector<double> intercept;

    // Gaussian naive Bayes
    Matrix nb_mean;
    Matrix nb_var;
    std::vector<double> nb_log_prior;

    // KNN keeps its training set
    Matrix knn_train;
    std::vector<int> knn_labels;

    // CART holds one tree, RF many
    std::vector<Tree> trees;
};

// Deterministic given (spec, X, labels); all randomness flows from spec.seed.
TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& X, const std::vector<std::string>& labels);

std::vector<std::string> predict(const TrainedClassifier& model, const Matrix& X);

struct CvResult {
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
};

// For each fold: fit on the complement, score on the fold. Folds are matched
// to feature rows through sample ids.
CvResult cross_validate(const ClassifierSpec& spec, const FeatureMatrix& features, const FoldAssignment& folds,
                        int threads = 1);

Matrix feature_values_matrix(const FeatureMatrix& features);

void save_model(const TrainedClassifier& model, const std::filesystem::path& path);
TrainedClassifier load_model(const std::filesystem::path& path);

} // namespace weakvid

#endif
