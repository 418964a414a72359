#include "weakvid/classifiers.hpp"

#include "weakvid/error.hpp"
#include "weakvid/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

using json = nlohmann::json;

namespace weakvid {

std::string to_string(Algo algo) {
    switch (algo) {
    case Algo::lr: return "lr";
    case Algo::lda: return "lda";
    case Algo::nb: return "nb";
    case Algo::knn: return "knn";
    case Algo::svm: return "svm";
    case Algo::cart: return "cart";
    case Algo::rf: return "rf";
    }
    return "rf";
}

Algo algo_from_string(const std::string& s) {
    for (Algo algo : {Algo::lr, Algo::lda, Algo::nb, Algo::knn, Algo::svm, Algo::cart, Algo::rf})
        if (to_string(algo) == s) return algo;
    throw Error("classic_ml", "BadAlgorithm", "unknown algorithm '" + s + "'");
}

namespace {

struct Encoded {
    std::vector<int> y;
    std::vector<std::string> classes;
};

Encoded encode_labels(const std::vector<std::string>& labels) {
    Encoded enc;
    enc.classes = labels;
    std::sort(enc.classes.begin(), enc.classes.end());
    enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
    enc.y.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), l);
        enc.y.push_back(static_cast<int>(it - enc.classes.begin()));
    }
    return enc;
}

void check_training_inputs(const Matrix& X, const std::vector<std::string>& labels, std::size_t n_classes) {
    if (X.rows != labels.size())
        throw Error("classic_ml", "DimensionMismatch",
                    std::to_string(X.rows) + " rows vs " + std::to_string(labels.size()) + " labels");
    if (X.rows < 2) throw Error("classic_ml", "TooFewSamples", "need at least two training rows");
    if (n_classes < 2) throw Error("classic_ml", "SingleClass", "training labels contain a single class");
    for (double v : X.a)
        if (!std::isfinite(v)) throw Error("classic_ml", "NonFiniteFeature", "training matrix contains NaN/Inf");
}

// --- standardization ------------------------------------------------------

void fit_standardizer(const Matrix& X, std::vector<double>& mean, std::vector<double>& scale) {
    mean.assign(X.cols, 0.0);
    scale.assign(X.cols, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) mean[j] += X.at(i, j);
    for (double& m : mean) m /= static_cast<double>(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) {
            double d = X.at(i, j) - mean[j];
            scale[j] += d * d;
        }
    for (double& s : scale) {
        s = std::sqrt(s / static_cast<double>(X.rows));
        if (s <= 0.0) s = 1.0; // constant feature: leave it centred
    }
}

Matrix apply_standardizer(const Matrix& X, const std::vector<double>& mean, const std::vector<double>& scale) {
    Matrix Z(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) Z.at(i, j) = (X.at(i, j) - mean[j]) / scale[j];
    return Z;
}

// --- logistic regression ---------------------------------------------------

// Multinomial softmax with L2; accelerated gradient descent with backtracking
// on the Lipschitz estimate. Objective and gradients averaged over rows.
void fit_lr(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    fit_standardizer(X, model.feat_mean, model.feat_scale);
    Matrix Z = apply_standardizer(X, model.feat_mean, model.feat_scale);
    const std::size_t n = Z.rows, d = Z.cols, C = n_classes;
    const double lambda = model.spec.lr_l2 / static_cast<double>(n);

    std::vector<double> W(C * d, 0.0), B(C, 0.0);
    std::vector<double> gw(C * d), gb(C), scores(C);

    auto eval = [&](const std::vector<double>& w, const std::vector<double>& b, std::vector<double>* grad_w,
                    std::vector<double>* grad_b) {
        double loss = 0.0;
        if (grad_w) {
            std::fill(grad_w->begin(), grad_w->end(), 0.0);
            std::fill(grad_b->begin(), grad_b->end(), 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = Z.row(i);
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < C; ++c) {
                double s = b[c];
                const double* wc = &w[c * d];
                for (std::size_t j = 0; j < d; ++j) s += wc[j] * xi[j];
                scores[c] = s;
                mx = std::max(mx, s);
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                scores[c] = std::exp(scores[c] - mx);
                sum += scores[c];
            }
            loss += -std::log(scores[y[i]] / sum);
            if (grad_w) {
                for (std::size_t c = 0; c < C; ++c) {
                    double p = scores[c] / sum - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
                    (*grad_b)[c] += p;
                    double* gwc = &(*grad_w)[c * d];
                    for (std::size_t j = 0; j < d; ++j) gwc[j] += p * xi[j];
                }
            }
        }
        loss /= static_cast<double>(n);
        double reg = 0.0;
        for (double v : w) reg += v * v;
        loss += 0.5 * lambda * reg;
        if (grad_w) {
            for (auto& v : *grad_w) v /= static_cast<double>(n);
            for (auto& v : *grad_b) v /= static_cast<double>(n);
            for (std::size_t k = 0; k < w.size(); ++k) (*grad_w)[k] += lambda * w[k];
        }
        return loss;
    };

    // FISTA-style momentum with a growing/backtracked step estimate.
    std::vector<double> Y = W, Yb = B, Wn(C * d), Bn(C);
    double t_momentum = 1.0;
    double step = 1.0;
    for (int iter = 0; iter < model.spec.lr_max_iter; ++iter) {
        double fy = eval(Y, Yb, &gw, &gb);
        double gnorm_inf = 0.0, gnorm2 = 0.0;
        for (double v : gw) {
            gnorm_inf = std::max(gnorm_inf, std::abs(v));
            gnorm2 += v * v;
        }
        for (double v : gb) {
            gnorm_inf = std::max(gnorm_inf, std::abs(v));
            gnorm2 += v * v;
        }
        if (gnorm_inf < model.spec.lr_tol) break;

        for (;;) {
            for (std::size_t k = 0; k < W.size(); ++k) Wn[k] = Y[k] - step * gw[k];
            for (std::size_t c = 0; c < C; ++c) Bn[c] = Yb[c] - step * gb[c];
            double fn = eval(Wn, Bn, nullptr, nullptr);
            if (fn <= fy - 0.5 * step * gnorm2 || step < 1e-12) break;
            step *= 0.5;
        }
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        double beta = (t_momentum - 1.0) / t_next;
        for (std::size_t k = 0; k < W.size(); ++k) {
            Y[k] = Wn[k] + beta * (Wn[k] - W[k]);
            W[k] = Wn[k];
        }
        for (std::size_t c = 0; c < C; ++c) {
            Yb[c] = Bn[c] + beta * (Bn[c] - B[c]);
            B[c] = Bn[c];
        }
        t_momentum = t_next;
        step *= 1.2; // allow the estimate to grow back
    }

    model.coef = Matrix(C, d);
    std::copy(W.begin(), W.end(), model.coef.a.begin());
    model.intercept.assign(B.begin(), B.end());
}

// --- linear discriminant analysis ------------------------------------------

void fit_lda(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    const std::size_t n = X.rows, d = X.cols, C = n_classes;
    Matrix means(C, d);
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[y[i]];
        for (std::size_t j = 0; j < d; ++j) means.at(y[i], j) += X.at(i, j);
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < d; ++j) means.at(c, j) /= static_cast<double>(counts[c]);

    // Pooled within-class covariance with a ridge on the diagonal.
    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = X.at(i, j) - means.at(y[i], j);
        for (std::size_t a = 0; a < d; ++a) {
            double ca = centered[a];
            if (ca == 0.0) continue;
            double* row = cov.row(a);
            for (std::size_t b = a; b < d; ++b) row[b] += ca * centered[b];
        }
    }
    double denom = static_cast<double>(n > C ? n - C : 1);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov.at(a, b) /= denom;
            cov.at(b, a) = cov.at(a, b);
        }
    for (std::size_t a = 0; a < d; ++a) cov.at(a, a) += model.spec.lda_ridge;

    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    jacobi_eigen_symmetric(cov, eigenvalues, eigenvectors);
    double max_eig = 0.0;
    for (double v : eigenvalues) max_eig = std::max(max_eig, v);
    double floor = std::max(max_eig, 1.0) * 1e-12;

    // coef_c = cov^-1 mu_c via the eigenbasis; intercept from the quadratic term.
    model.coef = Matrix(C, d);
    model.intercept.assign(C, 0.0);
    std::vector<double> proj(d);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < d; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += eigenvectors.at(j, k) * means.at(c, j);
            proj[k] = s / std::max(eigenvalues[k], floor);
        }
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += eigenvectors.at(j, k) * proj[k];
            model.coef.at(c, j) = s;
        }
        double quad = 0.0;
        for (std::size_t j = 0; j < d; ++j) quad += model.coef.at(c, j) * means.at(c, j);
        double prior = static_cast<double>(counts[c]) / static_cast<double>(n);
        model.intercept[c] = -0.5 * quad + std::log(prior);
    }
}

// --- gaussian naive bayes ---------------------------------------------------

void fit_nb(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    const std::size_t n = X.rows, d = X.cols, C = n_classes;
    model.nb_mean = Matrix(C, d);
    model.nb_var = Matrix(C, d);
    model.nb_log_prior.assign(C, 0.0);
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[y[i]];
        for (std::size_t j = 0; j < d; ++j) model.nb_mean.at(y[i], j) += X.at(i, j);
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < d; ++j) model.nb_mean.at(c, j) /= static_cast<double>(counts[c]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double diff = X.at(i, j) - model.nb_mean.at(y[i], j);
            model.nb_var.at(y[i], j) += diff * diff;
        }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < d; ++j) model.nb_var.at(c, j) /= static_cast<double>(counts[c]);

    // Smoothing keyed to the largest variance over the whole training matrix.
    std::vector<double> global_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) global_mean[j] += X.at(i, j);
    for (double& m : global_mean) m /= static_cast<double>(n);
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = X.at(i, j) - global_mean[j];
            v += diff * diff;
        }
        max_var = std::max(max_var, v / static_cast<double>(n));
    }
    double eps = model.spec.nb_var_smoothing * std::max(max_var, 1e-300);
    for (double& v : model.nb_var.a) v += eps;
    for (std::size_t c = 0; c < C; ++c)
        model.nb_log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
}

// --- linear SVM (one-vs-rest, hinge + L2, Pegasos-style SGD) ----------------

void fit_svm(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    fit_standardizer(X, model.feat_mean, model.feat_scale);
    Matrix Z = apply_standardizer(X, model.feat_mean, model.feat_scale);
    const std::size_t n = Z.rows, d = Z.cols, C = n_classes;
    const double lambda = model.spec.svm_lambda;

    // The bias rides along as a regularized constant feature so every
    // parameter shares the Pegasos shrink and stays bounded.
    const std::size_t da = d + 1;
    Matrix W(C, da);
    Matrix W_avg(C, da);
    double averaged = 0.0;

    Rng rng(Rng::mix(model.spec.seed, 0x5ce5));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double t = 1.0;
    for (int epoch = 0; epoch < model.spec.svm_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const double* xi = Z.row(idx);
            double eta = 1.0 / (lambda * t);
            double shrink = 1.0 - eta * lambda; // == 1 - 1/t
            for (std::size_t c = 0; c < C; ++c) {
                double target = (y[idx] == static_cast<int>(c)) ? 1.0 : -1.0;
                double* wc = W.row(c);
                double margin = wc[d];
                for (std::size_t j = 0; j < d; ++j) margin += wc[j] * xi[j];
                margin *= target;
                for (std::size_t j = 0; j < da; ++j) wc[j] *= shrink;
                if (margin < 1.0) {
                    double coeff = eta * target;
                    for (std::size_t j = 0; j < d; ++j) wc[j] += coeff * xi[j];
                    wc[d] += coeff;
                }
            }
            t += 1.0;
            // Iterates of the final epoch are averaged; the last raw iterate
            // still oscillates when epochs * n << 1/lambda.
            if (epoch == model.spec.svm_epochs - 1) {
                for (std::size_t k = 0; k < W.a.size(); ++k) W_avg.a[k] += W.a[k];
                averaged += 1.0;
            }
        }
    }
    model.coef = Matrix(C, d);
    model.intercept.assign(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < d; ++j) model.coef.at(c, j) = W_avg.at(c, j) / averaged;
        model.intercept[c] = W_avg.at(c, d) / averaged;
    }
}

// --- decision trees ----------------------------------------------------------

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

double gini_of(const std::vector<std::size_t>& counts, double n) {
    double g = 1.0;
    for (std::size_t c : counts) {
        double p = static_cast<double>(c) / n;
        g -= p * p;
    }
    return g;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const std::vector<int>& y, std::size_t n_classes, int features_per_split,
                int max_depth, Rng* rng)
        : X_(X), y_(y), n_classes_(n_classes), features_per_split_(features_per_split), max_depth_(max_depth),
          rng_(rng) {}

    Tree build(std::vector<std::size_t> indices) {
        Tree tree;
        grow(tree, std::move(indices), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<std::size_t> indices, int depth) {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (std::size_t i : indices) ++counts[y_[i]];
        int majority = 0;
        for (std::size_t c = 1; c < n_classes_; ++c)
            if (counts[c] > counts[majority]) majority = static_cast<int>(c);

        double n = static_cast<double>(indices.size());
        double node_gini = gini_of(counts, n);
        bool depth_stop = max_depth_ > 0 && depth >= max_depth_;

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (node_gini <= 0.0 || depth_stop || indices.size() < 2) {
            tree.nodes[node_id].label = majority;
            return node_id;
        }

        SplitChoice best = find_split(indices, counts);
        if (best.feature < 0) {
            tree.nodes[node_id].label = majority;
            return node_id;
        }

        std::vector<std::size_t> left, right;
        left.reserve(indices.size());
        right.reserve(indices.size());
        for (std::size_t i : indices)
            (X_.at(i, best.feature) <= best.threshold ? left : right).push_back(i);
        indices.clear();
        indices.shrink_to_fit();

        tree.nodes[node_id].feature = best.feature;
        tree.nodes[node_id].threshold = best.threshold;
        int l = grow(tree, std::move(left), depth + 1);
        tree.nodes[node_id].left = l;
        int r = grow(tree, std::move(right), depth + 1);
        tree.nodes[node_id].right = r;
        return node_id;
    }

    SplitChoice find_split(const std::vector<std::size_t>& indices, const std::vector<std::size_t>& total_counts) {
        const std::size_t d = X_.cols;
        std::vector<int> candidates;
        if (features_per_split_ <= 0 || features_per_split_ >= static_cast<int>(d)) {
            candidates.resize(d);
            std::iota(candidates.begin(), candidates.end(), 0);
        } else {
            // Partial Fisher-Yates over the feature indices, seeded per tree.
            candidates.resize(d);
            std::iota(candidates.begin(), candidates.end(), 0);
            for (int i = 0; i < features_per_split_; ++i) {
                int j = i + static_cast<int>(rng_->next_u64() % (d - i));
                std::swap(candidates[i], candidates[j]);
            }
            candidates.resize(features_per_split_);
            std::sort(candidates.begin(), candidates.end()); // lowest-index tie rule
        }

        SplitChoice best;
        const double n = static_cast<double>(indices.size());
        std::vector<std::pair<double, int>> column(indices.size());
        std::vector<std::size_t> left_counts(n_classes_);
        for (int f : candidates) {
            for (std::size_t k = 0; k < indices.size(); ++k)
                column[k] = {X_.at(indices[k], f), y_[indices[k]]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (column.front().first == column.back().first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0);
            std::size_t n_left = 0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                ++left_counts[column[k].second];
                ++n_left;
                if (column[k].first == column[k + 1].first) continue;
                double nl = static_cast<double>(n_left), nr = n - nl;
                double gl = 1.0, gr = 1.0;
                for (std::size_t c = 0; c < n_classes_; ++c) {
                    double pl = static_cast<double>(left_counts[c]) / nl;
                    double pr = static_cast<double>(total_counts[c] - left_counts[c]) / nr;
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                double impurity = (nl * gl + nr * gr) / n;
                if (impurity < best.impurity - 1e-12) {
                    best.impurity = impurity;
                    best.feature = f;
                    best.threshold = column[k].first + 0.5 * (column[k + 1].first - column[k].first);
                }
            }
        }
        // Zero-improvement splits stay allowed: both children are non-empty, so
        // growth still terminates and distinct rows always reach purity.
        return best;
    }

    const Matrix& X_;
    const std::vector<int>& y_;
    std::size_t n_classes_;
    int features_per_split_;
    int max_depth_;
    Rng* rng_;
};

void fit_cart(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    TreeBuilder builder(X, y, n_classes, 0, model.spec.max_depth, nullptr);
    std::vector<std::size_t> all(X.rows);
    std::iota(all.begin(), all.end(), 0);
    model.trees.push_back(builder.build(std::move(all)));
}

void fit_rf(TrainedClassifier& model, const Matrix& X, const std::vector<int>& y, std::size_t n_classes) {
    int per_split = model.spec.rf_features_per_split;
    if (per_split <= 0) per_split = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols)))));
    model.trees.reserve(model.spec.rf_trees);
    for (int t = 0; t < model.spec.rf_trees; ++t) {
        Rng rng(Rng::mix(model.spec.seed, static_cast<std::uint64_t>(t) + 0xf0125));
        std::vector<std::size_t> indices(X.rows);
        if (model.spec.rf_bootstrap) {
            for (auto& idx : indices) idx = rng.next_u64() % X.rows;
        } else {
            std::iota(indices.begin(), indices.end(), 0);
        }
        TreeBuilder builder(X, y, n_classes, per_split, model.spec.max_depth, &rng);
        model.trees.push_back(builder.build(std::move(indices)));
    }
}

int tree_predict(const Tree& tree, const double* x) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& nd = tree.nodes[node];
        node = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return tree.nodes[node].label;
}

} // namespace

Matrix feature_values_matrix(const FeatureMatrix& features) {
    Matrix X(features.rows(), features.dim);
    X.a = features.values;
    return X;
}

TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& X, const std::vector<std::string>& labels) {
    Encoded enc = encode_labels(labels);
    check_training_inputs(X, labels, enc.classes.size());

    TrainedClassifier model;
    model.spec = spec;
    model.classes = enc.classes;
    model.dim = X.cols;
    switch (spec.algo) {
    case Algo::lr: fit_lr(model, X, enc.y, enc.classes.size()); break;
    case Algo::lda: fit_lda(model, X, enc.y, enc.classes.size()); break;
    case Algo::nb: fit_nb(model, X, enc.y, enc.classes.size()); break;
    case Algo::knn:
        if (spec.knn_k < 1) throw Error("classic_ml", "BadHyperparameter", "knn_k must be >= 1");
        model.knn_train = X;
        model.knn_labels = enc.y;
        break;
    case Algo::svm: fit_svm(model, X, enc.y, enc.classes.size()); break;
    case Algo::cart: fit_cart(model, X, enc.y, enc.classes.size()); break;
    case Algo::rf:
        if (spec.rf_trees < 1) throw Error("classic_ml", "BadHyperparameter", "rf_trees must be >= 1");
        fit_rf(model, X, enc.y, enc.classes.size());
        break;
    }
    return model;
}

namespace {

int predict_linear_row(const TrainedClassifier& model, const double* x, std::vector<double>& buf) {
    const std::size_t C = model.classes.size(), d = model.dim;
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
        double s = model.intercept[c];
        const double* wc = model.coef.row(c);
        for (std::size_t j = 0; j < d; ++j) s += wc[j] * x[j];
        buf[c] = s;
        if (s > best_score) {
            best_score = s;
            best = static_cast<int>(c);
        }
    }
    return best;
}

int predict_nb_row(const TrainedClassifier& model, const double* x) {
    const std::size_t C = model.classes.size(), d = model.dim;
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
        double s = model.nb_log_prior[c];
        const double* mu = model.nb_mean.row(c);
        const double* var = model.nb_var.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            double diff = x[j] - mu[j];
            s += -0.5 * (std::log(2.0 * 3.14159265358979323846 * var[j]) + diff * diff / var[j]);
        }
        if (s > best_score) {
            best_score = s;
            best = static_cast<int>(c);
        }
    }
    return best;
}

int predict_knn_row(const TrainedClassifier& model, const double* x) {
    const std::size_t n = model.knn_train.rows, d = model.dim;
    const int k = std::min<int>(model.spec.knn_k, static_cast<int>(n));

    // (squared distance, training index); stable k smallest.
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* t = model.knn_train.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double diff = x[j] - t[j];
            s += diff * diff;
        }
        dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::vector<int> votes(model.classes.size(), 0);
    std::vector<double> vote_dist(model.classes.size(), 0.0);
    for (int i = 0; i < k; ++i) {
        int label = model.knn_labels[dist[i].second];
        ++votes[label];
        vote_dist[label] += dist[i].first;
    }
    // Majority; ties by smaller total distance, then smaller class index.
    int best = -1;
    for (std::size_t c = 0; c < votes.size(); ++c) {
        if (votes[c] == 0) continue;
        if (best < 0 || votes[c] > votes[best] ||
            (votes[c] == votes[best] && vote_dist[c] < vote_dist[best]))
            best = static_cast<int>(c);
    }
    return best;
}

int predict_forest_row(const TrainedClassifier& model, const double* x) {
    std::vector<int> votes(model.classes.size(), 0);
    for (const auto& tree : model.trees) ++votes[tree_predict(tree, x)];
    // Ties go to the lexicographically smallest label; classes are sorted.
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return best;
}

} // namespace

std::vector<std::string> predict(const TrainedClassifier& model, const Matrix& X) {
    if (X.cols != model.dim)
        throw Error("classic_ml", "DimensionMismatch",
                    "model expects " + std::to_string(model.dim) + " features, got " + std::to_string(X.cols));
    std::vector<std::string> out;
    out.reserve(X.rows);
    std::vector<double> buf(model.classes.size());

    const bool standardized = !model.feat_mean.empty();
    std::vector<double> zrow(model.dim);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double* x = X.row(i);
        if (standardized) {
            for (std::size_t j = 0; j < model.dim; ++j) zrow[j] = (x[j] - model.feat_mean[j]) / model.feat_scale[j];
            x = zrow.data();
        }
        int label;
        switch (model.spec.algo) {
        case Algo::lr:
        case Algo::lda:
        case Algo::svm: label = predict_linear_row(model, x, buf); break;
        case Algo::nb: label = predict_nb_row(model, x); break;
        case Algo::knn: label = predict_knn_row(model, x); break;
        case Algo::cart:
        case Algo::rf: label = predict_forest_row(model, x); break;
        default: throw Error("classic_ml", "BadAlgorithm", "unhandled algorithm");
        }
        out.push_back(model.classes[label]);
    }
    return out;
}

CvResult cross_validate(const ClassifierSpec& spec, const FeatureMatrix& features, const FoldAssignment& folds,
                        int threads) {
    (void)threads; // folds run sequentially; per-fold fits are already the hot path
    const std::size_t n = features.rows();
    if (n == 0) throw Error("classic_ml", "TooFewSamples", "feature matrix is empty");
    std::vector<int> fold_of_row(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = folds.fold_of.find(features.sample_ids[i]);
        if (it == folds.fold_of.end())
            throw Error("classic_ml", "FoldMismatch", "sample '" + features.sample_ids[i] + "' has no fold");
        fold_of_row[i] = it->second;
    }

    CvResult result;
    result.fold_accuracy.reserve(folds.k);
    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < n; ++i) (fold_of_row[i] == f ? test_rows : train_rows).push_back(i);
        if (test_rows.empty()) continue; // k larger than some class: fold carries no samples
        Matrix Xtr(train_rows.size(), features.dim), Xte(test_rows.size(), features.dim);
        std::vector<std::string> ytr, yte;
        ytr.reserve(train_rows.size());
        yte.reserve(test_rows.size());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            std::copy_n(features.row(train_rows[r]), features.dim, Xtr.row(r));
            ytr.push_back(features.labels[train_rows[r]]);
        }
        for (std::size_t r = 0; r < test_rows.size(); ++r) {
            std::copy_n(features.row(test_rows[r]), features.dim, Xte.row(r));
            yte.push_back(features.labels[test_rows[r]]);
        }
        TrainedClassifier model = fit(spec, Xtr, ytr);
        auto pred = predict(model, Xte);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < pred.size(); ++r)
            if (pred[r] == yte[r]) ++correct;
        result.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
    }
    result.mean_accuracy =
        std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) /
        static_cast<double>(result.fold_accuracy.size());
    return result;
}

namespace {

json spec_to_json(const ClassifierSpec& spec) {
    json j;
    j["algo"] = to_string(spec.algo);
    j["seed"] = spec.seed;
    j["lr_l2"] = spec.lr_l2;
    j["lr_tol"] = spec.lr_tol;
    j["lr_max_iter"] = spec.lr_max_iter;
    j["lda_ridge"] = spec.lda_ridge;
    j["nb_var_smoothing"] = spec.nb_var_smoothing;
    j["knn_k"] = spec.knn_k;
    j["svm_lambda"] = spec.svm_lambda;
    j["svm_epochs"] = spec.svm_epochs;
    j["rf_trees"] = spec.rf_trees;
    j["rf_bootstrap"] = spec.rf_bootstrap;
    j["rf_features_per_split"] = spec.rf_features_per_split;
    j["max_depth"] = spec.max_depth;
    return j;
}

ClassifierSpec spec_from_json(const json& j) {
    ClassifierSpec spec;
    spec.algo = algo_from_string(j.at("algo").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.lr_l2 = j.at("lr_l2").get<double>();
    spec.lr_tol = j.at("lr_tol").get<double>();
    spec.lr_max_iter = j.at("lr_max_iter").get<int>();
    spec.lda_ridge = j.at("lda_ridge").get<double>();
    spec.nb_var_smoothing = j.at("nb_var_smoothing").get<double>();
    spec.knn_k = j.at("knn_k").get<int>();
    spec.svm_lambda = j.at("svm_lambda").get<double>();
    spec.svm_epochs = j.at("svm_epochs").get<int>();
    spec.rf_trees = j.at("rf_trees").get<int>();
    spec.rf_bootstrap = j.at("rf_bootstrap").get<bool>();
    spec.rf_features_per_split = j.at("rf_features_per_split").get<int>();
    spec.max_depth = j.at("max_depth").get<int>();
    return spec;
}

json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.a = j.at("data").get<std::vector<double>>();
    return m;
}

} // namespace

void save_model(const TrainedClassifier& model, const std::filesystem::path& path) {
    json doc;
    doc["kind"] = "classic";
    doc["spec"] = spec_to_json(model.spec);
    doc["classes"] = model.classes;
    doc["dim"] = model.dim;
    if (!model.feat_mean.empty()) {
        doc["feat_mean"] = model.feat_mean;
        doc["feat_scale"] = model.feat_scale;
    }
    switch (model.spec.algo) {
    case Algo::lr:
    case Algo::lda:
    case Algo::svm:
        doc["coef"] = matrix_to_json(model.coef);
        doc["intercept"] = model.intercept;
        break;
    case Algo::nb:
        doc["nb_mean"] = matrix_to_json(model.nb_mean);
        doc["nb_var"] = matrix_to_json(model.nb_var);
        doc["nb_log_prior"] = model.nb_log_prior;
        break;
    case Algo::knn:
        doc["knn_train"] = matrix_to_json(model.knn_train);
        doc["knn_labels"] = model.knn_labels;
        break;
    case Algo::cart:
    case Algo::rf: {
        json trees = json::array();
        for (const auto& tree : model.trees) {
            json nodes = json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.label});
            trees.push_back(std::move(nodes));
        }
        doc["trees"] = std::move(trees);
        break;
    }
    }
    std::ofstream out(path);
    if (!out) throw Error("classic_ml", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << doc.dump() << '\n';
}

TrainedClassifier load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("classic_ml", "FileNotFound", "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
        if (doc.at("kind").get<std::string>() != "classic")
            throw Error("classic_ml", "BadModelKind", path.string() + " is not a classic model file");
        TrainedClassifier model;
        model.spec = spec_from_json(doc.at("spec"));
        model.classes = doc.at("classes").get<std::vector<std::string>>();
        model.dim = doc.at("dim").get<std::size_t>();
        if (doc.contains("feat_mean")) {
            model.feat_mean = doc.at("feat_mean").get<std::vector<double>>();
            model.feat_scale = doc.at("feat_scale").get<std::vector<double>>();
        }
        switch (model.spec.algo) {
        case Algo::lr:
        case Algo::lda:
        case Algo::svm:
            model.coef = matrix_from_json(doc.at("coef"));
            model.intercept = doc.at("intercept").get<std::vector<double>>();
            break;
        case Algo::nb:
            model.nb_mean = matrix_from_json(doc.at("nb_mean"));
            model.nb_var = matrix_from_json(doc.at("nb_var"));
            model.nb_log_prior = doc.at("nb_log_prior").get<std::vector<double>>();
            break;
        case Algo::knn:
            model.knn_train = matrix_from_json(doc.at("knn_train"));
            model.knn_labels = doc.at("knn_labels").get<std::vector<int>>();
            break;
        case Algo::cart:
        case Algo::rf:
            for (const auto& tj : doc.at("trees")) {
                Tree tree;
                for (const auto& nj : tj) {
                    TreeNode nd;
                    nd.feature = nj[0].get<int>();
                    nd.threshold = nj[1].get<double>();
                    nd.left = nj[2].get<int>();
                    nd.right = nj[3].get<int>();
                    nd.label = nj[4].get<int>();
                    tree.nodes.push_back(nd);
                }
                model.trees.push_back(std::move(tree));
            }
            break;
        }
        return model;
    } catch (const json::exception& e) {
        throw Error("classic_ml", "MalformedModel", path.string() + ": " + e.what());
    }
}

} // namespace weakvid
