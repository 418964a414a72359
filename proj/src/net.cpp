#include "weakvid/net.hpp"

#include "weakvid/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

using json = nlohmann::json;

namespace weakvid {

std::string to_string(TrainMode m) { return m == TrainMode::feature_extractor ? "feature_extractor" : "fine_tune"; }
std::string to_string(LossKind l) { return l == LossKind::ce ? "ce" : "weighted_ce"; }
std::string to_string(WeightMode w) { return w == WeightMode::frequency ? "frequency" : "inverse"; }

namespace {

int conv_out_size(int in) { return (in + 2 - 3) / 2 + 1; } // 3x3, stride 2, pad 1

Tensor image_to_tensor(const Image& img) {
    Tensor t(3, img.height, img.width);
    const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        t.data[i] = img.pixels[3 * i] / 255.0f;
        t.data[plane + i] = img.pixels[3 * i + 1] / 255.0f;
        t.data[2 * plane + i] = img.pixels[3 * i + 2] / 255.0f;
    }
    return t;
}

void conv_forward(const ConvBlock& blk, const Tensor& in, Tensor& out) {
    const int oh = conv_out_size(in.height), ow = conv_out_size(in.width);
    out = Tensor(blk.out_channels, oh, ow);
    for (int oc = 0; oc < blk.out_channels; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                float acc = blk.bias[oc];
                const int iy0 = 2 * oy - 1, ix0 = 2 * ox - 1;
                for (int ic = 0; ic < blk.in_channels; ++ic) {
                    const float* wbase = &blk.weight[((static_cast<std::size_t>(oc) * blk.in_channels) + ic) * 9];
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.width) continue;
                            acc += wbase[ky * 3 + kx] * in.at(ic, iy, ix);
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
}

void relu_inplace(Tensor& t) {
    for (float& v : t.data) v = v > 0.0f ? v : 0.0f;
}

// dIn/dW/dB for one block; 'pre' is the pre-ReLU output, 'post_grad' the
// gradient w.r.t. the ReLU output.
void conv_backward(const ConvBlock& blk, const Tensor& in, const Tensor& pre, const Tensor& post_grad,
                   std::vector<float>& dweight, std::vector<float>& dbias, Tensor* dinput) {
    const int oh = pre.height, ow = pre.width;
    if (dinput) *dinput = Tensor(in.channels, in.height, in.width);
    for (int oc = 0; oc < blk.out_channels; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                if (pre.at(oc, oy, ox) <= 0.0f) continue; // ReLU gate
                float g = post_grad.at(oc, oy, ox);
                if (g == 0.0f) continue;
                dbias[oc] += g;
                const int iy0 = 2 * oy - 1, ix0 = 2 * ox - 1;
                for (int ic = 0; ic < blk.in_channels; ++ic) {
                    const std::size_t wbase = ((static_cast<std::size_t>(oc) * blk.in_channels) + ic) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.height) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.width) continue;
                            dweight[wbase + ky * 3 + kx] += g * in.at(ic, iy, ix);
                            if (dinput) dinput->at(ic, iy, ix) += g * blk.weight[wbase + ky * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

} // namespace

NetModel NetModel::create(const NetConfig& config, const std::vector<std::string>& classes) {
    if (config.channels.empty()) throw Error("neural", "BadConfig", "backbone needs at least one block");
    if (classes.size() < 2) throw Error("neural", "BadConfig", "need at least two classes");
    NetModel model;
    model.config = config;
    model.config.n_classes = static_cast<int>(classes.size());
    model.classes = classes;

    Rng rng(Rng::mix(config.init_seed, 0x11e7));
    int in_ch = 3;
    for (int out_ch : config.channels) {
        ConvBlock blk;
        blk.in_channels = in_ch;
        blk.out_channels = out_ch;
        blk.weight.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
        blk.bias.assign(out_ch, 0.0f);
        double std_dev = std::sqrt(2.0 / (static_cast<double>(in_ch) * 9.0)); // He init
        for (float& w : blk.weight) w = static_cast<float>(rng.gaussian() * std_dev);
        model.blocks.push_back(std::move(blk));
        in_ch = out_ch;
    }
    model.head_weight.resize(static_cast<std::size_t>(model.config.n_classes) * in_ch);
    model.head_bias.assign(model.config.n_classes, 0.0f);
    double std_dev = std::sqrt(2.0 / static_cast<double>(in_ch));
    for (float& w : model.head_weight) w = static_cast<float>(rng.gaussian() * std_dev);
    return model;
}

std::size_t NetModel::parameter_count() const {
    std::size_t n = head_weight.size() + head_bias.size();
    for (const auto& blk : blocks) n += blk.weight.size() + blk.bias.size();
    return n;
}

std::vector<double> NetModel::forward(const Tensor& input) const {
    Tensor cur = input, next;
    for (const auto& blk : blocks) {
        conv_forward(blk, cur, next);
        relu_inplace(next);
        cur = std::move(next);
    }
    const int feat = blocks.back().out_channels;
    const double hw = static_cast<double>(cur.height) * cur.width;
    std::vector<double> pooled(feat, 0.0);
    for (int c = 0; c < feat; ++c) {
        double s = 0.0;
        for (int y = 0; y < cur.height; ++y)
            for (int x = 0; x < cur.width; ++x) s += cur.at(c, y, x);
        pooled[c] = s / hw;
    }
    std::vector<double> logits(config.n_classes, 0.0);
    for (int k = 0; k < config.n_classes; ++k) {
        double s = head_bias[k];
        const float* wk = &head_weight[static_cast<std::size_t>(k) * feat];
        for (int c = 0; c < feat; ++c) s += wk[c] * pooled[c];
        logits[k] = s;
    }
    return logits;
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
    return cfg.base_lr * std::pow(cfg.lr_factor, epoch / cfg.lr_step_epochs);
}

ClassWeights class_weights(const std::vector<int>& labels, std::size_t n_classes, WeightMode mode) {
    if (labels.empty()) throw Error("neural", "EmptyTrainingSet", "no labels to weight");
    ClassWeights cw;
    cw.counts.assign(n_classes, 0);
    for (int y : labels) {
        if (y < 0 || y >= static_cast<int>(n_classes))
            throw Error("neural", "LabelOutOfRange", "label " + std::to_string(y));
        ++cw.counts[y];
    }
    cw.total = labels.size();
    cw.w.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (cw.counts[c] == 0) continue;
        if (mode == WeightMode::frequency)
            cw.w[c] = static_cast<double>(n_classes * cw.counts[c]) / static_cast<double>(cw.total);
        else
            cw.w[c] = static_cast<double>(cw.total) / static_cast<double>(n_classes * cw.counts[c]);
    }
    return cw;
}

double weighted_ce_loss(const Matrix& logits, const std::vector<int>& labels, const std::vector<double>& w,
                        Matrix* grad) {
    if (logits.rows != labels.size())
        throw Error("neural", "DimensionMismatch",
                    std::to_string(logits.rows) + " rows vs " + std::to_string(labels.size()) + " labels");
    const std::size_t C = logits.cols;
    if (grad) *grad = Matrix(logits.rows, C);
    double loss = 0.0;
    std::vector<double> p(C);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        int y = labels[i];
        if (y < 0 || y >= static_cast<int>(C))
            throw Error("neural", "LabelOutOfRange", "label " + std::to_string(y) + " for " + std::to_string(C) +
                                                         " classes");
        const double* row = logits.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            p[c] = std::exp(row[c] - mx);
            sum += p[c];
        }
        double wy = w[y];
        loss += -wy * std::log(p[y] / sum);
        if (grad) {
            double* g = grad->row(i);
            for (std::size_t c = 0; c < C; ++c)
                g[c] = wy * (p[c] / sum - (static_cast<int>(c) == y ? 1.0 : 0.0));
        }
    }
    return loss;
}

BBox sample_crop_rect(int width, int height, Rng& rng) {
    const double area = static_cast<double>(width) * height;
    for (int attempt = 0; attempt < 10; ++attempt) {
        double target_area = area * rng.uniform(0.08, 1.0);
        double log_lo = std::log(3.0 / 4.0), log_hi = std::log(4.0 / 3.0);
        double aspect = std::exp(rng.uniform(log_lo, log_hi));
        int w = static_cast<int>(std::lround(std::sqrt(target_area * aspect)));
        int h = static_cast<int>(std::lround(std::sqrt(target_area / aspect)));
        if (w < 1 || h < 1 || w > width || h > height) continue;
        // Re-check the realized rectangle so rounding never leaks out of the
        // advertised area/ratio bounds.
        double realized_area = static_cast<double>(w) * h / area;
        double realized_ratio = static_cast<double>(w) / h;
        if (realized_area < 0.08 || realized_area > 1.0) continue;
        if (realized_ratio < 3.0 / 4.0 || realized_ratio > 4.0 / 3.0) continue;
        return {rng.uniform_int(0, width - w), rng.uniform_int(0, height - h), w, h};
    }
    // Centre-square fallback.
    int side = std::min(width, height);
    return {(width - side) / 2, (height - side) / 2, side, side};
}

Image augment_image(const Image& img, int out_size, Rng& rng) {
    BBox rect = sample_crop_rect(img.width, img.height, rng);
    Image out = crop_image(img, rect.x, rect.y, rect.w, rect.h);
    if (rng.next_double() < 0.5) {
        Image flipped(out.width, out.height, out.channels);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
                for (int c = 0; c < out.channels; ++c) flipped.set(x, y, c, out.at(out.width - 1 - x, y, c));
        out = std::move(flipped);
    }
    return resize_bilinear(out, out_size, out_size);
}

NetGradients::NetGradients(const NetModel& model) {
    for (const auto& blk : model.blocks) {
        conv_weight.emplace_back(blk.weight.size(), 0.0f);
        conv_bias.emplace_back(blk.bias.size(), 0.0f);
    }
    head_weight.assign(model.head_weight.size(), 0.0f);
    head_bias.assign(model.head_bias.size(), 0.0f);
}

void NetGradients::zero() {
    for (auto& v : conv_weight) std::fill(v.begin(), v.end(), 0.0f);
    for (auto& v : conv_bias) std::fill(v.begin(), v.end(), 0.0f);
    std::fill(head_weight.begin(), head_weight.end(), 0.0f);
    std::fill(head_bias.begin(), head_bias.end(), 0.0f);
}

// Forward with stored activations, loss gradient, backward, accumulate.
double net_train_step(const NetModel& model, const Tensor& input, int label, const std::vector<double>& weights,
                      TrainMode mode, NetGradients& grads) {
    const std::size_t L = model.blocks.size();
    std::vector<Tensor> acts(L + 1); // acts[0] = input, acts[i] = post-ReLU of block i-1
    acts[0] = input;
    for (std::size_t l = 0; l < L; ++l) {
        conv_forward(model.blocks[l], acts[l], acts[l + 1]);
        relu_inplace(acts[l + 1]);
    }
    Tensor& top = acts[L];
    const int feat = model.blocks.back().out_channels;
    const double hw = static_cast<double>(top.height) * top.width;
    std::vector<double> pooled(feat, 0.0);
    for (int c = 0; c < feat; ++c) {
        double s = 0.0;
        for (int y = 0; y < top.height; ++y)
            for (int x = 0; x < top.width; ++x) s += top.at(c, y, x);
        pooled[c] = s / hw;
    }
    Matrix logits(1, model.config.n_classes);
    for (int k = 0; k < model.config.n_classes; ++k) {
        double s = model.head_bias[k];
        const float* wk = &model.head_weight[static_cast<std::size_t>(k) * feat];
        for (int c = 0; c < feat; ++c) s += wk[c] * pooled[c];
        logits.at(0, k) = s;
    }
    Matrix dlogits;
    double loss = weighted_ce_loss(logits, {label}, weights, &dlogits);

    // Head gradients.
    std::vector<double> dpooled(feat, 0.0);
    for (int k = 0; k < model.config.n_classes; ++k) {
        double g = dlogits.at(0, k);
        grads.head_bias[k] += static_cast<float>(g);
        float* gw = &grads.head_weight[static_cast<std::size_t>(k) * feat];
        const float* wk = &model.head_weight[static_cast<std::size_t>(k) * feat];
        for (int c = 0; c < feat; ++c) {
            gw[c] += static_cast<float>(g * pooled[c]);
            dpooled[c] += g * wk[c];
        }
    }
    if (mode == TrainMode::feature_extractor) return loss;

    // Through global average pooling into the conv stack.
    Tensor dtop(top.channels, top.height, top.width);
    for (int c = 0; c < feat; ++c) {
        float g = static_cast<float>(dpooled[c] / hw);
        for (int y = 0; y < top.height; ++y)
            for (int x = 0; x < top.width; ++x) dtop.at(c, y, x) = g;
    }
    for (int l = static_cast<int>(L) - 1; l >= 0; --l) {
        Tensor dinput;
        conv_backward(model.blocks[l], acts[l], acts[l + 1], dtop, grads.conv_weight[l], grads.conv_bias[l],
                      l > 0 ? &dinput : nullptr);
        if (l > 0) dtop = std::move(dinput);
    }
    return loss;
}

namespace {

void sgd_update(std::vector<float>& param, const std::vector<float>& grad, std::vector<float>& velocity, double lr,
                double momentum) {
    if (momentum > 0.0) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            velocity[i] = static_cast<float>(momentum * velocity[i] + grad[i]);
            param[i] -= static_cast<float>(lr * velocity[i]);
        }
    } else {
        for (std::size_t i = 0; i < param.size(); ++i) param[i] -= static_cast<float>(lr * grad[i]);
    }
}

Tensor prepare_eval_input(const Image& img, int input_size) {
    return image_to_tensor(resize_bilinear(img, input_size, input_size));
}

} // namespace

std::vector<double> network_logits(const NetModel& model, const Image& img, int input_size) {
    return model.forward(prepare_eval_input(img, input_size));
}

std::vector<int> evaluate_network(const NetModel& model, const std::vector<NetSample>& samples, int input_size) {
    std::vector<int> pred;
    pred.reserve(samples.size());
    for (const auto& s : samples) {
        auto logits = model.forward(prepare_eval_input(s.image, input_size));
        pred.push_back(static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin()));
    }
    return pred;
}

TrainResult train_network(NetModel& model, const std::vector<NetSample>& train, const std::vector<NetSample>& val,
                          const TrainConfig& cfg) {
    if (train.empty() || val.empty())
        throw Error("neural", "EmptyTrainingSet", "need at least one train and one val sample");
    const std::size_t C = model.classes.size();
    for (const auto& s : train)
        if (s.label < 0 || s.label >= static_cast<int>(C))
            throw Error("neural", "LabelOutOfRange", "train label " + std::to_string(s.label));
    for (const auto& s : val)
        if (s.label < 0 || s.label >= static_cast<int>(C))
            throw Error("neural", "LabelOutOfRange", "val label " + std::to_string(s.label));

    std::vector<int> train_labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_labels[i] = train[i].label;
    std::vector<double> weights(C, 1.0);
    if (cfg.loss == LossKind::weighted_ce) {
        auto cw = class_weights(train_labels, C, cfg.weight_mode);
        weights = cw.w;
        for (std::size_t c = 0; c < C; ++c)
            if (weights[c] == 0.0) weights[c] = 1.0; // class absent from train
    }

    NetGradients grads(model);
    NetGradients velocity(model);

    // Best-on-validation snapshot.
    TrainResult result;
    std::vector<ConvBlock> best_blocks = model.blocks;
    std::vector<float> best_head_w = model.head_weight, best_head_b = model.head_bias;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at_epoch(cfg, epoch);
        Rng shuffle_rng(Rng::mix(Rng::mix(cfg.seed, 0x5a0f), static_cast<std::uint64_t>(epoch)));
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < stop; ++k) {
                std::size_t idx = order[k];
                // Augmentation stream keyed by (seed, epoch, sample index) so
                // results do not depend on loader scheduling.
                Rng aug_rng(Rng::mix(Rng::mix(cfg.seed, static_cast<std::uint64_t>(epoch) + 0xa06),
                                     static_cast<std::uint64_t>(idx)));
                Image view = augment_image(train[idx].image, cfg.input_size, aug_rng);
                batch_loss +=
                    net_train_step(model, image_to_tensor(view), train[idx].label, weights, cfg.mode, grads);
            }
            if (!std::isfinite(batch_loss))
                throw Error("neural", "NonFiniteLoss",
                            "epoch " + std::to_string(epoch) + ", batch at " + std::to_string(start));
            epoch_loss += batch_loss;
            // Summing reduction: gradients arrive summed over the batch.
            if (cfg.mode == TrainMode::fine_tune) {
                for (std::size_t l = 0; l < model.blocks.size(); ++l) {
                    sgd_update(model.blocks[l].weight, grads.conv_weight[l], velocity.conv_weight[l], lr,
                               cfg.momentum);
                    sgd_update(model.blocks[l].bias, grads.conv_bias[l], velocity.conv_bias[l], lr, cfg.momentum);
                }
            }
            sgd_update(model.head_weight, grads.head_weight, velocity.head_weight, lr, cfg.momentum);
            sgd_update(model.head_bias, grads.head_bias, velocity.head_bias, lr, cfg.momentum);
        }

        auto pred = evaluate_network(model, val, cfg.input_size);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val.size(); ++i)
            if (pred[i] == val[i].label) ++correct;
        double val_acc = static_cast<double>(correct) / static_cast<double>(val.size());

        result.log.push_back({epoch, lr, epoch_loss / static_cast<double>(train.size()), val_acc});
        if (val_acc > result.best_val_accuracy || result.best_epoch < 0) {
            result.best_val_accuracy = val_acc;
            result.best_epoch = epoch;
            best_blocks = model.blocks;
            best_head_w = model.head_weight;
            best_head_b = model.head_bias;
        }
    }

    model.blocks = std::move(best_blocks);
    model.head_weight = std::move(best_head_w);
    model.head_bias = std::move(best_head_b);
    return result;
}

namespace {

void append_params(std::vector<float>& flat, const NetModel& model) {
    for (const auto& blk : model.blocks) {
        flat.insert(flat.end(), blk.weight.begin(), blk.weight.end());
        flat.insert(flat.end(), blk.bias.begin(), blk.bias.end());
    }
    flat.insert(flat.end(), model.head_weight.begin(), model.head_weight.end());
    flat.insert(flat.end(), model.head_bias.begin(), model.head_bias.end());
}

} // namespace

void save_checkpoint(const NetModel& model, const TrainConfig& cfg, const TrainResult& result,
                     const std::filesystem::path& json_path) {
    std::filesystem::path bin_path = json_path;
    bin_path += ".bin";

    std::vector<float> flat;
    flat.reserve(model.parameter_count());
    append_params(flat, model);
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw Error("neural", "DiskWrite", "cannot open " + bin_path.string() + " for writing");
    bin.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(float)));

    json doc;
    doc["kind"] = "net";
    doc["config"] = {{"channels", model.config.channels},
                     {"input_size", model.config.input_size},
                     {"n_classes", model.config.n_classes},
                     {"init_seed", model.config.init_seed}};
    doc["classes"] = model.classes;
    doc["train_config"] = {{"epochs", cfg.epochs},
                           {"base_lr", cfg.base_lr},
                           {"lr_factor", cfg.lr_factor},
                           {"lr_step_epochs", cfg.lr_step_epochs},
                           {"batch_size", cfg.batch_size},
                           {"mode", to_string(cfg.mode)},
                           {"loss", to_string(cfg.loss)},
                           {"weight_mode", to_string(cfg.weight_mode)},
                           {"momentum", cfg.momentum},
                           {"input_size", cfg.input_size},
                           {"seed", cfg.seed}};
    doc["best_epoch"] = result.best_epoch;
    doc["best_val_accuracy"] = result.best_val_accuracy;
    json log = json::array();
    for (const auto& e : result.log) log.push_back({e.epoch, e.lr, e.train_loss, e.val_accuracy});
    doc["log"] = std::move(log);
    doc["params_file"] = bin_path.filename().string();
    doc["param_count"] = flat.size();

    std::ofstream out(json_path);
    if (!out) throw Error("neural", "DiskWrite", "cannot open " + json_path.string() + " for writing");
    out << doc.dump(1) << '\n';
}

NetModel load_checkpoint(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw Error("neural", "FileNotFound", "cannot open " + json_path.string());
    json doc;
    try {
        in >> doc;
        if (doc.at("kind").get<std::string>() != "net")
            throw Error("neural", "BadModelKind", json_path.string() + " is not a network checkpoint");
        NetConfig config;
        config.channels = doc.at("config").at("channels").get<std::vector<int>>();
        config.input_size = doc.at("config").at("input_size").get<int>();
        config.init_seed = doc.at("config").at("init_seed").get<std::uint64_t>();
        auto classes = doc.at("classes").get<std::vector<std::string>>();
        NetModel model = NetModel::create(config, classes);

        auto bin_path = json_path.parent_path() / doc.at("params_file").get<std::string>();
        std::size_t expected = doc.at("param_count").get<std::size_t>();
        if (expected != model.parameter_count())
            throw Error("neural", "MalformedCheckpoint", "parameter count does not match the architecture");
        std::ifstream bin(bin_path, std::ios::binary);
        if (!bin) throw Error("neural", "FileNotFound", "cannot open " + bin_path.string());
        std::vector<float> flat(expected);
        bin.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(expected * sizeof(float)));
        if (bin.gcount() != static_cast<std::streamsize>(expected * sizeof(float)))
            throw Error("neural", "MalformedCheckpoint", "truncated parameter blob " + bin_path.string());

        std::size_t pos = 0;
        for (auto& blk : model.blocks) {
            std::copy_n(flat.begin() + pos, blk.weight.size(), blk.weight.begin());
            pos += blk.weight.size();
            std::copy_n(flat.begin() + pos, blk.bias.size(), blk.bias.begin());
            pos += blk.bias.size();
        }
        std::copy_n(flat.begin() + pos, model.head_weight.size(), model.head_weight.begin());
        pos += model.head_weight.size();
        std::copy_n(flat.begin() + pos, model.head_bias.size(), model.head_bias.begin());
        return model;
    } catch (const json::exception& e) {
        throw Error("neural", "MalformedCheckpoint", json_path.string() + ": " + e.what());
    }
}

void save_training_curves(const TrainResult& result, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw Error("neural", "DiskWrite", "cannot open " + csv_path.string() + " for writing");
    out << "epoch,lr,train_loss,val_acc\n";
    char buf[96];
    for (const auto& e : result.log) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", e.epoch, e.lr, e.train_loss, e.val_accuracy);
        out << buf;
    }
}

} // namespace weakvid
