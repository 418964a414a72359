#ifndef WEAKVID_NET_HPP
#define WEAKVID_NET_HPP

#include "weakvid/detections.hpp"
#include "weakvid/image.hpp"
#include "weakvid/matrix.hpp"
#include "weakvid/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weakvid {

// CHW float tensor.
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0f) {}
    float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
};

// 3x3 convolution, stride 2, pad 1, followed by ReLU.
struct ConvBlock {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> weight; // out * in * 3 * 3
    std::vector<float> bias;   // out
};

// Backbone: configurable stack of stride-2 conv blocks, global average pool,
// single fully-connected head.
struct NetConfig {
    std::vector<int> channels{16, 32, 64, 128};
    int input_size = 224;
    int n_classes = 0;
    std::uint64_t init_seed = 0;
};

struct NetModel {
    NetConfig config;
    std::vector<std::string> classes;
    std::vector<ConvBlock> blocks;
    std::vector<float> head_weight; // n_classes * channels.back()
    std::vector<float> head_bias;   // n_classes

    static NetModel create(const NetConfig& config, const std::vector<std::string>& classes);

    // Logits for a pre-sized input_size x input_size RGB tensor.
    std::vector<double> forward(const Tensor& input) const;

    std::size_t parameter_count() const;
};

enum class TrainMode { feature_extractor, fine_tune };
enum class LossKind { ce, weighted_ce };
enum class WeightMode { frequency, inverse };

std::string to_string(TrainMode m);
std::string to_string(LossKind l);
std::string to_string(WeightMode w);

struct TrainConfig {
    int epochs = 100;
    double base_lr = 1e-3;
    double lr_factor = 0.1;
    int lr_step_epochs = 20; // lr = base_lr * factor^(epoch / step)
    int batch_size = 64;
    TrainMode mode = TrainMode::fine_tune;
    LossKind loss = LossKind::ce;
    WeightMode weight_mode = WeightMode::frequency;
    double momentum = 0.0; // plain SGD by default
    int input_size = 224;
    std::uint64_t seed = 0;
};

double lr_at_epoch(const TrainConfig& cfg, int epoch);

// w_y = n_classes * N_y / N over the training labels: proportional to class
// frequency, exactly 1 everywhere when classes are balanced. The inverse mode
// (w_y = N / (n_classes * N_y)) is the usual rebalancing ablation.
struct ClassWeights {
    std::vector<double> w;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
};

ClassWeights class_weights(const std::vector<int>& labels, std::size_t n_classes,
                           WeightMode mode = WeightMode::frequency);

// Sum-reduced weighted softmax cross-entropy over a batch of logits
// (rows x classes). Returns the loss; when grad is non-null it receives
// d(loss)/d(logits), i.e. w_y * (softmax - onehot) per row. 64-bit throughout.
double weighted_ce_loss(const Matrix& logits, const std::vector<int>& labels, const std::vector<double>& w,
                        Matrix* grad = nullptr);

// Crop rectangle of the random-resized-crop sampler: area fraction in
// [0.08,1] and aspect ratio in [3/4,4/3] after rounding, 10 attempts, then a
// centre square. Exposed so the realized bounds are directly testable.
BBox sample_crop_rect(int width, int height, Rng& rng);

// sample_crop_rect, horizontal flip with p=0.5, bilinear resize.
Image augment_image(const Image& img, int out_size, Rng& rng);

struct NetSample {
    Image image;
    int label = 0;
};

// Parameter-shaped gradient accumulators.
struct NetGradients {
    std::vector<std::vector<float>> conv_weight, conv_bias;
    std::vector<float> head_weight, head_bias;

    explicit NetGradients(const NetModel& model);
    void zero();
};

// One forward/backward pass for a single prepared input; gradients are
// accumulated (summing reduction), the sample's loss term is returned.
// feature_extractor mode stops the backward pass at the head.
double net_train_step(const NetModel& model, const Tensor& input, int label, const std::vector<double>& weights,
                      TrainMode mode, NetGradients& grads);

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0; // mean per-sample loss
    double val_accuracy = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_val_accuracy = 0.0;
};

// Seeded mini-batch SGD following the configured schedule; evaluates the
// validation set after each epoch (plain resize, no augmentation) and leaves
// the best-on-validation parameters in the model (ties: earliest epoch).
TrainResult train_network(NetModel& model, const std::vector<NetSample>& train, const std::vector<NetSample>& val,
                          const TrainConfig& cfg);

std::vector<double> network_logits(const NetModel& model, const Image& img, int input_size);
std::vector<int> evaluate_network(const NetModel& model, const std::vector<NetSample>& samples, int input_size);

// JSON descriptor + raw little-endian float32 parameter blob next to it.
void save_checkpoint(const NetModel& model, const TrainConfig& cfg, const TrainResult& result,
                     const std::filesystem::path& json_path);
NetModel load_checkpoint(const std::filesystem::path& json_path);

void save_training_curves(const TrainResult& result, const std::filesystem::path& csv_path);

} // namespace weakvid

#endif
