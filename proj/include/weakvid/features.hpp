#ifndef WEAKVID_FEATURES_HPP
#define WEAKVID_FEATURES_HPP

#include "weakvid/dataset.hpp"
#include "weakvid/image.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace weakvid {

// Descriptor configuration. Carried as a sidecar JSON next to every feature
// matrix so downstream consumers never hard-code the dimension.
struct FeatureConfig {
    int hist_bins = 8;
    bool hist_joint = true; // joint bins^3 HSV histogram; false = per-channel 3*bins
    int glcm_levels = 32;   // 8-bit input rebinned to this many gray levels
    bool hu_log = false;    // signed-log transform of the Hu block

    int hist_dim() const { return hist_joint ? hist_bins * hist_bins * hist_bins : 3 * hist_bins; }
    int dimension() const { return 7 + 13 + hist_dim(); }
};

// The seven Hu invariant moments of the intensity image, from normalized
// central moments. Invariant to translation and rotation of the pattern.
std::array<double, 7> hu_moments(const Image& gray);

// Fixed content-independent rebin of 8-bit values into [0, levels).
Image quantize_gray(const Image& gray, int levels);

// Symmetric normalized co-occurrence matrix (levels x levels, row-major) for
// one pixel offset. Input values must already lie in [0, levels). All-zero
// matrix when the image has no pixel pair at this offset.
std::vector<double> glcm_matrix(const Image& quantized, int levels, int dx, int dy);

// The 13 classic texture statistics of one normalized GLCM, in the order:
// ASM, contrast, correlation, sum-of-squares variance, inverse difference
// moment, sum average, sum variance, sum entropy, entropy, difference
// variance, difference entropy, information measures of correlation 1 and 2.
// Entropies use the natural logarithm.
std::array<double, 13> haralick_from_glcm(const std::vector<double>& p, int levels);

// Distance-1 statistics averaged over the directions 0/45/90/135 degrees that
// contain at least one pixel pair.
std::array<double, 13> haralick_features(const Image& gray, int levels = 32);

// Joint HSV histogram (bins^3, L1-normalized) or per-channel fallback.
std::vector<double> color_histogram(const Image& img, int bins = 8, bool joint = true);

// [hu(7) | haralick(13) | histogram] on the (cropped) image.
std::vector<double> extract_feature_vector(const Image& img, const FeatureConfig& cfg);
std::vector<double> extract_feature_vector(const Sample& sample, const FeatureConfig& cfg);

struct FeatureMatrix {
    FeatureConfig config;
    std::string dataset_name; // variant selector of the source dataset, if known
    std::size_t dim = 0;
    std::vector<std::string> sample_ids;
    std::vector<std::string> labels;
    std::vector<std::string> video_ids;
    std::vector<double> values; // rows * dim, row-major

    std::size_t rows() const { return sample_ids.size(); }
    const double* row(std::size_t i) const { return values.data() + i * dim; }
    double* row(std::size_t i) { return values.data() + i * dim; }
};

FeatureMatrix extract_features(const std::vector<Sample>& samples, const FeatureConfig& cfg, int threads = 1);

// CSV: sample_id,label,video_id,f0..f<dim-1>; sidecar <path>.json records the
// descriptor configuration.
void save_features(const FeatureMatrix& features, const std::filesystem::path& csv_path);
FeatureMatrix load_features(const std::filesystem::path& csv_path);

} // namespace weakvid

#endif
