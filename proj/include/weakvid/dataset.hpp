#ifndef WEAKVID_DATASET_HPP
#define WEAKVID_DATASET_HPP

#include "weakvid/detections.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace weakvid {

// One of the generated dataset flavours: keep full frames or crop to the best
// detection, and keep detections with score >= threshold.
struct DatasetVariant {
    bool use_roi = false;
    double score_threshold = 0.0;

    // "roi,s0.5" / "noroi,s0" style selector, as accepted on the CLI.
    std::string name() const;
    static DatasetVariant parse(const std::string& selector);
};

// One labelled image unit. crop is present iff the owning variant uses ROI;
// it is the detection box clamped to the frame. Pixels are cut lazily at
// feature-extraction time.
struct Sample {
    std::string sample_id;
    std::string video_id;
    int frame_index = 0;
    std::string label;
    double score = 0.0;
    std::string image_ref;
    std::optional<BBox> crop;

    bool operator==(const Sample&) const = default;
};

struct DatasetStats {
    std::map<std::string, std::size_t> per_class;
    std::size_t total = 0;
    std::size_t min_class = 0;
    std::size_t max_class = 0;
};

// One Sample per best detection with score >= threshold. Labels come from the
// owning video's weak_label. Degenerate boxes (empty intersection with the
// frame) drop the sample with a warning on stderr.
std::vector<Sample> build_dataset(const std::vector<VideoMeta>& manifest,
                                  const std::map<std::string, std::map<int, DetectionRecord>>& best_by_video,
                                  const DatasetVariant& variant);

DatasetStats dataset_stats(const std::vector<Sample>& samples);

void save_dataset(const DatasetVariant& variant, const std::vector<Sample>& samples,
                  const std::filesystem::path& path);

struct Dataset {
    DatasetVariant variant;
    std::vector<Sample> samples;
};

Dataset load_dataset(const std::filesystem::path& path);

} // namespace weakvid

#endif
