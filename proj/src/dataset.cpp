#include "weakvid/dataset.hpp"

#include "weakvid/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

using json = nlohmann::json;

namespace weakvid {

std::string DatasetVariant::name() const {
    char buf[48];
    double t = score_threshold;
    if (t == static_cast<int>(t))
        std::snprintf(buf, sizeof(buf), "%s,s%d", use_roi ? "roi" : "noroi", static_cast<int>(t));
    else
        std::snprintf(buf, sizeof(buf), "%s,s%g", use_roi ? "roi" : "noroi", t);
    return buf;
}

DatasetVariant DatasetVariant::parse(const std::string& selector) {
    auto comma = selector.find(',');
    if (comma == std::string::npos)
        throw Error("datasetgen", "BadVariant", "selector '" + selector + "' must look like roi,s0.5");
    std::string roi_part = selector.substr(0, comma);
    std::string score_part = selector.substr(comma + 1);
    DatasetVariant variant;
    if (roi_part == "roi")
        variant.use_roi = true;
    else if (roi_part == "noroi")
        variant.use_roi = false;
    else
        throw Error("datasetgen", "BadVariant", "ROI part must be 'roi' or 'noroi', got '" + roi_part + "'");
    if (score_part.size() < 2 || score_part[0] != 's')
        throw Error("datasetgen", "BadVariant", "score part must be 's<threshold>', got '" + score_part + "'");
    try {
        variant.score_threshold = std::stod(score_part.substr(1));
    } catch (const std::exception&) {
        throw Error("datasetgen", "BadVariant", "cannot parse threshold in '" + score_part + "'");
    }
    if (variant.score_threshold < 0.0 || variant.score_threshold > 1.0)
        throw Error("datasetgen", "BadVariant", "threshold must lie in [0,1]");
    return variant;
}

namespace {

// Intersection of the detection box with the frame; empty means drop.
std::optional<BBox> clamp_box(const BBox& box, int frame_w, int frame_h) {
    int x0 = std::max(box.x, 0);
    int y0 = std::max(box.y, 0);
    int x1 = std::min(box.x + box.w, frame_w);
    int y1 = std::min(box.y + box.h, frame_h);
    if (x1 - x0 <= 0 || y1 - y0 <= 0) return std::nullopt;
    return BBox{x0, y0, x1 - x0, y1 - y0};
}

} // namespace

std::vector<Sample> build_dataset(const std::vector<VideoMeta>& manifest,
                                  const std::map<std::string, std::map<int, DetectionRecord>>& best_by_video,
                                  const DatasetVariant& variant) {
    std::map<std::string, const VideoMeta*> by_id;
    for (const auto& v : manifest) by_id[v.video_id] = &v;

    std::vector<Sample> samples;
    for (const auto& [video_id, frames] : best_by_video) {
        auto it = by_id.find(video_id);
        if (it == by_id.end()) throw Error("datasetgen", "UnknownVideo", "'" + video_id + "' is not in the manifest");
        const VideoMeta& meta = *it->second;
        for (const auto& [frame_index, rec] : frames) {
            if (rec.score < variant.score_threshold) continue;
            Sample s;
            char idbuf[16];
            std::snprintf(idbuf, sizeof(idbuf), ":%06d", frame_index);
            s.sample_id = video_id + idbuf;
            s.video_id = video_id;
            s.frame_index = frame_index;
            s.label = meta.weak_label;
            s.score = rec.score;
            s.image_ref = (std::filesystem::path(meta.frames_dir) / frame_filename(frame_index)).string();
            if (variant.use_roi) {
                auto clamped = clamp_box(rec.bbox, meta.width, meta.height);
                if (!clamped) {
                    std::cerr << "warning: dropping " << s.sample_id << ": box does not intersect the frame\n";
                    continue;
                }
                s.crop = *clamped;
            }
            samples.push_back(std::move(s));
        }
    }
    if (samples.empty())
        std::cerr << "warning: dataset " << variant.name() << " is empty (no detection passed the threshold)\n";
    return samples;
}

DatasetStats dataset_stats(const std::vector<Sample>& samples) {
    DatasetStats stats;
    for (const auto& s : samples) ++stats.per_class[s.label];
    stats.total = samples.size();
    if (!stats.per_class.empty()) {
        stats.min_class = stats.per_class.begin()->second;
        stats.max_class = stats.per_class.begin()->second;
        for (const auto& [label, count] : stats.per_class) {
            stats.min_class = std::min(stats.min_class, count);
            stats.max_class = std::max(stats.max_class, count);
        }
    }
    return stats;
}

void save_dataset(const DatasetVariant& variant, const std::vector<Sample>& samples,
                  const std::filesystem::path& path) {
    json doc;
    doc["variant"] = {{"use_roi", variant.use_roi}, {"score_threshold", variant.score_threshold}};
    json arr = json::array();
    for (const auto& s : samples) {
        json obj;
        obj["sample_id"] = s.sample_id;
        obj["video_id"] = s.video_id;
        obj["frame_index"] = s.frame_index;
        obj["label"] = s.label;
        obj["score"] = s.score;
        obj["image_ref"] = s.image_ref;
        if (s.crop) obj["crop"] = {s.crop->x, s.crop->y, s.crop->w, s.crop->h};
        arr.push_back(std::move(obj));
    }
    doc["samples"] = std::move(arr);
    std::ofstream out(path);
    if (!out) throw Error("datasetgen", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << doc.dump(1) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("datasetgen", "FileNotFound", "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("datasetgen", "MalformedDataset", path.string() + ": " + e.what());
    }
    Dataset ds;
    try {
        ds.variant.use_roi = doc.at("variant").at("use_roi").get<bool>();
        ds.variant.score_threshold = doc.at("variant").at("score_threshold").get<double>();
        for (const auto& obj : doc.at("samples")) {
            Sample s;
            s.sample_id = obj.at("sample_id").get<std::string>();
            s.video_id = obj.at("video_id").get<std::string>();
            s.frame_index = obj.at("frame_index").get<int>();
            s.label = obj.at("label").get<std::string>();
            s.score = obj.at("score").get<double>();
            s.image_ref = obj.at("image_ref").get<std::string>();
            if (obj.contains("crop")) {
                const auto& c = obj.at("crop");
                s.crop = BBox{c[0].get<int>(), c[1].get<int>(), c[2].get<int>(), c[3].get<int>()};
            }
            ds.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error("datasetgen", "MalformedDataset", path.string() + ": " + e.what());
    }
    return ds;
}

} // namespace weakvid
