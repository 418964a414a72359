#include "weakvid/detections.hpp"

#include "weakvid/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using json = nlohmann::json;

namespace weakvid {

std::string to_string(VideoSource s) {
    return s == VideoSource::webcam ? "webcam" : "camcorder";
}

VideoSource video_source_from_string(const std::string& s) {
    if (s == "webcam") return VideoSource::webcam;
    if (s == "camcorder") return VideoSource::camcorder;
    throw Error("ingest", "BadSource", "unknown video source '" + s + "'");
}

std::vector<DetectionRecord> parse_detections(std::istream& in) {
    std::vector<DetectionRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception&) {
            throw Error("ingest", "MalformedLine", "line " + std::to_string(line_no) + " is not valid JSON");
        }
        DetectionRecord rec;
        try {
            rec.video_id = obj.at("video_id").get<std::string>();
            rec.frame_index = obj.at("frame").get<int>();
            const auto& box = obj.at("bbox");
            if (!box.is_array() || box.size() != 4)
                throw Error("ingest", "MalformedLine", "line " + std::to_string(line_no) + ": bbox must be [x,y,w,h]");
            rec.bbox = {box[0].get<int>(), box[1].get<int>(), box[2].get<int>(), box[3].get<int>()};
            rec.score = obj.at("score").get<double>();
        } catch (const json::exception&) {
            throw Error("ingest", "MalformedLine", "line " + std::to_string(line_no) + " is missing required fields");
        }
        if (rec.frame_index < 0)
            throw Error("ingest", "MalformedLine", "line " + std::to_string(line_no) + ": negative frame index");
        if (rec.score < 0.0 || rec.score > 1.0)
            throw Error("ingest", "ScoreOutOfRange",
                        "line " + std::to_string(line_no) + ": score " + std::to_string(rec.score));
        if (rec.bbox.w <= 0 || rec.bbox.h <= 0)
            throw Error("ingest", "NonPositiveBox", "line " + std::to_string(line_no) + ": box has w or h <= 0");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("ingest", "FileNotFound", "cannot open " + path.string());
    return parse_detections(in);
}

void write_detections(const std::vector<DetectionRecord>& records, std::ostream& out) {
    for (const auto& rec : records) {
        json obj;
        obj["video_id"] = rec.video_id;
        obj["frame"] = rec.frame_index;
        obj["bbox"] = {rec.bbox.x, rec.bbox.y, rec.bbox.w, rec.bbox.h};
        obj["score"] = rec.score;
        out << obj.dump() << '\n';
    }
}

void save_detections(const std::vector<DetectionRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("ingest", "DiskWrite", "cannot open " + path.string() + " for writing");
    write_detections(records, out);
}

std::map<int, DetectionRecord> select_best_per_frame(const std::vector<DetectionRecord>& records) {
    std::map<int, DetectionRecord> best;
    for (const auto& rec : records) {
        if (rec.video_id != records.front().video_id)
            throw Error("ingest", "MixedVideos",
                        "records span '" + records.front().video_id + "' and '" + rec.video_id + "'");
        auto it = best.find(rec.frame_index);
        // strict > keeps the earliest record on equal scores
        if (it == best.end() || rec.score > it->second.score) best[rec.frame_index] = rec;
    }
    return best;
}

std::map<std::string, std::vector<DetectionRecord>> group_by_video(const std::vector<DetectionRecord>& records) {
    std::map<std::string, std::vector<DetectionRecord>> groups;
    for (const auto& rec : records) groups[rec.video_id].push_back(rec);
    return groups;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::vector<VideoMeta> parse_manifest(std::istream& in) {
    std::vector<VideoMeta> videos;
    std::string line;
    if (!std::getline(in, line)) throw Error("ingest", "MalformedManifest", "empty manifest");
    if (split_csv_line(line) !=
        std::vector<std::string>{"video_id", "weak_label", "source", "frame_count", "width", "height", "frames_dir"})
        throw Error("ingest", "MalformedManifest", "unexpected manifest header");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 7)
            throw Error("ingest", "MalformedManifest", "line " + std::to_string(line_no) + " has " +
                                                           std::to_string(fields.size()) + " fields, want 7");
        VideoMeta meta;
        meta.video_id = fields[0];
        meta.weak_label = fields[1];
        meta.source = video_source_from_string(fields[2]);
        try {
            meta.frame_count = std::stoi(fields[3]);
            meta.width = std::stoi(fields[4]);
            meta.height = std::stoi(fields[5]);
        } catch (const std::exception&) {
            throw Error("ingest", "MalformedManifest", "line " + std::to_string(line_no) + ": bad integer field");
        }
        meta.frames_dir = fields[6];
        if (meta.frame_count < 0 || meta.width <= 0 || meta.height <= 0)
            throw Error("ingest", "MalformedManifest",
                        "line " + std::to_string(line_no) + ": dimensions/frame_count out of range");
        videos.push_back(std::move(meta));
    }
    return videos;
}

std::vector<VideoMeta> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("ingest", "FileNotFound", "cannot open " + path.string());
    auto videos = parse_manifest(in);
    auto base = path.parent_path();
    for (auto& v : videos) {
        std::filesystem::path dir(v.frames_dir);
        if (dir.is_relative()) v.frames_dir = (base / dir).lexically_normal().string();
    }
    return videos;
}

void write_manifest(const std::vector<VideoMeta>& videos, std::ostream& out) {
    out << "video_id,weak_label,source,frame_count,width,height,frames_dir\n";
    for (const auto& v : videos) {
        out << v.video_id << ',' << v.weak_label << ',' << to_string(v.source) << ',' << v.frame_count << ','
            << v.width << ',' << v.height << ',' << v.frames_dir << '\n';
    }
}

void save_manifest(const std::vector<VideoMeta>& videos, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("ingest", "DiskWrite", "cannot open " + path.string() + " for writing");
    write_manifest(videos, out);
}

std::string frame_filename(int frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.ppm", frame_index);
    return buf;
}

} // namespace weakvid
