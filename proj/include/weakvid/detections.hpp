#ifndef WEAKVID_DETECTIONS_HPP
#define WEAKVID_DETECTIONS_HPP

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace weakvid {

enum class VideoSource { webcam, camcorder };

std::string to_string(VideoSource s);
VideoSource video_source_from_string(const std::string& s);

// One row of the video manifest. frames_dir is stored relative to the
// manifest file; load_manifest resolves it against the manifest's directory.
struct VideoMeta {
    std::string video_id;
    std::string weak_label;
    VideoSource source = VideoSource::webcam;
    int frame_count = 0;
    int width = 0;
    int height = 0;
    std::string frames_dir;
};

struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const BBox&) const = default;
};

// One detector hit. score in [0,1], box in pixels, top-left origin.
struct DetectionRecord {
    std::string video_id;
    int frame_index = 0;
    BBox bbox;
    double score = 0.0;

    bool operator==(const DetectionRecord&) const = default;
};

// JSON-lines, one object per line:
//   {"video_id":"v1","frame":0,"bbox":[10,10,50,80],"score":0.28}
// Blank lines are skipped; anything else unparseable raises MalformedLine.
std::vector<DetectionRecord> parse_detections(std::istream& in);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
void write_detections(const std::vector<DetectionRecord>& records, std::ostream& out);
void save_detections(const std::vector<DetectionRecord>& records, const std::filesystem::path& path);

// Keeps the highest-scoring detection per frame; score ties keep the record
// seen earliest in input order. All records must share one video_id.
std::map<int, DetectionRecord> select_best_per_frame(const std::vector<DetectionRecord>& records);

std::map<std::string, std::vector<DetectionRecord>> group_by_video(const std::vector<DetectionRecord>& records);

// CSV with header video_id,weak_label,source,frame_count,width,height,frames_dir
std::vector<VideoMeta> parse_manifest(std::istream& in);
std::vector<VideoMeta> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<VideoMeta>& videos, std::ostream& out);
void save_manifest(const std::vector<VideoMeta>& videos, const std::filesystem::path& path);

// Frame image naming convention used across the pipeline: <index>.ppm, zero
// padded to six digits, under the video's frames_dir.
std::string frame_filename(int frame_index);

} // namespace weakvid

#endif
