#include "weakvid/synth.hpp"

#include "weakvid/error.hpp"
#include "weakvid/image.hpp"
#include "weakvid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace weakvid {

namespace {

constexpr double kPi = 3.14159265358979323846;

void hsv_to_rgb(double h, double s, double v, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    h = h - std::floor(h); // wrap to [0,1)
    double i;
    double f = std::modf(h * 6.0, &i);
    double p = v * (1.0 - s);
    double q = v * (1.0 - s * f);
    double t = v * (1.0 - s * (1.0 - f));
    double rr, gg, bb;
    switch (static_cast<int>(i) % 6) {
    case 0: rr = v; gg = t; bb = p; break;
    case 1: rr = q; gg = v; bb = p; break;
    case 2: rr = p; gg = v; bb = t; break;
    case 3: rr = p; gg = q; bb = v; break;
    case 4: rr = t; gg = p; bb = v; break;
    default: rr = v; gg = p; bb = q; break;
    }
    auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
    r = to8(rr);
    g = to8(gg);
    b = to8(bb);
}

struct VideoPlan {
    std::string video_id;
    int class_index = 0;
    int appearance_class = 0; // differs from class_index on weak-label noise
    VideoSource source = VideoSource::webcam;
    double background_hue = 0.0;
    double background_sat = 0.0;
    double illumination = 1.0;
    double patch_hue = 0.0;
    double stripe_wavelength = 5.0;
    double stripe_phase = 0.0;
    double cx = 0.0, cy = 0.0; // base patch centre
    double rx = 0.0, ry = 0.0; // patch radii
};

VideoPlan plan_video(const SynthConfig& cfg, int global_index, int class_index) {
    Rng rng(Rng::mix(cfg.seed, static_cast<std::uint64_t>(global_index)));
    VideoPlan plan;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%03d", global_index);
    plan.video_id = buf;
    plan.class_index = class_index;
    plan.source = rng.next_double() < cfg.webcam_fraction ? VideoSource::webcam : VideoSource::camcorder;

    plan.appearance_class = class_index;
    if (cfg.n_classes > 1 && rng.next_double() < cfg.mislabel_rate)
        plan.appearance_class =
            (class_index + 1 + static_cast<int>(rng.next_u64() % (cfg.n_classes - 1))) % cfg.n_classes;

    // Scene nuisance, drawn once per video.
    plan.background_hue = rng.next_double();
    plan.background_sat = std::clamp(cfg.nuisance_strength, 0.0, 1.0) * rng.uniform(0.35, 0.85);
    plan.illumination = 1.0 + cfg.nuisance_strength * rng.uniform(-0.35, 0.35);

    // Individual appearance with per-video perturbation.
    double class_hue = static_cast<double>(plan.appearance_class) / cfg.n_classes;
    plan.patch_hue = class_hue + rng.gaussian() * cfg.appearance_hue_noise;
    plan.stripe_wavelength = 4.0 + 1.5 * plan.appearance_class;
    plan.stripe_phase = rng.uniform(0.0, 2.0 * kPi);

    double min_dim = std::min(cfg.frame_width, cfg.frame_height);
    plan.ry = min_dim * rng.uniform(0.22, 0.30);
    plan.rx = plan.ry * rng.uniform(0.9, 1.3);
    plan.cx = rng.uniform(plan.rx + 2.0, cfg.frame_width - plan.rx - 2.0);
    plan.cy = rng.uniform(plan.ry + 2.0, cfg.frame_height - plan.ry - 2.0);
    return plan;
}

Image render_frame(const SynthConfig& cfg, const VideoPlan& plan, double dx, double dy) {
    Image img(cfg.frame_width, cfg.frame_height, 3);
    double cx = plan.cx + dx, cy = plan.cy + dy;
    for (int y = 0; y < cfg.frame_height; ++y) {
        for (int x = 0; x < cfg.frame_width; ++x) {
            double ex = (x - cx) / plan.rx;
            double ey = (y - cy) / plan.ry;
            std::uint8_t r, g, b;
            if (ex * ex + ey * ey <= 1.0) {
                double stripe = std::sin(2.0 * kPi * (x - dx) / plan.stripe_wavelength + plan.stripe_phase);
                double v = (0.72 + 0.22 * stripe) * plan.illumination;
                hsv_to_rgb(plan.patch_hue, 0.8, std::clamp(v, 0.05, 1.0), r, g, b);
            } else {
                double gradient = 0.55 + 0.35 * static_cast<double>(y) / cfg.frame_height;
                double v = gradient * plan.illumination;
                hsv_to_rgb(plan.background_hue, plan.background_sat, std::clamp(v, 0.05, 1.0), r, g, b);
            }
            img.set(x, y, 0, r);
            img.set(x, y, 1, g);
            img.set(x, y, 2, b);
        }
    }
    return img;
}

} // namespace

SynthOutput generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.n_classes < 1 || cfg.videos_per_class < 1 || cfg.frames_per_video < 1 || cfg.frame_width < 8 ||
        cfg.frame_height < 8)
        throw Error("synth", "InvalidConfig", "counts and frame size must be positive (frames at least 8x8)");
    if (cfg.mislabel_rate < 0.0 || cfg.mislabel_rate > 1.0 || cfg.webcam_fraction < 0.0 || cfg.webcam_fraction > 1.0)
        throw Error("synth", "InvalidConfig", "rates must lie in [0,1]");

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "frames", ec);
    if (ec) throw Error("synth", "DiskWrite", "cannot create " + (out_dir / "frames").string());

    std::vector<VideoMeta> manifest;
    std::vector<DetectionRecord> detections;
    int global_index = 0;
    for (int c = 0; c < cfg.n_classes; ++c) {
        for (int v = 0; v < cfg.videos_per_class; ++v, ++global_index) {
            VideoPlan plan = plan_video(cfg, global_index, c);
            auto frames_dir = out_dir / "frames" / plan.video_id;
            std::filesystem::create_directories(frames_dir, ec);
            if (ec) throw Error("synth", "DiskWrite", "cannot create " + frames_dir.string());

            VideoMeta meta;
            meta.video_id = plan.video_id;
            meta.weak_label = "ind" + std::to_string(c);
            meta.source = plan.source;
            meta.frame_count = cfg.frames_per_video;
            meta.width = cfg.frame_width;
            meta.height = cfg.frame_height;
            meta.frames_dir = (std::filesystem::path("frames") / plan.video_id).string();
            manifest.push_back(meta);

            double score_a = plan.source == VideoSource::webcam ? cfg.webcam_score_a : cfg.camcorder_score_a;
            double score_b = plan.source == VideoSource::webcam ? cfg.webcam_score_b : cfg.camcorder_score_b;

            std::uint64_t video_key = Rng::mix(cfg.seed, 0xf7a3e5 + static_cast<std::uint64_t>(global_index));
            for (int f = 0; f < cfg.frames_per_video; ++f) {
                Rng frame_rng(Rng::mix(video_key, static_cast<std::uint64_t>(f)));
                double dx = 0.0, dy = 0.0;
                if (cfg.jitter_amplitude > 0.0) {
                    dx = std::round(frame_rng.uniform(-cfg.jitter_amplitude, cfg.jitter_amplitude));
                    dy = std::round(frame_rng.uniform(-cfg.jitter_amplitude, cfg.jitter_amplitude));
                }
                Image frame = render_frame(cfg, plan, dx, dy);
                write_pnm(frame, frames_dir / frame_filename(f));

                DetectionRecord rec;
                rec.video_id = plan.video_id;
                rec.frame_index = f;
                rec.bbox = {static_cast<int>(std::floor(plan.cx + dx - plan.rx)),
                            static_cast<int>(std::floor(plan.cy + dy - plan.ry)),
                            static_cast<int>(std::ceil(2.0 * plan.rx)), static_cast<int>(std::ceil(2.0 * plan.ry))};
                rec.score = frame_rng.beta(score_a, score_b);
                detections.push_back(rec);
            }
        }
    }

    SynthOutput out;
    out.manifest_path = out_dir / "manifest.csv";
    out.detections_path = out_dir / "detections.jsonl";
    out.n_videos = global_index;
    out.n_frames = global_index * cfg.frames_per_video;
    save_manifest(manifest, out.manifest_path);
    save_detections(detections, out.detections_path);
    return out;
}

namespace {

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("synth", "FileNotFound", "cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

} // namespace

SynthConfig load_synth_config(const std::filesystem::path& path) {
    auto kv = read_kv_file(path);
    SynthConfig cfg;
    auto geti = [&](const char* key, int& out) {
        if (kv.count(key)) out = std::stoi(kv[key]);
    };
    auto getd = [&](const char* key, double& out) {
        if (kv.count(key)) out = std::stod(kv[key]);
    };
    geti("n_classes", cfg.n_classes);
    geti("videos_per_class", cfg.videos_per_class);
    geti("frames_per_video", cfg.frames_per_video);
    geti("frame_width", cfg.frame_width);
    geti("frame_height", cfg.frame_height);
    getd("jitter_amplitude", cfg.jitter_amplitude);
    getd("appearance_hue_noise", cfg.appearance_hue_noise);
    getd("nuisance_strength", cfg.nuisance_strength);
    getd("mislabel_rate", cfg.mislabel_rate);
    getd("webcam_fraction", cfg.webcam_fraction);
    getd("webcam_score_a", cfg.webcam_score_a);
    getd("webcam_score_b", cfg.webcam_score_b);
    getd("camcorder_score_a", cfg.camcorder_score_a);
    getd("camcorder_score_b", cfg.camcorder_score_b);
    if (kv.count("seed")) cfg.seed = std::stoull(kv["seed"]);
    return cfg;
}

void save_synth_config(const SynthConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("synth", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << "n_classes = " << cfg.n_classes << '\n'
        << "videos_per_class = " << cfg.videos_per_class << '\n'
        << "frames_per_video = " << cfg.frames_per_video << '\n'
        << "frame_width = " << cfg.frame_width << '\n'
        << "frame_height = " << cfg.frame_height << '\n'
        << "jitter_amplitude = " << cfg.jitter_amplitude << '\n'
        << "appearance_hue_noise = " << cfg.appearance_hue_noise << '\n'
        << "nuisance_strength = " << cfg.nuisance_strength << '\n'
        << "mislabel_rate = " << cfg.mislabel_rate << '\n'
        << "webcam_fraction = " << cfg.webcam_fraction << '\n'
        << "webcam_score_a = " << cfg.webcam_score_a << '\n'
        << "webcam_score_b = " << cfg.webcam_score_b << '\n'
        << "camcorder_score_a = " << cfg.camcorder_score_a << '\n'
        << "camcorder_score_b = " << cfg.camcorder_score_b << '\n'
        << "seed = " << cfg.seed << '\n';
}

} // namespace weakvid
