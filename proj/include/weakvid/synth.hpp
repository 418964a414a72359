#ifndef WEAKVID_SYNTH_HPP
#define WEAKVID_SYNTH_HPP

#include "weakvid/detections.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace weakvid {

// Knobs of the synthetic corpus generator. Each individual gets a stable
// appearance (base hue + stripe frequency); each video gets nuisance factors
// (background hue, illumination, patch placement) drawn once, so consecutive
// frames are near-duplicates while different videos of the same individual
// look substantially different. That combination is what makes frame-level
// cross-validation scores illusory and keeps video-level scores honest.
struct SynthConfig {
    int n_classes = 6;
    int videos_per_class = 10;
    int frames_per_video = 100;
    int frame_width = 96;
    int frame_height = 72;

    // Per-frame patch jitter in pixels; 0 makes every frame of a video
    // pixel-identical.
    double jitter_amplitude = 2.0;

    // Spread of the per-video perturbation of the individual's hue, as a
    // fraction of the hue circle. Larger = weaker identity signal.
    double appearance_hue_noise = 0.055;

    // Scales background-hue spread and illumination range. Larger = scene
    // cues dominate; 0 = identical scenes everywhere.
    double nuisance_strength = 1.0;

    // Probability that a video's rendered patch takes another individual's
    // appearance while keeping the video's weak label.
    double mislabel_rate = 0.0;

    double webcam_fraction = 0.5;
    // Detection score distributions, Beta(a,b): webcam-like videos score low,
    // camcorder-like high, so a 0.5 threshold filters meaningfully.
    double webcam_score_a = 2.0, webcam_score_b = 3.0;
    double camcorder_score_a = 6.0, camcorder_score_b = 2.0;

    std::uint64_t seed = 0;
};

struct SynthOutput {
    std::filesystem::path manifest_path;
    std::filesystem::path detections_path;
    int n_videos = 0;
    int n_frames = 0;
};

// Writes manifest.csv, detections.jsonl and frames/<video_id>/<frame>.ppm
// under out_dir. Byte-identical output for equal (config, seed).
SynthOutput generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// INI-style key=value file mirroring the SynthConfig fields.
SynthConfig load_synth_config(const std::filesystem::path& path);
void save_synth_config(const SynthConfig& cfg, const std::filesystem::path& path);

} // namespace weakvid

#endif
