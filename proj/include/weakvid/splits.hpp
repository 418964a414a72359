#ifndef WEAKVID_SPLITS_HPP
#define WEAKVID_SPLITS_HPP

#include "weakvid/dataset.hpp"
#include "weakvid/detections.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace weakvid {

enum class SplitPart { train, val, test };

std::string to_string(SplitPart part);
SplitPart split_part_from_string(const std::string& s);

// Frame-level k-fold assignment: every sample lands in exactly one fold,
// stratified so within each class the fold sizes differ by at most one.
// Frames of one video spread across folds by construction, which is exactly
// the leakage this toolchain demonstrates.
struct FoldAssignment {
    int k = 0;
    std::uint64_t seed = 0;
    std::map<std::string, int> fold_of; // sample_id -> fold in [0,k)
};

// Video-level partition: every video in exactly one of train/val/test, so no
// video contributes samples to two parts.
struct SplitAssignment {
    std::array<double, 3> ratios{0.6, 0.2, 0.2}; // train, val, test
    std::uint64_t seed = 0;
    std::map<std::string, SplitPart> split_of; // video_id -> part
};

FoldAssignment kfold_frame_split(const std::vector<Sample>& samples, int k, std::uint64_t seed);

// Per weak_label: seeded shuffle, then largest-remainder apportionment of the
// ratios over the video count. Leftover units go to the largest fractional
// remainder; ties are resolved in the order train, test, val, so a 2-video
// individual lands in train+test and a 1-video individual in train (with a
// warning).
SplitAssignment video_level_split(const std::vector<VideoMeta>& videos, std::array<double, 3> ratios,
                                  std::uint64_t seed);

// Apportioned (train, val, test) counts for n videos; exposed so tests can
// check the rounding rule directly.
std::array<int, 3> largest_remainder_counts(int n, std::array<double, 3> ratios);

std::string serialize_split(const SplitAssignment& split);
void save_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment load_split(const std::filesystem::path& path);

std::string serialize_folds(const FoldAssignment& folds);
void save_folds(const FoldAssignment& folds, const std::filesystem::path& path);
FoldAssignment load_folds(const std::filesystem::path& path);

} // namespace weakvid

#endif
