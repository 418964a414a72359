#include "weakvid/splits.hpp"

#include "weakvid/error.hpp"
#include "weakvid/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

using json = nlohmann::json;

namespace weakvid {

std::string to_string(SplitPart part) {
    switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::val: return "val";
    case SplitPart::test: return "test";
    }
    return "train";
}

SplitPart split_part_from_string(const std::string& s) {
    if (s == "train") return SplitPart::train;
    if (s == "val") return SplitPart::val;
    if (s == "test") return SplitPart::test;
    throw Error("splitting", "BadSplitPart", "unknown split part '" + s + "'");
}

FoldAssignment kfold_frame_split(const std::vector<Sample>& samples, int k, std::uint64_t seed) {
    if (k < 2) throw Error("splitting", "BadFoldCount", "k must be >= 2, got " + std::to_string(k));
    if (samples.empty()) throw Error("splitting", "TooFewSamples", "no samples to assign");

    // Stratify: shuffle each class independently, then deal round-robin so
    // fold sizes within a class differ by at most one.
    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& s : samples) by_class[s.label].push_back(s.sample_id);

    FoldAssignment assignment;
    assignment.k = k;
    assignment.seed = seed;
    for (auto& [label, ids] : by_class) {
        std::sort(ids.begin(), ids.end());
        Rng rng(Rng::mix(seed, Rng::hash_str(label)));
        rng.shuffle(ids);
        for (std::size_t i = 0; i < ids.size(); ++i)
            assignment.fold_of[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return assignment;
}

std::array<int, 3> largest_remainder_counts(int n, std::array<double, 3> ratios) {
    // Priority order train, test, val: remaining units and remainder ties both
    // favour train first and test before val.
    const int order[3] = {0, 2, 1};
    std::array<int, 3> counts{};
    std::array<double, 3> remainders{};
    int assigned = 0;
    for (int part = 0; part < 3; ++part) {
        double quota = ratios[part] * n;
        counts[part] = static_cast<int>(std::floor(quota));
        remainders[part] = quota - counts[part];
        assigned += counts[part];
    }
    int leftover = n - assigned;
    while (leftover > 0) {
        int pick = -1;
        for (int idx : order) {
            if (pick < 0 || remainders[idx] > remainders[pick] + 1e-12) pick = idx;
        }
        ++counts[pick];
        remainders[pick] = -1.0;
        --leftover;
    }
    return counts;
}

SplitAssignment video_level_split(const std::vector<VideoMeta>& videos, std::array<double, 3> ratios,
                                  std::uint64_t seed) {
    double total = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(total - 1.0) > 1e-9)
        throw Error("splitting", "BadRatios", "ratios must sum to 1, got " + std::to_string(total));

    std::map<std::string, std::vector<std::string>> by_label;
    for (const auto& v : videos) by_label[v.weak_label].push_back(v.video_id);

    SplitAssignment assignment;
    assignment.ratios = ratios;
    assignment.seed = seed;
    for (auto& [label, ids] : by_label) {
        std::sort(ids.begin(), ids.end());
        Rng rng(Rng::mix(seed, Rng::hash_str(label)));
        rng.shuffle(ids);
        auto counts = largest_remainder_counts(static_cast<int>(ids.size()), ratios);
        if (ids.size() == 1)
            std::cerr << "warning: individual '" << label << "' has a single video; it goes to train only\n";
        std::size_t pos = 0;
        for (int part = 0; part < 3; ++part) {
            for (int i = 0; i < counts[part]; ++i)
                assignment.split_of[ids[pos++]] = static_cast<SplitPart>(part);
        }
    }
    return assignment;
}

std::string serialize_split(const SplitAssignment& split) {
    json doc;
    json lists;
    lists["train"] = json::array();
    lists["val"] = json::array();
    lists["test"] = json::array();
    for (const auto& [video_id, part] : split.split_of) lists[to_string(part)].push_back(video_id);
    doc["train"] = lists["train"];
    doc["val"] = lists["val"];
    doc["test"] = lists["test"];
    doc["ratios"] = {split.ratios[0], split.ratios[1], split.ratios[2]};
    doc["seed"] = split.seed;
    return doc.dump(1) + "\n";
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("splitting", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << serialize_split(split);
}

SplitAssignment load_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("splitting", "FileNotFound", "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("splitting", "MalformedSplit", path.string() + ": " + e.what());
    }
    SplitAssignment split;
    try {
        auto r = doc.at("ratios");
        split.ratios = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
        split.seed = doc.at("seed").get<std::uint64_t>();
        for (int part = 0; part < 3; ++part) {
            for (const auto& id : doc.at(to_string(static_cast<SplitPart>(part))))
                split.split_of[id.get<std::string>()] = static_cast<SplitPart>(part);
        }
    } catch (const json::exception& e) {
        throw Error("splitting", "MalformedSplit", path.string() + ": " + e.what());
    }
    return split;
}

std::string serialize_folds(const FoldAssignment& folds) {
    json doc;
    doc["k"] = folds.k;
    doc["seed"] = folds.seed;
    doc["fold_of"] = json::object();
    for (const auto& [sample_id, fold] : folds.fold_of) doc["fold_of"][sample_id] = fold;
    return doc.dump(1) + "\n";
}

void save_folds(const FoldAssignment& folds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("splitting", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << serialize_folds(folds);
}

FoldAssignment load_folds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("splitting", "FileNotFound", "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("splitting", "MalformedFolds", path.string() + ": " + e.what());
    }
    FoldAssignment folds;
    try {
        folds.k = doc.at("k").get<int>();
        folds.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& [sample_id, fold] : doc.at("fold_of").items())
            folds.fold_of[sample_id] = fold.get<int>();
    } catch (const json::exception& e) {
        throw Error("splitting", "MalformedFolds", path.string() + ": " + e.what());
    }
    return folds;
}

} // namespace weakvid
