// weakvid: turn weakly labelled videos plus per-frame detector outputs into
// classification datasets, train classical and neural classifiers under
// frame-level and video-level data separation, and report the difference.
//
// Subcommands talk to each other only through files, so any stage can be
// re-run or inspected in isolation. All randomness flows from explicit
// --seed flags (default 0, never wall-clock).

#include "weakvid/classifiers.hpp"
#include "weakvid/dataset.hpp"
#include "weakvid/detections.hpp"
#include "weakvid/error.hpp"
#include "weakvid/features.hpp"
#include "weakvid/metrics.hpp"
#include "weakvid/net.hpp"
#include "weakvid/splits.hpp"
#include "weakvid/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

using json = nlohmann::json;
using namespace weakvid;

namespace {

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> ratios{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        auto comma = text.find(',', pos);
        std::string part = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        ratios[i] = std::stod(part);
        pos = comma == std::string::npos ? text.size() : comma + 1;
    }
    return ratios;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        out.push_back(std::stoi(text.substr(pos, comma == std::string::npos ? comma : comma - pos)));
        pos = comma == std::string::npos ? text.size() : comma + 1;
    }
    return out;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cli", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << doc.dump(1) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "FileNotFound", "cannot open " + path.string());
    json doc;
    in >> doc;
    return doc;
}

std::map<std::string, std::map<int, DetectionRecord>> best_detections(const std::vector<DetectionRecord>& records) {
    std::map<std::string, std::map<int, DetectionRecord>> best;
    for (auto& [video_id, group] : group_by_video(records)) best[video_id] = select_best_per_frame(group);
    return best;
}

// Rows of a feature matrix that belong to one part of a video-level split.
std::vector<std::size_t> rows_in_part(const FeatureMatrix& features, const SplitAssignment& split, SplitPart part) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto it = split.split_of.find(features.video_ids[i]);
        if (it == split.split_of.end())
            throw Error("cli", "UnknownVideo", "video '" + features.video_ids[i] + "' missing from the split file");
        if (it->second == part) rows.push_back(i);
    }
    return rows;
}

Matrix gather_rows(const FeatureMatrix& features, const std::vector<std::size_t>& rows) {
    Matrix X(rows.size(), features.dim);
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy_n(features.row(rows[r]), features.dim, X.row(r));
    return X;
}

std::vector<std::string> gather_labels(const FeatureMatrix& features, const std::vector<std::size_t>& rows) {
    std::vector<std::string> y;
    y.reserve(rows.size());
    for (auto r : rows) y.push_back(features.labels[r]);
    return y;
}

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

double plain_accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == pred[i]) ++correct;
    return truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
}

// --- subcommand state -------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    std::string config_path;
    SynthConfig cfg;
};

struct IngestArgs {
    std::string manifest, detections, out;
};

struct BuildArgs {
    std::string manifest, detections, variant = "noroi,s0", out_dir;
};

struct SplitArgs {
    std::string mode = "video";
    std::string manifest, dataset, out;
    std::string ratios = "0.6,0.2,0.2";
    int k = 10;
    std::uint64_t seed = 0;
};

struct FeaturesArgs {
    std::string dataset, out;
    std::string hist_mode = "joint";
    int glcm_levels = 32;
    bool hu_log = false;
    int threads = 1;
};

struct FitArgs {
    std::string features, algo = "rf", out, split, result;
    std::uint64_t seed = 0;
    int knn_k = 5, rf_trees = 100;
    std::string dataset_name;
};

struct CvArgs {
    std::string features, algo = "rf", folds, result;
    std::uint64_t seed = 0;
    int knn_k = 5, rf_trees = 100;
    std::string dataset_name;
};

struct TrainNnArgs {
    std::string dataset, split, out_dir;
    std::string mode = "fine_tune", loss = "ce", weight_mode = "frequency";
    std::string channels = "16,32,64,128";
    int epochs = 100, batch = 64, input_size = 224;
    double lr = 1e-3, momentum = 0.0;
    std::uint64_t seed = 0;
};

struct EvalArgs {
    std::string model, features, dataset, split, result;
    std::string part = "test";
    std::string confusion, heatmap;
    std::string dataset_name;
};

struct ReportArgs {
    std::vector<std::string> results;
    std::string out_dir = ".";
};

ClassifierSpec make_spec(const std::string& algo, std::uint64_t seed, int knn_k, int rf_trees) {
    ClassifierSpec spec;
    spec.algo = algo_from_string(algo);
    spec.seed = seed;
    spec.knn_k = knn_k;
    spec.rf_trees = rf_trees;
    return spec;
}

json spec_summary(const ClassifierSpec& spec) {
    return {{"algo", to_string(spec.algo)}, {"seed", spec.seed}, {"knn_k", spec.knn_k},
            {"rf_trees", spec.rf_trees},    {"lr_l2", spec.lr_l2}, {"svm_lambda", spec.svm_lambda}};
}

int run_synth(const SynthArgs& args) {
    SynthConfig cfg = args.cfg;
    if (!args.config_path.empty()) {
        std::uint64_t seed_flag = cfg.seed;
        cfg = load_synth_config(args.config_path);
        cfg.seed = seed_flag; // --seed wins over the file
    }
    auto out = generate_corpus(cfg, args.out_dir);
    save_synth_config(cfg, std::filesystem::path(args.out_dir) / "synth_config.ini");
    std::cout << "synth: " << out.n_videos << " videos, " << out.n_frames << " frames -> " << args.out_dir << '\n';
    return 0;
}

int run_ingest(const IngestArgs& args) {
    auto manifest = load_manifest(args.manifest);
    auto records = load_detections(args.detections);
    std::set<std::string> known;
    for (const auto& v : manifest) known.insert(v.video_id);
    for (const auto& r : records)
        if (!known.count(r.video_id))
            throw Error("ingest", "UnknownVideo", "'" + r.video_id + "' is not in the manifest");

    std::vector<DetectionRecord> best;
    for (auto& [video_id, per_frame] : best_detections(records))
        for (auto& [frame, rec] : per_frame) best.push_back(rec);
    save_detections(best, args.out);
    std::cout << "ingest: " << records.size() << " detections over " << manifest.size() << " videos -> "
              << best.size() << " best-per-frame -> " << args.out << '\n';
    return 0;
}

int run_build(const BuildArgs& args) {
    auto variant = DatasetVariant::parse(args.variant);
    auto manifest = load_manifest(args.manifest);
    auto records = load_detections(args.detections);
    auto samples = build_dataset(manifest, best_detections(records), variant);
    std::filesystem::create_directories(args.out_dir);
    save_dataset(variant, samples, std::filesystem::path(args.out_dir) / "dataset.json");
    auto stats = dataset_stats(samples);
    std::cout << "build: variant " << variant.name() << ": " << stats.total << " samples, " << stats.per_class.size()
              << " classes, per-class [" << stats.min_class << "," << stats.max_class << "] -> " << args.out_dir
              << "/dataset.json\n";
    return 0;
}

int run_split(const SplitArgs& args) {
    if (args.mode == "video") {
        auto manifest = load_manifest(args.manifest);
        auto split = video_level_split(manifest, parse_ratios(args.ratios), args.seed);
        save_split(split, args.out);
        std::size_t n[3] = {0, 0, 0};
        for (const auto& [id, part] : split.split_of) ++n[static_cast<int>(part)];
        std::cout << "split: video-level " << n[0] << "/" << n[1] << "/" << n[2] << " train/val/test -> " << args.out
                  << '\n';
    } else if (args.mode == "kfold") {
        auto ds = load_dataset(args.dataset);
        auto folds = kfold_frame_split(ds.samples, args.k, args.seed);
        save_folds(folds, args.out);
        std::cout << "split: frame-level " << args.k << "-fold over " << folds.fold_of.size() << " samples -> "
                  << args.out << '\n';
    } else {
        throw Error("cli", "UsageError", "--mode must be video or kfold");
    }
    return 0;
}

int run_features(const FeaturesArgs& args) {
    auto ds = load_dataset(args.dataset);
    FeatureConfig cfg;
    cfg.hist_joint = args.hist_mode == "joint";
    if (!cfg.hist_joint && args.hist_mode != "per-channel")
        throw Error("cli", "UsageError", "--hist-mode must be joint or per-channel");
    cfg.glcm_levels = args.glcm_levels;
    cfg.hu_log = args.hu_log;
    auto features = extract_features(ds.samples, cfg, args.threads);
    features.dataset_name = ds.variant.name();
    save_features(features, args.out);
    std::cout << "features: " << features.rows() << " x " << features.dim << " matrix -> " << args.out << '\n';
    return 0;
}

int run_fit(const FitArgs& args) {
    auto features = load_features(args.features);
    ClassifierSpec spec = make_spec(args.algo, args.seed, args.knn_k, args.rf_trees);
    std::string dataset_name = !args.dataset_name.empty() ? args.dataset_name : features.dataset_name;

    json result;
    result["model"] = to_string(spec.algo);
    result["dataset"] = dataset_name;
    result["spec"] = spec_summary(spec);
    result["inputs"] = {{"features", args.features}};

    TrainedClassifier model;
    if (!args.split.empty()) {
        auto split = load_split(args.split);
        auto train_rows = rows_in_part(features, split, SplitPart::train);
        if (train_rows.empty()) throw Error("cli", "EmptySplit", "train part holds no samples");
        model = fit(spec, gather_rows(features, train_rows), gather_labels(features, train_rows));

        result["protocol"] = "split";
        result["inputs"]["split"] = args.split;
        json values;
        auto class_list = sorted_classes(features.labels);
        for (auto part : {SplitPart::train, SplitPart::val, SplitPart::test}) {
            auto rows = rows_in_part(features, split, part);
            if (rows.empty()) continue;
            auto truth = gather_labels(features, rows);
            auto pred = predict(model, gather_rows(features, rows));
            values[to_string(part)] = plain_accuracy(truth, pred);
            if (part == SplitPart::test) {
                auto cm = confusion_matrix(truth, pred, class_list);
                values["avg_test"] = metrics(cm).mean_class_accuracy;
            }
        }
        result["values"] = std::move(values);
    } else {
        model = fit(spec, feature_values_matrix(features), features.labels);
        auto pred = predict(model, feature_values_matrix(features));
        result["protocol"] = "split";
        result["values"] = {{"train", plain_accuracy(features.labels, pred)}};
    }
    save_model(model, args.out);
    if (!args.result.empty()) write_json_file(result, args.result);
    std::cout << "fit: " << to_string(spec.algo) << " on " << features.rows() << " rows -> " << args.out << '\n';
    return 0;
}

int run_cv(const CvArgs& args) {
    auto features = load_features(args.features);
    auto folds = load_folds(args.folds);
    ClassifierSpec spec = make_spec(args.algo, args.seed, args.knn_k, args.rf_trees);
    auto cv = cross_validate(spec, features, folds);

    std::string dataset_name = !args.dataset_name.empty() ? args.dataset_name : features.dataset_name;
    json result;
    result["model"] = to_string(spec.algo);
    result["dataset"] = dataset_name;
    result["protocol"] = "cv";
    result["spec"] = spec_summary(spec);
    result["inputs"] = {{"features", args.features}, {"folds", args.folds}};
    json values;
    values["cv_mean"] = cv.mean_accuracy;
    for (std::size_t f = 0; f < cv.fold_accuracy.size(); ++f)
        values["fold_" + std::to_string(f)] = cv.fold_accuracy[f];
    result["values"] = std::move(values);
    if (!args.result.empty()) write_json_file(result, args.result);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", cv.mean_accuracy);
    std::cout << "cross-validate: " << to_string(spec.algo) << " " << folds.k << "-fold mean accuracy " << buf
              << '\n';
    return 0;
}

std::vector<NetSample> load_net_samples(const std::vector<Sample>& samples,
                                        const std::map<std::string, int>& class_index) {
    std::vector<NetSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        NetSample ns;
        Image img = read_pnm(s.image_ref);
        if (s.crop) img = crop_image(img, s.crop->x, s.crop->y, s.crop->w, s.crop->h);
        ns.image = std::move(img);
        ns.label = class_index.at(s.label);
        out.push_back(std::move(ns));
    }
    return out;
}

int run_train_nn(const TrainNnArgs& args) {
    auto ds = load_dataset(args.dataset);
    auto split = load_split(args.split);

    std::vector<std::string> class_list;
    {
        std::set<std::string> s;
        for (const auto& smp : ds.samples) s.insert(smp.label);
        class_list.assign(s.begin(), s.end());
    }
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < class_list.size(); ++c) class_index[class_list[c]] = static_cast<int>(c);

    std::vector<Sample> train_s, val_s, test_s;
    for (const auto& smp : ds.samples) {
        auto it = split.split_of.find(smp.video_id);
        if (it == split.split_of.end())
            throw Error("cli", "UnknownVideo", "video '" + smp.video_id + "' missing from the split file");
        if (it->second == SplitPart::train) train_s.push_back(smp);
        else if (it->second == SplitPart::val) val_s.push_back(smp);
        else test_s.push_back(smp);
    }

    TrainConfig cfg;
    cfg.epochs = args.epochs;
    cfg.base_lr = args.lr;
    cfg.batch_size = args.batch;
    cfg.input_size = args.input_size;
    cfg.momentum = args.momentum;
    cfg.seed = args.seed;
    cfg.mode = args.mode == "feature_extractor" ? TrainMode::feature_extractor : TrainMode::fine_tune;
    if (args.mode != "feature_extractor" && args.mode != "fine_tune")
        throw Error("cli", "UsageError", "--mode must be feature_extractor or fine_tune");
    if (args.loss == "ce") cfg.loss = LossKind::ce;
    else if (args.loss == "weighted_ce") cfg.loss = LossKind::weighted_ce;
    else throw Error("cli", "UsageError", "--loss must be ce or weighted_ce");
    cfg.weight_mode = args.weight_mode == "inverse" ? WeightMode::inverse : WeightMode::frequency;

    NetConfig net_cfg;
    net_cfg.channels = parse_int_list(args.channels);
    net_cfg.input_size = args.input_size;
    net_cfg.init_seed = args.seed;
    NetModel model = NetModel::create(net_cfg, class_list);

    auto train = load_net_samples(train_s, class_index);
    auto val = load_net_samples(val_s, class_index);
    auto result = train_network(model, train, val, cfg);

    std::filesystem::create_directories(args.out_dir);
    std::filesystem::path dir(args.out_dir);
    save_checkpoint(model, cfg, result, dir / "ckpt.json");
    save_training_curves(result, dir / "curves.csv");

    // Table-style result record from the best checkpoint.
    json res;
    std::string model_name = std::string("cnn_") + args.mode + (cfg.loss == LossKind::weighted_ce ? "_wce" : "");
    res["model"] = model_name;
    res["dataset"] = ds.variant.name();
    res["protocol"] = "split";
    res["inputs"] = {{"dataset", args.dataset}, {"split", args.split}};
    res["seed"] = args.seed;
    json values;
    auto eval_part = [&](const std::vector<Sample>& part_samples, const char* key) {
        if (part_samples.empty()) return;
        auto net_samples = load_net_samples(part_samples, class_index);
        auto pred_idx = evaluate_network(model, net_samples, cfg.input_size);
        std::vector<std::string> truth, pred;
        for (const auto& smp : part_samples) truth.push_back(smp.label);
        for (int p : pred_idx) pred.push_back(class_list[p]);
        values[key] = plain_accuracy(truth, pred);
        if (std::string(key) == "test")
            values["avg_test"] = metrics(confusion_matrix(truth, pred, class_list)).mean_class_accuracy;
    };
    eval_part(train_s, "train");
    eval_part(val_s, "val");
    eval_part(test_s, "test");
    res["values"] = std::move(values);
    write_json_file(res, dir / "result.json");

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", result.best_val_accuracy);
    std::cout << "train-nn: best val accuracy " << buf << " at epoch " << result.best_epoch << " -> " << args.out_dir
              << '\n';
    return 0;
}

int run_eval(const EvalArgs& args) {
    auto split = load_split(args.split);
    SplitPart part = split_part_from_string(args.part);

    std::vector<std::string> truth, pred;
    std::string model_name, dataset_name = args.dataset_name;
    std::vector<std::string> class_list;

    json header = read_json_file(args.model);
    if (header.at("kind").get<std::string>() == "classic") {
        if (args.features.empty()) throw Error("cli", "UsageError", "classic models need --features");
        auto features = load_features(args.features);
        auto model = load_model(args.model);
        auto rows = rows_in_part(features, split, part);
        if (rows.empty()) throw Error("cli", "EmptySplit", "part '" + args.part + "' holds no samples");
        truth = gather_labels(features, rows);
        pred = predict(model, gather_rows(features, rows));
        model_name = to_string(model.spec.algo);
        if (dataset_name.empty()) dataset_name = features.dataset_name;
        class_list = sorted_classes(features.labels);
    } else {
        if (args.dataset.empty()) throw Error("cli", "UsageError", "network checkpoints need --dataset");
        auto ds = load_dataset(args.dataset);
        NetModel model = load_checkpoint(args.model);
        class_list = model.classes;
        std::map<std::string, int> class_index;
        for (std::size_t c = 0; c < class_list.size(); ++c) class_index[class_list[c]] = static_cast<int>(c);
        std::vector<Sample> part_samples;
        for (const auto& smp : ds.samples) {
            auto it = split.split_of.find(smp.video_id);
            if (it == split.split_of.end())
                throw Error("cli", "UnknownVideo", "video '" + smp.video_id + "' missing from the split file");
            if (it->second == part) part_samples.push_back(smp);
        }
        if (part_samples.empty()) throw Error("cli", "EmptySplit", "part '" + args.part + "' holds no samples");
        auto net_samples = load_net_samples(part_samples, class_index);
        auto pred_idx = evaluate_network(model, net_samples, model.config.input_size);
        for (const auto& smp : part_samples) truth.push_back(smp.label);
        for (int p : pred_idx) pred.push_back(class_list[p]);
        model_name = "cnn";
        if (dataset_name.empty()) dataset_name = ds.variant.name();
    }

    auto cm = confusion_matrix(truth, pred, class_list);
    auto m = metrics(cm);
    json result;
    result["model"] = model_name;
    result["dataset"] = dataset_name;
    result["protocol"] = "split";
    result["inputs"] = {{"model", args.model}, {"split", args.split}, {"part", args.part}};
    result["values"] = {{args.part, m.accuracy}};
    if (part == SplitPart::test) result["values"]["avg_test"] = m.mean_class_accuracy;
    if (!args.result.empty()) write_json_file(result, args.result);
    if (!args.confusion.empty()) save_confusion_csv(cm, args.confusion);
    if (!args.heatmap.empty()) save_confusion_heatmap(cm, args.heatmap);

    char a[32], b[32];
    std::snprintf(a, sizeof(a), "%.4f", m.accuracy);
    std::snprintf(b, sizeof(b), "%.4f", m.mean_class_accuracy);
    std::cout << "eval: " << model_name << " on " << args.part << ": accuracy " << a << ", macro recall " << b
              << '\n';
    return 0;
}

int run_report(const ReportArgs& args) {
    std::vector<ResultRecord> records;
    for (const auto& path : args.results) {
        json doc = read_json_file(path);
        ResultRecord rec;
        rec.model = doc.at("model").get<std::string>();
        rec.dataset = doc.at("dataset").get<std::string>();
        rec.protocol = doc.at("protocol").get<std::string>();
        for (const auto& [key, value] : doc.at("values").items()) rec.values[key] = value.get<double>();
        records.push_back(std::move(rec));
    }
    std::filesystem::create_directories(args.out_dir);
    std::filesystem::path dir(args.out_dir);
    std::string csv = render_report_csv(records);
    std::string txt = render_report_text(records);
    {
        std::ofstream out(dir / "report.csv");
        if (!out) throw Error("cli", "DiskWrite", "cannot write report.csv");
        out << csv;
    }
    {
        std::ofstream out(dir / "report.txt");
        if (!out) throw Error("cli", "DiskWrite", "cannot write report.txt");
        out << txt;
    }
    std::cout << txt;
    std::cout << "report: " << records.size() << " results -> " << (dir / "report.csv").string() << ", "
              << (dir / "report.txt").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly-labelled video classification toolchain"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus (frames + detections + manifest)");
    synth_cmd->add_option("-o,--out", synth_args.out_dir, "output directory")->required();
    synth_cmd->add_option("--config", synth_args.config_path, "key=value config file");
    synth_cmd->add_option("--seed", synth_args.cfg.seed, "generator seed");
    synth_cmd->add_option("--classes", synth_args.cfg.n_classes, "number of individuals");
    synth_cmd->add_option("--videos-per-class", synth_args.cfg.videos_per_class, "videos per individual");
    synth_cmd->add_option("--frames", synth_args.cfg.frames_per_video, "frames per video");
    synth_cmd->add_option("--frame-width", synth_args.cfg.frame_width, "frame width in pixels");
    synth_cmd->add_option("--frame-height", synth_args.cfg.frame_height, "frame height in pixels");
    synth_cmd->add_option("--jitter", synth_args.cfg.jitter_amplitude, "per-frame patch jitter (px)");
    synth_cmd->add_option("--mislabel-rate", synth_args.cfg.mislabel_rate, "weak-label noise probability");
    synth_cmd->add_option("--nuisance", synth_args.cfg.nuisance_strength, "scene nuisance strength");
    synth_cmd->add_option("--hue-noise", synth_args.cfg.appearance_hue_noise, "per-video appearance noise");

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "validate detections and keep the best one per frame");
    ingest_cmd->add_option("--manifest", ingest_args.manifest, "video manifest CSV")->required();
    ingest_cmd->add_option("--detections", ingest_args.detections, "detections JSONL")->required();
    ingest_cmd->add_option("-o,--out", ingest_args.out, "best-per-frame JSONL")->required();

    BuildArgs build_args;
    auto* build_cmd = app.add_subcommand("build", "materialize one dataset variant");
    build_cmd->add_option("--manifest", build_args.manifest, "video manifest CSV")->required();
    build_cmd->add_option("--detections", build_args.detections, "detections JSONL")->required();
    build_cmd->add_option("--variant", build_args.variant, "variant selector, e.g. roi,s0.5");
    build_cmd->add_option("-o,--out", build_args.out_dir, "output directory")->required();

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "video-level train/val/test split or frame-level k-fold");
    split_cmd->add_option("--mode", split_args.mode, "video | kfold");
    split_cmd->add_option("--manifest", split_args.manifest, "manifest CSV (video mode)");
    split_cmd->add_option("--dataset", split_args.dataset, "dataset.json (kfold mode)");
    split_cmd->add_option("--ratios", split_args.ratios, "train,val,test ratios (video mode)");
    split_cmd->add_option("--k", split_args.k, "fold count (kfold mode)");
    split_cmd->add_option("--seed", split_args.seed, "shuffle seed");
    split_cmd->add_option("-o,--out", split_args.out, "output JSON")->required();

    FeaturesArgs features_args;
    auto* features_cmd = app.add_subcommand("features", "extract the handcrafted descriptor matrix");
    features_cmd->add_option("--dataset", features_args.dataset, "dataset.json")->required();
    features_cmd->add_option("-o,--out", features_args.out, "feature CSV path")->required();
    features_cmd->add_option("--hist-mode", features_args.hist_mode, "joint | per-channel");
    features_cmd->add_option("--glcm-levels", features_args.glcm_levels, "gray levels for the texture matrix");
    features_cmd->add_flag("--hu-log", features_args.hu_log, "signed-log transform of the Hu block");
    features_cmd->add_option("--threads", features_args.threads, "worker threads");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "train one classical classifier");
    fit_cmd->add_option("--features", fit_args.features, "feature CSV")->required();
    fit_cmd->add_option("--algo", fit_args.algo, "lr|lda|nb|knn|svm|cart|rf");
    fit_cmd->add_option("--seed", fit_args.seed, "training seed");
    fit_cmd->add_option("--split", fit_args.split, "video-level split JSON; fit on its train part");
    fit_cmd->add_option("-o,--out", fit_args.out, "model JSON path")->required();
    fit_cmd->add_option("--result", fit_args.result, "accuracy record JSON path");
    fit_cmd->add_option("--knn-k", fit_args.knn_k, "neighbours for knn");
    fit_cmd->add_option("--rf-trees", fit_args.rf_trees, "trees for rf");
    fit_cmd->add_option("--dataset-name", fit_args.dataset_name, "dataset label for the result record");

    CvArgs cv_args;
    auto* cv_cmd = app.add_subcommand("cross-validate", "k-fold cross-validation of one classifier");
    cv_cmd->add_option("--features", cv_args.features, "feature CSV")->required();
    cv_cmd->add_option("--algo", cv_args.algo, "lr|lda|nb|knn|svm|cart|rf");
    cv_cmd->add_option("--folds", cv_args.folds, "fold assignment JSON")->required();
    cv_cmd->add_option("--seed", cv_args.seed, "training seed");
    cv_cmd->add_option("--result", cv_args.result, "result record JSON path");
    cv_cmd->add_option("--knn-k", cv_args.knn_k, "neighbours for knn");
    cv_cmd->add_option("--rf-trees", cv_args.rf_trees, "trees for rf");
    cv_cmd->add_option("--dataset-name", cv_args.dataset_name, "dataset label for the result record");

    TrainNnArgs nn_args;
    auto* nn_cmd = app.add_subcommand("train-nn", "train the convolutional classifier on a video-level split");
    nn_cmd->add_option("--dataset", nn_args.dataset, "dataset.json")->required();
    nn_cmd->add_option("--split", nn_args.split, "video-level split JSON")->required();
    nn_cmd->add_option("-o,--out-dir", nn_args.out_dir, "output directory")->required();
    nn_cmd->add_option("--mode", nn_args.mode, "feature_extractor | fine_tune");
    nn_cmd->add_option("--loss", nn_args.loss, "ce | weighted_ce");
    nn_cmd->add_option("--weight-mode", nn_args.weight_mode, "frequency | inverse");
    nn_cmd->add_option("--epochs", nn_args.epochs, "training epochs");
    nn_cmd->add_option("--batch", nn_args.batch, "batch size");
    nn_cmd->add_option("--lr", nn_args.lr, "base learning rate");
    nn_cmd->add_option("--momentum", nn_args.momentum, "SGD momentum");
    nn_cmd->add_option("--channels", nn_args.channels, "backbone channels, comma separated");
    nn_cmd->add_option("--input-size", nn_args.input_size, "network input side");
    nn_cmd->add_option("--seed", nn_args.seed, "training seed");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained model on one split part");
    eval_cmd->add_option("--model", eval_args.model, "model JSON or checkpoint JSON")->required();
    eval_cmd->add_option("--features", eval_args.features, "feature CSV (classic models)");
    eval_cmd->add_option("--dataset", eval_args.dataset, "dataset.json (network checkpoints)");
    eval_cmd->add_option("--split", eval_args.split, "video-level split JSON")->required();
    eval_cmd->add_option("--set", eval_args.part, "train | val | test");
    eval_cmd->add_option("--result", eval_args.result, "result record JSON path");
    eval_cmd->add_option("--confusion", eval_args.confusion, "confusion matrix CSV path");
    eval_cmd->add_option("--heatmap", eval_args.heatmap, "row-normalized heatmap PPM path");
    eval_cmd->add_option("--dataset-name", eval_args.dataset_name, "dataset label for the result record");

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "render comparison tables from result records");
    report_cmd->add_option("--results", report_args.results, "result JSON files")->required()->expected(-1);
    report_cmd->add_option("--out-dir", report_args.out_dir, "directory for report.csv / report.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (ingest_cmd->parsed()) return run_ingest(ingest_args);
        if (build_cmd->parsed()) return run_build(build_args);
        if (split_cmd->parsed()) return run_split(split_args);
        if (features_cmd->parsed()) return run_features(features_args);
        if (fit_cmd->parsed()) return run_fit(fit_args);
        if (cv_cmd->parsed()) return run_cv(cv_args);
        if (nn_cmd->parsed()) return run_train_nn(nn_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (report_cmd->parsed()) return run_report(report_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: cli: Unhandled: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
