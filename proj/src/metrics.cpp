#include "weakvid/metrics.hpp"

#include "weakvid/error.hpp"
#include "weakvid/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace weakvid {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& true_labels,
                                 const std::vector<std::string>& predicted_labels,
                                 const std::vector<std::string>& class_list) {
    if (true_labels.size() != predicted_labels.size())
        throw Error("eval_report", "LengthMismatch",
                    std::to_string(true_labels.size()) + " truths vs " + std::to_string(predicted_labels.size()) +
                        " predictions");
    ConfusionMatrix cm;
    cm.classes = class_list;
    cm.counts.assign(class_list.size() * class_list.size(), 0);
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < class_list.size(); ++c) index[class_list[c]] = c;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        auto t = index.find(true_labels[i]);
        auto p = index.find(predicted_labels[i]);
        if (t == index.end()) throw Error("eval_report", "UnknownLabel", "true label '" + true_labels[i] + "'");
        if (p == index.end()) throw Error("eval_report", "UnknownLabel", "predicted label '" + predicted_labels[i] + "'");
        ++cm.at(t->second, p->second);
    }
    return cm;
}

MetricsRecord metrics(const ConfusionMatrix& cm) {
    const std::size_t C = cm.classes.size();
    std::size_t total = cm.total();
    if (total == 0) throw Error("eval_report", "EmptyMatrix", "confusion matrix has no samples");

    MetricsRecord rec;
    std::size_t trace = 0;
    double recall_sum = 0.0;
    std::size_t present = 0;
    rec.per_class_recall.assign(C, -1.0);
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t row_sum = 0;
        for (std::size_t p = 0; p < C; ++p) row_sum += cm.at(c, p);
        trace += cm.at(c, c);
        if (row_sum > 0) {
            rec.per_class_recall[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(row_sum);
            recall_sum += rec.per_class_recall[c];
            ++present;
        }
    }
    rec.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    rec.mean_class_accuracy = recall_sum / static_cast<double>(present);
    return rec;
}

namespace {

// 3 digits, extended (up to 6) only when two values in the same comparison
// group would otherwise display identically.
std::string format_acc(double v, const std::vector<double>& group) {
    for (int digits = 3; digits <= 6; ++digits) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
        bool clash = false;
        for (double other : group) {
            if (other == v) continue;
            char obuf[32];
            std::snprintf(obuf, sizeof(obuf), "%.*f", digits, other);
            if (std::string(obuf) == buf && std::abs(other - v) > 1e-9) clash = true;
        }
        if (!clash) return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::string> sorted_unique(const std::vector<ResultRecord>& results, bool datasets) {
    std::set<std::string> s;
    for (const auto& r : results) s.insert(datasets ? r.dataset : r.model);
    return {s.begin(), s.end()};
}

} // namespace

std::string render_report_text(const std::vector<ResultRecord>& results) {
    std::ostringstream out;
    std::vector<ResultRecord> split_rows, cv_rows;
    for (const auto& r : results) (r.protocol == "cv" ? cv_rows : split_rows).push_back(r);

    if (!cv_rows.empty()) {
        auto datasets = sorted_unique(cv_rows, true);
        auto models = sorted_unique(cv_rows, false);
        out << "cross-validation mean accuracy (whole dataset)\n";
        out << "model";
        for (const auto& d : datasets) out << '\t' << d;
        out << '\n';
        for (const auto& m : models) {
            out << m;
            for (const auto& d : datasets) {
                const ResultRecord* cell = nullptr;
                for (const auto& r : cv_rows)
                    if (r.model == m && r.dataset == d) cell = &r;
                if (cell && cell->values.count("cv_mean")) {
                    // Extend digits against the other models in this column.
                    std::vector<double> column;
                    for (const auto& r : cv_rows)
                        if (r.dataset == d && r.values.count("cv_mean")) column.push_back(r.values.at("cv_mean"));
                    out << '\t' << format_acc(cell->values.at("cv_mean"), column);
                } else {
                    out << "\t-";
                }
            }
            out << '\n';
        }
        out << '\n';
    }

    if (!split_rows.empty()) {
        auto datasets = sorted_unique(split_rows, true);
        auto models = sorted_unique(split_rows, false);
        static const char* kCols[4] = {"train", "val", "test", "avg_test"};
        static const char* kHeads[4] = {"Tr.", "Val.", "T.", "avgT"};
        out << "split accuracies (video-level train/val/test); * = best non-train value per model\n";
        out << "model";
        for (const auto& d : datasets)
            for (const char* h : kHeads) out << '\t' << d << ':' << h;
        out << '\n';
        for (const auto& m : models) {
            out << m;
            // Best per metric across this model's datasets (non-train only).
            std::map<std::string, double> best;
            for (const auto& r : split_rows) {
                if (r.model != m) continue;
                for (int k = 1; k < 4; ++k) {
                    auto it = r.values.find(kCols[k]);
                    if (it == r.values.end()) continue;
                    auto b = best.find(kCols[k]);
                    if (b == best.end() || it->second > b->second) best[kCols[k]] = it->second;
                }
            }
            for (const auto& d : datasets) {
                const ResultRecord* cell = nullptr;
                for (const auto& r : split_rows)
                    if (r.model == m && r.dataset == d) cell = &r;
                for (int k = 0; k < 4; ++k) {
                    if (!cell || !cell->values.count(kCols[k])) {
                        out << "\t-";
                        continue;
                    }
                    double v = cell->values.at(kCols[k]);
                    std::vector<double> group;
                    for (const auto& r : split_rows)
                        if (r.model == m && r.values.count(kCols[k])) group.push_back(r.values.at(kCols[k]));
                    out << '\t' << format_acc(v, group);
                    if (k > 0 && best.count(kCols[k]) && v == best[kCols[k]]) out << '*';
                }
            }
            out << '\n';
        }
    }
    return out.str();
}

namespace {

// Variant names carry commas ("roi,s0.5"), so string fields are quoted per
// RFC 4180 whenever needed.
std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string render_report_csv(const std::vector<ResultRecord>& results) {
    std::ostringstream out;
    out << "model,dataset,protocol,metric,value\n";
    char buf[32];
    for (const auto& r : results) {
        for (const auto& [metric, value] : r.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            out << csv_quote(r.model) << ',' << csv_quote(r.dataset) << ',' << csv_quote(r.protocol) << ','
                << csv_quote(metric) << ',' << buf << '\n';
        }
    }
    return out.str();
}

std::vector<ResultRecord> parse_report_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "model,dataset,protocol,metric,value")
        throw Error("eval_report", "MalformedReport", "unexpected report CSV header");
    std::map<std::string, ResultRecord> keyed;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 5) throw Error("eval_report", "MalformedReport", "bad report row: " + line);
        std::string key = fields[0] + '|' + fields[1] + '|' + fields[2];
        if (!keyed.count(key)) {
            keyed[key] = ResultRecord{fields[0], fields[1], fields[2], {}};
            order.push_back(key);
        }
        keyed[key].values[fields[3]] = std::stod(fields[4]);
    }
    std::vector<ResultRecord> out;
    out.reserve(order.size());
    for (const auto& key : order) out.push_back(keyed[key]);
    return out;
}

void save_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("eval_report", "DiskWrite", "cannot open " + path.string() + " for writing");
    out << "true\\pred";
    for (const auto& c : cm.classes) out << ',' << c;
    out << '\n';
    for (std::size_t t = 0; t < cm.classes.size(); ++t) {
        out << cm.classes[t];
        for (std::size_t p = 0; p < cm.classes.size(); ++p) out << ',' << cm.at(t, p);
        out << '\n';
    }
}

void save_confusion_heatmap(const ConfusionMatrix& cm, const std::filesystem::path& path, int cell_px) {
    const std::size_t C = cm.classes.size();
    Image img(static_cast<int>(C) * cell_px, static_cast<int>(C) * cell_px, 3);
    for (std::size_t t = 0; t < C; ++t) {
        std::size_t row_sum = 0;
        for (std::size_t p = 0; p < C; ++p) row_sum += cm.at(t, p);
        for (std::size_t p = 0; p < C; ++p) {
            double frac = row_sum > 0 ? static_cast<double>(cm.at(t, p)) / static_cast<double>(row_sum) : 0.0;
            // white (0) -> dark blue (1)
            auto r8 = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - frac)));
            auto g8 = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - 0.8 * frac)));
            auto b8 = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - 0.4 * frac)));
            for (int y = 0; y < cell_px; ++y)
                for (int x = 0; x < cell_px; ++x) {
                    int px = static_cast<int>(p) * cell_px + x;
                    int py = static_cast<int>(t) * cell_px + y;
                    img.set(px, py, 0, r8);
                    img.set(px, py, 1, g8);
                    img.set(px, py, 2, b8);
                }
        }
    }
    write_pnm(img, path);
}

} // namespace weakvid
