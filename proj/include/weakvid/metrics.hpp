#ifndef WEAKVID_METRICS_HPP
#define WEAKVID_METRICS_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace weakvid {

// Rows are true classes, columns predictions.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::size_t> counts; // C*C row-major

    std::size_t& at(std::size_t true_c, std::size_t pred_c) { return counts[true_c * classes.size() + pred_c]; }
    std::size_t at(std::size_t true_c, std::size_t pred_c) const { return counts[true_c * classes.size() + pred_c]; }
    std::size_t total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<std::string>& true_labels,
                                 const std::vector<std::string>& predicted_labels,
                                 const std::vector<std::string>& class_list);

// accuracy = trace/total; mean_class_accuracy = unweighted mean of per-class
// recalls over classes that actually occur.
struct MetricsRecord {
    double accuracy = 0.0;
    double mean_class_accuracy = 0.0;
    std::vector<double> per_class_recall; // -1 for absent classes
};

MetricsRecord metrics(const ConfusionMatrix& cm);

// One evaluated (model, dataset, protocol) cell of the comparison report.
// values holds whichever of train/val/test/avg_test/cv_mean apply.
struct ResultRecord {
    std::string model;
    std::string dataset;
    std::string protocol; // "split" or "cv"
    std::map<std::string, double> values;
};

// Split-protocol grid with Tr./Val./T./avgT columns per dataset variant; the
// best non-train value per model row is flagged with '*'. CV results render
// as their own model x dataset grid.
std::string render_report_text(const std::vector<ResultRecord>& results);
std::string render_report_csv(const std::vector<ResultRecord>& results);
std::vector<ResultRecord> parse_report_csv(const std::string& csv);

void save_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);

// Row-normalized heatmap as a binary PPM.
void save_confusion_heatmap(const ConfusionMatrix& cm, const std::filesystem::path& path, int cell_px = 32);

} // namespace weakvid

#endif
