#include "weakvid/features.hpp"

#include "weakvid/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

using json = nlohmann::json;

namespace weakvid {

std::array<double, 7> hu_moments(const Image& gray) {
    if (gray.channels != 1) throw Error("features", "NotGray", "hu_moments expects a single-channel image");
    const int w = gray.width, h = gray.height;

    double m00 = 0.0, m10 = 0.0, m01 = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = gray.at(x, y);
            m00 += v;
            m10 += x * v;
            m01 += y * v;
        }
    }
    if (m00 <= 0.0) throw Error("features", "ZeroMass", "all pixels are zero");
    double xc = m10 / m00, yc = m01 / m00;

    double mu20 = 0, mu02 = 0, mu11 = 0, mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
    for (int y = 0; y < h; ++y) {
        double dy = y - yc;
        for (int x = 0; x < w; ++x) {
            double v = gray.at(x, y);
            if (v == 0.0) continue;
            double dx = x - xc;
            double dx2 = dx * dx, dy2 = dy * dy;
            mu20 += dx2 * v;
            mu02 += dy2 * v;
            mu11 += dx * dy * v;
            mu30 += dx2 * dx * v;
            mu03 += dy2 * dy * v;
            mu21 += dx2 * dy * v;
            mu12 += dx * dy2 * v;
        }
    }

    // eta_pq = mu_pq / m00^(1 + (p+q)/2)
    double s2 = m00 * m00;
    double s3 = s2 * std::sqrt(m00);
    double n20 = mu20 / s2, n02 = mu02 / s2, n11 = mu11 / s2;
    double n30 = mu30 / s3, n03 = mu03 / s3, n21 = mu21 / s3, n12 = mu12 / s3;

    std::array<double, 7> hu;
    double a = n30 + n12, b = n21 + n03;
    double a2 = a * a, b2 = b * b;
    hu[0] = n20 + n02;
    hu[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
    hu[2] = (n30 - 3.0 * n12) * (n30 - 3.0 * n12) + (3.0 * n21 - n03) * (3.0 * n21 - n03);
    hu[3] = a2 + b2;
    hu[4] = (n30 - 3.0 * n12) * a * (a2 - 3.0 * b2) + (3.0 * n21 - n03) * b * (3.0 * a2 - b2);
    hu[5] = (n20 - n02) * (a2 - b2) + 4.0 * n11 * a * b;
    hu[6] = (3.0 * n21 - n03) * a * (a2 - 3.0 * b2) - (n30 - 3.0 * n12) * b * (3.0 * a2 - b2);
    return hu;
}

Image quantize_gray(const Image& gray, int levels) {
    if (gray.channels != 1) throw Error("features", "NotGray", "quantize_gray expects a single-channel image");
    if (levels < 2 || levels > 256) throw Error("features", "BadLevels", "GLCM levels must lie in [2,256]");
    Image out(gray.width, gray.height, 1);
    for (std::size_t i = 0; i < gray.pixels.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>((gray.pixels[i] * levels) >> 8);
    return out;
}

std::vector<double> glcm_matrix(const Image& quantized, int levels, int dx, int dy) {
    std::vector<double> p(static_cast<std::size_t>(levels) * levels, 0.0);
    const int w = quantized.width, h = quantized.height;
    double count = 0.0;
    for (int y = 0; y < h; ++y) {
        int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int x = 0; x < w; ++x) {
            int nx = x + dx;
            if (nx < 0 || nx >= w) continue;
            int a = quantized.at(x, y);
            int b = quantized.at(nx, ny);
            if (a >= levels || b >= levels)
                throw Error("features", "BadLevels", "pixel value exceeds GLCM level count");
            p[static_cast<std::size_t>(a) * levels + b] += 1.0;
            p[static_cast<std::size_t>(b) * levels + a] += 1.0;
            count += 2.0;
        }
    }
    if (count > 0.0)
        for (double& v : p) v /= count;
    return p;
}

namespace {

inline double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

} // namespace

std::array<double, 13> haralick_from_glcm(const std::vector<double>& p, int levels) {
    const int n = levels;
    double total = 0.0;
    for (double v : p) total += v;
    if (total <= 0.0) throw Error("features", "DegenerateImage", "co-occurrence matrix is empty");

    std::vector<double> px(n, 0.0);                // marginal (symmetric: px == py)
    std::vector<double> p_sum(2 * n - 1, 0.0);     // p_{x+y}
    std::vector<double> p_diff(n, 0.0);            // p_{|x-y|}
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = p[static_cast<std::size_t>(i) * n + j];
            px[i] += v;
            p_sum[i + j] += v;
            p_diff[std::abs(i - j)] += v;
        }
    }

    double mean = 0.0, mom2 = 0.0;
    for (int i = 0; i < n; ++i) {
        mean += i * px[i];
        mom2 += static_cast<double>(i) * i * px[i];
    }
    double var_marginal = mom2 - mean * mean;
    double sd = var_marginal > 0.0 ? std::sqrt(var_marginal) : 0.0;

    double asm_ = 0.0, contrast = 0.0, idm = 0.0, entropy = 0.0, corr_num = 0.0, ssq_var = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = p[static_cast<std::size_t>(i) * n + j];
            asm_ += v * v;
            int d = i - j;
            contrast += static_cast<double>(d) * d * v;
            idm += v / (1.0 + d * d);
            entropy -= xlogx(v);
            corr_num += static_cast<double>(i) * j * v;
            ssq_var += (i - mean) * (i - mean) * v;
        }
    }
    // Constant images have zero marginal variance; correlation degenerates to 1.
    double correlation = sd > 0.0 ? (corr_num - mean * mean) / (sd * sd) : 1.0;

    double sum_avg = 0.0, sum_entropy = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) {
        sum_avg += k * p_sum[k];
        sum_entropy -= xlogx(p_sum[k]);
    }
    double sum_var = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) sum_var += (k - sum_entropy) * (k - sum_entropy) * p_sum[k];

    double diff_avg = 0.0, diff_entropy = 0.0;
    for (int k = 0; k < n; ++k) {
        diff_avg += k * p_diff[k];
        diff_entropy -= xlogx(p_diff[k]);
    }
    double diff_var = 0.0;
    for (int k = 0; k < n; ++k) diff_var += (k - diff_avg) * (k - diff_avg) * p_diff[k];

    // Information measures of correlation; hx == hy for a symmetric matrix.
    double hx = 0.0;
    for (int i = 0; i < n; ++i) hx -= xlogx(px[i]);
    double hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double pij = p[static_cast<std::size_t>(i) * n + j];
            double indep = px[i] * px[j];
            if (indep > 0.0) {
                double l = std::log(indep);
                hxy1 -= pij * l;
                hxy2 -= indep * l;
            }
        }
    }
    double imc1 = hx > 0.0 ? (entropy - hxy1) / hx : 0.0;
    double imc2_arg = 1.0 - std::exp(-2.0 * (hxy2 - entropy));
    double imc2 = imc2_arg > 0.0 ? std::sqrt(imc2_arg) : 0.0;

    return {asm_, contrast, correlation, ssq_var, idm,   sum_avg, sum_var,
            sum_entropy, entropy, diff_var, diff_entropy, imc1, imc2};
}

std::array<double, 13> haralick_features(const Image& gray, int levels) {
    if (gray.channels != 1) throw Error("features", "NotGray", "haralick_features expects a single-channel image");
    if (static_cast<std::size_t>(gray.width) * gray.height < 2)
        throw Error("features", "DegenerateImage", "need at least two pixels");
    Image quantized = quantize_gray(gray, levels);
    static constexpr int kOffsets[4][2] = {{1, 0}, {1, -1}, {0, 1}, {1, 1}}; // 0, 45, 90, 135 degrees
    std::array<double, 13> acc{};
    int used = 0;
    for (const auto& off : kOffsets) {
        auto p = glcm_matrix(quantized, levels, off[0], off[1]);
        double total = 0.0;
        for (double v : p) total += v;
        if (total <= 0.0) continue; // no pixel pair along this direction
        auto f = haralick_from_glcm(p, levels);
        for (int i = 0; i < 13; ++i) acc[i] += f[i];
        ++used;
    }
    if (used == 0) throw Error("features", "DegenerateImage", "no valid pixel pair in any direction");
    for (double& v : acc) v /= used;
    return acc;
}

std::vector<double> color_histogram(const Image& img, int bins, bool joint) {
    if (img.channels != 3) throw Error("features", "NotColor", "color_histogram expects a 3-channel image");
    if (bins < 1) throw Error("features", "BadBins", "bins must be >= 1");
    std::vector<double> hist(joint ? static_cast<std::size_t>(bins) * bins * bins : 3 * static_cast<std::size_t>(bins),
                             0.0);
    auto bin_of = [bins](double v) { return std::min(static_cast<int>(v * bins), bins - 1); };
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        double h, s, v;
        rgb_to_hsv(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2], h, s, v);
        int hb = bin_of(h), sb = bin_of(s), vb = bin_of(v);
        if (joint) {
            hist[(static_cast<std::size_t>(hb) * bins + sb) * bins + vb] += 1.0;
        } else {
            hist[hb] += 1.0;
            hist[bins + sb] += 1.0;
            hist[2 * bins + vb] += 1.0;
        }
    }
    double total = 0.0;
    for (double v : hist) total += v;
    if (total > 0.0)
        for (double& v : hist) v /= total;
    return hist;
}

namespace {

double signed_log10(double v) {
    if (v == 0.0) return 0.0;
    return -std::copysign(std::log10(std::abs(v)), v);
}

} // namespace

std::vector<double> extract_feature_vector(const Image& img, const FeatureConfig& cfg) {
    Image gray = to_grayscale(img);
    auto hu = hu_moments(gray);
    if (cfg.hu_log)
        for (double& v : hu) v = signed_log10(v);
    auto texture = haralick_features(gray, cfg.glcm_levels);
    auto hist = color_histogram(img, cfg.hist_bins, cfg.hist_joint);

    std::vector<double> out;
    out.reserve(cfg.dimension());
    out.insert(out.end(), hu.begin(), hu.end());
    out.insert(out.end(), texture.begin(), texture.end());
    out.insert(out.end(), hist.begin(), hist.end());
    return out;
}

std::vector<double> extract_feature_vector(const Sample& sample, const FeatureConfig& cfg) {
    Image img = read_pnm(sample.image_ref);
    if (sample.crop) img = crop_image(img, sample.crop->x, sample.crop->y, sample.crop->w, sample.crop->h);
    return extract_feature_vector(img, cfg);
}

FeatureMatrix extract_features(const std::vector<Sample>& samples, const FeatureConfig& cfg, int threads) {
    FeatureMatrix out;
    out.config = cfg;
    out.dim = static_cast<std::size_t>(cfg.dimension());
    out.sample_ids.reserve(samples.size());
    out.values.resize(samples.size() * out.dim);
    for (const auto& s : samples) {
        out.sample_ids.push_back(s.sample_id);
        out.labels.push_back(s.label);
        out.video_ids.push_back(s.video_id);
    }

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto vec = extract_feature_vector(samples[i], cfg);
            std::copy(vec.begin(), vec.end(), out.row(i));
        }
    };
    threads = std::max(1, threads);
    if (threads == 1 || samples.size() < 2) {
        worker(0, samples.size());
    } else {
        // Rows are written by index, so the result is identical for any thread count.
        std::size_t chunk = (samples.size() + threads - 1) / threads;
        std::vector<std::future<void>> futures;
        for (std::size_t begin = 0; begin < samples.size(); begin += chunk)
            futures.push_back(
                std::async(std::launch::async, worker, begin, std::min(begin + chunk, samples.size())));
        for (auto& f : futures) f.get();
    }
    return out;
}

namespace {

json config_to_json(const FeatureConfig& cfg, const std::string& dataset_name) {
    return {{"dataset", dataset_name},
            {"hist_bins", cfg.hist_bins},
            {"hist_joint", cfg.hist_joint},
            {"glcm_levels", cfg.glcm_levels},
            {"hu_log", cfg.hu_log},
            {"dimension", cfg.dimension()},
            {"layout", "hu7,haralick13,hsv_hist"},
            {"entropy_log_base", "e"}};
}

} // namespace

void save_features(const FeatureMatrix& features, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw Error("features", "DiskWrite", "cannot open " + csv_path.string() + " for writing");
    out << "sample_id,label,video_id";
    for (std::size_t j = 0; j < features.dim; ++j) out << ",f" << j;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out << features.sample_ids[i] << ',' << features.labels[i] << ',' << features.video_ids[i];
        const double* row = features.row(i);
        for (std::size_t j = 0; j < features.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw Error("features", "DiskWrite", "short write to " + csv_path.string());

    std::filesystem::path sidecar = csv_path;
    sidecar += ".json";
    std::ofstream meta(sidecar);
    if (!meta) throw Error("features", "DiskWrite", "cannot open " + sidecar.string() + " for writing");
    meta << config_to_json(features.config, features.dataset_name).dump(1) << '\n';
}

FeatureMatrix load_features(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("features", "FileNotFound", "cannot open " + csv_path.string());
    FeatureMatrix out;

    std::filesystem::path sidecar = csv_path;
    sidecar += ".json";
    std::ifstream meta(sidecar);
    if (meta) {
        json doc;
        try {
            meta >> doc;
            out.config.hist_bins = doc.at("hist_bins").get<int>();
            out.config.hist_joint = doc.at("hist_joint").get<bool>();
            out.config.glcm_levels = doc.at("glcm_levels").get<int>();
            out.config.hu_log = doc.at("hu_log").get<bool>();
            if (doc.contains("dataset")) out.dataset_name = doc.at("dataset").get<std::string>();
        } catch (const json::exception& e) {
            throw Error("features", "MalformedSidecar", sidecar.string() + ": " + e.what());
        }
    }

    std::string line;
    if (!std::getline(in, line)) throw Error("features", "MalformedFeatures", "empty feature CSV");
    std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
    out.dim = dim;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        auto next_field = [&](bool last = false) {
            std::size_t comma = last ? std::string::npos : line.find(',', pos);
            std::string field = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            pos = comma == std::string::npos ? line.size() : comma + 1;
            return field;
        };
        out.sample_ids.push_back(next_field());
        out.labels.push_back(next_field());
        out.video_ids.push_back(next_field());
        std::size_t base = out.values.size();
        out.values.resize(base + dim);
        const char* cursor = line.c_str() + pos;
        for (std::size_t j = 0; j < dim; ++j) {
            char* end = nullptr;
            out.values[base + j] = std::strtod(cursor, &end);
            if (end == cursor)
                throw Error("features", "MalformedFeatures",
                            "row " + std::to_string(out.rows()) + " has fewer than " + std::to_string(dim) +
                                " values");
            cursor = (*end == ',') ? end + 1 : end;
        }
    }
    return out;
}

} // namespace weakvid
