#include "creekline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace creekline {

namespace {

void require_paired(const std::vector<double>& pred, const std::vector<double>& truth,
                    std::size_t min_len) {
    if (pred.size() != truth.size()) {
        throw InputError("series length mismatch: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()));
    }
    if (pred.size() < min_len) {
        throw InputError("need at least " + std::to_string(min_len) + " samples, got " +
                         std::to_string(pred.size()));
    }
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

}  // namespace

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_paired(pred, truth, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
    return sum / static_cast<double>(pred.size());
}

double mape(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_paired(pred, truth, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 0.0) {
            throw InputError("mape: truth value at index " + std::to_string(i) + " is zero");
        }
        sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
    }
    return 100.0 * sum / static_cast<double>(pred.size());
}

double r_squared(const std::vector<double>& pred, const std::vector<double>& truth) {
    require_paired(pred, truth, 2);
    const double truth_mean = mean_of(truth);
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        rss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        tss += (truth[i] - truth_mean) * (truth[i] - truth_mean);
    }
    if (tss == 0.0) throw InputError("r_squared: truth series has zero variance");
    return 1.0 - rss / tss;
}

double cross_series_r2(const TimedSeries& a, const TimedSeries& b, double window_seconds) {
    std::vector<double> xs, ys;
    for (const auto& [ta, va] : a.samples) {
        double best_gap = window_seconds;
        const double* best = nullptr;
        for (const auto& [tb, vb] : b.samples) {
            const double gap = std::abs(static_cast<double>(ta - tb));
            if (gap <= best_gap) {
                best_gap = gap;
                best = &vb;
            }
        }
        if (best) {
            xs.push_back(va);
            ys.push_back(*best);
        }
    }
    if (xs.size() < 2) {
        throw InputError("cross_series_r2: fewer than 2 aligned samples");
    }
    const double mx = mean_of(xs), my = mean_of(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw InputError("cross_series_r2: a series has zero variance");
    }
    return (sxy * sxy) / (sxx * syy);
}

// ---------------------------------------------------------------------------
// Ground truth ingestion
// ---------------------------------------------------------------------------

GroundTruthSet load_ground_truth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError(path, "cannot open ground truth");
    GroundTruthSet gt;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IngestError(path, "malformed line: " + line);
        const std::string id = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (id == "identifier" || id == "id") continue;  // header
        try {
            const double row = std::stod(value);
            if (!std::isfinite(row) || row < 0.0) {
                throw IngestError(path, "row out of range for " + id);
            }
            if (!gt.entries.emplace(id, row).second) {
                throw IngestError(path, "duplicate identifier " + id);
            }
        } catch (const std::invalid_argument&) {
            throw IngestError(path, "malformed row value: " + line);
        }
    }
    return gt;
}

namespace {

// Pulls every <tag>number</tag> occurrence out of an annotation file.
std::vector<double> xml_numbers(const std::string& text, const std::string& tag) {
    std::vector<double> values;
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    std::size_t pos = 0;
    while ((pos = text.find(open, pos)) != std::string::npos) {
        pos += open.size();
        const auto end = text.find(close, pos);
        if (end == std::string::npos) break;
        values.push_back(std::stod(text.substr(pos, end - pos)));
        pos = end + close.size();
    }
    return values;
}

}  // namespace

GroundTruthSet load_ground_truth_xml_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IngestError(dir, "not a directory");
    GroundTruthSet gt;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();

        std::string id = file.stem().string();
        const auto fn_begin = text.find("<filename>");
        if (fn_begin != std::string::npos) {
            const auto fn_end = text.find("</filename>", fn_begin);
            if (fn_end != std::string::npos) {
                const std::string name = text.substr(fn_begin + 10, fn_end - fn_begin - 10);
                id = fs::path(name).stem().string();
            }
        }
        if (const auto ts = timestamp_from_stem(id)) id = *ts;

        const auto ymins = xml_numbers(text, "ymin");
        const auto ymaxs = xml_numbers(text, "ymax");
        if (ymins.empty() || ymins.size() != ymaxs.size()) {
            throw IngestError(file.string(), "no usable bounding boxes");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < ymins.size(); ++i) sum += (ymins[i] + ymaxs[i]) / 2.0;
        const double row = sum / static_cast<double>(ymins.size());
        if (!gt.entries.emplace(id, row).second) {
            throw IngestError(file.string(), "duplicate identifier " + id);
        }
    }
    return gt;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalReport evaluate(const std::vector<ReadingRecord>& records, const GroundTruthSet& gt) {
    std::vector<double> pred, truth;
    std::map<std::string, std::vector<double>> by_day;
    std::vector<std::string> day_order;
    std::size_t ok_count = 0;
    for (const auto& rec : records) {
        if (rec.status == ReadingStatus::ok) ++ok_count;
        if (rec.status != ReadingStatus::ok || !rec.has_reading) continue;
        const auto it = gt.entries.find(rec.timestamp);
        if (it == gt.entries.end()) continue;
        pred.push_back(rec.pixel_row);
        truth.push_back(it->second);
        const std::string day = rec.timestamp.size() >= 8 ? rec.timestamp.substr(0, 8)
                                                          : rec.timestamp;
        if (by_day.find(day) == by_day.end()) day_order.push_back(day);
        by_day[day].push_back(rec.pixel_row - it->second);
    }
    if (pred.empty()) {
        throw InputError("evaluate: no ok records pair with ground truths");
    }

    EvalReport report;
    report.n = pred.size();
    report.mae = mae(pred, truth);
    std::vector<double> mape_pred, mape_truth;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] != 0.0) {
            mape_pred.push_back(pred[i]);
            mape_truth.push_back(truth[i]);
        }
    }
    report.mape = mape_pred.empty() ? 0.0 : mape(mape_pred, mape_truth);
    report.r2 = 0.0;  // undefined for n < 2 or a flat truth series
    if (pred.size() >= 2) {
        try {
            report.r2 = r_squared(pred, truth);
        } catch (const InputError&) {
        }
    }
    report.response_rate = records.empty() ? 0.0
                                           : static_cast<double>(ok_count) /
                                                 static_cast<double>(records.size());
    std::sort(day_order.begin(), day_order.end());
    for (const auto& day : day_order) {
        report.per_day_errors.emplace_back(day, by_day[day]);
    }
    return report;
}

void write_eval_report(const std::string& prefix, const EvalReport& report) {
    {
        std::ofstream out(prefix + "_summary.csv", std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + prefix + "_summary.csv");
        out.precision(12);
        out << "n,mae_px,mape_percent,r2,response_rate\n";
        out << report.n << "," << report.mae << "," << report.mape << "," << report.r2 << ","
            << report.response_rate << "\n";
    }
    {
        std::ofstream out(prefix + "_daily_errors.csv", std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + prefix + "_daily_errors.csv");
        out.precision(12);
        out << "day,error_px\n";
        for (const auto& [day, errors] : report.per_day_errors) {
            for (const double e : errors) out << day << "," << e << "\n";
        }
    }
}

}  // namespace creekline
