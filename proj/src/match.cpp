#include "creekline/match.hpp"

#include "creekline/image_io.hpp"
#include "creekline/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

namespace creekline {

namespace {

void require_template_fits(const Template& tmpl, const EdgeMap& img) {
    if (tmpl.patch.width() < 1 || tmpl.patch.height() < 1) {
        throw SizeError("template patch is empty");
    }
    if (tmpl.patch.width() >= img.width() || tmpl.patch.height() >= img.height()) {
        throw SizeError("template (" + std::to_string(tmpl.patch.width()) + "x" +
                        std::to_string(tmpl.patch.height()) +
                        ") must be strictly smaller than the image (" +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()) + ")");
    }
}

double score_at(const GrayImage& patch, const GrayImage& img, Index x, Index y,
                double patch_sq, const Plane<double>& integral_sq) {
    const Index th = patch.rows(), tw = patch.cols();
    const double num = (patch * img.block(y, x, th, tw)).sum();
    const double win_sq = integral_sq(y + th, x + tw) - integral_sq(y, x + tw) -
                          integral_sq(y + th, x) + integral_sq(y, x);
    const double den_sq = patch_sq * win_sq;
    if (den_sq <= 0.0) return 0.0;
    return num / std::sqrt(den_sq);
}

Plane<double> squared_integral(const GrayImage& img) {
    const Index h = img.rows(), w = img.cols();
    Plane<double> integral = Plane<double>::Zero(h + 1, w + 1);
    for (Index y = 0; y < h; ++y) {
        double run = 0.0;
        for (Index x = 0; x < w; ++x) {
            run += img(y, x) * img(y, x);
            integral(y + 1, x + 1) = integral(y, x + 1) + run;
        }
    }
    return integral;
}

struct Best {
    double score = -1.0;
    Index y = 0;
    Index x = 0;

    // Scan-order tie-break: higher score wins, then smaller y, then smaller x.
    bool beats(const Best& other) const {
        if (score != other.score) return score > other.score;
        if (y != other.y) return y < other.y;
        return x < other.x;
    }
};

}  // namespace

double ncc_score(const Template& tmpl, const EdgeMap& img, Index x, Index y) {
    const Index th = tmpl.patch.height(), tw = tmpl.patch.width();
    require_inside(Rect{x, y, tw, th}, img.width(), img.height(), "template placement");
    const GrayImage& patch = tmpl.patch.values;
    const double num = (patch * img.values.block(y, x, th, tw)).sum();
    const double t_sq = patch.square().sum();
    const double w_sq = img.values.block(y, x, th, tw).square().sum();
    const double den_sq = t_sq * w_sq;
    if (den_sq <= 0.0) return 0.0;
    return num / std::sqrt(den_sq);
}

MatchResult match_template(const Template& tmpl, const EdgeMap& img, double threshold) {
    require_template_fits(tmpl, img);
    const Index th = tmpl.patch.height(), tw = tmpl.patch.width();
    const Index ys = img.height() - th + 1;
    const Index xs = img.width() - tw + 1;
    const GrayImage& patch = tmpl.patch.values;
    const double patch_sq = patch.square().sum();
    const Plane<double> integral_sq = squared_integral(img.values);

    auto scan_rows = [&](Index y_begin, Index y_end) {
        Best best;
        for (Index y = y_begin; y < y_end; ++y) {
            for (Index x = 0; x < xs; ++x) {
                const double s = score_at(patch, img.values, x, y, patch_sq, integral_sq);
                const Best candidate{s, y, x};
                if (candidate.beats(best)) best = candidate;
            }
        }
        return best;
    };

    // Row-parallel scan. Per-placement scores do not depend on scan order and
    // the merge below reproduces the sequential tie-break exactly.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const Index n_threads = std::min<Index>(static_cast<Index>(hw), ys);
    Best best;
    if (n_threads <= 1) {
        best = scan_rows(0, ys);
    } else {
        std::vector<Best> partial(static_cast<std::size_t>(n_threads));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(n_threads));
        for (Index t = 0; t < n_threads; ++t) {
            const Index y_begin = ys * t / n_threads;
            const Index y_end = ys * (t + 1) / n_threads;
            workers.emplace_back([&, t, y_begin, y_end] {
                partial[static_cast<std::size_t>(t)] = scan_rows(y_begin, y_end);
            });
        }
        for (auto& worker : workers) worker.join();
        best = partial[0];
        for (Index t = 1; t < n_threads; ++t) {
            if (partial[static_cast<std::size_t>(t)].beats(best)) {
                best = partial[static_cast<std::size_t>(t)];
            }
        }
    }

    MatchResult result;
    result.score = best.score;
    result.location = Rect{best.x, best.y, tw, th};
    result.accepted = best.score >= threshold;
    return result;
}

// ---------------------------------------------------------------------------
// Template persistence: 8-bit patch image + key-value sidecar.
// ---------------------------------------------------------------------------

void save_template(const std::string& meta_path, const Template& tmpl,
                   const CalibrationModel& cal) {
    const std::filesystem::path meta(meta_path);
    if (meta.extension() != ".meta") {
        throw ConfigError("template metadata path must end in .meta: " + meta_path);
    }
    std::filesystem::path patch_path = meta;
    patch_path.replace_extension(".pgm");
    write_gray8(patch_path.string(), tmpl.patch.values);

    std::ofstream out(meta_path);
    if (!out) throw IoError("cannot open for writing: " + meta_path);
    out.precision(17);
    out << "patch = " << patch_path.filename().string() << "\n";
    out << "patch_source = " << to_string(tmpl.patch.source) << "\n";
    out << "origin_x = " << tmpl.origin_in_reference.x << "\n";
    out << "origin_y = " << tmpl.origin_in_reference.y << "\n";
    out << "origin_width = " << tmpl.origin_in_reference.width << "\n";
    out << "origin_height = " << tmpl.origin_in_reference.height << "\n";
    out << "waterline_row_offset = " << tmpl.waterline_row_offset << "\n";
    out << "reference_slope = " << tmpl.reference_slope << "\n";
    out << "h_r_cm = " << cal.h_r << "\n";
    out << "reference_row = " << cal.reference_row << "\n";
    out << "cm_per_pixel = " << cal.cm_per_pixel << "\n";
    if (!out) throw IoError("write failed: " + meta_path);
}

std::pair<Template, CalibrationModel> load_template(const std::string& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw IngestError(meta_path, "cannot open template metadata");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IngestError(meta_path, "malformed line: " + line);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw IngestError(meta_path, "missing key '" + key + "'");
        return it->second;
    };

    Template tmpl;
    const std::filesystem::path patch_path =
        std::filesystem::path(meta_path).parent_path() / need("patch");
    tmpl.patch = load_external(patch_path.string());
    const std::string source = need("patch_source");
    tmpl.patch.source = source == "sobel"   ? EdgeSource::sobel
                        : source == "canny" ? EdgeSource::canny
                                            : EdgeSource::external;
    tmpl.origin_in_reference = Rect{std::stol(need("origin_x")), std::stol(need("origin_y")),
                                    std::stol(need("origin_width")),
                                    std::stol(need("origin_height"))};
    tmpl.waterline_row_offset = std::stol(need("waterline_row_offset"));
    tmpl.reference_slope = std::stod(need("reference_slope"));
    if (tmpl.waterline_row_offset < 0 || tmpl.waterline_row_offset >= tmpl.patch.height()) {
        throw IngestError(meta_path, "waterline_row_offset outside the patch");
    }

    CalibrationModel cal;
    cal.h_r = std::stod(need("h_r_cm"));
    cal.reference_row = std::stod(need("reference_row"));
    cal.cm_per_pixel = std::stod(need("cm_per_pixel"));
    cal.validate();
    return {tmpl, cal};
}

}  // namespace creekline
