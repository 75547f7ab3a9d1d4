#include "creekline/pipeline.hpp"

#include "creekline/image_io.hpp"
#include "creekline/image_ops.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace creekline {

namespace {

constexpr int kSmoothingRadius = 2;  // 5x5 averaging window

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void CalibrationModel::validate() const {
    if (!(cm_per_pixel > 0.0)) throw ConfigError("cm_per_pixel must be > 0");
    if (!(h_r > 0.0)) throw ConfigError("h_r must be > 0");
}

void DetectorBandConfig::validate() const {
    if (height_px < 0) throw ConfigError("detector band height must be >= 0");
}

void PipelineConfig::validate() const {
    if (roi.width < 1 || roi.height < 1) throw ConfigError("roi must be non-empty");
    screening.validate();
    edge.validate();
    if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) {
        throw ConfigError("match_threshold must be in [0, 1]");
    }
    ssd.validate();
    if (!(ensemble_tol_px >= 0.0)) throw ConfigError("ensemble_tol_px must be >= 0");
    calibration.validate();
    detect.validate();
}

std::string to_string(ReadingStatus s) {
    switch (s) {
        case ReadingStatus::ok: return "ok";
        case ReadingStatus::rejected_dark: return "rejected_dark";
        case ReadingStatus::no_match: return "no_match";
        case ReadingStatus::detector_failure: return "detector_failure";
        case ReadingStatus::non_convergent: return "non_convergent";
        case ReadingStatus::io_error: return "io_error";
    }
    return "unknown";
}

ReadingStatus reading_status_from_string(const std::string& s) {
    if (s == "ok") return ReadingStatus::ok;
    if (s == "rejected_dark") return ReadingStatus::rejected_dark;
    if (s == "no_match") return ReadingStatus::no_match;
    if (s == "detector_failure") return ReadingStatus::detector_failure;
    if (s == "non_convergent") return ReadingStatus::non_convergent;
    if (s == "io_error") return ReadingStatus::io_error;
    throw InputError("unknown reading status '" + s + "'");
}

std::optional<double> combine(double regression_row, double ssd_row, double tol_px) {
    if (std::abs(regression_row - ssd_row) <= tol_px) {
        return (regression_row + ssd_row) / 2.0;
    }
    return std::nullopt;
}

std::pair<double, double> calibrate_height(double pixel_row, const CalibrationModel& cal) {
    cal.validate();
    // Smaller row = higher water = positive delta.
    const double delta_h = (cal.reference_row - pixel_row) * cal.cm_per_pixel;
    return {delta_h, cal.h_r + delta_h};
}

ReadingRecord run_pipeline(const ColorImage& img, const std::string& stem,
                           const PipelineConfig& cfg, const Template& tmpl,
                           const CalibrationModel& cal, std::string* debug_json) {
    cfg.validate();
    ReadingRecord record;
    record.timestamp = timestamp_from_stem(stem).value_or(stem);

    nlohmann::json debug;
    if (debug_json) debug["stem"] = stem;

    const ColorImage roi = crop(img, cfg.roi);
    Rng rng(cfg.screening.rng_seed ^ fnv1a(stem));
    const auto [screening, screened] = screen_brightness(roi, cfg.screening, rng);
    if (debug_json) {
        debug["screening"] = {{"verdict", to_string(screening.verdict)},
                              {"mean_rgb", screening.mean_rgb}};
    }
    if (screening.verdict == ScreeningVerdict::rejected_dark) {
        record.status = ReadingStatus::rejected_dark;
        record.detail = "frame too dark";
        if (debug_json) *debug_json = debug.dump();
        return record;
    }

    const GrayImage smoothed = box_filter(to_gray(screened), kSmoothingRadius);
    const EdgeMap edges = make_edge_map(smoothed, cfg.edge, stem);

    const MatchResult match = match_template(tmpl, edges, cfg.match_threshold);
    record.match_score = match.score;
    record.has_match_score = true;
    if (debug_json) {
        debug["match"] = {{"score", match.score},
                          {"x", match.location.x},
                          {"y", match.location.y},
                          {"accepted", match.accepted}};
    }
    if (!match.accepted) {
        record.status = ReadingStatus::no_match;
        record.detail = "best score " + format_double(match.score) + " below threshold";
        if (debug_json) *debug_json = debug.dump();
        return record;
    }

    // Detector band: matched columns, vertical extent opened per config so
    // the water run below the pier is visible to both detectors.
    Rect band;
    band.x = match.location.x;
    band.width = match.location.width;
    band.y = std::clamp<Index>(match.location.y + cfg.detect.top_offset_px, 0,
                               edges.height() - 1);
    band.height = cfg.detect.height_px == 0 ? match.location.height : cfg.detect.height_px;
    band.height = std::min(band.height, edges.height() - band.y);
    if (debug_json) {
        debug["band"] = {{"x", band.x}, {"y", band.y}, {"width", band.width},
                         {"height", band.height}};
    }

    SsdWindowConfig ssd_cfg = cfg.ssd;
    ssd_cfg.shear_slope = tmpl.reference_slope;

    double regression_row = 0.0;  // ROI frame
    double ssd_row = 0.0;
    try {
        EdgeMap band_edges{crop(edges.values, band), edges.source};
        const WaterCoordinates coords = detect_water_coordinates(band_edges);
        const WaterLineEstimate reg = fit_waterline_regression(
            coords, tmpl, band.width, cfg.detect.regression_center_offset_px);
        if (reg.row_at_center < 0.0 || reg.row_at_center >= static_cast<double>(band.height)) {
            throw InsufficientSupportError("regression line left the detector band");
        }
        regression_row = static_cast<double>(band.y) + reg.row_at_center;

        const GrayImage ssd_region = cfg.detect.ssd_on_edge_map
                                         ? GrayImage(band_edges.values)
                                         : GrayImage(crop(smoothed, band));
        const WaterLineEstimate ssd = detect_waterline_ssd(ssd_region, ssd_cfg);
        if (ssd.row_at_center < 0.0 || ssd.row_at_center >= static_cast<double>(band.height)) {
            throw InsufficientSupportError("ssd divider left the detector band");
        }
        ssd_row = static_cast<double>(band.y) + ssd.row_at_center;

        if (debug_json) {
            debug["regression"] = {{"row", regression_row},
                                   {"slope", reg.chosen_line.slope},
                                   {"intercept", reg.chosen_line.intercept},
                                   {"window_index", reg.chosen_line.window_index},
                                   {"support", reg.chosen_line.support},
                                   {"points", coords.size()}};
            nlohmann::json profile = nlohmann::json::array();
            for (const auto& [y, s] : ssd.ssd_profile) profile.push_back({y, s});
            debug["ssd"] = {{"row", ssd_row}, {"profile", std::move(profile)}};
        }
    } catch (const Error& e) {
        record.status = ReadingStatus::detector_failure;
        record.detail = e.what();
        if (debug_json) {
            debug["detector_error"] = e.what();
            *debug_json = debug.dump();
        }
        return record;
    }

    record.detector_gap_px = std::abs(regression_row - ssd_row);
    record.has_detector_gap = true;
    const std::optional<double> fused = combine(regression_row, ssd_row, cfg.ensemble_tol_px);
    if (!fused) {
        record.status = ReadingStatus::non_convergent;
        record.detail = "detector gap " + format_double(record.detector_gap_px) + " px";
        if (debug_json) *debug_json = debug.dump();
        return record;
    }

    record.pixel_row = static_cast<double>(cfg.roi.y) + *fused;
    const auto [delta_h, height] = calibrate_height(record.pixel_row, cal);
    record.delta_h_cm = delta_h;
    record.height_cm = height;
    record.has_reading = true;
    record.status = ReadingStatus::ok;
    if (debug_json) {
        debug["pixel_row"] = record.pixel_row;
        debug["delta_h_cm"] = record.delta_h_cm;
        debug["height_cm"] = record.height_cm;
        *debug_json = debug.dump();
    }
    return record;
}

// ---------------------------------------------------------------------------
// Batch driver
// ---------------------------------------------------------------------------

std::optional<std::string> timestamp_from_stem(const std::string& stem) {
    // Find a YYYYMMDDTHHMMSS token.
    for (std::size_t i = 0; i + 15 <= stem.size(); ++i) {
        if (stem[i + 8] != 'T') continue;
        bool ok = true;
        for (std::size_t k = 0; k < 15 && ok; ++k) {
            if (k == 8) continue;
            ok = std::isdigit(static_cast<unsigned char>(stem[i + k])) != 0;
        }
        if (ok) return stem.substr(i, 15);
    }
    return std::nullopt;
}

std::optional<std::int64_t> epoch_from_timestamp(const std::string& ts) {
    if (ts.size() != 15 || ts[8] != 'T') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(ts[i]))) return -1;
            v = v * 10 + (ts[i] - '0');
        }
        return v;
    };
    const int year = digits(0, 4), month = digits(4, 2), day = digits(6, 2);
    const int hour = digits(9, 2), minute = digits(11, 2), second = digits(13, 2);
    if (year < 0 || month < 1 || month > 12 || day < 1 || day > 31 || hour < 0 || hour > 23 ||
        minute < 0 || minute > 59 || second < 0 || second > 60) {
        return std::nullopt;
    }
    // Days from civil date (proleptic Gregorian).
    const int y_adj = year - (month <= 2 ? 1 : 0);
    const int era = (y_adj >= 0 ? y_adj : y_adj - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y_adj - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t days = static_cast<std::int64_t>(era) * 146097 +
                              static_cast<std::int64_t>(doe) - 719468;
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::vector<std::string> list_batch_inputs(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::pair<std::string, std::string>> keyed;  // (sort key, path)
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (ext != ".png" && ext != ".pgm" && ext != ".ppm") continue;
        const std::string stem = entry.path().stem().string();
        const std::string key = timestamp_from_stem(stem).value_or(stem);
        keyed.emplace_back(key + "|" + entry.path().filename().string(), entry.path().string());
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> paths;
    paths.reserve(keyed.size());
    for (auto& [key, path] : keyed) paths.push_back(std::move(path));
    return paths;
}

std::vector<ReadingRecord> run_batch(const std::vector<std::string>& image_paths,
                                     const PipelineConfig& cfg, const Template& tmpl,
                                     const CalibrationModel& cal, const BatchOptions& opts,
                                     std::ostream* debug_out) {
    cfg.validate();
    const std::size_t n = image_paths.size();
    std::vector<ReadingRecord> records(n);
    std::vector<std::string> debug_lines(opts.debug ? n : 0);

    auto process = [&](std::size_t i) {
        const std::string& path = image_paths[i];
        const std::string stem = std::filesystem::path(path).stem().string();
        std::string* debug_line = opts.debug ? &debug_lines[i] : nullptr;
        try {
            const ColorImage img = read_color(path);
            records[i] = run_pipeline(img, stem, cfg, tmpl, cal, debug_line);
        } catch (const std::exception& e) {
            ReadingRecord rec;
            rec.timestamp = timestamp_from_stem(stem).value_or(stem);
            rec.status = ReadingStatus::io_error;
            rec.detail = e.what();
            records[i] = rec;
        }
    };

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const int count = std::min<int>(jobs, static_cast<int>(n));
        workers.reserve(static_cast<std::size_t>(count));
        for (int t = 0; t < count; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                    process(i);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    if (debug_out) {
        for (const auto& line : debug_lines) {
            if (!line.empty()) *debug_out << line << "\n";
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Readings CSV
// ---------------------------------------------------------------------------

void write_readings_csv(std::ostream& out, const std::vector<ReadingRecord>& records) {
    out << "timestamp,status,pixel_row,delta_h_cm,height_cm,match_score,detector_gap_px\n";
    std::size_t ok_count = 0;
    for (const auto& rec : records) {
        out << rec.timestamp << "," << to_string(rec.status) << ",";
        if (rec.has_reading) {
            out << format_double(rec.pixel_row) << "," << format_double(rec.delta_h_cm) << ","
                << format_double(rec.height_cm);
        } else {
            out << ",,";
        }
        out << ",";
        if (rec.has_match_score) out << format_double(rec.match_score);
        out << ",";
        if (rec.has_detector_gap) out << format_double(rec.detector_gap_px);
        out << "\n";
        if (rec.status == ReadingStatus::ok) ++ok_count;
    }
    const double rate = records.empty()
                            ? 0.0
                            : static_cast<double>(ok_count) / static_cast<double>(records.size());
    out << "# response_rate = " << format_double(rate) << "\n";
}

void write_readings_csv(const std::string& path, const std::vector<ReadingRecord>& records) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw IoError("cannot open for writing: " + path);
    write_readings_csv(out, records);
    if (!out) throw IoError("write failed: " + path);
}

std::vector<ReadingRecord> read_readings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<ReadingRecord> records;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            first = false;
            if (line.rfind("timestamp,", 0) == 0) continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        fields.resize(7);
        ReadingRecord rec;
        rec.timestamp = fields[0];
        rec.status = reading_status_from_string(fields[1]);
        if (!fields[2].empty()) {
            rec.pixel_row = std::stod(fields[2]);
            rec.delta_h_cm = std::stod(fields[3]);
            rec.height_cm = std::stod(fields[4]);
            rec.has_reading = true;
        }
        if (!fields[5].empty()) {
            rec.match_score = std::stod(fields[5]);
            rec.has_match_score = true;
        }
        if (!fields[6].empty()) {
            rec.detector_gap_px = std::stod(fields[6]);
            rec.has_detector_gap = true;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace creekline
