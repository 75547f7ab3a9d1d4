#pragma once

#include "creekline/detect.hpp"
#include "creekline/edge.hpp"
#include "creekline/match.hpp"
#include "creekline/preprocess.hpp"
#include "creekline/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace creekline {

/// Physical calibration taken from the reference image: the water height
/// h_r (cm) observed when the reference water line sat at reference_row.
/// Rows are full-image coordinates so readings pair directly with annotated
/// ground truths; a smaller row means higher water.
struct CalibrationModel {
    double h_r = 100.0;
    double reference_row = 0.0;
    double cm_per_pixel = 1.0;

    void validate() const;
};

enum class ReadingStatus {
    ok,
    rejected_dark,
    no_match,
    detector_failure,
    non_convergent,
    io_error,
};

std::string to_string(ReadingStatus s);
ReadingStatus reading_status_from_string(const std::string& s);

/// One timestamped reading, or the reason there is none.
struct ReadingRecord {
    std::string timestamp;  // identifier, e.g. 20191003T001000
    ReadingStatus status = ReadingStatus::io_error;
    double pixel_row = 0.0;       // detected water-line row, full-image frame
    double delta_h_cm = 0.0;
    double height_cm = 0.0;
    double match_score = 0.0;
    double detector_gap_px = 0.0;
    bool has_reading = false;      // pixel/delta/height valid (status == ok)
    bool has_match_score = false;
    bool has_detector_gap = false;
    std::string detail;            // short non-ok explanation, not serialized
};

/// Mean of the two rows if they agree within tol_px (inclusive); otherwise
/// the detectors did not converge and there is no value.
std::optional<double> combine(double regression_row, double ssd_row, double tol_px = 3.0);

/// Eq-style calibration: delta_h = (reference_row - pixel_row) * cm_per_pixel
/// and height = h_r + delta_h. Returns (delta_h_cm, height_cm).
std::pair<double, double> calibrate_height(double pixel_row, const CalibrationModel& cal);

/// Detector placement relative to the matched rectangle. The detectors need
/// to see the water run below the pier, which the pier-anchored template
/// itself need not cover; the band keeps the matched columns and opens the
/// vertical extent.
struct DetectorBandConfig {
    Index top_offset_px = 0;   // band top = match.y + top_offset_px
    Index height_px = 0;       // 0 = match rect height; clamped to the ROI
    double regression_center_offset_px = kWindowCenterToBoundary;
    bool ssd_on_edge_map = true;

    void validate() const;
};

struct PipelineConfig {
    Rect roi{1000, 900, 400, 400};
    ScreeningConfig screening;
    EdgeProviderConfig edge;
    double match_threshold = 0.8;
    SsdWindowConfig ssd;
    double ensemble_tol_px = 3.0;
    CalibrationModel calibration;
    std::string template_path;
    Rect template_cut{0, 0, 0, 0};  // patch cut by `calibrate`, ROI coordinates
    DetectorBandConfig detect;

    void validate() const;
};

/// Full per-image pipeline: crop, screen, smooth, edge map, template match,
/// both detectors, ensemble, calibration. Never throws for expected non-ok
/// outcomes; those are statuses. `stem` identifies the image (timestamp
/// parsing and external edge-map lookup). If `debug_json` is non-null it
/// receives a one-line JSON diagnostic record.
ReadingRecord run_pipeline(const ColorImage& img, const std::string& stem,
                           const PipelineConfig& cfg, const Template& tmpl,
                           const CalibrationModel& cal, std::string* debug_json = nullptr);

struct BatchOptions {
    int jobs = 1;
    bool debug = false;
};

/// Processes image files in timestamp order. Unreadable files become
/// io_error records; the batch continues. Output order is input order
/// regardless of the worker count.
std::vector<ReadingRecord> run_batch(const std::vector<std::string>& image_paths,
                                     const PipelineConfig& cfg, const Template& tmpl,
                                     const CalibrationModel& cal, const BatchOptions& opts,
                                     std::ostream* debug_out = nullptr);

/// Lists decodable image files in a directory sorted by the timestamp token
/// in their names.
std::vector<std::string> list_batch_inputs(const std::string& dir);

// Reading CSV schema: header + one row per image; trailing comment line with
// the response rate. Columns: timestamp,status,pixel_row,delta_h_cm,
// height_cm,match_score,detector_gap_px.
void write_readings_csv(std::ostream& out, const std::vector<ReadingRecord>& records);
void write_readings_csv(const std::string& path, const std::vector<ReadingRecord>& records);
std::vector<ReadingRecord> read_readings_csv(const std::string& path);

/// Builds a Template and CalibrationModel from an annotated reference image.
/// The patch is cut at cfg.template_cut; annotated_row (full-image frame)
/// must fall inside it. The reference slope comes from one least-squares fit
/// over the water coordinates of the reference edge map. Throws
/// CalibrationError when the reference is rejected or the fit degenerates.
std::pair<Template, CalibrationModel> calibrate_reference(const ColorImage& reference,
                                                          const std::string& stem,
                                                          const PipelineConfig& cfg,
                                                          double annotated_row, double h_r);

/// Extracts the YYYYMMDDTHHMMSS token from a filename stem, if any.
std::optional<std::string> timestamp_from_stem(const std::string& stem);

/// Epoch seconds for a YYYYMMDDTHHMMSS token (no timezone; civil time).
std::optional<std::int64_t> epoch_from_timestamp(const std::string& ts);

}  // namespace creekline
