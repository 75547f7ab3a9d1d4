#pragma once

#include "creekline/pipeline.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace creekline {

/// Annotated water-line rows keyed by image identifier (timestamp token).
struct GroundTruthSet {
    std::map<std::string, double> entries;
};

/// CSV format: optional "identifier,row" header, then one line per image.
GroundTruthSet load_ground_truth_csv(const std::string& path);

/// Directory of annotation XML files (one per image; bounding boxes). The
/// water row per image is the mean of the boxes' vertical centers, matching
/// the two-annotation convention.
GroundTruthSet load_ground_truth_xml_dir(const std::string& dir);

double mae(const std::vector<double>& pred, const std::vector<double>& truth);

/// Mean of per-sample |pred - truth| / |truth|, as a percentage. Truth
/// values must be nonzero.
double mape(const std::vector<double>& pred, const std::vector<double>& truth);

/// 1 - RSS/TSS with residuals pred - truth and the mean taken over truth.
double r_squared(const std::vector<double>& pred, const std::vector<double>& truth);

struct TimedSeries {
    std::vector<std::pair<std::int64_t, double>> samples;  // (epoch seconds, value)
};

/// Squared Pearson correlation after a nearest-neighbor timestamp join of
/// the two series within `window_seconds`.
double cross_series_r2(const TimedSeries& a, const TimedSeries& b,
                       double window_seconds = 450.0);

struct EvalReport {
    std::size_t n = 0;  // paired (prediction, truth) samples
    double mae = 0.0;
    double mape = 0.0;        // percent; over nonzero truths only
    double r2 = 0.0;
    double response_rate = 0.0;  // ok records / all records
    // signed errors (pred - truth) grouped by calendar day, in time order
    std::vector<std::pair<std::string, std::vector<double>>> per_day_errors;
};

/// Pairs ok records with ground truths by identifier and aggregates the
/// regression metrics on pixel rows.
EvalReport evaluate(const std::vector<ReadingRecord>& records, const GroundTruthSet& gt);

/// Writes <prefix>_summary.csv and <prefix>_daily_errors.csv.
void write_eval_report(const std::string& prefix, const EvalReport& report);

}  // namespace creekline
