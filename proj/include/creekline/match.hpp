#pragma once

#include "creekline/types.hpp"

#include <string>

namespace creekline {

/// Reference patch searched for in new edge maps, with the scene metadata
/// recorded when it was cut.
struct Template {
    EdgeMap patch;
    Rect origin_in_reference;      // where the patch was cut, ROI coordinates
    Index waterline_row_offset = 0;  // reference water line row inside the patch
    double reference_slope = 0.0;    // rise (rows) per column of the reference water line
};

struct MatchResult {
    double score = 0.0;
    Rect location;    // best placement, same frame as the searched image
    bool accepted = false;
};

/// Normalized cross-correlation of the template placed at column x, row y:
///
///   C = sum(T .* W) / sqrt(sum(T^2) * sum(W^2))
///
/// with W the image window under the placement. No mean subtraction. Returns
/// 0 when either sum of squares is zero. Throws BoundsError if the placement
/// is not fully inside the image.
double ncc_score(const Template& tmpl, const EdgeMap& img, Index x, Index y);

/// Exhaustive scan over every valid placement. Returns the maximum-score
/// placement; ties break toward the smallest y, then the smallest x. The scan
/// is internally parallel but returns exactly the sequential result.
/// Throws SizeError unless the template is strictly smaller than the image in
/// both dimensions.
MatchResult match_template(const Template& tmpl, const EdgeMap& img,
                           double threshold = 0.8);

/// Persists patch (8-bit grayscale alongside) + key-value sidecar metadata.
/// `meta_path` must end in ".meta"; the patch file sits next to it.
struct CalibrationModel;  // pipeline.hpp
void save_template(const std::string& meta_path, const Template& tmpl,
                   const CalibrationModel& cal);
std::pair<Template, CalibrationModel> load_template(const std::string& meta_path);

}  // namespace creekline
