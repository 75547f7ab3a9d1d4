#pragma once

#include "creekline/match.hpp"
#include "creekline/types.hpp"

#include <vector>

namespace creekline {

/// Per-column water-contact points, x strictly increasing. Columns where no
/// window qualifies are omitted.
struct WaterCoordinates {
    std::vector<std::pair<Index, Index>> columns;  // (x, y)

    std::size_t size() const { return columns.size(); }
};

struct FittedLine {
    double slope = 0.0;
    double intercept = 0.0;  // y = slope * x + intercept, region coordinates
    int window_index = 0;    // which of the 5 x-order groups produced it
    int support = 0;
};

enum class DetectorMethod { regression, ssd };

struct WaterLineEstimate {
    double row_at_center = 0.0;  // estimated water-line row at the region's
                                 // horizontal center, region coordinates
    DetectorMethod method = DetectorMethod::regression;

    // diagnostics
    FittedLine chosen_line;                     // regression
    std::vector<std::pair<Index, double>> ssd_profile;  // ssd: (divider y, S(y))
};

struct SsdWindowConfig {
    Index half_height = 8;  // rows per half-window
    Index width = 0;        // 0 = full region width
    double shear_slope = 0.0;

    void validate() const;
};

/// For each column: take the column's 70th-percentile intensity p
/// (nearest-rank on the sorted column), slide a 3-pixel vertical window from
/// the bottom row upward, and keep the first window whose 3 pixels all
/// strictly exceed p. The window's center row is the column's coordinate.
WaterCoordinates detect_water_coordinates(const EdgeMap& region);

/// Height of the sliding contact window used above.
inline constexpr int kContactWindow = 3;

/// Rows from a contact window's center down to the first row past its
/// bottom, i.e. to the bright/dark transition the window sits on.
inline constexpr double kWindowCenterToBoundary = (kContactWindow + 1) / 2.0;

/// Splits the coordinates by x-order into 5 near-equal contiguous groups
/// (earlier groups take the remainder), fits an ordinary least-squares line
/// per group, and keeps the line whose slope is nearest tmpl.reference_slope
/// (ties toward the lower group index). The reported row is the chosen line
/// at the region's center column, shifted by `center_offset_px` to move from
/// window centers onto the reported water line. Requires >= 10 points.
WaterLineEstimate fit_waterline_regression(const WaterCoordinates& coords,
                                           const Template& tmpl, Index region_width,
                                           double center_offset_px = kWindowCenterToBoundary);

/// Split sliding-window profile: for each divider row y (scanned bottom to
/// top), the upper half covers sheared rows [y-h, y) and the lower half
/// [y, y+h); each column x samples rows offset by round(shear_slope * (x -
/// x0)). S(y) is the sum of squared differences between vertically paired
/// pixels, normalized by the number of in-bounds pairs.
std::vector<std::pair<Index, double>> ssd_profile(const GrayImage& region,
                                                  const SsdWindowConfig& cfg);

/// Divider with the highest S(y); ties break toward the larger y. The row is
/// adjusted by the shear to the region's center column.
WaterLineEstimate detect_waterline_ssd(const GrayImage& region, const SsdWindowConfig& cfg);

}  // namespace creekline
