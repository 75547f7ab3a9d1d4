#include "creekline/detect.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace creekline {

void SsdWindowConfig::validate() const {
    if (half_height < 1) throw ConfigError("ssd half_height must be >= 1");
    if (width < 0) throw ConfigError("ssd width must be >= 0");
}

namespace {

// Nearest-rank percentile of a column: the value with rank ceil(q * n) in
// the sorted order.
double column_percentile(std::vector<double>& values, double q) {
    const std::size_t n = values.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::min(std::max<std::size_t>(rank, 1), n);
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

}  // namespace

WaterCoordinates detect_water_coordinates(const EdgeMap& region) {
    const Index h = region.height(), w = region.width();
    if (h < kContactWindow) {
        throw SizeError("detect_water_coordinates needs a region of at least " +
                        std::to_string(kContactWindow) + " rows");
    }
    WaterCoordinates coords;
    std::vector<double> column(static_cast<std::size_t>(h));
    for (Index x = 0; x < w; ++x) {
        for (Index y = 0; y < h; ++y) column[static_cast<std::size_t>(y)] = region.values(y, x);
        std::vector<double> scratch = column;
        const double p = column_percentile(scratch, 0.70);

        // Bottom-up: water sits below the pier, so the first window whose 3
        // pixels all clear the percentile marks the transition.
        for (Index bottom = h - 1; bottom >= kContactWindow - 1; --bottom) {
            bool all_above = true;
            for (int k = 0; k < kContactWindow; ++k) {
                if (!(column[static_cast<std::size_t>(bottom - k)] > p)) {
                    all_above = false;
                    break;
                }
            }
            if (all_above) {
                coords.columns.emplace_back(x, bottom - (kContactWindow - 1) / 2);
                break;
            }
        }
    }
    return coords;
}

WaterLineEstimate fit_waterline_regression(const WaterCoordinates& coords,
                                           const Template& tmpl, Index region_width,
                                           double center_offset_px) {
    constexpr int kGroups = 5;
    constexpr std::size_t kMinPoints = 2 * kGroups;
    const std::size_t n = coords.size();
    if (n < kMinPoints) {
        throw InsufficientSupportError("regression detector needs >= " +
                                       std::to_string(kMinPoints) + " water coordinates, got " +
                                       std::to_string(n));
    }

    // Contiguous x-order split; earlier groups absorb the remainder.
    const std::size_t base = n / kGroups;
    const std::size_t rem = n % kGroups;
    std::size_t begin = 0;
    FittedLine best;
    double best_gap = 0.0;
    bool have_best = false;
    for (int g = 0; g < kGroups; ++g) {
        const std::size_t size = base + (static_cast<std::size_t>(g) < rem ? 1 : 0);
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = begin; i < begin + size; ++i) {
            sx += static_cast<double>(coords.columns[i].first);
            sy += static_cast<double>(coords.columns[i].second);
        }
        const double mx = sx / static_cast<double>(size);
        const double my = sy / static_cast<double>(size);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = begin; i < begin + size; ++i) {
            const double dx = static_cast<double>(coords.columns[i].first) - mx;
            const double dy = static_cast<double>(coords.columns[i].second) - my;
            sxx += dx * dx;
            sxy += dx * dy;
        }
        // x values are strictly increasing, so sxx > 0 whenever size >= 2.
        FittedLine line;
        line.slope = sxy / sxx;
        line.intercept = my - line.slope * mx;
        line.window_index = g;
        line.support = static_cast<int>(size);

        const double gap = std::abs(line.slope - tmpl.reference_slope);
        if (!have_best || gap < best_gap) {
            best = line;
            best_gap = gap;
            have_best = true;
        }
        begin += size;
    }

    WaterLineEstimate estimate;
    estimate.method = DetectorMethod::regression;
    estimate.chosen_line = best;
    const double center_col = (static_cast<double>(region_width) - 1.0) / 2.0;
    estimate.row_at_center = best.slope * center_col + best.intercept + center_offset_px;
    return estimate;
}

std::vector<std::pair<Index, double>> ssd_profile(const GrayImage& region,
                                                  const SsdWindowConfig& cfg) {
    cfg.validate();
    const Index h_rows = region.rows(), w = region.cols();
    const Index half = cfg.half_height;
    if (h_rows < 2 * half + 1) {
        throw SizeError("ssd window (2x" + std::to_string(half) +
                        ") does not fit a region of " + std::to_string(h_rows) + " rows");
    }
    Index window_w = cfg.width == 0 ? w : cfg.width;
    if (window_w < 2) throw ConfigError("ssd window width must be >= 2");
    if (window_w > w) {
        throw SizeError("ssd window width " + std::to_string(window_w) +
                        " exceeds region width " + std::to_string(w));
    }
    const Index x_begin = (w - window_w) / 2;

    // Per-column row offset keeping the window parallel to the reference
    // water line. x0 is the region's left edge.
    std::vector<Index> shift(static_cast<std::size_t>(window_w));
    for (Index i = 0; i < window_w; ++i) {
        shift[static_cast<std::size_t>(i)] =
            static_cast<Index>(std::lround(cfg.shear_slope * static_cast<double>(x_begin + i)));
    }

    std::vector<std::pair<Index, double>> profile;
    profile.reserve(static_cast<std::size_t>(std::max<Index>(0, h_rows - 2 * half)));
    for (Index y = h_rows - half - 1; y >= half; --y) {
        double sum = 0.0;
        std::int64_t count = 0;
        for (Index i = 0; i < window_w; ++i) {
            const Index x = x_begin + i;
            const Index d = shift[static_cast<std::size_t>(i)];
            for (Index k = 0; k < half; ++k) {
                const Index upper = y - half + k + d;
                const Index lower = y + k + d;
                if (upper < 0 || lower >= h_rows) continue;
                const double diff = region(upper, x) - region(lower, x);
                sum += diff * diff;
                ++count;
            }
        }
        profile.emplace_back(y, count > 0 ? sum / static_cast<double>(count) : 0.0);
    }
    return profile;
}

WaterLineEstimate detect_waterline_ssd(const GrayImage& region, const SsdWindowConfig& cfg) {
    const auto profile = ssd_profile(region, cfg);
    if (profile.empty()) throw SizeError("ssd profile is empty");

    // The profile is ordered bottom-up, so keeping strict improvements makes
    // ties resolve toward the larger (lower) divider.
    Index best_y = profile.front().first;
    double best_s = profile.front().second;
    for (const auto& [y, s] : profile) {
        if (s > best_s) {
            best_s = s;
            best_y = y;
        }
    }

    WaterLineEstimate estimate;
    estimate.method = DetectorMethod::ssd;
    estimate.ssd_profile = profile;
    const double center_col = (static_cast<double>(region.cols()) - 1.0) / 2.0;
    estimate.row_at_center = static_cast<double>(best_y) + cfg.shear_slope * center_col;
    return estimate;
}

}  // namespace creekline
