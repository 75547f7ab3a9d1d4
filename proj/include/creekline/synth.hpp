#pragma once

#include "creekline/types.hpp"

#include <string>
#include <vector>

namespace creekline {

/// Synthetic creek scene: a textured pier descending from the top of the
/// frame into dark water, with the water line sloping across the pier. The
/// texture is a static block pattern tied to pixel position, so it stays
/// put from frame to frame like a real pier face.
struct SceneSpec {
    Index width = 440;
    Index height = 440;
    Rect pier_rect{155, 0, 110, 440};
    double water_row = 80.0;   // true line row at the pier's left edge
    double water_slope = 0.05;  // rows per column, left to right
    double pier_intensity = 0.62;
    double water_intensity = 0.45;
    double background_intensity = 0.38;
    double noise_sigma = 0.0;
    int debris_count = 0;
    double brightness_scale = 1.0;
    std::uint64_t seed = 1;
    double pier_texture_amplitude = 0.28;
    int pier_texture_block_px = 4;
    std::uint64_t pier_texture_seed = 99;

    void validate() const;

    double line_row_at(double x) const {
        return water_row + water_slope * (x - static_cast<double>(pier_rect.x));
    }
    /// True water-line row at the pier's horizontal center.
    double true_row_at_center() const {
        return line_row_at(static_cast<double>(pier_rect.x) +
                           (static_cast<double>(pier_rect.width) - 1.0) / 2.0);
    }
};

struct RenderResult {
    ColorImage image;
    double true_row_at_center = 0.0;
};

/// Deterministic under spec.seed: rendering twice gives byte-identical
/// images.
RenderResult render(const SceneSpec& spec);

/// Renders one frame per (water_rows[i], seeds[i]) pair into out_dir with
/// filenames on a 10-minute timestamp cadence, plus ground_truth.csv in the
/// identifier,row format. `format` is "png", "ppm" or "pgm". A non-empty
/// `brightness_scales` overrides the base scale per frame (same length as
/// water_rows). Returns the stems written, in order.
std::vector<std::string> render_batch(const SceneSpec& base,
                                      const std::vector<double>& water_rows,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::string& out_dir,
                                      const std::string& format = "png",
                                      const std::vector<double>& brightness_scales = {});

}  // namespace creekline
