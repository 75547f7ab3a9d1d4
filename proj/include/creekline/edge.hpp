#pragma once

#include "creekline/types.hpp"

#include <string>

namespace creekline {

enum class EdgeKind { sobel, canny, external };

std::string to_string(EdgeKind k);
EdgeKind edge_kind_from_string(const std::string& s);

struct EdgeProviderConfig {
    EdgeKind kind = EdgeKind::sobel;
    double canny_low = 0.1;
    double canny_high = 0.3;
    double gaussian_sigma = 1.4;
    /// Edge strengths at or below this value are zeroed after detection.
    /// Mirrors the near-zero background of externally produced maps; 0
    /// disables the floor. Not applied to canny (already binary) or to
    /// external files.
    double noise_floor = 0.0;
    /// Path template for external maps; "{stem}" is replaced with the input
    /// image's filename stem.
    std::string external_path_template;

    void validate() const;
};

/// Gradient magnitude from the 3x3 Sobel kernels, rescaled so the global
/// maximum maps to 1 (an all-zero gradient stays all zeros). Border rows and
/// columns are 0.
EdgeMap sobel(const GrayImage& img);

/// Gaussian smoothing, Sobel gradients, 4-direction non-maximum suppression
/// and double-threshold hysteresis. Output is binary {0, 1}. Magnitudes are
/// rescaled to [0, 1] before thresholding; a pixel is strong if its value
/// strictly exceeds canny_high and weak if it strictly exceeds canny_low.
EdgeMap canny(const GrayImage& img, const EdgeProviderConfig& cfg);

/// Loads an 8-bit grayscale edge map, mapping v/255 into [0, 1].
EdgeMap load_external(const std::string& path);

/// Resolves cfg.external_path_template against a filename stem.
std::string resolve_external_path(const EdgeProviderConfig& cfg, const std::string& stem);

/// Applies the configured provider to a preprocessed ROI. `stem` names the
/// input image for external-map lookup; external maps must match the ROI
/// dimensions. Applies cfg.noise_floor to sobel output.
EdgeMap make_edge_map(const GrayImage& roi, const EdgeProviderConfig& cfg,
                      const std::string& stem = "");

}  // namespace creekline
