#pragma once

#include "creekline/types.hpp"

#include <array>

namespace creekline {

/// Light-condition screening parameters. Thresholds are on the 0-255 scale.
struct ScreeningConfig {
    int sample_count = 500;
    double dark_threshold = 30.0;
    double boost_threshold = 100.0;
    double boost_factor = 1.5;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

enum class ScreeningVerdict { rejected_dark, boosted, passed };

std::string to_string(ScreeningVerdict v);

struct ScreeningOutcome {
    ScreeningVerdict verdict = ScreeningVerdict::passed;
    std::array<double, 3> mean_rgb{0.0, 0.0, 0.0};  // per-channel, 0-255 scale
};

/// Mean filter over a (2r+1)x(2r+1) window. The window is clipped at the
/// borders and the mean is taken over the pixels actually available.
GrayImage box_filter(const GrayImage& img, int radius);

/// Samples `cfg.sample_count` pixel positions uniformly with replacement and
/// screens the image on the sampled channel means: any channel mean below
/// dark_threshold rejects the frame; otherwise an all-channel mean at or
/// below boost_threshold multiplies every channel by boost_factor (clamped
/// to 255); otherwise the frame passes unchanged.
std::pair<ScreeningOutcome, ColorImage> screen_brightness(const ColorImage& img,
                                                          const ScreeningConfig& cfg,
                                                          Rng& rng);

}  // namespace creekline
