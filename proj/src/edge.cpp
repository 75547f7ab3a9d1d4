#include "creekline/edge.hpp"

#include "creekline/image_io.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

namespace creekline {

std::string to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::sobel: return "sobel";
        case EdgeKind::canny: return "canny";
        case EdgeKind::external: return "external";
    }
    return "unknown";
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "sobel") return EdgeKind::sobel;
    if (s == "canny") return EdgeKind::canny;
    if (s == "external") return EdgeKind::external;
    throw ConfigError("unknown edge provider '" + s + "'");
}

void EdgeProviderConfig::validate() const {
    if (kind == EdgeKind::canny) {
        if (!(canny_low >= 0.0 && canny_low < canny_high && canny_high <= 1.0)) {
            throw ConfigError("canny thresholds must satisfy 0 <= low < high <= 1");
        }
        if (!(gaussian_sigma > 0.0)) throw ConfigError("gaussian_sigma must be > 0");
    }
    if (noise_floor < 0.0 || noise_floor >= 1.0) {
        throw ConfigError("noise_floor must be in [0, 1)");
    }
}

namespace {

// Raw 3x3 Sobel responses; borders left at zero.
void sobel_gradients(const GrayImage& img, GrayImage& gx, GrayImage& gy) {
    const Index h = img.rows(), w = img.cols();
    gx = GrayImage::Zero(h, w);
    gy = GrayImage::Zero(h, w);
    for (Index y = 1; y + 1 < h; ++y) {
        for (Index x = 1; x + 1 < w; ++x) {
            gx(y, x) = (img(y - 1, x + 1) + 2.0 * img(y, x + 1) + img(y + 1, x + 1)) -
                       (img(y - 1, x - 1) + 2.0 * img(y, x - 1) + img(y + 1, x - 1));
            gy(y, x) = (img(y + 1, x - 1) + 2.0 * img(y + 1, x) + img(y + 1, x + 1)) -
                       (img(y - 1, x - 1) + 2.0 * img(y - 1, x) + img(y - 1, x + 1));
        }
    }
}

// Separable Gaussian with border-clipped renormalization, matching the
// clipped-window convention of the box filter.
GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
    for (int k = -r; k <= r; ++k) {
        kernel[static_cast<std::size_t>(k + r)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
    }
    const Index h = img.rows(), w = img.cols();
    GrayImage tmp(h, w), out(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int k = -r; k <= r; ++k) {
                const Index xx = x + k;
                if (xx < 0 || xx >= w) continue;
                const double kw = kernel[static_cast<std::size_t>(k + r)];
                acc += kw * img(y, xx);
                wsum += kw;
            }
            tmp(y, x) = acc / wsum;
        }
    }
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int k = -r; k <= r; ++k) {
                const Index yy = y + k;
                if (yy < 0 || yy >= h) continue;
                const double kw = kernel[static_cast<std::size_t>(k + r)];
                acc += kw * tmp(yy, x);
                wsum += kw;
            }
            out(y, x) = acc / wsum;
        }
    }
    return out;
}

}  // namespace

// Peaks below this are rounding residue of a flat image, not gradients;
// rescaling them to 1.0 would fabricate edges.
constexpr double kZeroGradient = 1e-12;

EdgeMap sobel(const GrayImage& img) {
    if (img.rows() < 3 || img.cols() < 3) {
        throw SizeError("sobel needs an image of at least 3x3");
    }
    GrayImage gx, gy;
    sobel_gradients(img, gx, gy);
    GrayImage mag = (gx.square() + gy.square()).sqrt();
    const double peak = mag.maxCoeff();
    if (peak > kZeroGradient) {
        mag /= peak;
    } else {
        mag.setZero();
    }
    return EdgeMap{std::move(mag), EdgeSource::sobel};
}

EdgeMap canny(const GrayImage& img, const EdgeProviderConfig& cfg) {
    cfg.validate();
    if (img.rows() < 5 || img.cols() < 5) {
        throw SizeError("canny needs an image of at least 5x5");
    }
    const Index h = img.rows(), w = img.cols();
    const GrayImage smoothed = gaussian_smooth(img, cfg.gaussian_sigma);
    GrayImage gx, gy;
    sobel_gradients(smoothed, gx, gy);
    GrayImage mag = (gx.square() + gy.square()).sqrt();
    const double peak = mag.maxCoeff();
    if (peak > kZeroGradient) {
        mag /= peak;
    } else {
        return EdgeMap{GrayImage::Zero(h, w), EdgeSource::canny};
    }

    // Non-maximum suppression along the quantized gradient direction. A
    // pixel survives if it is >= the previous neighbor and > the next one,
    // which keeps exactly one pixel on symmetric two-pixel ridges.
    GrayImage nms = GrayImage::Zero(h, w);
    for (Index y = 1; y + 1 < h; ++y) {
        for (Index x = 1; x + 1 < w; ++x) {
            const double m = mag(y, x);
            if (m <= 0.0) continue;
            const double angle = std::atan2(gy(y, x), gx(y, x));
            double deg = angle * 180.0 / std::numbers::pi;
            if (deg < 0.0) deg += 180.0;
            Index dy = 0, dx = 0;
            if (deg < 22.5 || deg >= 157.5) {
                dx = 1;  // horizontal gradient, vertical edge
            } else if (deg < 67.5) {
                dx = 1;
                dy = 1;
            } else if (deg < 112.5) {
                dy = 1;
            } else {
                dx = -1;
                dy = 1;
            }
            const double prev = mag(y - dy, x - dx);
            const double next = mag(y + dy, x + dx);
            if (m >= prev && m > next) nms(y, x) = m;
        }
    }

    // Double-threshold hysteresis, 8-connected from strong pixels.
    GrayImage out = GrayImage::Zero(h, w);
    std::deque<std::pair<Index, Index>> frontier;
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            if (nms(y, x) > cfg.canny_high) {
                out(y, x) = 1.0;
                frontier.emplace_back(y, x);
            }
        }
    }
    while (!frontier.empty()) {
        const auto [y, x] = frontier.front();
        frontier.pop_front();
        for (Index dy = -1; dy <= 1; ++dy) {
            for (Index dx = -1; dx <= 1; ++dx) {
                const Index yy = y + dy, xx = x + dx;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                if (out(yy, xx) == 0.0 && nms(yy, xx) > cfg.canny_low) {
                    out(yy, xx) = 1.0;
                    frontier.emplace_back(yy, xx);
                }
            }
        }
    }
    return EdgeMap{std::move(out), EdgeSource::canny};
}

EdgeMap load_external(const std::string& path) {
    GrayImage values = read_gray8(path);  // throws IngestError with the path
    return EdgeMap{std::move(values), EdgeSource::external};
}

std::string resolve_external_path(const EdgeProviderConfig& cfg, const std::string& stem) {
    std::string path = cfg.external_path_template;
    const std::string token = "{stem}";
    const auto pos = path.find(token);
    if (pos == std::string::npos) {
        throw ConfigError("external_path_template must contain '{stem}'");
    }
    path.replace(pos, token.size(), stem);
    return path;
}

EdgeMap make_edge_map(const GrayImage& roi, const EdgeProviderConfig& cfg,
                      const std::string& stem) {
    cfg.validate();
    switch (cfg.kind) {
        case EdgeKind::sobel: {
            EdgeMap map = sobel(roi);
            if (cfg.noise_floor > 0.0) {
                map.values = (map.values <= cfg.noise_floor).select(0.0, map.values);
            }
            return map;
        }
        case EdgeKind::canny:
            return canny(roi, cfg);
        case EdgeKind::external: {
            const std::string path = resolve_external_path(cfg, stem);
            EdgeMap map = load_external(path);
            if (map.width() != roi.cols() || map.height() != roi.rows()) {
                throw IngestError(path, "external edge map is " + std::to_string(map.width()) +
                                            "x" + std::to_string(map.height()) +
                                            " but the ROI is " + std::to_string(roi.cols()) +
                                            "x" + std::to_string(roi.rows()));
            }
            return map;
        }
    }
    throw ConfigError("unhandled edge provider kind");
}

}  // namespace creekline
