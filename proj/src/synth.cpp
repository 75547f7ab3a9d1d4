#include "creekline/synth.hpp"

#include "creekline/image_io.hpp"
#include "creekline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace creekline {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Position-keyed block texture in [-1, 1]; independent of the frame seed so
// the pier face is identical across a batch.
double texture_at(Index x, Index y, const SceneSpec& spec) {
    const std::uint64_t bx = static_cast<std::uint64_t>(x / spec.pier_texture_block_px);
    const std::uint64_t by = static_cast<std::uint64_t>(y / spec.pier_texture_block_px);
    const std::uint64_t h =
        splitmix64(bx * 0x9e3779b97f4a7c15ull ^ by * 0xc2b2ae3d27d4eb4full ^
                   spec.pier_texture_seed);
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

std::string timestamp_for_epoch(std::int64_t epoch) {
    // Civil date from days (proleptic Gregorian).
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned month = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t year = y + (month <= 2 ? 1 : 0);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lldT%02u%02u%02u",
                  static_cast<long long>(year * 10000 + month * 100 + day),
                  static_cast<unsigned>(rem / 3600), static_cast<unsigned>((rem % 3600) / 60),
                  static_cast<unsigned>(rem % 60));
    return buf;
}

}  // namespace

void SceneSpec::validate() const {
    if (width < 1 || height < 1) throw ConfigError("scene dimensions must be positive");
    require_inside(pier_rect, width, height, "scene pier_rect");
    if (water_row < static_cast<double>(pier_rect.y) ||
        water_row > static_cast<double>(pier_rect.y + pier_rect.height)) {
        throw ConfigError("water_row must lie within the pier's vertical extent");
    }
    for (const double v : {pier_intensity, water_intensity, background_intensity}) {
        if (v < 0.0 || v > 1.0) throw ConfigError("scene intensities must be in [0, 1]");
    }
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (debris_count < 0) throw ConfigError("debris_count must be >= 0");
    if (!(brightness_scale > 0.0)) throw ConfigError("brightness_scale must be > 0");
    if (pier_texture_amplitude < 0.0) throw ConfigError("texture amplitude must be >= 0");
    if (pier_texture_block_px < 1) throw ConfigError("texture block must be >= 1 px");
}

RenderResult render(const SceneSpec& spec) {
    spec.validate();
    const Index w = spec.width, h = spec.height;
    GrayImage scene(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            const double line = spec.line_row_at(static_cast<double>(x));
            if (static_cast<double>(y) + 0.5 >= line) {
                scene(y, x) = spec.water_intensity;
            } else if (x >= spec.pier_rect.x && x < spec.pier_rect.x + spec.pier_rect.width &&
                       y >= spec.pier_rect.y) {
                scene(y, x) =
                    spec.pier_intensity + spec.pier_texture_amplitude * texture_at(x, y, spec);
            } else {
                scene(y, x) = spec.background_intensity;
            }
        }
    }

    Rng rng(spec.seed);
    for (int d = 0; d < spec.debris_count; ++d) {
        const Index len = 12 + static_cast<Index>(rng.index(24));
        const Index x0 = static_cast<Index>(rng.index(static_cast<std::uint64_t>(
            std::max<Index>(1, w - len))));
        const Index y0 = static_cast<Index>(rng.index(static_cast<std::uint64_t>(h)));
        for (Index y = y0; y < std::min<Index>(h, y0 + 2); ++y) {
            for (Index x = x0; x < x0 + len; ++x) {
                // Streaks float on the water only.
                if (static_cast<double>(y) + 0.5 >= spec.line_row_at(static_cast<double>(x)) + 3.0) {
                    scene(y, x) = 0.85;
                }
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        for (Index y = 0; y < h; ++y) {
            for (Index x = 0; x < w; ++x) {
                scene(y, x) += rng.normal(0.0, spec.noise_sigma);
            }
        }
    }

    scene = (scene * spec.brightness_scale).min(1.0).max(0.0);

    ColorImage img;
    img.r.resize(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) img.r(y, x) = quantize8(scene(y, x));
    }
    img.g = img.r;
    img.b = img.r;
    return RenderResult{std::move(img), spec.true_row_at_center()};
}

std::vector<std::string> render_batch(const SceneSpec& base,
                                      const std::vector<double>& water_rows,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::string& out_dir, const std::string& format,
                                      const std::vector<double>& brightness_scales) {
    if (water_rows.size() != seeds.size()) {
        throw InputError("render_batch: water_rows and seeds must have equal length");
    }
    if (!brightness_scales.empty() && brightness_scales.size() != water_rows.size()) {
        throw InputError("render_batch: brightness_scales length mismatch");
    }
    if (format != "png" && format != "ppm" && format != "pgm") {
        throw ConfigError("render_batch format must be png, ppm or pgm");
    }
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const std::int64_t start_epoch = *epoch_from_timestamp("20191003T000000");
    constexpr std::int64_t kCadenceSeconds = 600;  // 1 frame / 10 min

    std::ofstream truth_csv(fs::path(out_dir) / "ground_truth.csv", std::ios::binary);
    if (!truth_csv) throw IoError("cannot write ground_truth.csv in " + out_dir);
    truth_csv.precision(12);
    truth_csv << "identifier,row\n";

    std::vector<std::string> stems;
    stems.reserve(water_rows.size());
    for (std::size_t i = 0; i < water_rows.size(); ++i) {
        SceneSpec spec = base;
        spec.water_row = water_rows[i];
        spec.seed = seeds[i];
        if (!brightness_scales.empty()) spec.brightness_scale = brightness_scales[i];
        const RenderResult frame = render(spec);
        const std::string ts =
            timestamp_for_epoch(start_epoch + static_cast<std::int64_t>(i) * kCadenceSeconds);
        const std::string stem = "frame_" + ts;
        write_color((fs::path(out_dir) / (stem + "." + format)).string(), frame.image);
        truth_csv << ts << "," << frame.true_row_at_center << "\n";
        stems.push_back(stem);
    }
    if (!truth_csv) throw IoError("write failed: ground_truth.csv");
    return stems;
}

}  // namespace creekline
