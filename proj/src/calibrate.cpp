#include "creekline/image_ops.hpp"
#include "creekline/pipeline.hpp"

#include <algorithm>
#include <string>

namespace creekline {

std::pair<Template, CalibrationModel> calibrate_reference(const ColorImage& reference,
                                                          const std::string& stem,
                                                          const PipelineConfig& cfg,
                                                          double annotated_row, double h_r) {
    cfg.validate();
    if (!(h_r > 0.0)) throw CalibrationError("reference water height must be > 0");
    const Rect cut = cfg.template_cut;
    if (cut.width < 1 || cut.height < 1) {
        throw CalibrationError("config template_cut is empty; set the patch rectangle first");
    }
    require_inside(cut, cfg.roi.width, cfg.roi.height, "template_cut");

    const double row_in_roi = annotated_row - static_cast<double>(cfg.roi.y);
    const Index row_offset = static_cast<Index>(std::lround(row_in_roi)) - cut.y;
    if (row_offset < 0 || row_offset >= cut.height) {
        throw BoundsError("annotated row " + std::to_string(annotated_row) +
                          " falls outside the template_cut rectangle");
    }

    const ColorImage roi = crop(reference, cfg.roi);
    Rng rng(cfg.screening.rng_seed ^ fnv1a(stem));
    const auto [screening, screened] = screen_brightness(roi, cfg.screening, rng);
    if (screening.verdict == ScreeningVerdict::rejected_dark) {
        throw CalibrationError("reference image rejected by the darkness screen");
    }
    const GrayImage smoothed = box_filter(to_gray(screened), 2);
    const EdgeMap edges = make_edge_map(smoothed, cfg.edge, stem);

    Template tmpl;
    tmpl.patch = EdgeMap{crop(edges.values, cut), edges.source};
    tmpl.origin_in_reference = cut;
    tmpl.waterline_row_offset = row_offset;

    // Reference slope: one least-squares line over every water coordinate in
    // the band the pipeline will use at detection time.
    Rect band;
    band.x = cut.x;
    band.width = cut.width;
    band.y = std::clamp<Index>(cut.y + cfg.detect.top_offset_px, 0, edges.height() - 1);
    band.height = cfg.detect.height_px == 0 ? cut.height : cfg.detect.height_px;
    band.height = std::min(band.height, edges.height() - band.y);
    const EdgeMap band_edges{crop(edges.values, band), edges.source};
    const WaterCoordinates all_coords = detect_water_coordinates(band_edges);

    // The annotated row anchors the fit: coordinates far from it are noise
    // responses elsewhere in the band, not the water line.
    constexpr double kInlierTolerance = 12.0;
    const double annotated_in_band = row_in_roi - static_cast<double>(band.y);
    WaterCoordinates coords;
    for (const auto& [x, y] : all_coords.columns) {
        if (std::abs(static_cast<double>(y) - annotated_in_band) <= kInlierTolerance) {
            coords.columns.emplace_back(x, y);
        }
    }
    const std::size_t min_support =
        std::max<std::size_t>(10, static_cast<std::size_t>(band.width) / 4);
    if (coords.size() < min_support) {
        throw CalibrationError("degenerate reference fit: only " +
                               std::to_string(coords.size()) +
                               " water coordinates near the annotated row");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : coords.columns) {
        sx += static_cast<double>(x);
        sy += static_cast<double>(y);
    }
    const double mx = sx / static_cast<double>(coords.size());
    const double my = sy / static_cast<double>(coords.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : coords.columns) {
        const double dx = static_cast<double>(x) - mx;
        sxx += dx * dx;
        sxy += dx * (static_cast<double>(y) - my);
    }
    if (sxx == 0.0) throw CalibrationError("degenerate reference fit: no column spread");
    tmpl.reference_slope = sxy / sxx;

    CalibrationModel cal;
    cal.h_r = h_r;
    cal.reference_row = annotated_row;
    cal.cm_per_pixel = cfg.calibration.cm_per_pixel;
    cal.validate();
    return {tmpl, cal};
}

}  // namespace creekline
