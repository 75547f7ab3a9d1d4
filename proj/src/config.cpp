#include "creekline/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace creekline {

namespace {

using nlohmann::json;

json rect_to_json(const Rect& r) {
    return json{{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

Rect rect_from_json(const json& j, const Rect& fallback) {
    Rect r = fallback;
    r.x = j.value("x", r.x);
    r.y = j.value("y", r.y);
    r.width = j.value("width", r.width);
    r.height = j.value("height", r.height);
    return r;
}

}  // namespace

std::string dump_config(const PipelineConfig& cfg) {
    json j;
    j["roi"] = rect_to_json(cfg.roi);
    j["screening"] = {{"sample_count", cfg.screening.sample_count},
                      {"dark_threshold", cfg.screening.dark_threshold},
                      {"boost_threshold", cfg.screening.boost_threshold},
                      {"boost_factor", cfg.screening.boost_factor},
                      {"rng_seed", cfg.screening.rng_seed}};
    j["edge"] = {{"kind", to_string(cfg.edge.kind)},
                 {"canny_low", cfg.edge.canny_low},
                 {"canny_high", cfg.edge.canny_high},
                 {"gaussian_sigma", cfg.edge.gaussian_sigma},
                 {"noise_floor", cfg.edge.noise_floor},
                 {"external_path_template", cfg.edge.external_path_template}};
    j["match_threshold"] = cfg.match_threshold;
    j["ssd"] = {{"half_height", cfg.ssd.half_height},
                {"width", cfg.ssd.width},
                {"shear_slope", cfg.ssd.shear_slope}};
    j["ensemble_tol_px"] = cfg.ensemble_tol_px;
    j["calibration"] = {{"h_r_cm", cfg.calibration.h_r},
                        {"reference_row", cfg.calibration.reference_row},
                        {"cm_per_pixel", cfg.calibration.cm_per_pixel}};
    j["template_path"] = cfg.template_path;
    j["template_cut"] = rect_to_json(cfg.template_cut);
    j["detect"] = {{"band_top_offset_px", cfg.detect.top_offset_px},
                   {"band_height_px", cfg.detect.height_px},
                   {"regression_center_offset_px", cfg.detect.regression_center_offset_px},
                   {"ssd_on_edge_map", cfg.detect.ssd_on_edge_map}};
    return j.dump(2) + "\n";
}

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    try {
        if (j.contains("roi")) cfg.roi = rect_from_json(j["roi"], cfg.roi);
        if (j.contains("screening")) {
            const json& s = j["screening"];
            cfg.screening.sample_count = s.value("sample_count", cfg.screening.sample_count);
            cfg.screening.dark_threshold = s.value("dark_threshold", cfg.screening.dark_threshold);
            cfg.screening.boost_threshold =
                s.value("boost_threshold", cfg.screening.boost_threshold);
            cfg.screening.boost_factor = s.value("boost_factor", cfg.screening.boost_factor);
            cfg.screening.rng_seed = s.value("rng_seed", cfg.screening.rng_seed);
        }
        if (j.contains("edge")) {
            const json& e = j["edge"];
            cfg.edge.kind = edge_kind_from_string(e.value("kind", to_string(cfg.edge.kind)));
            cfg.edge.canny_low = e.value("canny_low", cfg.edge.canny_low);
            cfg.edge.canny_high = e.value("canny_high", cfg.edge.canny_high);
            cfg.edge.gaussian_sigma = e.value("gaussian_sigma", cfg.edge.gaussian_sigma);
            cfg.edge.noise_floor = e.value("noise_floor", cfg.edge.noise_floor);
            cfg.edge.external_path_template =
                e.value("external_path_template", cfg.edge.external_path_template);
        }
        cfg.match_threshold = j.value("match_threshold", cfg.match_threshold);
        if (j.contains("ssd")) {
            const json& s = j["ssd"];
            cfg.ssd.half_height = s.value("half_height", cfg.ssd.half_height);
            cfg.ssd.width = s.value("width", cfg.ssd.width);
            cfg.ssd.shear_slope = s.value("shear_slope", cfg.ssd.shear_slope);
        }
        cfg.ensemble_tol_px = j.value("ensemble_tol_px", cfg.ensemble_tol_px);
        if (j.contains("calibration")) {
            const json& c = j["calibration"];
            cfg.calibration.h_r = c.value("h_r_cm", cfg.calibration.h_r);
            cfg.calibration.reference_row = c.value("reference_row", cfg.calibration.reference_row);
            cfg.calibration.cm_per_pixel = c.value("cm_per_pixel", cfg.calibration.cm_per_pixel);
        }
        cfg.template_path = j.value("template_path", cfg.template_path);
        if (j.contains("template_cut")) {
            cfg.template_cut = rect_from_json(j["template_cut"], cfg.template_cut);
        }
        if (j.contains("detect")) {
            const json& d = j["detect"];
            cfg.detect.top_offset_px = d.value("band_top_offset_px", cfg.detect.top_offset_px);
            cfg.detect.height_px = d.value("band_height_px", cfg.detect.height_px);
            cfg.detect.regression_center_offset_px =
                d.value("regression_center_offset_px", cfg.detect.regression_center_offset_px);
            cfg.detect.ssd_on_edge_map = d.value("ssd_on_edge_map", cfg.detect.ssd_on_edge_map);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void save_config(const std::string& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << dump_config(cfg);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace creekline
