#include "creekline/config.hpp"
#include "creekline/image_io.hpp"
#include "creekline/metrics.hpp"
#include "creekline/pipeline.hpp"
#include "creekline/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using namespace creekline;

int exit_code_for(ReadingStatus status) {
    switch (status) {
        case ReadingStatus::ok: return 0;
        case ReadingStatus::rejected_dark: return 2;
        case ReadingStatus::no_match: return 3;
        case ReadingStatus::detector_failure: return 4;
        case ReadingStatus::non_convergent: return 5;
        case ReadingStatus::io_error: return 1;
    }
    return 1;
}

PipelineConfig load_config_with_overrides(const std::string& path, const std::string& edge) {
    PipelineConfig cfg = load_config(path);
    if (!edge.empty()) cfg.edge.kind = edge_kind_from_string(edge);
    cfg.validate();
    return cfg;
}

int cmd_config_init(const std::string& out) {
    save_config(out, PipelineConfig{});
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_calibrate(const std::string& reference_path, double row, double h_r,
                  const std::string& config_path, const std::string& out_template,
                  const std::string& edge) {
    const PipelineConfig cfg = load_config_with_overrides(config_path, edge);
    const ColorImage reference = read_color(reference_path);
    const std::string stem = std::filesystem::path(reference_path).stem().string();
    const auto [tmpl, cal] = calibrate_reference(reference, stem, cfg, row, h_r);
    save_template(out_template, tmpl, cal);
    std::cout << "wrote " << out_template << " (waterline offset " << tmpl.waterline_row_offset
              << ", reference slope " << tmpl.reference_slope << ")\n";
    return 0;
}

int cmd_detect(const std::string& image_path, const std::string& config_path, bool debug,
               const std::string& edge) {
    const PipelineConfig cfg = load_config_with_overrides(config_path, edge);
    if (cfg.template_path.empty()) throw ConfigError("config template_path is empty");
    const auto [tmpl, cal] = load_template(cfg.template_path);
    const ColorImage img = read_color(image_path);
    const std::string stem = std::filesystem::path(image_path).stem().string();
    std::string debug_json;
    const ReadingRecord record =
        run_pipeline(img, stem, cfg, tmpl, cal, debug ? &debug_json : nullptr);
    if (debug && !debug_json.empty()) std::cerr << debug_json << "\n";
    write_readings_csv(std::cout, {record});
    return exit_code_for(record.status);
}

int cmd_batch(const std::string& dir, const std::string& config_path, const std::string& out,
              int jobs, bool debug, const std::string& edge) {
    const PipelineConfig cfg = load_config_with_overrides(config_path, edge);
    if (cfg.template_path.empty()) throw ConfigError("config template_path is empty");
    const auto [tmpl, cal] = load_template(cfg.template_path);
    const std::vector<std::string> inputs = list_batch_inputs(dir);
    if (inputs.empty()) throw IoError("no images found in " + dir);

    BatchOptions opts;
    opts.jobs = jobs;
    opts.debug = debug;
    std::ofstream debug_file;
    if (debug) {
        debug_file.open(out + ".debug.jsonl", std::ios::binary);
        if (!debug_file) throw IoError("cannot open debug sidecar for " + out);
    }
    const auto records = run_batch(inputs, cfg, tmpl, cal, opts, debug ? &debug_file : nullptr);
    write_readings_csv(out, records);

    std::size_t ok = 0;
    for (const auto& r : records) {
        if (r.status == ReadingStatus::ok) ++ok;
    }
    std::cout << records.size() << " frames, " << ok << " readings -> " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& readings_path, const std::string& truth_path,
             const std::string& out_prefix) {
    const auto records = read_readings_csv(readings_path);
    const GroundTruthSet gt = std::filesystem::is_directory(truth_path)
                                  ? load_ground_truth_xml_dir(truth_path)
                                  : load_ground_truth_csv(truth_path);
    const EvalReport report = evaluate(records, gt);
    write_eval_report(out_prefix, report);
    std::cout << "n=" << report.n << " mae=" << report.mae << "px mape=" << report.mape
              << "% r2=" << report.r2 << " response_rate=" << report.response_rate << "\n";
    return 0;
}

int cmd_synth(const std::string& scene_path, const std::string& out_dir) {
    std::ifstream in(scene_path);
    if (!in) throw ConfigError("cannot open scene config: " + scene_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scene config is not valid JSON: ") + e.what());
    }

    SceneSpec scene;
    if (j.contains("scene")) {
        const auto& s = j["scene"];
        scene.width = s.value("width", scene.width);
        scene.height = s.value("height", scene.height);
        if (s.contains("pier")) {
            const auto& p = s["pier"];
            scene.pier_rect = Rect{p.value("x", scene.pier_rect.x), p.value("y", scene.pier_rect.y),
                                   p.value("width", scene.pier_rect.width),
                                   p.value("height", scene.pier_rect.height)};
        }
        scene.water_slope = s.value("water_slope", scene.water_slope);
        scene.pier_intensity = s.value("pier_intensity", scene.pier_intensity);
        scene.water_intensity = s.value("water_intensity", scene.water_intensity);
        scene.background_intensity = s.value("background_intensity", scene.background_intensity);
        scene.noise_sigma = s.value("noise_sigma", scene.noise_sigma);
        scene.debris_count = s.value("debris_count", scene.debris_count);
        scene.brightness_scale = s.value("brightness_scale", scene.brightness_scale);
        scene.pier_texture_amplitude =
            s.value("texture_amplitude", scene.pier_texture_amplitude);
        scene.pier_texture_block_px = s.value("texture_block_px", scene.pier_texture_block_px);
        scene.pier_texture_seed = s.value("texture_seed", scene.pier_texture_seed);
    }
    const int count = j.value("count", 100);
    if (count < 0) throw ConfigError("count must be >= 0");
    const double row_start = j.value("row_start", 60.0);
    const double row_end = j.value("row_end", 120.0);
    const double sin_amplitude = j.value("sin_amplitude", 0.0);
    const double sin_period = j.value("sin_period", 50.0);
    const int dark_every = j.value("dark_every", 0);
    const double dark_scale = j.value("dark_scale", 0.1);
    const std::uint64_t seed = j.value("seed", 1ull);
    const std::string format = j.value("format", std::string("png"));

    std::vector<double> rows, scales;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) {
        const double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
        double row = row_start + (row_end - row_start) * t;
        if (sin_amplitude != 0.0 && sin_period > 0.0) {
            row += sin_amplitude * std::sin(2.0 * std::numbers::pi * i / sin_period);
        }
        rows.push_back(row);
        seeds.push_back(seed + static_cast<std::uint64_t>(i));
        scales.push_back(dark_every > 0 && i % dark_every == 0 ? dark_scale
                                                               : scene.brightness_scale);
    }
    const auto stems = render_batch(scene, rows, seeds, out_dir, format, scales);
    std::cout << "wrote " << stems.size() << " frames + ground_truth.csv to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stream water-level gauging from fixed-camera images"};
    app.require_subcommand(1);

    std::string config_path, edge_override, out_path, image_path, dir_path;
    std::string readings_path, truth_path, scene_path, template_out, reference_path;
    double annotated_row = 0.0, h_r = 0.0;
    int jobs = 1;
    bool debug = false;

    auto* config = app.add_subcommand("config", "Configuration utilities");
    config->require_subcommand(1);
    auto* config_init = config->add_subcommand("init", "Write a config with full defaults");
    config_init->add_option("--out", out_path, "Output path")->default_val("creekline.json");

    auto* calibrate = app.add_subcommand("calibrate", "Build the template from a reference image");
    calibrate->add_option("--reference", reference_path, "Reference image")->required();
    calibrate->add_option("--row", annotated_row, "Annotated water-line row (full-image)")
        ->required();
    calibrate->add_option("--height-cm", h_r, "Physical water height in the reference (cm)")
        ->required();
    calibrate->add_option("--config", config_path, "Pipeline config")->required();
    calibrate->add_option("--out", template_out, "Output template .meta path")->required();
    calibrate->add_option("--edge", edge_override, "Edge provider: sobel|canny|external");

    auto* detect = app.add_subcommand("detect", "Read the water level from one image");
    detect->add_option("--image", image_path, "Input image")->required();
    detect->add_option("--config", config_path, "Pipeline config")->required();
    detect->add_flag("--debug", debug, "Print a JSON diagnostic record to stderr");
    detect->add_option("--edge", edge_override, "Edge provider: sobel|canny|external");

    auto* batch = app.add_subcommand("batch", "Process a directory of timestamped images");
    batch->add_option("--dir", dir_path, "Image directory")->required();
    batch->add_option("--config", config_path, "Pipeline config")->required();
    batch->add_option("--out", out_path, "Output readings CSV")->required();
    batch->add_option("--jobs", jobs, "Worker threads")->default_val(1);
    batch->add_flag("--debug", debug, "Write per-image diagnostics next to the CSV");
    batch->add_option("--edge", edge_override, "Edge provider: sobel|canny|external");

    auto* eval = app.add_subcommand("eval", "Score readings against ground truth");
    eval->add_option("--readings", readings_path, "Readings CSV from batch/detect")->required();
    eval->add_option("--truth", truth_path, "Ground-truth CSV file or XML directory")->required();
    eval->add_option("--out", out_path, "Report file prefix")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
    synth->add_option("--scene", scene_path, "Scene config JSON")->required();
    synth->add_option("--out", dir_path, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (config_init->parsed()) return cmd_config_init(out_path);
        if (calibrate->parsed()) {
            return cmd_calibrate(reference_path, annotated_row, h_r, config_path, template_out,
                                 edge_override);
        }
        if (detect->parsed()) return cmd_detect(image_path, config_path, debug, edge_override);
        if (batch->parsed()) {
            return cmd_batch(dir_path, config_path, out_path, jobs, debug, edge_override);
        }
        if (eval->parsed()) return cmd_eval(readings_path, truth_path, out_path);
        if (synth->parsed()) return cmd_synth(scene_path, dir_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
