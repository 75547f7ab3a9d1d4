#pragma once

#include "creekline/pipeline.hpp"

#include <string>

namespace creekline {

/// JSON round-trip for the pipeline configuration; load(dump(cfg)) == cfg.
std::string dump_config(const PipelineConfig& cfg);
PipelineConfig parse_config(const std::string& json_text);

PipelineConfig load_config(const std::string& path);
void save_config(const std::string& path, const PipelineConfig& cfg);

}  // namespace creekline
