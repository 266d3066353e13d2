#pragma once

#include <string>

#include "ecodse/design_space.hpp"
#include "ecodse/objectives.hpp"
#include "ecodse/search.hpp"

namespace ecodse {

/// Front CSV: config_id (lexicographic rank), one column per knob, then
/// area,latency,lut,ff,dsp,bram. A leading '#' line echoes the run config.
void write_front_csv(const std::string& path, const DesignSpace& space, const ParetoFront& front,
                     const std::string& config_echo);

/// Reads a front CSV back. Knob columns are optional; only area and latency
/// are required for scoring.
ParetoFront read_front_csv(const std::string& path);

/// JSON-lines run log, one record per evaluation:
/// {"iter":..,"config":[..],"objectives":{..},"elapsed_ms":..}.
void write_run_log(const std::string& path, const SearchResult& result,
                   const std::string& config_echo);

/// JSON-lines transcript of LLM exchanges.
void write_transcript(const std::string& path, const SearchResult& result,
                      const std::string& config_echo);

}  // namespace ecodse
