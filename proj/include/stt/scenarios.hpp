#pragma once

#include <string>

#include "stt/config.hpp"

namespace stt {

/// Executes the configured scenario, writing its CSV/JSON products plus a
/// manifest.json (file list + summary metrics) under config.output_dir.
/// Returns the summary as serialized JSON. Engine errors propagate as
/// exceptions; the CLI turns them into machine-readable error JSON.
std::string run_scenario(const RunConfig& config);

}  // namespace stt
