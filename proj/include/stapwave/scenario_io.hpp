#pragma once

#include <string>

#include "stapwave/optim.hpp"
#include "stapwave/scenario.hpp"

namespace stapwave::io {

struct LoadedScenario {
  RadarScenario scenario;
  optim::AlgoConfig algo;
  std::string hash;       // over the canonicalized document
  std::string canonical;  // canonical JSON echo (defaults applied)
};

/// Parse and validate a scenario document. Unknown keys are rejected with the
/// offending path; physically invalid values raise ModelError with context.
/// desk_scale swaps in M=3, L=8, N=4 for fast runs.
LoadedScenario parse_scenario(const std::string& path, bool desk_scale = false);

LoadedScenario parse_scenario_text(const std::string& text, bool desk_scale = false);

/// FNV-1a 64-bit over a canonicalized (key-sorted) JSON dump, hex-encoded.
std::string content_hash(const std::string& canonical_text);

}  // namespace stapwave::io
