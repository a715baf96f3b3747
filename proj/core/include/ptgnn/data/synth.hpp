#pragma once

#include <cstddef>
#include <cstdint>

#include "ptgnn/data/event.hpp"

namespace ptgnn::data {

/// Bumped whenever the generator's output for a given seed changes.
inline constexpr int kSynthRecipeVersion = 1;

/// Deterministic table in the canonical schema. pT follows a falling
/// spectrum on [2, 300] GeV/c (flat in 1/pT); per-station angles follow a
/// track whose azimuthal deflection and bending angle scale with 1/pT,
/// plus Gaussian measurement noise. See docs/synthetic_data.md.
EventTable synth_generate(std::size_t n, std::uint64_t seed);

}  // namespace ptgnn::data
