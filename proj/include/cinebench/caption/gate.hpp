#pragma once

#include "cinebench/core/types.hpp"

namespace cinebench::caption {

/// Caption-video pairs scoring below videoclip_min are discarded; the
/// threshold itself passes.
inline bool alignment_gate(double score, const MetricConfig& cfg) { return score >= cfg.videoclip_min; }

}  // namespace cinebench::caption
