#pragma once

#include <string>
#include <vector>

#include "cldg/rng.hpp"
#include "cldg/temporal_graph.hpp"

namespace cldg {

enum class Strategy { Sequential, HighOverlap, LowOverlap, Random };

Strategy strategy_from_string(const std::string& name);  // UsageError on unknown
std::string to_string(Strategy s);

struct SamplerConfig {
  Strategy strategy = Strategy::Sequential;
  Index s = 4;  // number of timespans the range is divided into
  Index v = 2;  // number of views drawn per epoch
};

struct ViewSet {
  std::vector<double> centers;   // ascending
  std::vector<GraphView> views;  // aligned with centers
};

// Feasibility check for (strategy, s, v) on g; throws UsageError with the
// violated bound spelled out.
void validate_sampler(const SamplerConfig& cfg, const TemporalGraph& g);

// Draws one epoch's views. All windows are half-open [lo, hi) except the one
// that touches max(T) (the last sequential slot, or any window whose upper
// edge reaches the global maximum), which closes so consecutive sequential
// windows partition the edge multiset.
ViewSet sample_views(const TemporalGraph& g, const SamplerConfig& cfg, Rng& rng);

// Center grids/draws without view induction (used by tests and `sample-views`).
std::vector<double> sequential_grid(const TemporalGraph& g, Index s);
std::vector<double> sample_centers(const TemporalGraph& g, const SamplerConfig& cfg, Rng& rng);

}  // namespace cldg
