#include "cldg/view_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cldg {

Strategy strategy_from_string(const std::string& name) {
  if (name == "sequential") return Strategy::Sequential;
  if (name == "high") return Strategy::HighOverlap;
  if (name == "low") return Strategy::LowOverlap;
  if (name == "random") return Strategy::Random;
  throw UsageError("unknown strategy '" + name + "' (expected sequential|high|low|random)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Sequential: return "sequential";
    case Strategy::HighOverlap: return "high";
    case Strategy::LowOverlap: return "low";
    case Strategy::Random: return "random";
  }
  return "?";
}

namespace {

struct Bounds {
  double lo, hi;  // feasible interval for the first center
};

// Feasible interval for the first (lowest) center of each strategy. The
// overlap strategies space v centers arithmetically from the first draw, so
// the first center must leave room for the remaining v-1 steps.
Bounds first_center_bounds(const TemporalGraph& g, const SamplerConfig& cfg) {
  const double dt = g.timespan();
  const double s = static_cast<double>(cfg.s);
  const double v = static_cast<double>(cfg.v);
  const double lo = g.min_ts() + dt / (2.0 * s);
  switch (cfg.strategy) {
    case Strategy::Sequential:
    case Strategy::Random:
      return {lo, g.max_ts() - dt / (2.0 * s)};
    case Strategy::HighOverlap:
      return {lo, g.max_ts() - (2.0 + v) * dt / (4.0 * s)};
    case Strategy::LowOverlap:
      return {lo, g.max_ts() - (2.0 + 3.0 * v) * dt / (4.0 * s)};
  }
  throw UsageError("unknown strategy");
}

}  // namespace

void validate_sampler(const SamplerConfig& cfg, const TemporalGraph& g) {
  if (cfg.s < 1) throw UsageError("sampler: s must be >= 1");
  if (cfg.v < 1) throw UsageError("sampler: v must be >= 1");
  if (cfg.v > cfg.s && cfg.strategy == Strategy::Sequential)
    throw UsageError("sampler: sequential strategy needs v <= s (v=" + std::to_string(cfg.v) +
                     ", s=" + std::to_string(cfg.s) + ")");
  if (g.timespan() <= 0.0) throw DataError("sampler: graph timespan is zero");
  Bounds b = first_center_bounds(g, cfg);
  if (b.hi < b.lo) {
    std::ostringstream oss;
    oss << "sampler: infeasible config (strategy=" << to_string(cfg.strategy) << ", s=" << cfg.s
        << ", v=" << cfg.v << "): first-center interval [" << b.lo << ", " << b.hi
        << "] is empty";
    throw UsageError(oss.str());
  }
}

std::vector<double> sequential_grid(const TemporalGraph& g, Index s) {
  const double half = g.timespan() / (2.0 * static_cast<double>(s));
  std::vector<double> centers(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k)
    centers[static_cast<std::size_t>(k)] =
        g.min_ts() + (2.0 * static_cast<double>(k) + 1.0) * half;
  return centers;
}

std::vector<double> sample_centers(const TemporalGraph& g, const SamplerConfig& cfg, Rng& rng) {
  validate_sampler(cfg, g);
  const double dt = g.timespan();
  const double s = static_cast<double>(cfg.s);
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(cfg.v));
  switch (cfg.strategy) {
    case Strategy::Sequential: {
      auto grid = sequential_grid(g, cfg.s);
      auto picks = rng.sample_without_replacement(cfg.s, cfg.v);  // ascending
      for (Index k : picks) centers.push_back(grid[static_cast<std::size_t>(k)]);
      break;
    }
    case Strategy::HighOverlap:
    case Strategy::LowOverlap: {
      Bounds b = first_center_bounds(g, cfg);
      const double gap =
          cfg.strategy == Strategy::HighOverlap ? dt / (4.0 * s) : 3.0 * dt / (4.0 * s);
      const double first = rng.uniform(b.lo, b.hi);
      for (Index i = 0; i < cfg.v; ++i)
        centers.push_back(first + static_cast<double>(i) * gap);
      break;
    }
    case Strategy::Random: {
      Bounds b = first_center_bounds(g, cfg);
      for (Index i = 0; i < cfg.v; ++i) centers.push_back(rng.uniform(b.lo, b.hi));
      std::sort(centers.begin(), centers.end());
      break;
    }
  }
  return centers;
}

ViewSet sample_views(const TemporalGraph& g, const SamplerConfig& cfg, Rng& rng) {
  ViewSet out;
  out.centers = sample_centers(g, cfg, rng);
  out.views.reserve(out.centers.size());
  const double half = g.timespan() / (2.0 * static_cast<double>(cfg.s));
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * g.timespan();
  for (double c : out.centers) {
    // Close the window when its upper edge reaches max(T); every other
    // sampled window is half-open so adjacent sequential windows partition.
    bool touches_max = c + half >= g.max_ts() - slack;
    out.views.push_back(
        induce_view(g, c, cfg.s, touches_max ? WindowBounds::Closed : WindowBounds::HalfOpen));
  }
  return out;
}

}  // namespace cldg
