#pragma once

#include "lresp/series.hpp"
#include "lresp/stats.hpp"
#include "lresp/systems.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace lresp {

// Stored trajectory x_0..x_N (columns of `points`) after `spinup` discarded steps.
struct OrbitData {
  Mat points;
  std::size_t spinup = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::string system;

  std::size_t steps() const { return points.cols() > 0 ? static_cast<std::size_t>(points.cols() - 1) : 0; }
  int dim() const { return static_cast<int>(points.rows()); }
  Mat::ConstColXpr operator[](std::size_t n) const { return points.col(static_cast<Eigen::Index>(n)); }
};

struct OrbitOptions {
  std::size_t spinup = 1000;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  std::optional<Vec> x_init;  // overrides the seeded initial point
};

// Iterates map(., gamma). Throws NumericalError with the step index when a
// coordinate becomes non-finite.
OrbitData generate_orbit(const SystemDef& sys, const OrbitOptions& opt);

// Mean of g over x_0..x_N with a batch-means standard error.
Estimate empirical_average(const OrbitData& orbit, const std::function<double(CRef)>& g);

// Little-endian layout: "LROB", u32 version, u32 M, u64 N, u64 spinup,
// u64 seed, f64 gamma, then (N+1) * M f64 row-major points.
void write_orbit(std::ostream& os, const OrbitData& orbit);
OrbitData read_orbit(std::istream& is);

}  // namespace lresp
