#pragma once

#include "lresp/series.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace lresp {

// A perturbation vector field X = d/dgamma of the post-map at gamma = 0,
// together with its covariant derivative Y -> nabla_Y X.
struct Perturbation {
  std::string name;
  std::function<void(CRef x, Out X)> field;
  std::function<void(CRef x, CRef Y, Out dX)> derivative;

  Vec at(CRef x) const;
  Vec grad(CRef x, CRef Y) const;

  static Perturbation zero(int dim);
};

// A parameterized map on a flat chart. The map at parameter gamma is the
// composition (id + gamma X) o f; all derivative products are for f at
// gamma = 0. Vectors and covectors are plain coordinate arrays.
struct SystemDef {
  std::string name;
  int dim = 0;
  int udim = 0;

  // (x, gamma) -> point, reduced onto the chart.
  std::function<void(CRef x, double gamma, Out y)> map;
  // f_* v at x.
  std::function<void(CRef x, CRef v, Out y)> jvp;
  // f^* w at x, for a covector w at f(x).
  std::function<void(CRef x, CRef w, Out y)> vjp;
  // (nabla_a f_*) b at f(x); symmetric in a and b.
  std::function<void(CRef x, CRef a, CRef b, Out y)> hvp;

  Perturbation perturbation;

  std::function<double(CRef x)> obs;
  std::function<void(CRef x, Out dphi)> dobs;

  // Coordinates reduced mod 1 (flat torus factors).
  std::vector<bool> periodic;
  // Draws an initial point in the basin.
  std::function<void(std::mt19937_64& rng, Out x)> sample_initial;
  // Optional, called after every orbit step with the orbit's generator. Maps
  // whose floating-point orbits lose one bit per step (the doubling map)
  // refill the lost low-order bit here so that orbits stay generic.
  std::function<void(Out x, std::mt19937_64& rng)> refresh;

  nlohmann::json params = nlohmann::json::object();
  bool fd_hessian = false;

  Vec step(CRef x, double gamma = 0.0) const;
  Vec push(CRef x, CRef v) const;
  Vec pull(CRef x, CRef w) const;
  Vec hessian(CRef x, CRef a, CRef b) const;
  Vec grad_obs(CRef x) const;
  Mat jacobian(CRef x) const;
};

// Reduces periodic coordinates into [0, 1).
void wrap_chart(Out x, const std::vector<bool>& periodic);

// a - b with periodic coordinates taken to the nearest image.
Vec chart_delta(CRef a, CRef b, const std::vector<bool>& periodic);

// Replaces hvp by central differences of jvp; step cbrt(eps) * max(1, |x|).
SystemDef with_fd_hessian(SystemDef sys);

// Builds a registered system. Unknown keys, unknown names and parameters
// outside the hyperbolic range throw ConfigError.
SystemDef make_builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

// Registry description: names, parameter keys, defaults and admissible ranges.
nlohmann::json builtin_manifest();

struct ValidationReport {
  double jvp_fd = 0.0;        // max relative |jvp - FD of map|
  double duality = 0.0;       // max |<w, jvp v> - <vjp w, v>|
  double hessian_symmetry = 0.0;
  double dpert_fd = 0.0;      // max relative |dpert - FD of pert|
  double pert_fd = 0.0;       // max relative |X(f(x)) - FD of map in gamma|
  double fd_step = 0.0;
  int probes = 0;
};

ValidationReport validate_system(const SystemDef& sys, int n_probe, std::uint64_t seed, double h = 1e-5);

}  // namespace lresp
