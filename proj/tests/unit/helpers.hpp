#pragma once

#include "lresp/divergence.hpp"
#include "lresp/frames.hpp"
#include "lresp/orbit.hpp"
#include "lresp/response.hpp"
#include "lresp/systems.hpp"

#include <string>

namespace lresp::testing {

struct Case {
  std::string name;
  nlohmann::json params;
};

// One parameter set per built-in, all with nonlinear terms switched on.
inline std::vector<Case> nonlinear_builtins() {
  return {{"sawtooth", {{"a", 0.1}, {"pert", "sine"}}},
          {"catmap", {{"kappa", 0.05}, {"pert", "mixed"}}},
          {"solenoid", {{"a", 0.05}}},
          {"coupledcat", {{"k", 2}, {"coupling", 0.05}, {"kappa", 0.03}}}};
}

struct Frames {
  OrbitData orbit;
  TangentFrame tangent;
  AdjointFrame adjoint;
  StepWindow window;
};

inline Frames make_frames(const SystemDef& sys, std::size_t steps, std::uint64_t seed, std::uint64_t frame_seed = 7) {
  Frames f;
  f.orbit = generate_orbit(sys, {.spinup = 1000, .steps = steps, .seed = seed, .gamma = 0.0, .x_init = {}});
  f.tangent = push_unstable(sys, f.orbit, {.seed = frame_seed, .warmup = {}});
  f.adjoint = pull_adjoint(sys, f.orbit, f.tangent, {.seed = frame_seed + 1, .warmup = {}});
  f.window = converged_window(f.tangent, f.adjoint);
  return f;
}

}  // namespace lresp::testing
