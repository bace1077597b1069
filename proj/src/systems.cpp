#include "lresp/systems.hpp"

#include "lresp/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace lresp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ----------------------------------------------------------------------------
// Parameter schema shared by make_builtin and builtin_manifest.

struct ParamSpec {
  std::string key;
  std::string type;  // "number", "integer", "string"
  nlohmann::json fallback;
  std::optional<double> lo;  // open bound for numbers, closed for integers
  std::optional<double> hi;
  std::vector<std::string> choices;
  std::string doc;
};

struct BuiltinSpec {
  std::string name;
  std::string dim;
  std::string udim;
  std::string doc;
  std::vector<ParamSpec> params;
};

const std::vector<BuiltinSpec>& registry() {
  static const double saw_bound = 1.0 / kTwoPi;
  static const std::vector<BuiltinSpec> specs = {
      {"sawtooth", "1", "1",
       "f(x) = 2x + a sin(2 pi x) mod 1 on the circle; expanding for |a| < 1/(2 pi).",
       {{"a", "number", 0.1, -saw_bound, saw_bound, {}, "nonlinearity amplitude"},
        {"pert", "string", "shift", {}, {}, {"shift", "sine", "zero"},
         "X: shift -> 1, sine -> sin(2 pi x), zero -> 0"},
        {"obs", "string", "cos", {}, {}, {"cos", "sin"}, "Phi: cos(2 pi x) or sin(2 pi x)"}}},
      {"catmap", "2", "1",
       "f(z) = A z + kappa sin(2 pi z1)/(2 pi) (1, 1) mod 1 with A = [[2,1],[1,1]]; area preserving.",
       {{"kappa", "number", 0.0, -0.25, 0.25, {}, "nonlinear shear strength (0: affine cat map)"},
        {"pert", "string", "sine", {}, {}, {"sine", "mixed", "dilate", "shift", "zero"},
         "X: sine -> (sin 2 pi z2, 0); mixed -> (sin 2 pi z2, 0.5 cos 2 pi z1); "
         "dilate -> (sin 2 pi z1, 0.5 sin 2 pi z2); shift -> (1, 0); zero"},
        {"obs", "string", "cos", {}, {}, {"cos", "mixed"},
         "Phi: cos -> cos(2 pi z1); mixed -> cos(2 pi z1) + 0.5 sin(2 pi (z1 + z2))"}}},
      {"solenoid", "3", "1",
       "(theta, y, z) -> (2 theta + a sin(2 pi theta) mod 1, lam_y y + c cos(2 pi theta), "
       "lam_z z + c sin(2 pi theta)); theta periodic, (y, z) in the disc of radius c/(1 - max lam).",
       {{"a", "number", 0.05, -saw_bound, saw_bound, {}, "expansion nonlinearity"},
        {"lam_y", "number", 0.3, 0.0, 0.5, {}, "contraction rate in y"},
        {"lam_z", "number", 0.4, 0.0, 0.5, {}, "contraction rate in z"},
        {"c", "number", 1.0, 0.0, 10.0, {}, "winding radius"},
        {"pert", "string", "mixed", {}, {}, {"mixed", "shift", "zero"},
         "X: mixed -> (1, 0.5, 0.5 cos 2 pi theta); shift -> (1, 0, 0); zero"},
        {"obs", "string", "mixed", {}, {}, {"mixed", "sin"},
         "Phi: mixed -> sin(2 pi theta) + y + 0.5 z^2; sin -> sin(2 pi theta)"}}},
      {"coupledcat", "2k", "k",
       "k cat maps, block j: A z_j + (kappa s(z_j1) + coupling s(z_{j+1,1})) (1, 1), "
       "s(t) = sin(2 pi t)/(2 pi), cyclic coupling.",
       {{"k", "integer", 2, 1.0, 10.0, {}, "number of coupled cat maps"},
        {"coupling", "number", 0.05, -0.1, 0.1, {}, "nearest-neighbour coupling"},
        {"kappa", "number", 0.0, -0.1, 0.1, {}, "on-site nonlinearity"},
        {"pert", "string", "sine", {}, {}, {"sine", "zero"},
         "X: sine -> block j (sin 2 pi z_j2, 0.5 cos 2 pi z_j1); zero"},
        {"obs", "string", "cos", {}, {}, {"cos"}, "Phi: mean over j of cos(2 pi z_j1)"}}},
  };
  return specs;
}

const BuiltinSpec& find_spec(const std::string& name) {
  for (const auto& s : registry())
    if (s.name == name) return s;
  throw ConfigError("unknown system '" + name + "'");
}

nlohmann::json resolve_params(const BuiltinSpec& spec, const nlohmann::json& given) {
  if (!given.is_null() && !given.is_object())
    throw ConfigError("parameters of '" + spec.name + "' must be an object");
  nlohmann::json out = nlohmann::json::object();
  for (const auto& p : spec.params) out[p.key] = p.fallback;
  if (given.is_null()) return out;
  for (const auto& [key, value] : given.items()) {
    const ParamSpec* ps = nullptr;
    for (const auto& p : spec.params)
      if (p.key == key) ps = &p;
    if (ps == nullptr) throw ConfigError("unknown parameter '" + key + "' for system '" + spec.name + "'");
    if (ps->type == "string") {
      if (!value.is_string()) throw ConfigError("parameter '" + key + "' must be a string");
      auto v = value.get<std::string>();
      bool ok = false;
      for (const auto& c : ps->choices) ok = ok || c == v;
      if (!ok) throw ConfigError("parameter '" + key + "' has unsupported value '" + v + "'");
    } else if (ps->type == "integer") {
      if (!value.is_number_integer()) throw ConfigError("parameter '" + key + "' must be an integer");
      auto v = static_cast<double>(value.get<long long>());
      if ((ps->lo && v < *ps->lo) || (ps->hi && v > *ps->hi))
        throw ConfigError("parameter '" + key + "' out of range");
    } else {
      if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
      double v = value.get<double>();
      if (!std::isfinite(v) || (ps->lo && v <= *ps->lo) || (ps->hi && v >= *ps->hi))
        throw ConfigError("parameter '" + key + "' = " + std::to_string(v) +
                          " outside the hyperbolic range of '" + spec.name + "'");
    }
    out[key] = value;
  }
  return out;
}

void uniform_torus(std::mt19937_64& rng, Out x) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
}

// ----------------------------------------------------------------------------

SystemDef make_sawtooth(const nlohmann::json& p) {
  const double a = p.at("a").get<double>();
  const std::string pert = p.at("pert");
  const std::string obs = p.at("obs");

  SystemDef s;
  s.name = "sawtooth";
  s.dim = 1;
  s.udim = 1;
  s.periodic = {true};
  s.params = p;

  if (a == 0.0) {
    // x -> 2x mod 1 on the 2^-53 grid shifts in a zero bit each step.
    s.refresh = [](Out x, std::mt19937_64& rng) {
      if (x[0] == 0.0) return;
      constexpr double grid = 9007199254740992.0;  // 2^53
      auto k = static_cast<std::uint64_t>(std::floor(x[0] * grid));
      k = (k & ~std::uint64_t{1}) | (rng() & std::uint64_t{1});
      x[0] = static_cast<double>(k) / grid;
    };
  }

  auto fprime = [a](double x) { return 2.0 + kTwoPi * a * std::cos(kTwoPi * x); };
  auto fsecond = [a](double x) { return -kTwoPi * kTwoPi * a * std::sin(kTwoPi * x); };

  if (pert == "shift") {
    s.perturbation = {"shift", [](CRef, Out X) { X[0] = 1.0; }, [](CRef, CRef, Out dX) { dX[0] = 0.0; }};
  } else if (pert == "sine") {
    s.perturbation = {"sine", [](CRef x, Out X) { X[0] = std::sin(kTwoPi * x[0]); },
                      [](CRef x, CRef Y, Out dX) { dX[0] = kTwoPi * std::cos(kTwoPi * x[0]) * Y[0]; }};
  } else {
    s.perturbation = Perturbation::zero(1);
  }

  auto field = s.perturbation.field;
  s.map = [a, field](CRef x, double gamma, Out y) {
    double fx = 2.0 * x[0] + a * std::sin(kTwoPi * x[0]);
    y[0] = fx - std::floor(fx);
    if (gamma != 0.0) {
      Eigen::Matrix<double, 1, 1> X;
      field(y, X);
      y[0] += gamma * X[0];
      y[0] -= std::floor(y[0]);
    }
  };
  s.jvp = [fprime](CRef x, CRef v, Out y) { y[0] = fprime(x[0]) * v[0]; };
  s.vjp = [fprime](CRef x, CRef w, Out y) { y[0] = fprime(x[0]) * w[0]; };
  s.hvp = [fsecond](CRef x, CRef u, CRef v, Out y) { y[0] = fsecond(x[0]) * u[0] * v[0]; };

  if (obs == "cos") {
    s.obs = [](CRef x) { return std::cos(kTwoPi * x[0]); };
    s.dobs = [](CRef x, Out d) { d[0] = -kTwoPi * std::sin(kTwoPi * x[0]); };
  } else {
    s.obs = [](CRef x) { return std::sin(kTwoPi * x[0]); };
    s.dobs = [](CRef x, Out d) { d[0] = kTwoPi * std::cos(kTwoPi * x[0]); };
  }
  s.sample_initial = uniform_torus;
  return s;
}

SystemDef make_catmap(const nlohmann::json& p) {
  const double kappa = p.at("kappa").get<double>();
  const std::string pert = p.at("pert");
  const std::string obs = p.at("obs");

  SystemDef s;
  s.name = "catmap";
  s.dim = 2;
  s.udim = 1;
  s.periodic = {true, true};
  s.params = p;

  if (pert == "sine") {
    s.perturbation = {"sine",
                      [](CRef z, Out X) {
                        X[0] = std::sin(kTwoPi * z[1]);
                        X[1] = 0.0;
                      },
                      [](CRef z, CRef Y, Out dX) {
                        dX[0] = kTwoPi * std::cos(kTwoPi * z[1]) * Y[1];
                        dX[1] = 0.0;
                      }};
  } else if (pert == "mixed") {
    s.perturbation = {"mixed",
                      [](CRef z, Out X) {
                        X[0] = std::sin(kTwoPi * z[1]);
                        X[1] = 0.5 * std::cos(kTwoPi * z[0]);
                      },
                      [](CRef z, CRef Y, Out dX) {
                        dX[0] = kTwoPi * std::cos(kTwoPi * z[1]) * Y[1];
                        dX[1] = -0.5 * kTwoPi * std::sin(kTwoPi * z[0]) * Y[0];
                      }};
  } else if (pert == "dilate") {
    s.perturbation = {"dilate",
                      [](CRef z, Out X) {
                        X[0] = std::sin(kTwoPi * z[0]);
                        X[1] = 0.5 * std::sin(kTwoPi * z[1]);
                      },
                      [](CRef z, CRef Y, Out dX) {
                        dX[0] = kTwoPi * std::cos(kTwoPi * z[0]) * Y[0];
                        dX[1] = 0.5 * kTwoPi * std::cos(kTwoPi * z[1]) * Y[1];
                      }};
  } else if (pert == "shift") {
    s.perturbation = {"shift",
                      [](CRef, Out X) {
                        X[0] = 1.0;
                        X[1] = 0.0;
                      },
                      [](CRef, CRef, Out dX) { dX.setZero(); }};
  } else {
    s.perturbation = Perturbation::zero(2);
  }

  auto field = s.perturbation.field;
  s.map = [kappa, field, periodic = s.periodic](CRef z, double gamma, Out y) {
    double sh = kappa * std::sin(kTwoPi * z[0]) / kTwoPi;
    y[0] = 2.0 * z[0] + z[1] + sh;
    y[1] = z[0] + z[1] + sh;
    wrap_chart(y, periodic);
    if (gamma != 0.0) {
      Eigen::Vector2d X;
      field(y, X);
      y += gamma * X;
      wrap_chart(y, periodic);
    }
  };
  s.jvp = [kappa](CRef z, CRef v, Out y) {
    double c = kappa * std::cos(kTwoPi * z[0]) * v[0];
    y[0] = 2.0 * v[0] + v[1] + c;
    y[1] = v[0] + v[1] + c;
  };
  s.vjp = [kappa](CRef z, CRef w, Out y) {
    double c = kappa * std::cos(kTwoPi * z[0]);
    y[0] = 2.0 * w[0] + w[1] + c * (w[0] + w[1]);
    y[1] = w[0] + w[1];
  };
  s.hvp = [kappa](CRef z, CRef a, CRef b, Out y) {
    double h = -kTwoPi * kappa * std::sin(kTwoPi * z[0]) * a[0] * b[0];
    y[0] = h;
    y[1] = h;
  };

  if (obs == "cos") {
    s.obs = [](CRef z) { return std::cos(kTwoPi * z[0]); };
    s.dobs = [](CRef z, Out d) {
      d[0] = -kTwoPi * std::sin(kTwoPi * z[0]);
      d[1] = 0.0;
    };
  } else {
    s.obs = [](CRef z) { return std::cos(kTwoPi * z[0]) + 0.5 * std::sin(kTwoPi * (z[0] + z[1])); };
    s.dobs = [](CRef z, Out d) {
      double c = 0.5 * kTwoPi * std::cos(kTwoPi * (z[0] + z[1]));
      d[0] = -kTwoPi * std::sin(kTwoPi * z[0]) + c;
      d[1] = c;
    };
  }
  s.sample_initial = uniform_torus;
  return s;
}

SystemDef make_solenoid(const nlohmann::json& p) {
  const double a = p.at("a").get<double>();
  const double ly = p.at("lam_y").get<double>();
  const double lz = p.at("lam_z").get<double>();
  const double c = p.at("c").get<double>();
  const std::string pert = p.at("pert");
  const std::string obs = p.at("obs");

  SystemDef s;
  s.name = "solenoid";
  s.dim = 3;
  s.udim = 1;
  s.periodic = {true, false, false};
  s.params = p;

  if (pert == "mixed") {
    s.perturbation = {"mixed",
                      [](CRef x, Out X) {
                        X[0] = 1.0;
                        X[1] = 0.5;
                        X[2] = 0.5 * std::cos(kTwoPi * x[0]);
                      },
                      [](CRef x, CRef Y, Out dX) {
                        dX[0] = 0.0;
                        dX[1] = 0.0;
                        dX[2] = -0.5 * kTwoPi * std::sin(kTwoPi * x[0]) * Y[0];
                      }};
  } else if (pert == "shift") {
    s.perturbation = {"shift",
                      [](CRef, Out X) {
                        X.setZero();
                        X[0] = 1.0;
                      },
                      [](CRef, CRef, Out dX) { dX.setZero(); }};
  } else {
    s.perturbation = Perturbation::zero(3);
  }

  auto field = s.perturbation.field;
  s.map = [a, ly, lz, c, field](CRef x, double gamma, Out y) {
    double th = x[0];
    double t = 2.0 * th + a * std::sin(kTwoPi * th);
    y[0] = t - std::floor(t);
    y[1] = ly * x[1] + c * std::cos(kTwoPi * th);
    y[2] = lz * x[2] + c * std::sin(kTwoPi * th);
    if (gamma != 0.0) {
      Eigen::Vector3d X;
      field(y, X);
      y += gamma * X;
      y[0] -= std::floor(y[0]);
    }
  };
  s.jvp = [a, ly, lz, c](CRef x, CRef v, Out y) {
    double ct = std::cos(kTwoPi * x[0]);
    double st = std::sin(kTwoPi * x[0]);
    y[0] = (2.0 + kTwoPi * a * ct) * v[0];
    y[1] = -kTwoPi * c * st * v[0] + ly * v[1];
    y[2] = kTwoPi * c * ct * v[0] + lz * v[2];
  };
  s.vjp = [a, ly, lz, c](CRef x, CRef w, Out y) {
    double ct = std::cos(kTwoPi * x[0]);
    double st = std::sin(kTwoPi * x[0]);
    y[0] = (2.0 + kTwoPi * a * ct) * w[0] - kTwoPi * c * st * w[1] + kTwoPi * c * ct * w[2];
    y[1] = ly * w[1];
    y[2] = lz * w[2];
  };
  s.hvp = [a, c](CRef x, CRef u, CRef v, Out y) {
    double ct = std::cos(kTwoPi * x[0]);
    double st = std::sin(kTwoPi * x[0]);
    double k2 = kTwoPi * kTwoPi * u[0] * v[0];
    y[0] = -k2 * a * st;
    y[1] = -k2 * c * ct;
    y[2] = -k2 * c * st;
  };

  if (obs == "mixed") {
    s.obs = [](CRef x) { return std::sin(kTwoPi * x[0]) + x[1] + 0.5 * x[2] * x[2]; };
    s.dobs = [](CRef x, Out d) {
      d[0] = kTwoPi * std::cos(kTwoPi * x[0]);
      d[1] = 1.0;
      d[2] = x[2];
    };
  } else {
    s.obs = [](CRef x) { return std::sin(kTwoPi * x[0]); };
    s.dobs = [](CRef x, Out d) {
      d.setZero();
      d[0] = kTwoPi * std::cos(kTwoPi * x[0]);
    };
  }
  const double radius = c / (1.0 - std::max(ly, lz));
  s.sample_initial = [radius](std::mt19937_64& rng, Out x) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> d(-0.5 * radius, 0.5 * radius);
    x[0] = u(rng);
    x[1] = d(rng);
    x[2] = d(rng);
  };
  return s;
}

SystemDef make_coupledcat(const nlohmann::json& p) {
  const int k = p.at("k").get<int>();
  const double cpl = p.at("coupling").get<double>();
  const double kappa = p.at("kappa").get<double>();
  const std::string pert = p.at("pert");

  SystemDef s;
  s.name = "coupledcat";
  s.dim = 2 * k;
  s.udim = k;
  s.periodic.assign(static_cast<std::size_t>(2 * k), true);
  s.params = p;

  if (pert == "sine") {
    s.perturbation = {"sine",
                      [k](CRef z, Out X) {
                        for (int j = 0; j < k; ++j) {
                          X[2 * j] = std::sin(kTwoPi * z[2 * j + 1]);
                          X[2 * j + 1] = 0.5 * std::cos(kTwoPi * z[2 * j]);
                        }
                      },
                      [k](CRef z, CRef Y, Out dX) {
                        for (int j = 0; j < k; ++j) {
                          dX[2 * j] = kTwoPi * std::cos(kTwoPi * z[2 * j + 1]) * Y[2 * j + 1];
                          dX[2 * j + 1] = -0.5 * kTwoPi * std::sin(kTwoPi * z[2 * j]) * Y[2 * j];
                        }
                      }};
  } else {
    s.perturbation = Perturbation::zero(2 * k);
  }

  auto next = [k](int j) { return (j + 1) % k; };
  auto field = s.perturbation.field;
  auto periodic = s.periodic;
  s.map = [k, cpl, kappa, next, field, periodic](CRef z, double gamma, Out y) {
    for (int j = 0; j < k; ++j) {
      double sh = (kappa * std::sin(kTwoPi * z[2 * j]) + cpl * std::sin(kTwoPi * z[2 * next(j)])) / kTwoPi;
      y[2 * j] = 2.0 * z[2 * j] + z[2 * j + 1] + sh;
      y[2 * j + 1] = z[2 * j] + z[2 * j + 1] + sh;
    }
    wrap_chart(y, periodic);
    if (gamma != 0.0) {
      Vec X(2 * k);
      field(y, X);
      y += gamma * X;
      wrap_chart(y, periodic);
    }
  };
  s.jvp = [k, cpl, kappa, next](CRef z, CRef v, Out y) {
    for (int j = 0; j < k; ++j) {
      int n = next(j);
      double c = kappa * std::cos(kTwoPi * z[2 * j]) * v[2 * j] + cpl * std::cos(kTwoPi * z[2 * n]) * v[2 * n];
      y[2 * j] = 2.0 * v[2 * j] + v[2 * j + 1] + c;
      y[2 * j + 1] = v[2 * j] + v[2 * j + 1] + c;
    }
  };
  s.vjp = [k, cpl, kappa, next](CRef z, CRef w, Out y) {
    for (int j = 0; j < k; ++j) {
      y[2 * j] = 2.0 * w[2 * j] + w[2 * j + 1];
      y[2 * j + 1] = w[2 * j] + w[2 * j + 1];
    }
    for (int j = 0; j < k; ++j) {
      int n = next(j);
      double sum = w[2 * j] + w[2 * j + 1];
      y[2 * j] += kappa * std::cos(kTwoPi * z[2 * j]) * sum;
      y[2 * n] += cpl * std::cos(kTwoPi * z[2 * n]) * sum;
    }
  };
  s.hvp = [k, cpl, kappa, next](CRef z, CRef a, CRef b, Out y) {
    for (int j = 0; j < k; ++j) {
      int n = next(j);
      double h = -kTwoPi * (kappa * std::sin(kTwoPi * z[2 * j]) * a[2 * j] * b[2 * j] +
                            cpl * std::sin(kTwoPi * z[2 * n]) * a[2 * n] * b[2 * n]);
      y[2 * j] = h;
      y[2 * j + 1] = h;
    }
  };
  s.obs = [k](CRef z) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += std::cos(kTwoPi * z[2 * j]);
    return acc / k;
  };
  s.dobs = [k](CRef z, Out d) {
    d.setZero();
    for (int j = 0; j < k; ++j) d[2 * j] = -kTwoPi * std::sin(kTwoPi * z[2 * j]) / k;
  };
  s.sample_initial = uniform_torus;
  return s;
}

}  // namespace

// ----------------------------------------------------------------------------

Vec Perturbation::at(CRef x) const {
  Vec X(x.size());
  field(x, X);
  return X;
}

Vec Perturbation::grad(CRef x, CRef Y) const {
  Vec dX(x.size());
  derivative(x, Y, dX);
  return dX;
}

Perturbation Perturbation::zero(int /*dim*/) {
  return {"zero", [](CRef, Out X) { X.setZero(); }, [](CRef, CRef, Out dX) { dX.setZero(); }};
}

Vec SystemDef::step(CRef x, double gamma) const {
  Vec y(dim);
  map(x, gamma, y);
  return y;
}

Vec SystemDef::push(CRef x, CRef v) const {
  Vec y(dim);
  jvp(x, v, y);
  return y;
}

Vec SystemDef::pull(CRef x, CRef w) const {
  Vec y(dim);
  vjp(x, w, y);
  return y;
}

Vec SystemDef::hessian(CRef x, CRef a, CRef b) const {
  Vec y(dim);
  hvp(x, a, b, y);
  return y;
}

Vec SystemDef::grad_obs(CRef x) const {
  Vec d(dim);
  dobs(x, d);
  return d;
}

Mat SystemDef::jacobian(CRef x) const {
  Mat J(dim, dim);
  Vec e = Vec::Zero(dim);
  Vec col(dim);
  for (int i = 0; i < dim; ++i) {
    e.setZero();
    e[i] = 1.0;
    jvp(x, e, col);
    J.col(i) = col;
  }
  return J;
}

void wrap_chart(Out x, const std::vector<bool>& periodic) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (periodic[static_cast<std::size_t>(i)]) x[i] -= std::floor(x[i]);
}

Vec chart_delta(CRef a, CRef b, const std::vector<bool>& periodic) {
  Vec d = a - b;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (periodic[static_cast<std::size_t>(i)]) d[i] -= std::round(d[i]);
  return d;
}

SystemDef with_fd_hessian(SystemDef sys) {
  auto jvp = sys.jvp;
  const int dim = sys.dim;
  sys.hvp = [jvp, dim](CRef x, CRef a, CRef b, Out y) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
    const double an = a.norm();
    if (an == 0.0) {
      y.setZero();
      return;
    }
    const double step = h / an;
    Vec xp = x + step * a;
    Vec xm = x - step * a;
    Vec jp(dim);
    Vec jm(dim);
    jvp(xp, b, jp);
    jvp(xm, b, jm);
    y = (jp - jm) / (2.0 * step);
  };
  sys.fd_hessian = true;
  return sys;
}

SystemDef make_builtin(const std::string& name, const nlohmann::json& params) {
  const auto& spec = find_spec(name);
  auto p = resolve_params(spec, params);
  if (name == "sawtooth") return make_sawtooth(p);
  if (name == "catmap") return make_catmap(p);
  if (name == "solenoid") return make_solenoid(p);
  return make_coupledcat(p);
}

nlohmann::json builtin_manifest() {
  nlohmann::json systems = nlohmann::json::array();
  for (const auto& s : registry()) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : s.params) {
      nlohmann::json entry = {{"type", p.type}, {"default", p.fallback}, {"doc", p.doc}};
      if (p.lo) entry["min"] = *p.lo;
      if (p.hi) entry["max"] = *p.hi;
      if (p.type == "number") entry["bounds"] = "open";
      if (p.type == "integer") entry["bounds"] = "closed";
      if (!p.choices.empty()) entry["choices"] = p.choices;
      params[p.key] = entry;
    }
    systems.push_back({{"name", s.name}, {"dim", s.dim}, {"udim", s.udim}, {"doc", s.doc}, {"params", params}});
  }
  return {{"manifest_version", 1}, {"geometry", "flat chart; periodic coordinates reduced mod 1"},
          {"systems", systems}};
}

ValidationReport validate_system(const SystemDef& sys, int n_probe, std::uint64_t seed, double h) {
  if (n_probe < 1) throw ConfigError("validate_system: n_probe must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const int M = sys.dim;
  ValidationReport rep;
  rep.fd_step = h;
  rep.probes = n_probe;

  auto rand_unit = [&]() {
    Vec v(M);
    for (int i = 0; i < M; ++i) v[i] = g(rng);
    return Vec(v / v.norm());
  };

  Vec x(M);
  for (int k = 0; k < n_probe; ++k) {
    sys.sample_initial(rng, x);
    Vec v = rand_unit();
    Vec w = rand_unit();
    Vec z = rand_unit();

    Vec fx = sys.step(x);
    Vec Jv = sys.push(x, v);
    Vec xp = x + h * v;
    Vec fd = chart_delta(sys.step(xp), fx, sys.periodic) / h;
    rep.jvp_fd = std::max(rep.jvp_fd, (fd - Jv).norm() / std::max(1.0, Jv.norm()));

    Vec wJ = sys.pull(x, w);
    rep.duality = std::max(rep.duality, std::abs(w.dot(Jv) - wJ.dot(v)));

    rep.hessian_symmetry =
        std::max(rep.hessian_symmetry, (sys.hessian(x, v, z) - sys.hessian(x, z, v)).norm());

    Vec dX = sys.perturbation.grad(x, v);
    Vec fdX = (sys.perturbation.at(xp) - sys.perturbation.at(x)) / h;
    rep.dpert_fd = std::max(rep.dpert_fd, (fdX - dX).norm() / std::max(1.0, dX.norm()));

    Vec X = sys.perturbation.at(fx);
    Vec fdg = chart_delta(sys.step(x, h), fx, sys.periodic) / h;
    rep.pert_fd = std::max(rep.pert_fd, (fdg - X).norm() / std::max(1.0, X.norm()));
  }
  return rep;
}

}  // namespace lresp
