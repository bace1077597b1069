#include "lresp/orbit.hpp"

#include "lresp/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

namespace lresp {

namespace {

constexpr std::array<char, 4> kMagic = {'L', 'R', 'O', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!is) throw std::runtime_error("read_orbit: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

bool all_finite(const Vec& x) { return x.allFinite(); }

}  // namespace

OrbitData generate_orbit(const SystemDef& sys, const OrbitOptions& opt) {
  if (opt.steps < 1) throw ConfigError("generate_orbit: N must be >= 1");
  const int M = sys.dim;
  Vec x(M);
  std::mt19937_64 rng(opt.seed);
  if (opt.x_init) {
    if (opt.x_init->size() != M) throw ConfigError("generate_orbit: x_init has wrong dimension");
    x = *opt.x_init;
  } else {
    sys.sample_initial(rng, x);
  }
  Vec y(M);
  for (std::size_t k = 0; k < opt.spinup; ++k) {
    sys.map(x, opt.gamma, y);
    if (!all_finite(y)) throw NumericalError("non-finite state during spin-up", k);
    if (sys.refresh) sys.refresh(y, rng);
    x.swap(y);
  }

  OrbitData orbit;
  orbit.spinup = opt.spinup;
  orbit.seed = opt.seed;
  orbit.gamma = opt.gamma;
  orbit.system = sys.name;
  orbit.points.resize(M, static_cast<Eigen::Index>(opt.steps + 1));
  orbit.points.col(0) = x;
  for (std::size_t n = 0; n < opt.steps; ++n) {
    auto next = orbit.points.col(static_cast<Eigen::Index>(n + 1));
    sys.map(orbit.points.col(static_cast<Eigen::Index>(n)), opt.gamma, next);
    if (!next.allFinite()) throw NumericalError("non-finite state", n + 1);
    if (sys.refresh) sys.refresh(next, rng);
  }
  return orbit;
}

Estimate empirical_average(const OrbitData& orbit, const std::function<double(CRef)>& g) {
  const std::size_t count = orbit.steps() + 1;
  if (count < 2) throw ConfigError("empirical_average: need at least two points");
  std::vector<double> vals(count);
  for (std::size_t n = 0; n < count; ++n) vals[n] = g(orbit[n]);
  return batch_means(vals);
}

void write_orbit(std::ostream& os, const OrbitData& orbit) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(orbit.dim()));
  put_le<std::uint64_t>(os, orbit.steps());
  put_le<std::uint64_t>(os, orbit.spinup);
  put_le<std::uint64_t>(os, orbit.seed);
  put_le<double>(os, orbit.gamma);
  for (Eigen::Index n = 0; n < orbit.points.cols(); ++n)
    for (Eigen::Index i = 0; i < orbit.points.rows(); ++i) put_le<double>(os, orbit.points(i, n));
  if (!os) throw std::runtime_error("write_orbit: stream failure");
}

OrbitData read_orbit(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw std::runtime_error("read_orbit: bad magic");
  if (get_le<std::uint32_t>(is) != kVersion) throw std::runtime_error("read_orbit: unsupported version");
  OrbitData orbit;
  const auto M = get_le<std::uint32_t>(is);
  const auto N = get_le<std::uint64_t>(is);
  orbit.spinup = get_le<std::uint64_t>(is);
  orbit.seed = get_le<std::uint64_t>(is);
  orbit.gamma = get_le<double>(is);
  orbit.points.resize(M, static_cast<Eigen::Index>(N + 1));
  for (Eigen::Index n = 0; n < orbit.points.cols(); ++n)
    for (Eigen::Index i = 0; i < orbit.points.rows(); ++i) orbit.points(i, n) = get_le<double>(is);
  return orbit;
}

}  // namespace lresp
