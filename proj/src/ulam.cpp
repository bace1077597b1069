#include "lresp/ulam.hpp"

#include "lresp/error.hpp"
#include "lresp/quadrature.hpp"

#include <cmath>

namespace lresp {

namespace {

// Bin averages of g by 4-point Gauss-Legendre.
Eigen::VectorXd bin_averages(const std::function<double(double)>& g, int n_bins) {
  static const auto [xs, ws] = gauss_legendre(4);
  Eigen::VectorXd out(n_bins);
  const double w = 1.0 / n_bins;
  for (int i = 0; i < n_bins; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) acc += 0.5 * ws[k] * g((i + 0.5 + 0.5 * xs[k]) * w);
    out[i] = acc;
  }
  return out;
}

Eigen::VectorXd push_masses(const Eigen::VectorXd& mu, const UlamMatrix& P) { return P.transpose() * mu; }

}  // namespace

UlamMatrix ulam_build(const std::function<double(double)>& map, int n_bins) {
  if (n_bins < 1) throw ConfigError("ulam_build: n_bins must be >= 1");
  const int S = kUlamSubintervals;
  const long points = static_cast<long>(n_bins) * S;
  const double h = 1.0 / static_cast<double>(points);

  std::vector<double> img(static_cast<std::size_t>(points + 1));
  for (long k = 0; k <= points; ++k) img[static_cast<std::size_t>(k)] = map(static_cast<double>(k) * h);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(points) * 4);
  const double mass = 1.0 / S;
  for (long k = 0; k < points; ++k) {
    const int row = static_cast<int>(k / S);
    const double ya = img[static_cast<std::size_t>(k)];
    double d = img[static_cast<std::size_t>(k + 1)] - ya;
    d -= std::floor(d);
    if (d > 0.5) throw NumericalError("ulam_build: map reverses orientation or sub-interval image too long",
                                      static_cast<std::size_t>(k));
    if (d == 0.0) {
      int col = static_cast<int>(std::floor(ya * n_bins)) % n_bins;
      trips.emplace_back(row, col, mass);
      continue;
    }
    // Spread the mass uniformly over [ya, ya + d] on the circle.
    const double hi = ya + d;
    double lo = ya;
    for (long cell = static_cast<long>(std::floor(ya * n_bins)); lo < hi; ++cell) {
      const double edge = std::min(hi, static_cast<double>(cell + 1) / n_bins);
      if (edge > lo) {
        const int col = static_cast<int>(((cell % n_bins) + n_bins) % n_bins);
        trips.emplace_back(row, col, mass * (edge - lo) / d);
        lo = edge;
      }
    }
  }
  UlamMatrix P(n_bins, n_bins);
  P.setFromTriplets(trips.begin(), trips.end());
  P.makeCompressed();
  return P;
}

UlamMatrix ulam_build(const SystemDef& sys1d, int n_bins, double gamma) {
  if (sys1d.dim != 1) throw ConfigError("ulam_build: system must be one-dimensional");
  return ulam_build(
      [&](double x) {
        Eigen::Matrix<double, 1, 1> in{x}, out;
        sys1d.map(in, gamma, out);
        return out[0];
      },
      n_bins);
}

UlamDensity ulam_density(const UlamMatrix& P, double tol, int max_iter) {
  const auto n = P.rows();
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd next = push_masses(mu, P);
    next /= next.sum();
    const double diff = (next - mu).lpNorm<1>();
    mu = next;
    if (diff < tol) return {mu * static_cast<double>(n), it};
  }
  throw NumericalError("ulam_density: power iteration did not converge");
}

double ulam_response(const SystemDef& sys1d, const UlamOptions& opt) {
  const int n = opt.n_bins;
  const double dg = opt.dgamma > 0.0 ? opt.dgamma : 0.1 / n;
  const UlamMatrix P0 = ulam_build(sys1d, n, 0.0);
  const UlamMatrix Pp = ulam_build(sys1d, n, dg);
  const UlamMatrix Pm = ulam_build(sys1d, n, -dg);
  const Eigen::VectorXd mu = ulam_density(P0).density / static_cast<double>(n);
  const Eigen::VectorXd phi = bin_averages([&](double x) { return sys1d.obs(Eigen::Matrix<double, 1, 1>{x}); }, n);

  Eigen::VectorXd dmu = (push_masses(mu, Pp) - push_masses(mu, Pm)) / (2.0 * dg);
  double acc = 0.0;
  for (int m = 0; m < opt.n_terms; ++m) {
    acc += dmu.dot(phi);
    dmu = push_masses(dmu, P0);
  }
  return acc;
}

std::vector<Lemma1Row> lemma1_check(const std::function<double(double)>& h, const std::function<double(double)>& X,
                                    const std::vector<int>& bins, double dgamma) {
  std::vector<Lemma1Row> rows;
  for (int n : bins) {
    const Eigen::VectorXd mu = bin_averages(h, n) / static_cast<double>(n);
    auto shifted = [&](double s) {
      return ulam_build([&](double x) {
        double y = x + s * X(x);
        return y - std::floor(y);
      }, n);
    };
    const Eigen::VectorXd dmu = (push_masses(mu, shifted(dgamma)) - push_masses(mu, shifted(-dgamma))) / (2.0 * dgamma);
    double defect = 0.0;
    const double w = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      const double a = i * w;
      const double b = (i + 1) * w;
      const double exact = -(h(b) * X(b) - h(a) * X(a)) / w;  // bin average of -(h X)'
      defect = std::max(defect, std::abs(dmu[i] * n - exact));
    }
    rows.push_back({n, defect});
  }
  return rows;
}

}  // namespace lresp
