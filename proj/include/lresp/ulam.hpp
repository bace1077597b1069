#pragma once

#include "lresp/systems.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace lresp {

using UlamMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr int kUlamSubintervals = 64;

// Row-stochastic transfer matrix of a circle map on n_bins equal bins. Each
// bin is cut into sub-intervals whose images are taken as straight segments
// between the mapped endpoints. The map must preserve orientation.
UlamMatrix ulam_build(const std::function<double(double)>& map, int n_bins);
UlamMatrix ulam_build(const SystemDef& sys1d, int n_bins, double gamma = 0.0);

struct UlamDensity {
  Eigen::VectorXd density;  // per bin, mean 1
  int iterations = 0;
};

// Stationary density by power iteration on bin masses.
UlamDensity ulam_density(const UlamMatrix& P, double tol = 1e-13, int max_iter = 100000);

struct UlamOptions {
  int n_bins = 1024;
  int n_terms = 60;
  double dgamma = 0.0;  // 0 selects 0.1 / n_bins
};

// sum_{m < n_terms} <(dmu) P^m, Phi> with dmu the central difference of
// mu P_gamma over gamma and Phi averaged over each bin.
double ulam_response(const SystemDef& sys1d, const UlamOptions& opt);

struct Lemma1Row {
  int n_bins = 0;
  double defect = 0.0;  // sup over bins
};

// Compares the gamma-derivative of the discretized transfer operator of
// x -> x + gamma X(x), applied to the bin masses of h, against the bin
// averages of -(h X)'.
std::vector<Lemma1Row> lemma1_check(const std::function<double(double)>& h, const std::function<double(double)>& X,
                                    const std::vector<int>& bins, double dgamma = 1e-6);

}  // namespace lresp
