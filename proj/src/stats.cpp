#include "lresp/stats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lresp {

namespace {

std::size_t batch_count(std::size_t n) {
  auto nb = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  return nb < 2 ? std::min<std::size_t>(n, 2) : nb;
}

}  // namespace

Estimate from_batch_averages(double mean, std::span<const double> batch_avgs) {
  const std::size_t nb = batch_avgs.size();
  if (nb < 2) return {mean, 0.0};
  double bmean = std::accumulate(batch_avgs.begin(), batch_avgs.end(), 0.0) / static_cast<double>(nb);
  double ss = 0.0;
  for (double b : batch_avgs) ss += (b - bmean) * (b - bmean);
  double var = ss / static_cast<double>(nb - 1);
  return {mean, std::sqrt(var / static_cast<double>(nb))};
}

Estimate batch_means(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("batch_means: empty sample");
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  const std::size_t nb = batch_count(n);
  const std::size_t bs = n / nb;
  std::vector<double> avgs(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) s += samples[i];
    avgs[b] = s / static_cast<double>(bs);
  }
  return from_batch_averages(mean, avgs);
}

Estimate combine_replicas(std::span<const Estimate> replicas) {
  if (replicas.empty()) throw std::invalid_argument("combine_replicas: no replicas");
  double m = 0.0;
  double v = 0.0;
  for (const auto& r : replicas) {
    m += r.mean;
    v += r.se * r.se;
  }
  const auto k = static_cast<double>(replicas.size());
  return {m / k, std::sqrt(v) / k};
}

Estimate sample_mean(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("sample_mean: empty sample");
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

BatchAccumulator::BatchAccumulator(std::size_t total)
    : total_(total), n_batches_(total < 2 ? 1 : batch_count(total)),
      batch_size_(total / (total < 2 ? 1 : batch_count(total))), sums_(n_batches_, 0.0) {
  if (total == 0) throw std::invalid_argument("BatchAccumulator: empty stream");
}

Estimate BatchAccumulator::estimate() const {
  if (seen_ != total_) throw std::logic_error("BatchAccumulator: stream length mismatch");
  double mean = sum_ / static_cast<double>(total_);
  std::vector<double> avgs(n_batches_);
  for (std::size_t b = 0; b < n_batches_; ++b) avgs[b] = sums_[b] / static_cast<double>(batch_size_);
  return from_batch_averages(mean, avgs);
}

MultiBatchAccumulator::MultiBatchAccumulator(std::size_t total, std::size_t streams)
    : total_(total), streams_(streams), n_batches_(total < 2 ? 1 : batch_count(total)),
      batch_size_(total / (total < 2 ? 1 : batch_count(total))), sums_((n_batches_ + 1) * streams, 0.0) {
  if (total == 0 || streams == 0) throw std::invalid_argument("MultiBatchAccumulator: empty stream");
}

Estimate MultiBatchAccumulator::estimate(std::size_t stream) const { return estimate_sum(stream, streams_); }

Estimate MultiBatchAccumulator::estimate_sum(std::size_t a, std::size_t b) const {
  if (seen_ != total_) throw std::logic_error("MultiBatchAccumulator: stream length mismatch");
  auto pick = [&](std::size_t row, std::size_t i) { return i < streams_ ? sums_[row * streams_ + i] : 0.0; };
  std::vector<double> avgs(n_batches_);
  double sum = pick(n_batches_, a) + pick(n_batches_, b);
  for (std::size_t k = 0; k < n_batches_; ++k) {
    const double s = pick(k, a) + pick(k, b);
    sum += s;
    avgs[k] = s / static_cast<double>(batch_size_);
  }
  return from_batch_averages(sum / static_cast<double>(total_), avgs);
}

}  // namespace lresp
