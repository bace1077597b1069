#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lresp {

// Sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

// Batch-means estimate with floor(sqrt(n)) equal batches; the tail that does
// not fill a batch is dropped from the error but kept in the mean.
Estimate batch_means(std::span<const double> samples);

// Batch-means error from precomputed batch averages.
Estimate from_batch_averages(double mean, std::span<const double> batch_avgs);

// Average of independent replica estimates; errors add in quadrature.
Estimate combine_replicas(std::span<const Estimate> replicas);

// Mean and standard error across independent samples (e.g. orbit pairs).
Estimate sample_mean(std::span<const double> samples);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Accumulates per-batch sums for a stream of known length.
class BatchAccumulator {
 public:
  explicit BatchAccumulator(std::size_t total);

  void add(double value) {
    sum_ += value;
    if (batch_ < n_batches_) {
      sums_[batch_] += value;
      if (++in_batch_ == batch_size_) {
        in_batch_ = 0;
        ++batch_;
      }
    }
    ++seen_;
  }
  Estimate estimate() const;
  std::size_t batches() const { return n_batches_; }
  const std::vector<double>& batch_sums() const { return sums_; }

 private:
  std::size_t total_;
  std::size_t n_batches_;
  std::size_t batch_size_;
  std::size_t seen_ = 0;
  std::size_t batch_ = 0;
  std::size_t in_batch_ = 0;
  double sum_ = 0.0;
  std::vector<double> sums_;
};

// Batch sums for several streams of the same known length, stored per batch.
class MultiBatchAccumulator {
 public:
  MultiBatchAccumulator(std::size_t total, std::size_t streams);

  // values[i] is the next sample of stream i.
  void add(const double* values) {
    double* row = next_row();
    for (std::size_t i = 0; i < streams_; ++i) row[i] += values[i];
  }

  // Row to which the next sample must be added in place (one call per sample).
  double* next_row() {
    double* row = sums_.data() + batch_ * streams_;
    if (batch_ < n_batches_ && ++in_batch_ == batch_size_) {
      in_batch_ = 0;
      ++batch_;
    }
    ++seen_;
    return row;
  }

  // Block-wise filling: block k < batches() covers samples [k b, (k + 1) b) with
  // b = batch_size(), block batches() is the tail. Call mark_filled() when done.
  std::size_t batches() const { return n_batches_; }
  std::size_t batch_size() const { return batch_size_; }
  double* block_row(std::size_t k) { return sums_.data() + k * streams_; }
  void mark_filled() { seen_ = total_; }

  Estimate estimate(std::size_t stream) const;
  // Estimate of the per-step sum of streams a and b.
  Estimate estimate_sum(std::size_t a, std::size_t b) const;

 private:
  std::size_t total_;
  std::size_t streams_;
  std::size_t n_batches_;
  std::size_t batch_size_;
  std::size_t seen_ = 0;
  std::size_t batch_ = 0;
  std::size_t in_batch_ = 0;
  std::vector<double> sums_;  // one row per batch, then one row for the tail
};

}  // namespace lresp
