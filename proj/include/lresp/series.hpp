#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lresp {

using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;
using CRef = Eigen::Ref<const Vec>;
using Out = Eigen::Ref<Vec>;

// Fixed-shape matrices stored back to back, one per orbit step.
class MatrixSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(Eigen::Index rows, Eigen::Index cols, std::size_t count)
      : rows_(rows), cols_(cols), count_(count),
        data_(static_cast<std::size_t>(rows * cols) * count, 0.0) {}

  Eigen::Map<Mat> operator[](std::size_t n) {
    return {data_.data() + n * stride(), rows_, cols_};
  }
  Eigen::Map<const Mat> operator[](std::size_t n) const {
    return {data_.data() + n * stride(), rows_, cols_};
  }

  std::size_t size() const { return count_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

 private:
  std::size_t stride() const { return static_cast<std::size_t>(rows_ * cols_); }

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;
};

struct VectorTag {};
struct CovectorTag {};

// One M-dimensional (co)vector per step n in [first, first + count).
// Covectors are stored as columns; apply them with a dot product.
template <class Tag>
class StepSeries {
 public:
  StepSeries() = default;
  StepSeries(std::size_t first, std::size_t count, Eigen::Index dim, std::string label = "custom")
      : first_(first), values_(Mat::Zero(dim, static_cast<Eigen::Index>(count))),
        label_(std::move(label)) {}

  std::size_t first() const { return first_; }
  std::size_t end() const { return first_ + count(); }
  std::size_t count() const { return static_cast<std::size_t>(values_.cols()); }
  Eigen::Index dim() const { return values_.rows(); }
  bool contains(std::size_t n) const { return n >= first_ && n < end(); }

  Mat::ColXpr operator[](std::size_t n) { return values_.col(index(n)); }
  Mat::ConstColXpr operator[](std::size_t n) const { return values_.col(index(n)); }

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  Mat& values() { return values_; }
  const Mat& values() const { return values_; }

 private:
  Eigen::Index index(std::size_t n) const {
    if (!contains(n)) throw std::out_of_range("step " + std::to_string(n) + " outside series");
    return static_cast<Eigen::Index>(n - first_);
  }

  std::size_t first_ = 0;
  Mat values_;
  std::string label_ = "custom";
};

using VectorSeries = StepSeries<VectorTag>;
using CovectorSeries = StepSeries<CovectorTag>;

// Half-open range of orbit steps.
struct StepWindow {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool contains(std::size_t n) const { return n >= begin && n < end; }
  StepWindow shrink(std::size_t margin) const {
    if (2 * margin >= size()) return {begin, begin};
    return {begin + margin, end - margin};
  }
};

}  // namespace lresp
