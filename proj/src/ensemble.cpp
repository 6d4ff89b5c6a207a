#include "spde/ensemble.hpp"

namespace spde {

MomentTable::MomentTable(Eigen::Index rows, Eigen::Index cols)
    : mean_(Mat::Zero(rows, cols)), m2_(Mat::Zero(rows, cols)) {}

void MomentTable::add(const Mat& r) {
  require(r.rows() == mean_.rows() && r.cols() == mean_.cols(), "dimension",
          "ensemble record has inconsistent shape");
  ++n_;
  const Mat delta = r - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta.cwiseProduct(r - mean_);
}

Mat MomentTable::variance() const {
  if (n_ < 2) return Mat::Zero(mean_.rows(), mean_.cols());
  return m2_ / static_cast<double>(n_ - 1);
}

Mat MomentTable::standard_error() const {
  if (n_ < 2) return Mat::Zero(mean_.rows(), mean_.cols());
  return (variance() / static_cast<double>(n_)).cwiseSqrt();
}

}  // namespace spde
