#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace toric {

// small fixed-capacity vectors; the library works in dimension <= 3
constexpr int kMaxDim = 3;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Neumaier compensated summation
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  KahanSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(const std::vector<double>& values) {
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value();
}

inline double weighted_sum(const std::vector<double>& w, const std::vector<double>& v) {
  KahanSum s;
  for (size_t i = 0; i < w.size(); ++i) s.add(w[i] * v[i]);
  return s.value();
}

}  // namespace toric
