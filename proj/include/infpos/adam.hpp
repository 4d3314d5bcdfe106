#pragma once

#include <cmath>
#include <vector>

#include "infpos/layers.hpp"

namespace infpos::nn {

// Standard Adam with bias-corrected moments:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
template <typename T>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Param<T>>& params, double lr) {
    if (lr <= 0.0) throw Error(Errc::domain, "adam: lr must be > 0");
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.grad ? p.value->numel() : 0, 0.0);
        v_.emplace_back(p.grad ? p.value->numel() : 0, 0.0);
      }
    }
    if (m_.size() != params.size())
      throw Error(Errc::data, "adam: parameter list changed between steps");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, step_count_);
    const double bc2 = 1.0 - std::pow(beta2_, step_count_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (!p.grad || !p.trainable) continue;
      if (p.grad->numel() != m_[i].size())
        throw Error(Errc::data, "adam: gradient shape mismatch");
      for (std::size_t j = 0; j < m_[i].size(); ++j) {
        const double g = static_cast<double>(p.grad->data[j]);
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.value->data[j] =
            static_cast<T>(static_cast<double>(p.value->data[j]) -
                           lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  long step_count() const { return step_count_; }

 private:
  double beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<std::vector<double>> m_, v_;  // moments kept in double
};

}  // namespace infpos::nn
