#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "knxlab/error.hpp"
#include "knxlab/sim/rng.hpp"

namespace knxlab::ids {

struct SvmParams {
  double lambda = 1e-2;
  int epochs = 200;
  std::uint64_t seed = 1;
};

// Linear SVM trained with deterministic epoch-ordered subgradient descent on
// the hinge loss with L2 regularization. Features are standardized with
// train-split statistics; the per-epoch sample order comes from a fixed
// seeded shuffle, so identical inputs yield identical models.
class LinearSvm {
 public:
  static LinearSvm fit(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y,  // labels in {-1, +1}
                       SvmParams params = {}) {
    if (x.empty() || x.size() != y.size())
      throw Error("svm training needs matching samples and labels");
    const std::size_t n = x.size();
    const std::size_t dims = x[0].size();

    LinearSvm model;
    model.params_ = params;
    model.mean_.assign(dims, 0.0);
    model.sd_.assign(dims, 0.0);
    for (const auto& row : x)
      for (std::size_t f = 0; f < dims; ++f) model.mean_[f] += row[f];
    for (double& m : model.mean_) m /= static_cast<double>(n);
    for (const auto& row : x)
      for (std::size_t f = 0; f < dims; ++f) {
        const double d = row[f] - model.mean_[f];
        model.sd_[f] += d * d;
      }
    for (double& s : model.sd_) {
      s = std::sqrt(s / static_cast<double>(n));
      if (s < 1e-12) s = 1.0;
    }

    std::vector<std::vector<double>> z(n, std::vector<double>(dims));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < dims; ++f)
        z[i][f] = (x[i][f] - model.mean_[f]) / model.sd_[f];

    model.w_.assign(dims, 0.0);
    model.b_ = 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    sim::Rng rng(params.seed);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next() % i]);
      for (std::size_t i : order) {
        ++t;
        const double eta =
            1.0 / (params.lambda * (static_cast<double>(t) + 100.0));
        double margin = model.b_;
        for (std::size_t f = 0; f < dims; ++f) margin += model.w_[f] * z[i][f];
        const double scale = 1.0 - eta * params.lambda;
        if (static_cast<double>(y[i]) * margin < 1.0) {
          for (std::size_t f = 0; f < dims; ++f)
            model.w_[f] = scale * model.w_[f] +
                          eta * static_cast<double>(y[i]) * z[i][f];
          model.b_ += eta * static_cast<double>(y[i]);
        } else {
          for (std::size_t f = 0; f < dims; ++f) model.w_[f] = scale * model.w_[f];
        }
      }
    }
    return model;
  }

  double margin(std::span<const double> features) const {
    if (features.size() != w_.size())
      throw Error("feature vector dimension mismatches the model");
    double acc = b_;
    for (std::size_t f = 0; f < w_.size(); ++f)
      acc += w_[f] * (features[f] - mean_[f]) / sd_[f];
    return acc;
  }

  // Class 1 on a nonnegative margin.
  int predict(std::span<const double> features) const {
    return margin(features) >= 0.0 ? 1 : 0;
  }

  const std::vector<double>& weights() const { return w_; }
  std::vector<double>& weights() { return w_; }
  double& bias() { return b_; }
  double bias() const { return b_; }
  std::vector<double>& means() { return mean_; }
  const std::vector<double>& means() const { return mean_; }
  std::vector<double>& sds() { return sd_; }
  const std::vector<double>& sds() const { return sd_; }
  SvmParams& params() { return params_; }
  const SvmParams& params() const { return params_; }

 private:
  std::vector<double> w_;
  double b_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> sd_;
  SvmParams params_;
};

}  // namespace knxlab::ids
