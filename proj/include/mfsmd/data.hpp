#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfsmd/model.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

struct MixtureComponent {
  double label = 1.0;  // +1 or -1
  Vec center;
  double std = 0.1;  // isotropic
  double weight = 1.0;
};

/// Labeled isotropic Gaussian mixture: each component carries its label, and
/// x | component ~ N(center, std^2 I).
class LabeledGaussianMixture {
 public:
  explicit LabeledGaussianMixture(std::vector<MixtureComponent> components);

  /// Rows of "label c_1 ... c_d std weight"; '#' starts a comment.
  static LabeledGaussianMixture parse(const std::string& text);
  static LabeledGaussianMixture load(const std::filesystem::path& path);

  const std::vector<MixtureComponent>& components() const {
    return components_;
  }
  Eigen::Index dim() const { return components_.front().center.size(); }

  std::vector<Sample> sample(Rng& rng, std::size_t count) const;
  Sample sample_one(Rng& rng) const;

  /// E[y^2] = sum_k w_k y_k^2.
  double second_moment_y() const;

 private:
  std::vector<MixtureComponent> components_;
  std::vector<double> cumulative_;
};

/// Two interleaved equilateral triangles: class +1 at radius r and angles
/// 90, 210, 330 degrees; class -1 at the edge midpoints (radius r/2 at
/// 30, 150, 270 degrees). Six components of weight 1/6.
LabeledGaussianMixture paper_dataset(double radius = 1.0, double s = 0.1);

}  // namespace mfsmd
