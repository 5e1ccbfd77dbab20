#include "mfsmd/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mfsmd/errors.hpp"

namespace mfsmd {

LabeledGaussianMixture::LabeledGaussianMixture(
    std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw InvalidArgument("mixture: no components");
  const Eigen::Index d = components_.front().center.size();
  if (d == 0) throw InvalidArgument("mixture: zero-dimensional centers");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.center.size() != d)
      throw InvalidArgument("mixture: inconsistent center dimensions");
    if (!c.center.allFinite())
      throw InvalidArgument("mixture: non-finite center");
    if (c.label != 1.0 && c.label != -1.0)
      throw InvalidArgument("mixture: labels must be +1 or -1");
    if (!(c.std > 0.0)) throw InvalidArgument("mixture: std must be > 0");
    if (!(c.weight > 0.0)) throw InvalidArgument("mixture: weight must be > 0");
    total += c.weight;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("mixture: weights must sum to 1");
}

LabeledGaussianMixture LabeledGaussianMixture::parse(const std::string& text) {
  std::vector<MixtureComponent> comps;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InvalidArgument("mixture file line " + std::to_string(lineno) +
                              ": bad number '" + tok + "'");
      }
    }
    if (values.empty()) continue;
    if (values.size() < 4)
      throw InvalidArgument("mixture file line " + std::to_string(lineno) +
                            ": expected label, center, std, weight");
    MixtureComponent c;
    c.label = values.front();
    c.center = Eigen::Map<const Vec>(values.data() + 1,
                                     static_cast<Eigen::Index>(values.size() - 3));
    c.std = values[values.size() - 2];
    c.weight = values.back();
    comps.push_back(std::move(c));
  }
  return LabeledGaussianMixture(std::move(comps));
}

LabeledGaussianMixture LabeledGaussianMixture::load(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mixture file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Sample LabeledGaussianMixture::sample_one(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, cumulative_.back());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unif(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                               static_cast<std::ptrdiff_t>(components_.size()) - 1));
  const MixtureComponent& c = components_[k];
  Sample s;
  s.x.resize(c.center.size());
  for (Eigen::Index i = 0; i < s.x.size(); ++i)
    s.x[i] = c.center[i] + c.std * normal(rng);
  s.y = c.label;
  return s;
}

std::vector<Sample> LabeledGaussianMixture::sample(Rng& rng,
                                                   std::size_t count) const {
  if (count == 0) throw InvalidArgument("sample: count must be >= 1");
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(rng));
  return out;
}

double LabeledGaussianMixture::second_moment_y() const {
  // normalized by the weight total so that +-1 labels give exactly 1
  double m = 0.0, total = 0.0;
  for (const auto& c : components_) {
    m += c.weight * c.label * c.label;
    total += c.weight;
  }
  return m / total;
}

LabeledGaussianMixture paper_dataset(double radius, double s) {
  if (!(radius > 0.0)) throw InvalidArgument("paper_dataset: radius must be > 0");
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<MixtureComponent> comps;
  auto add = [&](double label, double r, double angle) {
    Vec m(2);
    m << r * std::cos(angle * deg), r * std::sin(angle * deg);
    comps.push_back({label, m, s, 1.0 / 6.0});
  };
  for (double a : {90.0, 210.0, 330.0}) add(1.0, radius, a);
  for (double a : {30.0, 150.0, 270.0}) add(-1.0, 0.5 * radius, a);
  return LabeledGaussianMixture(std::move(comps));
}

}  // namespace mfsmd
