#include "mfsmd/observables.hpp"

#include <algorithm>
#include <cmath>

#include "mfsmd/errors.hpp"

namespace mfsmd {

ObservableBattery::ObservableBattery(std::vector<TestFunction> fns)
    : fns_(std::move(fns)) {
  bool has_constant = false;
  bool has_bounded = false;
  for (const auto& f : fns_) {
    if (f.id == "1") has_constant = true;
    if (f.bounded && f.id != "1") has_bounded = true;
  }
  if (!has_constant || !has_bounded)
    throw InvalidArgument(
        "battery needs the constant function and a bounded C_b^2 member");
}

ObservableBattery ObservableBattery::standard(Eigen::Index dim) {
  std::vector<TestFunction> fns;
  fns.push_back({"1", [](const Vec&) { return 1.0; },
                 [](const Vec& t) { return Vec(Vec::Zero(t.size())); }, true});
  auto unit = [](Eigen::Index d, Eigen::Index i, double s) {
    Vec g = Vec::Zero(d);
    g[i] = s;
    return g;
  };
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::string k = std::to_string(i + 1);
    fns.push_back({"theta" + k, [i](const Vec& t) { return t[i]; },
                   [i, unit](const Vec& t) { return unit(t.size(), i, 1.0); },
                   false});
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::string k = std::to_string(i + 1);
    fns.push_back({"theta" + k + "^2", [i](const Vec& t) { return t[i] * t[i]; },
                   [i, unit](const Vec& t) { return unit(t.size(), i, 2.0 * t[i]); },
                   false});
  }
  if (dim >= 2) {
    fns.push_back({"theta1*theta2", [](const Vec& t) { return t[0] * t[1]; },
                   [](const Vec& t) {
                     Vec g = Vec::Zero(t.size());
                     g[0] = t[1];
                     g[1] = t[0];
                     return g;
                   },
                   false});
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::string k = std::to_string(i + 1);
    fns.push_back({"tanh(theta" + k + ")",
                   [i](const Vec& t) { return std::tanh(t[i]); },
                   [i, unit](const Vec& t) {
                     const double th = std::tanh(t[i]);
                     return unit(t.size(), i, 1.0 - th * th);
                   },
                   true});
  }
  fns.push_back({"exp(-|theta|^2)",
                 [](const Vec& t) { return std::exp(-t.squaredNorm()); },
                 [](const Vec& t) {
                   return Vec(-2.0 * std::exp(-t.squaredNorm()) * t);
                 },
                 true});
  return ObservableBattery(std::move(fns));
}

std::vector<std::string> ObservableBattery::ids() const {
  std::vector<std::string> out;
  out.reserve(fns_.size());
  for (const auto& f : fns_) out.push_back(f.id);
  return out;
}

double average(const ParticleEnsemble& ens, const TestFunction& f) {
  if (ens.empty()) throw InvalidArgument("average: empty ensemble");
  double sum = 0.0;
  Vec theta(ens.dim());
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    theta = ens.particle(i);
    sum += f.value(theta);
  }
  return sum / static_cast<double>(ens.size());
}

Vec ObservableBattery::evaluate(const ParticleEnsemble& ens) const {
  if (ens.empty()) throw InvalidArgument("evaluate: empty ensemble");
  Vec out = Vec::Zero(static_cast<Eigen::Index>(fns_.size()));
  Vec theta(ens.dim());
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    theta = ens.particle(i);
    for (std::size_t k = 0; k < fns_.size(); ++k)
      out[static_cast<Eigen::Index>(k)] += fns_[k].value(theta);
  }
  return out / static_cast<double>(ens.size());
}

void FlowTrajectory::record_observables(double t, Vec values) {
  if (times.empty() ? t != 0.0 : !(t > times.back()))
    throw InvalidArgument("trajectory: observable times must start at 0 and increase");
  times.push_back(t);
  observables.push_back(std::move(values));
}

void FlowTrajectory::record_snapshot(double t, ParticleEnsemble ens) {
  if (snapshots.empty() ? t != 0.0 : !(t > snapshots.back().t))
    throw InvalidArgument("trajectory: snapshot times must start at 0 and increase");
  snapshots.push_back({t, std::move(ens)});
}

const Vec& FlowTrajectory::observables_at(double t) const {
  if (times.empty()) throw InvalidArgument("trajectory: no observables recorded");
  // Tolerate round-off between grids built as k * dt and j * tau / n.
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::upper_bound(times.begin(), times.end(), t + slack);
  if (it == times.begin()) return observables.front();
  return observables[static_cast<std::size_t>(it - times.begin()) - 1];
}

}  // namespace mfsmd
