#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfsmd/model.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

struct TestFunction {
  std::string id;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  bool bounded = false;  // member of C_b^2
};

/// Scalar test functions f whose averages <rho, f> track a measure over time.
class ObservableBattery {
 public:
  explicit ObservableBattery(std::vector<TestFunction> fns);

  /// {1, theta_i, theta_i^2, theta_1 theta_2, tanh(theta_i), exp(-|theta|^2)}.
  static ObservableBattery standard(Eigen::Index dim);

  std::size_t size() const { return fns_.size(); }
  const TestFunction& operator[](std::size_t i) const { return fns_[i]; }
  std::vector<std::string> ids() const;

  /// <rho_hat, f> for every member.
  Vec evaluate(const ParticleEnsemble& ens) const;

 private:
  std::vector<TestFunction> fns_;
};

/// <rho_hat, f> for a single function.
double average(const ParticleEnsemble& ens, const TestFunction& f);

struct Snapshot {
  double t = 0.0;
  ParticleEnsemble ensemble;
};

/// Time-indexed ensemble snapshots plus a (typically denser) series of
/// recorded observables. Both time axes start at 0 and increase strictly.
struct FlowTrajectory {
  std::vector<std::string> observable_ids;
  std::vector<double> times;
  std::vector<Vec> observables;
  std::vector<Snapshot> snapshots;

  void record_observables(double t, Vec values);
  void record_snapshot(double t, ParticleEnsemble ens);

  double end_time() const { return times.empty() ? 0.0 : times.back(); }
  /// Right-continuous step lookup: the last record with time <= t.
  const Vec& observables_at(double t) const;
};

}  // namespace mfsmd
