#include "mfsmd/meanfield.hpp"

#include <cmath>
#include <sstream>

#include "mfsmd/errors.hpp"
#include "mfsmd/parallel.hpp"

namespace mfsmd {

void FlowConfig::validate() const {
  if (m < 1) throw InvalidArgument("flow: m must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidArgument("flow: dt must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw InvalidArgument("flow: t_end must be >= 0");
  if (t_end > 0.0 && dt > t_end)
    throw InvalidArgument("flow: dt must not exceed t_end");
  if (stride < 1) throw InvalidArgument("flow: stride must be >= 1");
}

std::size_t FlowConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

ParticleEnsemble flow_step(const ParticleEnsemble& ens,
                           const MirrorPotential& pot, VelocityEvaluator& vel,
                           double dt, FlowDomain domain) {
  if (ens.empty()) throw InvalidArgument("flow_step: empty ensemble");
  if (dt == 0.0) return ens;
  const Mat v = vel.field(ens);
  Mat next(ens.dim(), ens.size());
  parallel_for(static_cast<std::size_t>(ens.size()),
               [&](std::size_t begin, std::size_t end) {
                 Vec theta(ens.dim());
                 Vec w(ens.dim());
                 for (std::size_t j = begin; j < end; ++j) {
                   const auto jj = static_cast<Eigen::Index>(j);
                   theta = ens.particle(jj);
                   w = v.col(jj);
                   if (domain == FlowDomain::Dual) {
                     next.col(jj) = pot.grad_inv(pot.grad(theta) + dt * w);
                   } else {
                     next.col(jj) = theta + dt * pot.hessian_inv_apply(theta, w);
                   }
                 }
               });
  if (!next.allFinite())
    throw NumericalFailure("flow_step: non-finite particle");
  return ParticleEnsemble(std::move(next));
}

FlowTrajectory solve(const ParticleEnsemble& initial, const FlowConfig& config,
                     const MirrorPotential& pot, VelocityEvaluator& vel,
                     const ObservableBattery& battery) {
  config.validate();
  FlowTrajectory traj;
  traj.observable_ids = battery.ids();
  ParticleEnsemble ens = initial;
  traj.record_observables(0.0, battery.evaluate(ens));
  traj.record_snapshot(0.0, ens);
  const std::size_t steps = config.steps();
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      ens = flow_step(ens, pot, vel, config.dt, config.domain);
    } catch (const NumericalFailure& e) {
      std::ostringstream msg;
      msg << "flow step " << k << ": " << e.what();
      throw NumericalFailure(msg.str(), e.diagnostic());
    }
    const double t = static_cast<double>(k) * config.dt;
    traj.record_observables(t, battery.evaluate(ens));
    if (k % config.stride == 0) traj.record_snapshot(t, ens);
  }
  return traj;
}

FlowTrajectory solve(const InitialDistribution& rho0, const FlowConfig& config,
                     const MirrorPotential& pot, VelocityEvaluator& vel,
                     const ObservableBattery& battery) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0));
  return solve(rho0.sample(config.m, rng), config, pot, vel, battery);
}

namespace {

Mat residual_table(const FlowTrajectory& traj, const MirrorPotential& pot,
                   VelocityEvaluator& vel, const std::vector<TestFunction>& fns) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3)
    throw InvalidArgument("weak_residual: needs at least 3 snapshots");
  const auto nf = static_cast<Eigen::Index>(fns.size());
  auto averages = [&](const ParticleEnsemble& ens) {
    Vec a(nf);
    for (Eigen::Index f = 0; f < nf; ++f) a[f] = average(ens, fns[static_cast<std::size_t>(f)]);
    return a;
  };
  Mat out(static_cast<Eigen::Index>(snaps.size() - 2), nf);
  for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
    const Vec lhs = (averages(snaps[k + 1].ensemble) - averages(snaps[k - 1].ensemble)) /
                    (snaps[k + 1].t - snaps[k - 1].t);
    const ParticleEnsemble& ens = snaps[k].ensemble;
    const Mat v = vel.field(ens);
    Vec rhs = Vec::Zero(nf);
    Vec theta(ens.dim());
    for (Eigen::Index j = 0; j < ens.size(); ++j) {
      theta = ens.particle(j);
      const Vec drift = pot.hessian_inv_apply(theta, v.col(j));
      for (Eigen::Index f = 0; f < nf; ++f)
        rhs[f] += fns[static_cast<std::size_t>(f)].grad(theta).dot(drift);
    }
    out.row(static_cast<Eigen::Index>(k - 1)) =
        (lhs - rhs / static_cast<double>(ens.size())).transpose();
  }
  return out;
}

}  // namespace

Mat weak_residual(const FlowTrajectory& traj, const MirrorPotential& pot,
                  VelocityEvaluator& vel, const ObservableBattery& battery) {
  std::vector<TestFunction> fns;
  for (std::size_t f = 0; f < battery.size(); ++f) fns.push_back(battery[f]);
  return residual_table(traj, pot, vel, fns);
}

std::vector<double> weak_residual(const FlowTrajectory& traj,
                                  const MirrorPotential& pot,
                                  VelocityEvaluator& vel,
                                  const TestFunction& f) {
  const Mat r = residual_table(traj, pot, vel, {f});
  return {r.data(), r.data() + r.size()};
}

}  // namespace mfsmd
