#include "mfsmd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "mfsmd/errors.hpp"
#include "mfsmd/io.hpp"
#include "mfsmd/meanfield.hpp"
#include "mfsmd/metrics.hpp"
#include "mfsmd/riemannian.hpp"
#include "mfsmd/smd.hpp"
#include "mfsmd/svg.hpp"

namespace mfsmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
auto as_config(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

struct Problem {
  LabeledGaussianMixture data;
  Activation act;
  Loss loss;
  MirrorPotential pot;
  InitialDistribution rho0;
  bool closed_available = false;  // erf activation with squared loss
  bool closed_mode = false;
  std::size_t batch = 1000;
  int gh_order = VelocityEvaluator::kDefaultGhOrder;
  std::uint64_t velocity_seed = 1;
  std::uint64_t data_seed = 1;

  VelocityEvaluator velocity() const {
    return closed_mode ? VelocityEvaluator::closed_form(data, gh_order)
                       : VelocityEvaluator::monte_carlo(act, loss, data, batch, velocity_seed);
  }
};

LabeledGaussianMixture read_data(const Config& c) {
  const std::string file = c.text("data.file");
  const double radius = c.real("data.radius"), s = c.real("data.s");
  return as_config([&] {
    return file.empty() ? paper_dataset(radius, s) : LabeledGaussianMixture::load(file);
  });
}

MirrorPotential read_potential(const Config& c) {
  const std::string kind = c.choice("potential.kind", {"euclidean", "pnorm"});
  const double p = c.real("potential.p"), eps = c.real("potential.eps");
  return as_config([&] {
    return kind == "euclidean" ? MirrorPotential::euclidean() : MirrorPotential::pnorm(p, eps);
  });
}

Problem read_problem(const Config& c) {
  const auto data = read_data(c);
  const Activation act{c.choice("model.activation", {"erf", "tanh"}) == "erf"
                           ? ActivationKind::Erf
                           : ActivationKind::Tanh};
  const Loss loss{c.choice("model.loss", {"squared", "logistic"}) == "squared"
                      ? LossKind::Squared
                      : LossKind::Logistic};
  const double init_std = c.real("init.std");
  Problem p{data,
            act,
            loss,
            read_potential(c),
            as_config([&] { return InitialDistribution::gaussian(data.dim(), init_std); })};
  p.closed_available = act.kind == ActivationKind::Erf && loss.kind == LossKind::Squared;
  p.closed_mode = c.choice("velocity.mode", {"closed", "mc"}) == "closed";
  if (p.closed_mode && !p.closed_available)
    throw ConfigError("config: velocity.mode = closed needs model.activation = erf and "
                      "model.loss = squared");
  p.batch = c.count("velocity.batch");
  p.gh_order = static_cast<int>(c.integer("velocity.gh_order"));
  p.velocity_seed = c.seed("velocity.seed");
  p.data_seed = c.seed("data.seed");
  as_config([&] { (void)p.velocity(); });
  if (p.closed_available) as_config([&] { (void)VelocityEvaluator::closed_form(p.data, p.gh_order); });
  if (!p.closed_available && p.batch < 2) throw ConfigError("config: velocity.batch must be >= 2");
  return p;
}

// Closed-form risk when the model admits it, Monte Carlo otherwise.
class RiskMeter {
 public:
  explicit RiskMeter(const Problem& p) : p_(p) {
    if (p.closed_available) closed_.emplace(VelocityEvaluator::closed_form(p.data, p.gh_order));
  }
  double operator()(const ParticleEnsemble& ens) const {
    if (closed_) return risk_closed(ens, *closed_);
    return risk_mc(ens, p_.act, p_.loss, p_.data, p_.batch, p_.data_seed).mean;
  }
  std::vector<double> curve(const FlowTrajectory& traj) const {
    std::vector<double> out;
    for (const auto& s : traj.snapshots) out.push_back((*this)(s.ensemble));
    return out;
  }

 private:
  const Problem& p_;
  std::optional<VelocityEvaluator> closed_;
};

std::vector<double> snapshot_times(const FlowTrajectory& traj) {
  std::vector<double> t;
  for (const auto& s : traj.snapshots) t.push_back(s.t);
  return t;
}

FlowDomain read_domain(const Config& c) {
  return c.choice("flow.domain", {"dual", "primal"}) == "dual" ? FlowDomain::Dual
                                                               : FlowDomain::Primal;
}

FlowConfig read_flow(const Config& c) {
  FlowConfig f;
  f.m = c.count("flow.m");
  f.dt = c.real("flow.dt");
  f.t_end = c.real("flow.t_end");
  f.domain = read_domain(c);
  f.stride = c.count("flow.stride");
  f.seed = c.seed("flow.seed");
  as_config([&] { f.validate(); });
  return f;
}

TrainConfig read_train(const Config& c) {
  TrainConfig t;
  t.n = c.count("train.n");
  t.tau = c.real("train.tau");
  t.delta = c.real("train.delta");
  t.stride = c.count("train.stride");
  t.seed = c.seed("train.seed");
  as_config([&] { t.validate(); });
  return t;
}

std::string compact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Least-squares slope of log(y) against log(x); nullopt when undefined.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) return std::nullopt;
    mx += std::log(x[i]) / static_cast<double>(x.size());
    my += std::log(y[i]) / static_cast<double>(x.size());
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

// ---------------------------------------------------------------- verify

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<Vec> off_axis_cloud(std::size_t count, Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> mag(0.1, 1.5);
  std::bernoulli_distribution sign(0.5);
  std::vector<Vec> pts;
  for (std::size_t k = 0; k < count; ++k) {
    Vec t(dim);
    for (Eigen::Index i = 0; i < dim; ++i) t[i] = (sign(rng) ? 1 : -1) * mag(rng);
    pts.push_back(t);
  }
  return pts;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

double rel_err(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

struct Check {
  std::string name;
  double value;
  double tolerance;
};

std::vector<Check> run_checks(const Problem& prob, std::uint64_t seed) {
  std::vector<Check> checks;
  const auto& data = prob.data;
  const Eigen::Index d = data.dim();
  const auto vel = VelocityEvaluator::closed_form(data, prob.gh_order);
  const auto cloud = off_axis_cloud(20, d, derive_seed(seed, 10));
  const auto pnorm = prob.pot.is_identity() ? MirrorPotential::pnorm(1.5) : prob.pot;
  const std::string plabel = "p=" + compact(pnorm.p());

  double worst = 0.0;
  for (const Vec& t : cloud) worst = std::max(worst, (pnorm.grad_inv(pnorm.grad(t)) - t).cwiseAbs().maxCoeff());
  checks.push_back({"potential.inverse_roundtrip(" + plabel + ")", worst, 1e-9});

  worst = 0.0;
  for (const Vec& t : cloud) {
    Mat fd(d, d);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < d; ++j) {
      Vec a = t, b = t;
      a[j] += h;
      b[j] -= h;
      fd.col(j) = (pnorm.grad(a) - pnorm.grad(b)) / (2 * h);
    }
    worst = std::max(worst, rel_err(pnorm.hessian(t), fd));
  }
  checks.push_back({"potential.hessian_vs_fd(" + plabel + ")", worst, 1e-5});

  worst = 0.0;
  for (const Vec& t : cloud)
    worst = std::max(worst, rel_err(vel.big_v_grad(t),
                                    fd_gradient([&](const Vec& y) { return vel.big_v(y); }, t, 1e-5)));
  checks.push_back({"velocity.big_v_grad_vs_fd", worst, 1e-5});

  worst = 0.0;
  for (std::size_t k = 0; k + 1 < cloud.size(); ++k) {
    const Vec& other = cloud[k + 1];
    worst = std::max(worst, rel_err(vel.big_u_grad1(cloud[k], other),
                                    fd_gradient([&](const Vec& y) { return vel.big_u(y, other); },
                                                cloud[k], 1e-5)));
  }
  checks.push_back({"velocity.big_u_grad1_vs_fd", worst, 1e-5});

  worst = 0.0;
  {
    const auto fine = VelocityEvaluator::closed_form(data, 2 * prob.gh_order);
    for (std::size_t k = 0; k + 1 < cloud.size(); ++k)
      worst = std::max(worst, std::abs(vel.big_u(cloud[k], cloud[k + 1]) -
                                       fine.big_u(cloud[k], cloud[k + 1])));
  }
  checks.push_back({"velocity.quadrature_order_doubling", worst, 1e-8});

  // z-scores against Monte Carlo at B = 1e5
  const Activation erf_act{};
  const Loss squared{};
  Rng rng(derive_seed(seed, 11));
  worst = 0.0;
  {
    auto mc = VelocityEvaluator::monte_carlo(erf_act, squared, data, 100000, derive_seed(seed, 12));
    for (std::size_t k = 0; k < 20; ++k) {
      const auto ens = InitialDistribution::gaussian(d, 1.0).sample(8, rng);
      const Vec& t = cloud[k];
      const auto est = mc.v_mc_estimate(t, ens);
      const Vec exact = vel.v_closed(t, ens);
      for (Eigen::Index i = 0; i < d; ++i)
        worst = std::max(worst, std::abs(est.mean[i] - exact[i]) / est.std_error[i]);
    }
  }
  checks.push_back({"velocity.closed_vs_mc_zscore", worst, 4.0});

  worst = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto ens = InitialDistribution::gaussian(d, 1.0 + 0.05 * static_cast<double>(k)).sample(8, rng);
    const auto mc = risk_mc(ens, erf_act, squared, data, 100000, derive_seed(seed, 100 + k));
    worst = std::max(worst, std::abs(risk_closed(ens, vel) - mc.mean) / mc.std_error);
  }
  checks.push_back({"metrics.risk_closed_vs_mc_zscore", worst, 4.0});

  if (d == 2) {
    const ScalarField bump = [](const Vec& t) {
      return std::exp(-0.5 * (t - v2(0.2, -0.1)).squaredNorm() / 0.8);
    };
    const ScalarField phi = [](const Vec& t) {
      return std::sin(t[0]) * std::cos(0.5 * t[1]) + 0.3 * t.squaredNorm();
    };
    const VectorField minus_grad_phi = [](const Vec& t) {
      return Vec(-v2(std::cos(t[0]) * std::cos(0.5 * t[1]) + 0.6 * t[0],
                     -0.5 * std::sin(t[0]) * std::sin(0.5 * t[1]) + 0.6 * t[1]));
    };
    const MetricField flat{MirrorPotential::euclidean()};
    const MetricField curved{pnorm};
    double r_flat = 0.0, r_curved = 0.0;
    for (const Vec& t : cloud) {
      r_flat = std::max(r_flat, std::abs(riemannian_form_residual(flat, bump, phi, minus_grad_phi, t)));
      r_curved = std::max(r_curved, std::abs(riemannian_form_residual(curved, bump, phi, minus_grad_phi, t)));
    }
    checks.push_back({"riemannian.residual(p=2)", r_flat, 1e-6});
    checks.push_back({"riemannian.residual(" + plabel + ")", r_curved, 1e-4});

    const auto ens = InitialDistribution::gaussian(2, 1.0).sample(15, rng);
    worst = 0.0;
    for (const MetricField* m : {&flat, &curved})
      for (std::size_t k = 0; k < 10; ++k) {
        const Vec& t = cloud[k];
        const Vec lhs = m->potential().hessian_inv_apply(t, vel.v_closed(t, ens));
        const VectorField dphi = [&](const Vec& y) { return first_variation_grad_fd(ens, y, vel); };
        worst = std::max(worst, (lhs + grad_g(*m, dphi, t)).norm());
      }
    checks.push_back({"riemannian.natural_gradient_identity", worst, 1e-4});
  }

  {
    auto flow_vel = VelocityEvaluator::closed_form(data, prob.gh_order);
    const auto euclid = MirrorPotential::euclidean();
    auto a = InitialDistribution::gaussian(d, 1.0).sample(30, rng), b = a;
    worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      a = flow_step(a, euclid, flow_vel, 0.05, FlowDomain::Dual);
      b = flow_step(b, euclid, flow_vel, 0.05, FlowDomain::Primal);
      worst = std::max(worst, (a.thetas() - b.thetas()).cwiseAbs().maxCoeff());
    }
  }
  checks.push_back({"meanfield.euclidean_dual_equals_primal", worst, 1e-12});

  {
    const auto euclid = MirrorPotential::euclidean();
    const double tau = 0.5;
    auto state = init(InitialDistribution::gaussian(d, 1.0), 16, euclid, tau, rng);
    Mat manual = state.thetas;
    Rng stream(derive_seed(seed, 13));
    worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Sample z = data.sample_one(stream);
      const ParticleEnsemble ens(manual);
      const double yhat = predict(ens, erf_act, z.x);
      Mat next = manual;
      for (Eigen::Index j = 0; j < manual.cols(); ++j)
        next.col(j) += (tau / 16.0) * grad_F(erf_act, squared, manual.col(j), yhat, z);
      manual = next;
      state = step(state, euclid, erf_act, squared, z);
      worst = std::max(worst, (state.thetas - manual).cwiseAbs().maxCoeff());
    }
  }
  checks.push_back({"smd.euclidean_equals_sgd", worst, 0.0});
  return checks;
}

}  // namespace

// ---------------------------------------------------------------- commands

int cmd_train(const Config& config, std::ostream& out) {
  const Problem prob = read_problem(config);
  const TrainConfig tc = read_train(config);
  const fs::path dir = config.text("output.dir");

  Rng rng(derive_seed(tc.seed, 0));
  const auto state = init(prob.rho0, tc.n, prob.pot, tc.tau, rng);
  const auto traj = run(state, tc, prob.data, prob.pot, prob.act, prob.loss,
                        ObservableBattery::standard(prob.data.dim()));
  const auto risk = RiskMeter(prob).curve(traj);

  write_atomic(dir / "train_snapshots.csv", snapshots_csv(traj));
  write_atomic(dir / "train_observables.csv", observables_csv(traj));
  write_atomic(dir / "train_risk.csv", series_csv("risk", snapshot_times(traj), risk));
  out << "train: " << tc.steps() << " steps, n = " << tc.n << ", t_end = " << traj.end_time()
      << ", risk " << fixed(risk.front(), 4) << " -> " << fixed(risk.back(), 4) << "\n"
      << "wrote " << (dir / "train_{snapshots,observables,risk}.csv").string() << "\n";
  return kExitOk;
}

int cmd_flow(const Config& config, std::ostream& out) {
  const Problem prob = read_problem(config);
  const FlowConfig fc = read_flow(config);
  const fs::path dir = config.text("output.dir");

  auto vel = prob.velocity();
  const auto battery = ObservableBattery::standard(prob.data.dim());
  const auto traj = solve(prob.rho0, fc, prob.pot, vel, battery);
  const auto risk = RiskMeter(prob).curve(traj);
  std::vector<double> residual_t;
  Mat residual(0, static_cast<Eigen::Index>(battery.size()));
  if (traj.snapshots.size() >= 3) {
    residual = weak_residual(traj, prob.pot, vel, battery);
    for (std::size_t k = 1; k + 1 < traj.snapshots.size(); ++k) residual_t.push_back(traj.snapshots[k].t);
  }

  write_atomic(dir / "flow_snapshots.csv", snapshots_csv(traj));
  write_atomic(dir / "flow_observables.csv", observables_csv(traj));
  write_atomic(dir / "flow_risk.csv", series_csv("risk", snapshot_times(traj), risk));
  write_atomic(dir / "flow_residual.csv", residual_csv(residual_t, battery.ids(), residual));
  out << "flow: " << fc.steps() << " steps, m = " << fc.m << ", t_end = " << traj.end_time()
      << ", risk " << fixed(risk.front(), 4) << " -> " << fixed(risk.back(), 4);
  if (residual.size() > 0) out << ", max |weak residual| " << residual.cwiseAbs().maxCoeff();
  out << "\nwrote " << (dir / "flow_{snapshots,observables,risk,residual}.csv").string() << "\n";
  return kExitOk;
}

int cmd_converge(const Config& config, std::ostream& out) {
  const Problem prob = read_problem(config);
  const TrainConfig base = read_train(config);
  const auto ladder = config.count_list("converge.ladder");
  const std::size_t seeds = config.count("converge.seeds");
  const std::string init_mode = config.choice("converge.init", {"fresh", "shared", "both"});
  FlowConfig ref;
  ref.m = config.count("converge.ref_m");
  ref.dt = config.real("converge.ref_dt");
  ref.t_end = base.horizon();
  ref.domain = read_domain(config);
  ref.seed = config.seed("flow.seed");
  const fs::path dir = config.text("output.dir");
  if (seeds < 1) throw ConfigError("config: converge.seeds must be >= 1");
  if (!(base.delta > 0.0)) throw ConfigError("config: converge needs train.delta > 0");
  as_config([&] { ref.validate(); });
  ref.stride = std::max<std::size_t>(ref.steps(), 1);

  std::vector<std::string> modes;
  if (init_mode != "shared") modes.push_back("fresh");
  if (init_mode != "fresh") modes.push_back("shared");

  const auto battery = ObservableBattery::standard(prob.data.dim());
  auto vel = prob.velocity();
  std::optional<FlowTrajectory> fresh_ref;
  if (init_mode != "shared") fresh_ref = solve(prob.rho0, ref, prob.pot, vel, battery);

  std::string table = "n,seed,init,distance\n", summary = "init,n,median\n";
  json studies = json::array();
  for (const auto& mode : modes) {
    std::vector<double> ns, medians;
    for (std::size_t n : ladder) {
      std::vector<double> dist;
      for (std::size_t s = 0; s < seeds; ++s) {
        TrainConfig tc = base;
        tc.n = n;
        tc.stride = std::max<std::size_t>(tc.steps(), 1);
        tc.seed = base.seed + s;
        Rng rng(derive_seed(tc.seed, 0));
        const auto start = prob.rho0.sample(n, rng);
        const auto smd = run(init(start, prob.pot, tc.tau), tc, prob.data, prob.pot, prob.act,
                             prob.loss, battery);
        double d;
        if (mode == "fresh") {
          d = observable_distance(smd, *fresh_ref);
        } else {
          FlowConfig own = ref;
          own.m = n;
          d = observable_distance(smd, solve(start, own, prob.pot, vel, battery));
        }
        dist.push_back(d);
        table += std::to_string(n) + ',' + std::to_string(tc.seed) + ',' + mode + ',' +
                 format_real(d) + '\n';
      }
      ns.push_back(static_cast<double>(n));
      medians.push_back(median(dist));
      summary += mode + ',' + std::to_string(n) + ',' + format_real(medians.back()) + '\n';
      out << "converge[" << mode << "] n = " << n << ": median distance " << medians.back() << "\n";
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i) decreasing = decreasing && medians[i] < medians[i - 1];
    const auto slope = loglog_slope(ns, medians);
    out << "converge[" << mode << "] slope "
        << (slope ? compact(*slope) : std::string("undefined"))
        << (decreasing ? ", strictly decreasing" : ", not strictly decreasing") << "\n";
    studies.push_back({{"init", mode},
                       {"ladder", ns},
                       {"medians", medians},
                       {"slope", slope ? json(*slope) : json(nullptr)},
                       {"strictly_decreasing", decreasing}});
  }
  const json report = {{"horizon", ref.t_end},
                       {"seeds", seeds},
                       {"reference", {{"m", ref.m}, {"dt", ref.dt}}},
                       {"studies", studies}};
  write_atomic(dir / "converge.csv", table);
  write_atomic(dir / "converge_summary.csv", summary);
  write_atomic(dir / "converge.json", report.dump(2) + "\n");
  out << "wrote " << (dir / "converge{.csv,_summary.csv,.json}").string() << "\n";
  return kExitOk;
}

int cmd_reproduce_paper(const Config& config, std::ostream& out) {
  const Problem prob = read_problem(config);
  FlowConfig fc;
  fc.m = config.count("reproduce.m");
  fc.dt = config.real("reproduce.dt");
  fc.t_end = config.real("reproduce.t_end");
  fc.domain = read_domain(config);
  fc.seed = config.seed("flow.seed");
  const double p_alt = config.real("reproduce.p");
  const double threshold = config.real("reproduce.threshold");
  const auto times = config.real_list("reproduce.times");
  const double eps = config.real("potential.eps");
  const fs::path dir = config.text("output.dir");
  as_config([&] { fc.validate(); });
  if (prob.data.dim() != 2) throw ConfigError("config: reproduce-paper needs 2-d data");
  if (!(threshold >= 0.0)) throw ConfigError("config: reproduce.threshold must be >= 0");

  std::vector<std::size_t> step_of;
  std::size_t stride = 0;
  for (double t : times) {
    const double k = std::round(t / fc.dt);
    if (t < 0.0 || t > fc.t_end || std::abs(k * fc.dt - t) > 1e-9 * std::max(1.0, t))
      throw ConfigError("config: reproduce.times entry " + compact(t) +
                        " is not a multiple of reproduce.dt within [0, t_end]");
    step_of.push_back(static_cast<std::size_t>(k));
    stride = std::gcd(stride, static_cast<std::size_t>(k));
  }
  fc.stride = std::max<std::size_t>(std::gcd(stride, fc.steps()), 1);

  struct Run {
    double p;
    std::string label;
    FlowTrajectory traj;
  };
  std::vector<Run> runs;
  for (double p : {2.0, p_alt}) {
    const auto pot = as_config([&] {
      return p == 2.0 ? MirrorPotential::euclidean() : MirrorPotential::pnorm(p, eps);
    });
    auto vel = VelocityEvaluator::closed_form(prob.data, prob.gh_order);
    runs.push_back({p, "p" + compact(p),
                    solve(prob.rho0, fc, pot, vel, ObservableBattery::standard(2))});
  }

  double extent = 0.5;
  for (const auto& r : runs)
    for (std::size_t k : step_of)
      extent = std::max(extent, r.traj.snapshots[k / fc.stride].ensemble.thetas().cwiseAbs().maxCoeff());
  extent = std::ceil(2.0 * extent) / 2.0;
  const PlotBox box{-extent, extent, -extent, extent};

  const auto vel = VelocityEvaluator::closed_form(prob.data, prob.gh_order);
  const GridSpec grid_spec{};
  json summary = json::array();
  std::vector<double> final_risk, final_sparsity;
  out << "potential  final_risk  target  sparsity(" << compact(threshold) << ")  sectors\n";
  for (const auto& r : runs) {
    FlowTrajectory picked;
    std::vector<double> risk;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto& snap = r.traj.snapshots[step_of[i] / fc.stride];
      picked.record_snapshot(snap.t, snap.ensemble);
      risk.push_back(risk_closed(snap.ensemble, vel));
      write_atomic(dir / ("density_" + r.label + "_t" + compact(times[i]) + ".svg"),
                   scatter_svg(snap.ensemble.thetas(), box,
                               "particles, " + r.label + ", t = " + compact(times[i])));
    }
    const auto& last = r.traj.snapshots.back();
    const Mat grid = decision_grid(last.ensemble, prob.act, grid_spec);
    const double fr = risk_closed(last.ensemble, vel);
    const double sp = sparsity_fraction(last.ensemble, threshold);
    const int sectors = angular_sign_sectors(last.ensemble, prob.act, 1.0);
    final_risk.push_back(fr);
    final_sparsity.push_back(sp);
    write_atomic(dir / ("density_" + r.label + ".csv"), snapshots_csv(picked));
    write_atomic(dir / ("risk_" + r.label + ".csv"), series_csv("risk", times, risk));
    write_atomic(dir / ("grid_" + r.label + ".csv"), grid_csv(grid, grid_spec));
    write_atomic(dir / ("grid_" + r.label + ".svg"),
                 heatmap_svg(grid, grid_spec, "network output, " + r.label + ", t = " + compact(last.t)));

    json target = nullptr;
    if (r.p == 2.0) target = 0.4136;
    if (r.p == 1.5) target = 0.4118;
    out << r.label << std::string(11 - std::min<std::size_t>(r.label.size(), 10), ' ')
        << fixed(fr, 4) << "      " << (target.is_null() ? "  -   " : fixed(target.get<double>(), 4))
        << "        " << fixed(sp, 3) << "            " << sectors << "\n";
    summary.push_back({{"p", r.p},
                       {"label", r.label},
                       {"t_end", last.t},
                       {"final_risk", fr},
                       {"target_risk", target},
                       {"sparsity", sp},
                       {"sign_sectors", sectors},
                       {"risk_at_times", risk}});
  }
  const json report = {{"m", fc.m},
                       {"dt", fc.dt},
                       {"threshold", threshold},
                       {"times", times},
                       {"runs", summary},
                       {"risk_gap", std::abs(final_risk[1] - final_risk[0])},
                       {"sparsity_increases", final_sparsity[1] > final_sparsity[0]}};
  write_atomic(dir / "reproduce.json", report.dump(2) + "\n");
  out << "wrote " << 2 * times.size() << " density figures, 2 decision grids and reproduce.json to "
      << dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(const Config& config, std::ostream& out) {
  const Problem prob = read_problem(config);
  const double scale = config.real("verify.tolerance_scale");
  const std::uint64_t seed = config.seed("velocity.seed");
  const fs::path dir = config.text("output.dir");
  if (!(scale >= 0.0)) throw ConfigError("config: verify.tolerance_scale must be >= 0");

  const auto checks = run_checks(prob, seed);
  json rows = json::array();
  bool all_pass = true;
  for (const auto& c : checks) {
    const double tol = c.tolerance * scale;
    const bool pass = c.value <= tol;
    all_pass = all_pass && pass;
    rows.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", tol}, {"pass", pass}});
    char line[160];
    std::snprintf(line, sizeof line, "%-4s  %-44s %12.4g  <= %-10.4g\n", pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.value, tol);
    out << line;
  }
  const json report = {{"checks", rows}, {"all_pass", all_pass}};
  write_atomic(dir / "verify.json", report.dump(2) + "\n");
  out << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
  return all_pass ? kExitOk : kExitVerifyFailed;
}

int run_command(const std::string& name, const Config& config, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "train") return cmd_train(config, out);
    if (name == "flow") return cmd_flow(config, out);
    if (name == "converge") return cmd_converge(config, out);
    if (name == "reproduce-paper") return cmd_reproduce_paper(config, out);
    if (name == "verify") return cmd_verify(config, out);
    err << "error: unknown command '" << name << "'\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const SingularPoint& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::runtime_error& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace mfsmd
