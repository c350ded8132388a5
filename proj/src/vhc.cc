#include "vhcplan/vhc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "vhcplan/errors.h"
#include "vhcplan/numerics/roots.h"

namespace vhcplan {

ParametricVhc tic_toc_vhc(Interval domain) {
  ParametricVhc vhc;
  vhc.phi = [](double th) {
    return Vector(Eigen::Vector3d(th, -0.5 * th * th,
                                  0.5 * std::numbers::pi - std::atan(2.0 * th)));
  };
  vhc.dphi = [](double th) {
    return Vector(Eigen::Vector3d(1.0, -th, -2.0 / (1.0 + 4.0 * th * th)));
  };
  vhc.ddphi = [](double th) {
    const double d = 1.0 + 4.0 * th * th;
    return Vector(Eigen::Vector3d(0.0, -1.0, 16.0 * th / (d * d)));
  };
  vhc.domain = domain;
  return vhc;
}

namespace {

// B_perp at phi(theta), sign carried by continuity from the domain midpoint.
RowVector annihilator_on_curve(const MechanicalSystem& sys, const ParametricVhc& vhc,
                               double theta) {
  if (sys.has_closed_form_annihilator()) return left_annihilator(sys, vhc.phi(theta));
  const double start = vhc.domain.mid();
  RowVector b = left_annihilator(sys, vhc.phi(start));
  const int steps = std::clamp(static_cast<int>(std::ceil(std::abs(theta - start) / 0.02)), 1, 512);
  for (int i = 1; i <= steps; ++i) {
    const double th = start + (theta - start) * i / steps;
    b = align_annihilator(left_annihilator(sys, vhc.phi(th)), b);
  }
  return b;
}

ReducedCoefficients coefficients_unchecked(const MechanicalSystem& sys,
                                           const ParametricVhc& vhc, double theta) {
  const Vector q = vhc.phi(theta);
  const Vector dq = vhc.dphi(theta);
  const Vector ddq = vhc.ddphi(theta);
  const RowVector b = annihilator_on_curve(sys, vhc, theta);
  const Matrix m = sys.mass(q);
  ReducedCoefficients c;
  c.alpha = (b * m * dq).value();
  c.beta = (b * m * ddq + b * sys.coriolis(q, dq) * dq).value();
  c.gamma = (b * sys.gravity(q)).value();
  return c;
}

double richardson_derivative(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * (1.0 + std::abs(x));
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

ReducedCoefficients reduced_coefficients(const MechanicalSystem& sys,
                                         const ParametricVhc& vhc, double theta) {
  if (!vhc.domain.contains(theta)) {
    throw PreconditionError("reduced_coefficients: theta outside the VHC domain");
  }
  return coefficients_unchecked(sys, vhc, theta);
}

ReducedModel::ReducedModel(CoefficientFn coefficients, Interval domain)
    : coefficients_(std::move(coefficients)), domain_(domain) {
  if (!coefficients_) throw PreconditionError("ReducedModel: coefficient evaluator required");
  if (!(domain_.hi > domain_.lo)) throw PreconditionError("ReducedModel: empty domain");
}

ReducedModel ReducedModel::from_vhc(const MechanicalSystem& sys, const ParametricVhc& vhc) {
  return ReducedModel(
      [sys, vhc](double theta) { return coefficients_unchecked(sys, vhc, theta); },
      vhc.domain);
}

ReducedCoefficients ReducedModel::operator()(double theta) const {
  if (!domain_.contains(theta)) throw PreconditionError("ReducedModel: theta outside domain");
  return coefficients_(theta);
}

ReducedModel ReducedModel::restricted(Interval domain) const {
  if (domain.lo < domain_.lo || domain.hi > domain_.hi) {
    throw PreconditionError("ReducedModel::restricted: interval exceeds the model domain");
  }
  return ReducedModel(coefficients_, domain);
}

ReducedCoefficients ReducedModel::derivative(double theta) const {
  ReducedCoefficients d;
  d.alpha = richardson_derivative([&](double x) { return coefficients_(x).alpha; }, theta);
  d.beta = richardson_derivative([&](double x) { return coefficients_(x).beta; }, theta);
  d.gamma = richardson_derivative([&](double x) { return coefficients_(x).gamma; }, theta);
  return d;
}

double ReducedModel::acceleration(double theta, double theta_dot) const {
  const ReducedCoefficients c = coefficients_(theta);
  return -(c.beta * theta_dot * theta_dot + c.gamma) / c.alpha;
}

SingularityReport check_singular_crossing(const ReducedModel& model,
                                          const CrossingCheckOptions& options) {
  if (options.grid_points < 3) throw PreconditionError("check_singular_crossing: grid too coarse");
  const Interval dom = model.domain();
  const int n = options.grid_points;
  std::vector<double> grid(n), alpha(n), gamma(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = (i == n - 1) ? dom.hi : dom.lo + dom.length() * i / (n - 1);
    const ReducedCoefficients c = model(grid[i]);
    alpha[i] = c.alpha;
    gamma[i] = c.gamma;
  }

  auto alpha_fn = [&](double x) { return model(x).alpha; };
  std::vector<double> zeros;
  auto add_zero = [&](double z) {
    for (double existing : zeros) {
      if (std::abs(existing - z) < options.merge_distance) return;
    }
    zeros.push_back(z);
  };
  for (int i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) {
      add_zero(grid[i]);
      continue;
    }
    if (i + 1 < n && alpha[i] * alpha[i + 1] < 0.0) {
      double z = numerics::bisect_root(alpha_fn, grid[i], grid[i + 1], 1e-15 * (1.0 + std::abs(grid[i])));
      if (std::abs(alpha_fn(z)) > options.zero_tolerance) {
        // Bracket collapsed onto a pole or jump rather than a zero.
        continue;
      }
      add_zero(z);
    }
  }
  std::sort(zeros.begin(), zeros.end());

  SingularityReport report;
  report.zeros = zeros;
  report.flags.unique_zero = zeros.size() == 1;
  if (zeros.empty()) {
    report.theta_s = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  report.theta_s = zeros.front();
  const double slope = model.derivative(report.theta_s).alpha;
  const ReducedCoefficients at_s = model(report.theta_s);
  const double ratio = at_s.beta / slope;

  auto flags_for = [&](double sign) {
    SingularityFlags f;
    f.unique_zero = zeros.size() == 1;
    f.slope_positive = sign * slope > options.slope_tolerance;
    f.gamma_positive_on_interval =
        std::all_of(gamma.begin(), gamma.end(), [sign](double g) { return sign * g > 0.0; });
    f.ratio_below_minus_half = ratio < -0.5;
    return f;
  };
  auto passes = [](const SingularityFlags& f) {
    return f.unique_zero && f.slope_positive && f.gamma_positive_on_interval &&
           f.ratio_below_minus_half;
  };

  double sign = slope >= 0.0 ? 1.0 : -1.0;
  for (double candidate : {1.0, -1.0}) {
    if (passes(flags_for(candidate))) {
      sign = candidate;
      break;
    }
  }
  report.sign = sign;
  report.flags = flags_for(sign);
  report.overall = passes(report.flags);
  report.alpha_slope = sign * slope;
  report.beta_s = sign * at_s.beta;
  report.gamma_s = sign * at_s.gamma;
  if (report.beta_s < 0.0 && report.gamma_s > 0.0) {
    report.v_s = std::sqrt(-report.gamma_s / report.beta_s);
  }
  return report;
}

ParametricVhc family_vhc(const MechanicalSystem& sys, const Vector& q_s,
                         const FamilyParameters& k, Interval domain) {
  if (q_s.size() != sys.dof() || sys.num_inputs() != 2) {
    throw PreconditionError("family_vhc: needs a three-coordinate, two-input system");
  }
  const Vector linear = sys.input_map(q_s) * Eigen::Vector2d(k.k1, k.k2);
  if (linear.norm() < 1e-12) {
    throw PreconditionError("family_vhc: degenerate parameters, phi'(0) = 0");
  }
  const Vector quadratic = k.k3 * left_annihilator(sys, q_s).transpose();
  ParametricVhc vhc;
  vhc.phi = [q_s, linear, quadratic](double th) {
    return Vector(q_s + linear * th + 0.5 * quadratic * th * th);
  };
  vhc.dphi = [linear, quadratic](double th) { return Vector(linear + quadratic * th); };
  vhc.ddphi = [quadratic](double) { return quadratic; };
  vhc.domain = domain;
  return vhc;
}

FamilySearchBox FamilySearchBox::defaults() {
  FamilySearchBox box;
  for (int i = 1; i <= 8; ++i) box.k1.push_back(0.25 * i);
  for (int i = 1; i <= 8; ++i) box.k2.push_back(0.5 * i);
  for (int i = 0; i < 8; ++i) box.k3.push_back(-2.0 + 0.25 * i);
  box.theta_max = {0.5, 0.35, 0.2};
  return box;
}

std::optional<FamilyFit> find_family_parameters(double psi_s, const FamilySearchBox& box) {
  const double pi = std::numbers::pi;
  if (!(psi_s > 0.0 && psi_s < 2.0 * pi) || std::abs(psi_s - pi) < 1e-12) {
    throw PreconditionError("find_family_parameters: psi_s must lie in (0, pi) U (pi, 2 pi)");
  }
  const MechanicalSystem sys = pvtol_model();
  const Vector q_s = Eigen::Vector3d(0.0, 0.0, psi_s);
  // Shifting psi_s by pi negates every coefficient unless k1 and k3 change
  // sign too, so attitudes in (pi, 2 pi) search the mirrored box.
  const double mirror = std::sin(psi_s) > 0.0 ? 1.0 : -1.0;
  for (double theta_max : box.theta_max) {
    const Interval interval{-theta_max, theta_max};
    // gamma = sin(psi_s + k2 theta) must keep one sign on the closed interval.
    for (double k1 : box.k1) {
      for (double k2 : box.k2) {
        if (mirror * std::sin(psi_s - k2 * theta_max) <= 0.0 ||
            mirror * std::sin(psi_s + k2 * theta_max) <= 0.0) {
          continue;
        }
        for (double k3 : box.k3) {
          const FamilyParameters k{mirror * k1, k2, mirror * k3};
          const ParametricVhc vhc = family_vhc(sys, q_s, k, interval);
          const SingularityReport report =
              check_singular_crossing(ReducedModel::from_vhc(sys, vhc));
          if (report.overall) return FamilyFit{k, interval, report};
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<SingularTime> scan_singular_times(const MechanicalSystem& sys,
                                              const PeriodicTrajectory& traj,
                                              const SingularScanOptions& options) {
  const auto& samples = traj.samples();
  if (static_cast<int>(samples.size()) < options.min_samples) {
    throw PreconditionError("scan_singular_times: trajectory sampled too coarsely");
  }
  const double t0 = traj.start();
  const double period = traj.period();

  // Signed B_perp M q' with B_perp carried by continuity along the samples.
  std::vector<double> values(samples.size() + 1);
  std::vector<RowVector> annihilators(samples.size() + 1);
  RowVector previous = left_annihilator(sys, samples.front().q);
  auto projected = [&](const TrajectorySample& s, const RowVector& b) {
    return b.dot(sys.mass(s.q) * s.qdot);
  };
  for (std::size_t k = 0; k <= samples.size(); ++k) {
    // The wrap point is sample 0 again, with the annihilator carried once around.
    const TrajectorySample& s = samples[k < samples.size() ? k : 0];
    previous = align_annihilator(left_annihilator(sys, s.q), previous);
    annihilators[k] = previous;
    values[k] = projected(s, previous);
  }

  std::vector<double> times;
  auto add_time = [&](double t) {
    double u = std::fmod(t - t0, period);
    if (u < 0.0) u += period;
    if (period - u < options.merge_distance) u = 0.0;
    for (double existing : times) {
      const double d = std::abs(existing - u);
      if (std::min(d, period - d) < options.merge_distance) return;
    }
    times.push_back(u);
  };

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double ta = t0 + period * static_cast<double>(k) / samples.size();
    const double tb = t0 + period * static_cast<double>(k + 1) / samples.size();
    if (values[k] == 0.0) {
      add_time(ta);
      continue;
    }
    if (values[k] * values[k + 1] > 0.0) continue;
    const RowVector reference = annihilators[k];
    auto g = [&](double t) {
      const TrajectorySample s = traj.at(t);
      return projected(s, align_annihilator(left_annihilator(sys, s.q), reference));
    };
    add_time(numerics::bisect_root(g, ta, tb, 1e-14 * (1.0 + std::abs(tb))));
  }
  std::sort(times.begin(), times.end());

  std::vector<SingularTime> out;
  for (double u : times) {
    const TrajectorySample s = traj.at(t0 + u);
    const double speed = s.qdot.norm();
    if (speed <= options.velocity_threshold) continue;
    SingularTime st;
    st.t = t0 + u;
    st.q = s.q;
    st.qdot = s.qdot;
    st.velocity_norm = speed;
    st.annihilator_residual = std::abs(projected(s, left_annihilator(sys, s.q)));
    st.gravity_distance = gravity_distance(sys, s.q);
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace vhcplan
