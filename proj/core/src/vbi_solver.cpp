#include "driveby/vbi_solver.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "driveby/error.hpp"

namespace driveby {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

// Average-acceleration Newmark constants (gamma = 1/2, beta = 1/4).
struct Newmark {
  explicit Newmark(double dt)
      : dt(dt), a0(4.0 / (dt * dt)), a1(2.0 / dt), a2(4.0 / dt) {}
  double dt;
  double a0;  // 1 / (beta dt^2)
  double a1;  // gamma / (beta dt)
  double a2;  // 1 / (beta dt)

  template <class V>
  void update(const V& x_new, V& x, V& v, V& a) const {
    V a_new = a0 * (x_new - x) - a2 * v - a;
    v += 0.5 * dt * (a + a_new);
    a = a_new;
    x = x_new;
  }
};

struct AxleState {
  bool on_span = false;
  ShapeWeights shape;
  double r = 0.0;
  double slope = 0.0;
};

void resize_axle(AxleChannels& c, std::size_t n) {
  c.position.resize(n);
  c.on_span.resize(n);
  c.z.resize(n);
  c.z_dot.resize(n);
  c.z_ddot.resize(n);
  c.contact_force.resize(n);
  c.road.resize(n);
  c.cp_displacement.resize(n);
}

// y = (sum over on-span axles) u_i * coeff_i
void scatter(Eigen::VectorXd& y, const ShapeWeights& w, double coeff) {
  for (int k = 0; k < 4; ++k)
    if (w.dof[k] >= 0) y[w.dof[k]] += w.weight[k] * coeff;
}

[[noreturn]] void fail_non_finite(std::size_t step, double t) {
  std::ostringstream msg;
  msg << "crossing solver: non-finite state at step " << step << " (t = " << t << " s)";
  throw NumericalError(msg.str());
}

}  // namespace

void CrossingConfig::validate() const {
  if (!(speed > 0.0)) throw InvalidInput("crossing: speed must be > 0");
  if (!(time_step > 0.0)) throw InvalidInput("crossing: time_step must be > 0");
  if (duration && !(*duration > 0.0)) throw InvalidInput("crossing: duration must be > 0");
  if (!(coupling_tolerance > 0.0)) throw InvalidInput("crossing: coupling_tolerance must be > 0");
  if (max_coupling_iterations < 1)
    throw InvalidInput("crossing: max_coupling_iterations must be >= 1");
  if (!(profile_table_spacing > 0.0))
    throw InvalidInput("crossing: profile_table_spacing must be > 0");
}

std::pair<std::size_t, std::size_t> CrossingRecord::on_span_range(Axle a) const {
  const auto& flags = axle(a).on_span;
  std::size_t first = 0;
  while (first < flags.size() && !flags[first]) ++first;
  std::size_t last = first;
  while (last < flags.size() && flags[last]) ++last;
  return {first, last};
}

CrossingRecord simulate_crossing(const AssembledSystem& bridge, const HalfCarVehicle& vehicle,
                                 const RoadProfile& profile, const CrossingConfig& config) {
  config.validate();
  vehicle.validate();
  const double span = bridge.bridge().span_length;
  if (std::abs(profile.span_length() - span) > 1e-9 * span)
    throw InvalidInput("crossing: road profile span does not match the bridge");

  const double v = config.speed;
  const double dt = config.time_step;
  const double wheelbase = vehicle.wheelbase();
  const double duration = config.duration.value_or((span + wheelbase - config.entry_position) / v);
  if (!(duration > 0.0)) throw InvalidInput("crossing: vehicle never reaches the span");
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  const std::size_t samples = steps + 1;

  const ProfileTable road = profile.tabulate(std::min(config.profile_table_spacing, span / 2000.0));
  const AxleLoads loads = static_axle_loads(vehicle, config.gravity);
  const std::array<double, 2> static_load{loads.front, loads.rear};
  const std::array<double, 2> k{vehicle.k_front, vehicle.k_rear};
  const std::array<double, 2> c{vehicle.c_front, vehicle.c_rear};
  const std::array<double, 2> lever{vehicle.d_front, -vehicle.d_rear};
  const std::array<double, 2> behind{0.0, wheelbase};

  const Newmark nm(dt);
  const SparseMatrix& mb = bridge.mass();
  const SparseMatrix& cb = bridge.damping();
  const SparseMatrix& kb = bridge.stiffness();
  const SparseMatrix k_eff = kb + nm.a1 * cb + nm.a0 * mb;
  Factor bridge_solver(k_eff);
  if (bridge_solver.info() != Eigen::Success)
    throw NumericalError("crossing solver: effective bridge matrix factorization failed");

  const int n = bridge.dof_count();
  const Eigen::Vector2d mv(vehicle.mass, vehicle.pitch_inertia);
  // Axle incidence: z_ai = a_i . q with a_i = (1, lever_i).
  Eigen::Matrix2d a;
  a << 1.0, 1.0, lever[0], lever[1];

  auto axle_state = [&](int i, double t) {
    AxleState s;
    const double x = config.entry_position + v * t - behind[i];
    s.on_span = x >= 0.0 && x <= span;
    if (s.on_span) {
      s.shape = bridge.shape_weights(x);
      const ProfileValue pv = road.evaluate(x);
      s.r = pv.r;
      s.slope = pv.slope;
    }
    return s;
  };

  // External load vectors at a given axle configuration.
  auto external = [&](const std::array<AxleState, 2>& ax, Eigen::Vector2d& fv, Eigen::VectorXd& fb) {
    fv.setZero();
    fb.setZero();
    for (int i = 0; i < 2; ++i) {
      if (!ax[i].on_span) continue;
      const double road_drive = k[i] * ax[i].r + c[i] * v * ax[i].slope;
      fv += a.col(i) * road_drive;
      scatter(fb, ax[i].shape, -(static_load[i] + road_drive));
    }
  };

  Eigen::Vector2d q = Eigen::Vector2d::Zero(), qd = q, qdd = q;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n), zd = z, zdd = z;

  CrossingRecord rec;
  rec.time_step = dt;
  rec.speed = v;
  rec.span_length = span;
  rec.time.resize(samples);
  rec.body_z.resize(samples);
  rec.body_z_dot.resize(samples);
  rec.body_z_ddot.resize(samples);
  rec.pitch.resize(samples);
  rec.pitch_dot.resize(samples);
  rec.pitch_ddot.resize(samples);
  rec.midspan_displacement.resize(samples);
  for (auto& ch : rec.axles) resize_axle(ch, samples);
  if (config.retain_bridge_state) {
    rec.bridge_displacement.resize(n, samples);
    rec.bridge_velocity.resize(n, samples);
    rec.bridge_acceleration.resize(n, samples);
  }
  const ShapeWeights midspan = bridge.shape_weights(0.5 * span);

  auto record = [&](std::size_t j, double t, const std::array<AxleState, 2>& ax) {
    rec.time[j] = t;
    rec.body_z[j] = q[0];
    rec.body_z_dot[j] = qd[0];
    rec.body_z_ddot[j] = qdd[0];
    rec.pitch[j] = q[1];
    rec.pitch_dot[j] = qd[1];
    rec.pitch_ddot[j] = qdd[1];
    rec.midspan_displacement[j] = midspan.dot(z);
    for (int i = 0; i < 2; ++i) {
      AxleChannels& ch = rec.axles[i];
      ch.position[j] = config.entry_position + v * t - behind[i];
      ch.on_span[j] = ax[i].on_span ? 1 : 0;
      const double za = a.col(i).dot(q);
      const double zad = a.col(i).dot(qd);
      ch.z[j] = za;
      ch.z_dot[j] = zad;
      ch.z_ddot[j] = a.col(i).dot(qdd);
      double w = 0.0;
      double wd = 0.0;
      if (ax[i].on_span) {
        w = ax[i].shape.dot(z) + ax[i].r;
        wd = ax[i].shape.dot(zd) + v * ax[i].slope;
      }
      ch.road[j] = ax[i].r;
      ch.cp_displacement[j] = w;
      ch.contact_force[j] = static_load[i] - k[i] * (za - w) - c[i] * (zad - wd);
    }
    if (config.retain_bridge_state) {
      rec.bridge_displacement.col(j) = z;
      rec.bridge_velocity.col(j) = zd;
      rec.bridge_acceleration.col(j) = zdd;
    }
  };

  // Consistent initial accelerations from the t = 0 load state (all
  // displacements and velocities start at zero).
  std::array<AxleState, 2> ax{axle_state(0, 0.0), axle_state(1, 0.0)};
  {
    Eigen::Vector2d fv;
    Eigen::VectorXd fb(n);
    external(ax, fv, fb);
    qdd = fv.cwiseQuotient(mv);
    if (fb.squaredNorm() > 0.0) {
      Factor mass_solver(mb);
      zdd = mass_solver.solve(fb);
    }
  }
  record(0, 0.0, ax);

  Eigen::Vector2d fv;
  Eigen::VectorXd fb(n);
  Eigen::VectorXd rhs_b(n);
  std::array<Eigen::VectorXd, 2> pu{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd unit(n);

  for (std::size_t j = 1; j < samples; ++j) {
    const double t = static_cast<double>(j) * dt;
    ax = {axle_state(0, t), axle_state(1, t)};
    external(ax, fv, fb);

    const Eigen::Vector2d qm = nm.a0 * q + nm.a2 * qd + qdd;
    const Eigen::Vector2d qc = nm.a1 * q + qd;
    const Eigen::VectorXd zm = nm.a0 * z + nm.a2 * zd + zdd;
    const Eigen::VectorXd zc = nm.a1 * z + zd;

    // sigma = A^T qc - U^T zc : damping-predictor relative motion per axle.
    Eigen::Vector2d sigma;
    Eigen::Vector2d dyn;  // effective interface stiffness k + a1 c, zero off-span
    for (int i = 0; i < 2; ++i) {
      sigma[i] = a.col(i).dot(qc) - (ax[i].on_span ? ax[i].shape.dot(zc) : 0.0);
      dyn[i] = k[i] + nm.a1 * c[i];
    }
    Eigen::Vector2d rhs_v = fv + mv.cwiseProduct(qm);
    rhs_b = fb + mb * zm + cb * zc;
    for (int i = 0; i < 2; ++i) {
      rhs_v += a.col(i) * (c[i] * sigma[i]);
      if (ax[i].on_span) scatter(rhs_b, ax[i].shape, -c[i] * sigma[i]);
    }

    const Eigen::Vector2d mv_eff = nm.a0 * mv;
    Eigen::Vector2d q_new;
    Eigen::VectorXd z_new;

    if (config.coupling == CouplingMode::monolithic) {
      const Eigen::VectorXd y = bridge_solver.solve(rhs_b);
      Eigen::Matrix2d g = Eigen::Matrix2d::Zero();  // U^T K_eff^-1 U
      for (int i = 0; i < 2; ++i) {
        if (!ax[i].on_span) {
          pu[i].setZero();
          continue;
        }
        unit.setZero();
        scatter(unit, ax[i].shape, 1.0);
        pu[i] = bridge_solver.solve(unit);
      }
      for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
          if (ax[i].on_span && ax[l].on_span) g(i, l) = ax[i].shape.dot(pu[l]);

      const Eigen::Matrix2d minv_a = mv_eff.cwiseInverse().asDiagonal() * a;
      const Eigen::Matrix2d h = a.transpose() * minv_a + g;
      const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() + h * dyn.asDiagonal();
      Eigen::Vector2d rhs_s = a.transpose() * rhs_v.cwiseQuotient(mv_eff);
      for (int i = 0; i < 2; ++i)
        if (ax[i].on_span) rhs_s[i] -= ax[i].shape.dot(y);
      const Eigen::Vector2d s = lhs.partialPivLu().solve(rhs_s);
      const Eigen::Vector2d force = dyn.cwiseProduct(s);
      q_new = (rhs_v - a * force).cwiseQuotient(mv_eff);
      z_new = y;
      for (int i = 0; i < 2; ++i)
        if (ax[i].on_span) z_new += pu[i] * force[i];
    } else {
      // Block Gauss-Seidel: vehicle against the last bridge iterate, then the
      // bridge against the updated vehicle.
      const Eigen::Matrix2d kv = mv_eff.asDiagonal().toDenseMatrix() + a * dyn.asDiagonal() * a.transpose();
      const auto kv_lu = kv.partialPivLu();
      Eigen::VectorXd z_iter = z;
      bool converged = false;
      for (int it = 0; it < config.max_coupling_iterations; ++it) {
        Eigen::Vector2d rv = rhs_v;
        for (int i = 0; i < 2; ++i)
          if (ax[i].on_span) rv += a.col(i) * (dyn[i] * ax[i].shape.dot(z_iter));
        q_new = kv_lu.solve(rv);
        Eigen::VectorXd rb = rhs_b;
        for (int i = 0; i < 2; ++i) {
          if (!ax[i].on_span) continue;
          const double rel = a.col(i).dot(q_new) - ax[i].shape.dot(z_iter);
          scatter(rb, ax[i].shape, dyn[i] * rel);
        }
        z_new = bridge_solver.solve(rb);
        const double change = (z_new - z_iter).norm();
        z_iter = z_new;
        if (change <= config.coupling_tolerance * (z_new.norm() + 1e-30)) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        std::ostringstream msg;
        msg << "crossing solver: coupling iteration did not converge at step " << j;
        throw NumericalError(msg.str());
      }
    }

    nm.update(q_new, q, qd, qdd);
    nm.update(z_new, z, zd, zdd);
    if (!std::isfinite(q[0]) || !std::isfinite(q[1]) || !std::isfinite(z.sum()))
      fail_non_finite(j, t);
    record(j, t, ax);
  }
  return rec;
}

std::array<std::vector<double>, 2> ground_truth_cp(const CrossingRecord& record) {
  return {record.axles[0].cp_displacement, record.axles[1].cp_displacement};
}

FreeVibrationResult simulate_free_vibration(const AssembledSystem& bridge,
                                            const Eigen::VectorXd& z0,
                                            const Eigen::VectorXd& v0, double time_step,
                                            double duration) {
  const int n = bridge.dof_count();
  if (z0.size() != n || v0.size() != n)
    throw InvalidInput("free vibration: initial state has the wrong size");
  if (!(time_step > 0.0) || !(duration > 0.0))
    throw InvalidInput("free vibration: time_step and duration must be > 0");
  const Newmark nm(time_step);
  const SparseMatrix& mb = bridge.mass();
  const SparseMatrix& cb = bridge.damping();
  const SparseMatrix& kb = bridge.stiffness();
  Factor solver(SparseMatrix(kb + nm.a1 * cb + nm.a0 * mb));
  Factor mass_solver(mb);
  if (solver.info() != Eigen::Success || mass_solver.info() != Eigen::Success)
    throw NumericalError("free vibration: factorization failed");

  Eigen::VectorXd z = z0, zd = v0;
  Eigen::VectorXd zdd = mass_solver.solve(Eigen::VectorXd(-(cb * zd) - kb * z));
  const ShapeWeights mid = bridge.shape_weights(0.5 * bridge.bridge().span_length);

  const auto steps = static_cast<std::size_t>(std::llround(duration / time_step));
  FreeVibrationResult out;
  out.time.reserve(steps + 1);
  out.midspan.reserve(steps + 1);
  out.energy.reserve(steps + 1);
  auto push = [&](double t) {
    out.time.push_back(t);
    out.midspan.push_back(mid.dot(z));
    out.energy.push_back(0.5 * zd.dot(mb * zd) + 0.5 * z.dot(kb * z));
  };
  push(0.0);
  for (std::size_t j = 1; j <= steps; ++j) {
    const Eigen::VectorXd rhs = mb * (nm.a0 * z + nm.a2 * zd + zdd) + cb * (nm.a1 * z + zd);
    const Eigen::VectorXd z_new = solver.solve(rhs);
    nm.update(z_new, z, zd, zdd);
    push(static_cast<double>(j) * time_step);
  }
  return out;
}

Eigen::VectorXd static_deflection(const AssembledSystem& bridge,
                                  const std::vector<std::pair<double, double>>& loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(bridge.dof_count());
  for (const auto& [x, p] : loads) scatter(f, bridge.shape_weights(x), -p);
  Factor solver(bridge.stiffness());
  if (solver.info() != Eigen::Success) throw NumericalError("static deflection: singular stiffness");
  return solver.solve(f);
}

}  // namespace driveby
