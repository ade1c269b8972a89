#include "hjnav/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace hjnav {

int VehicleModel::state_dims() const {
  switch (kind) {
    case ModelKind::Dubins3: return 3;
    case ModelKind::Dubins4: return 4;
    case ModelKind::Integrator1D: return 1;
  }
  return 0;
}

int VehicleModel::control_dims() const { return kind == ModelKind::Integrator1D ? 1 : 2; }

VehicleModel VehicleModel::dubins3(double v_min, double v_max, double omega_max, double d_r) {
  if (!(v_min > 0.0)) throw std::invalid_argument("dubins3: v_min must be positive");
  if (!(v_min <= v_max) || !(omega_max >= 0.0) || !(d_r >= 0.0))
    throw std::invalid_argument("dubins3: empty bound interval");
  VehicleModel m;
  m.kind = ModelKind::Dubins3;
  m.control_lo = {v_min, -omega_max};
  m.control_hi = {v_max, omega_max};
  m.disturbance_radius = d_r;
  return m;
}

VehicleModel VehicleModel::dubins4(double a_max, double omega_max, double speed_abs_max,
                                   double d_r) {
  if (!(a_max >= 0.0) || !(omega_max >= 0.0) || !(d_r >= 0.0) || !(speed_abs_max > 0.0))
    throw std::invalid_argument("dubins4: empty bound interval");
  VehicleModel m;
  m.kind = ModelKind::Dubins4;
  m.control_lo = {-a_max, -omega_max};
  m.control_hi = {a_max, omega_max};
  m.disturbance_radius = d_r;
  m.speed_abs_max = speed_abs_max;
  return m;
}

VehicleModel VehicleModel::integrator1d(double u_min, double u_max) {
  if (!(u_min <= u_max)) throw std::invalid_argument("integrator1d: empty control interval");
  VehicleModel m;
  m.kind = ModelKind::Integrator1D;
  m.control_lo = {u_min, 0.0};
  m.control_hi = {u_max, 0.0};
  return m;
}

namespace {

void check_bounds(const VehicleModel& m, const ControlVec& u, const DisturbVec& d) {
  const double tol = 1e-12;
  for (int c = 0; c < m.control_dims(); ++c) {
    if (u[c] < m.control_lo[c] - tol || u[c] > m.control_hi[c] + tol)
      throw std::invalid_argument("flow: control outside bounds");
  }
  if (m.kind != ModelKind::Integrator1D) {
    const double r = m.disturbance_radius + tol;
    if (std::abs(d[0]) > r || std::abs(d[1]) > r)
      throw std::invalid_argument("flow: disturbance outside bounds");
  }
}

// Upper-bound tie rule: pick hi when the coefficient is >= 0.
inline double argmax_interval(double coeff, double lo, double hi) {
  return coeff >= 0.0 ? hi : lo;
}

}  // namespace

StateVec flow(const VehicleModel& model, const StateVec& x, const ControlVec& u,
              const DisturbVec& d) {
  check_bounds(model, u, d);
  StateVec dx{};
  switch (model.kind) {
    case ModelKind::Dubins3:
      dx[0] = u[0] * std::cos(x[2]) + d[0];
      dx[1] = u[0] * std::sin(x[2]) + d[1];
      dx[2] = u[1];
      break;
    case ModelKind::Dubins4:
      dx[0] = x[3] * std::cos(x[2]) + d[0];
      dx[1] = x[3] * std::sin(x[2]) + d[1];
      dx[2] = u[1];
      dx[3] = u[0];
      break;
    case ModelKind::Integrator1D:
      dx[0] = u[0];
      break;
  }
  return dx;
}

ControlVec optimal_control(const VehicleModel& model, const StateVec& x, const Costate& p) {
  ControlVec u{};
  switch (model.kind) {
    case ModelKind::Dubins3: {
      const double speed_coeff = p[0] * std::cos(x[2]) + p[1] * std::sin(x[2]);
      u[0] = argmax_interval(speed_coeff, model.control_lo[0], model.control_hi[0]);
      u[1] = argmax_interval(p[2], model.control_lo[1], model.control_hi[1]);
      break;
    }
    case ModelKind::Dubins4:
      u[0] = argmax_interval(p[3], model.control_lo[0], model.control_hi[0]);
      u[1] = argmax_interval(p[2], model.control_lo[1], model.control_hi[1]);
      break;
    case ModelKind::Integrator1D:
      u[0] = argmax_interval(p[0], model.control_lo[0], model.control_hi[0]);
      break;
  }
  return u;
}

DisturbVec optimal_disturbance(const VehicleModel& model, const StateVec&, const Costate& p) {
  DisturbVec d{};
  if (model.kind == ModelKind::Integrator1D) return d;
  const double r = model.disturbance_radius;
  d[0] = p[0] > 0.0 ? -r : r;
  d[1] = p[1] > 0.0 ? -r : r;
  return d;
}

double hamiltonian(const VehicleModel& model, const StateVec& x, const Costate& p) {
  const ControlVec u = optimal_control(model, x, p);
  const DisturbVec d = optimal_disturbance(model, x, p);
  const StateVec f = flow(model, x, u, d);
  double h = 0.0;
  for (int i = 0; i < model.state_dims(); ++i) h += p[i] * f[i];
  return h;
}

Costate control_jacobian_bounds(const VehicleModel& model, const StateVec& x,
                                DissipationMode mode) {
  Costate a{};
  switch (model.kind) {
    case ModelKind::Dubins3:
      a[0] = model.control_hi[0] + model.disturbance_radius;
      a[1] = model.control_hi[0] + model.disturbance_radius;
      a[2] = std::max(std::abs(model.control_lo[1]), std::abs(model.control_hi[1]));
      break;
    case ModelKind::Dubins4: {
      const double speed = mode == DissipationMode::Local ? std::abs(x[3]) : model.speed_abs_max;
      a[0] = speed + model.disturbance_radius;
      a[1] = speed + model.disturbance_radius;
      a[2] = std::max(std::abs(model.control_lo[1]), std::abs(model.control_hi[1]));
      a[3] = std::max(std::abs(model.control_lo[0]), std::abs(model.control_hi[0]));
      break;
    }
    case ModelKind::Integrator1D:
      a[0] = std::max(std::abs(model.control_lo[0]), std::abs(model.control_hi[0]));
      break;
  }
  return a;
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "dubins3") return ModelKind::Dubins3;
  if (s == "dubins4") return ModelKind::Dubins4;
  if (s == "integrator1d") return ModelKind::Integrator1D;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Dubins3: return "dubins3";
    case ModelKind::Dubins4: return "dubins4";
    case ModelKind::Integrator1D: return "integrator1d";
  }
  return "?";
}

}  // namespace hjnav
