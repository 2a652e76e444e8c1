#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "rappids/core.hpp"
#include "rappids/cubic.hpp"

namespace rappids {

enum class Frame { kInertial, kCamera };

/// Actuator and state limits used by the candidate checks.
struct FeasibilityLimits {
  double f_min = 5.0;       // N, collective
  double f_max = 30.0;      // N, collective
  double omega_max = 20.0;  // rad/s; <= 0 or infinite disables the rate proxy
  double v_max = 3.0;       // m/s, per axis
};

enum class Feasibility { kFeasible, kInfeasible, kIndeterminate };

struct MotionSample {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
  Vec3 jerk;
};

/// Minimum-jerk quintic s(t) = a t^5/120 + b t^4/24 + c t^3/6 + s"(0) t^2/2
/// + s'(0) t + s(0) on [0, T], with zero terminal velocity and acceleration.
class QuinticPrimitive {
 public:
  QuinticPrimitive() = default;

  QuinticPrimitive(const Vec3& s0, const Vec3& v0, const Vec3& a0, const Vec3& alpha,
                   const Vec3& beta, const Vec3& gamma, double duration, Frame frame)
      : s0_(s0), v0_(v0), a0_(a0), alpha_(alpha), beta_(beta), gamma_(gamma), T_(duration),
        frame_(frame) {}

  MotionSample eval(double t) const {
    if (t < 0.0) {
      if (t < -1e-12) throw TimeOutOfRange();
      t = 0.0;
    } else if (t > T_) {
      if (t > T_ + 1e-12) throw TimeOutOfRange();
      t = T_;
    }
    MotionSample out;
    for (int i = 0; i < 3; ++i) {
      const double al = alpha_[i], be = beta_[i], ga = gamma_[i];
      const double a0 = a0_[i], v0 = v0_[i], s0 = s0_[i];
      set_axis(out.position, i,
               ((((al / 120 * t + be / 24) * t + ga / 6) * t + a0 / 2) * t + v0) * t + s0);
      set_axis(out.velocity, i, (((al / 24 * t + be / 6) * t + ga / 2) * t + a0) * t + v0);
      set_axis(out.acceleration, i, ((al / 6 * t + be / 2) * t + ga) * t + a0);
      set_axis(out.jerk, i, (al / 2 * t + be) * t + ga);
    }
    return out;
  }

  double duration() const { return T_; }
  Frame frame() const { return frame_; }
  const Vec3& initial_position() const { return s0_; }
  const Vec3& initial_velocity() const { return v0_; }
  const Vec3& initial_acceleration() const { return a0_; }
  Vec3 endpoint() const { return eval(T_).position; }

  /// Position polynomial coefficients in power order t^5..t^0, one vector per
  /// power. Used by the pyramid face-crossing solver.
  std::array<Vec3, 6> position_coeffs() const {
    return {alpha_ / 120.0, beta_ / 24.0, gamma_ / 6.0, a0_ / 2.0, v0_, s0_};
  }

  /// Same primitive expressed in a frame reached by rotating with `rot` and
  /// then translating by `offset` (applied to positions only).
  QuinticPrimitive transformed(const Rotation& rot, const Vec3& offset, Frame new_frame) const {
    return QuinticPrimitive(rot * s0_ + offset, rot * v0_, rot * a0_, rot * alpha_, rot * beta_,
                            rot * gamma_, T_, new_frame);
  }

 private:
  static void set_axis(Vec3& v, int i, double value) {
    (i == 0 ? v.x : (i == 1 ? v.y : v.z)) = value;
  }

  Vec3 s0_, v0_, a0_;
  Vec3 alpha_, beta_, gamma_;
  double T_ = 0.0;
  Frame frame_ = Frame::kInertial;
};

/// Solves the per-axis 3x3 boundary system in closed form for the primitive
/// ending at rest at `sT` after `duration` seconds.
inline QuinticPrimitive make_primitive(const Vec3& s0, const Vec3& v0, const Vec3& a0,
                                       const Vec3& sT, double duration,
                                       Frame frame = Frame::kInertial) {
  if (!(duration > 0.0)) throw NonPositiveDuration();
  if (!s0.finite() || !v0.finite() || !a0.finite() || !sT.finite()) {
    throw PlannerError("non-finite primitive boundary condition");
  }
  const double T = duration;
  const Vec3 dp = sT - s0 - v0 * T - a0 * (T * T / 2);
  const Vec3 dv = -(v0 + a0 * T);
  const Vec3 da = -a0;
  const Vec3 alpha = (dp * 720.0 - dv * (360.0 * T) + da * (60.0 * T * T)) / (T * T * T * T * T);
  const Vec3 beta = (dp * -360.0 + dv * (168.0 * T) - da * (24.0 * T * T)) / (T * T * T * T);
  const Vec3 gamma = (dp * 60.0 - dv * (24.0 * T) + da * (3.0 * T * T)) / (T * T * T);
  return QuinticPrimitive(s0, v0, a0, alpha, beta, gamma, T, frame);
}

/// Largest |velocity| reached on one axis over [0, T]: the quartic velocity
/// extrema lie at the roots of the cubic acceleration, evaluated together
/// with both interval boundaries.
inline double per_axis_peak_speed(const QuinticPrimitive& p, int axis) {
  const auto c = p.position_coeffs();
  const double T = p.duration();
  auto speed_at = [&](double t) {
    return std::abs((((5 * c[0][axis] * t + 4 * c[1][axis]) * t + 3 * c[2][axis]) * t +
                     2 * c[3][axis]) *
                        t +
                    c[4][axis]);
  };
  double peak = std::max(speed_at(0.0), speed_at(T));
  // acceleration coefficients: 20 c5 t^3 + 12 c4 t^2 + 6 c3 t + 2 c2
  const double a3 = 20 * c[0][axis], a2 = 12 * c[1][axis], a1 = 6 * c[2][axis],
               a0 = 2 * c[3][axis];
  if (a3 != 0.0 || a2 != 0.0 || a1 != 0.0 || a0 != 0.0) {
    for (double root : solve_cubic(a3, a2, a1, a0)) {
      if (root > 0.0 && root < T) peak = std::max(peak, speed_at(root));
    }
  }
  return peak;
}

inline bool check_velocity_admissible(const QuinticPrimitive& p, double v_max) {
  for (int axis = 0; axis < 3; ++axis) {
    if (per_axis_peak_speed(p, axis) > v_max) return false;
  }
  return true;
}

namespace detail {

struct AxisRange {
  double lo, hi;
};

// Range of one acceleration axis (a cubic) over [t1, t2]: endpoints plus the
// interior roots of its quadratic derivative.
inline AxisRange accel_range(const std::array<Vec3, 6>& c, int axis, double t1, double t2) {
  auto accel_at = [&](double t) {
    return ((20 * c[0][axis] * t + 12 * c[1][axis]) * t + 6 * c[2][axis]) * t + 2 * c[3][axis];
  };
  AxisRange r{accel_at(t1), accel_at(t1)};
  auto include = [&](double v) {
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  };
  include(accel_at(t2));
  // jerk: 60 c5 t^2 + 24 c4 t + 6 c3
  const double j2 = 60 * c[0][axis], j1 = 24 * c[1][axis], j0 = 6 * c[2][axis];
  if (j2 != 0.0 || j1 != 0.0 || j0 != 0.0) {
    for (double root : solve_cubic(0.0, j2, j1, j0)) {
      if (root > t1 && root < t2) include(accel_at(root));
    }
  }
  return r;
}

inline AxisRange jerk_range(const std::array<Vec3, 6>& c, int axis, double t1, double t2) {
  auto jerk_at = [&](double t) {
    return (60 * c[0][axis] * t + 24 * c[1][axis]) * t + 6 * c[2][axis];
  };
  AxisRange r{jerk_at(t1), jerk_at(t1)};
  auto include = [&](double v) {
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  };
  include(jerk_at(t2));
  if (c[0][axis] != 0.0) {
    const double root = -24 * c[1][axis] / (120 * c[0][axis]);  // snap zero
    if (root > t1 && root < t2) include(jerk_at(root));
  }
  return r;
}

inline double min_abs(const AxisRange& r) {
  if (r.lo <= 0.0 && r.hi >= 0.0) return 0.0;
  return std::min(std::abs(r.lo), std::abs(r.hi));
}

inline double max_abs(const AxisRange& r) { return std::max(std::abs(r.lo), std::abs(r.hi)); }

inline Feasibility feasibility_section(const std::array<Vec3, 6>& c, double t1, double t2,
                                       double amin, double amax, double omega_max,
                                       double rate_floor, double dt_min) {
  auto thrust_norm_at = [&](double t) {
    Vec3 a;
    a.x = ((20 * c[0].x * t + 12 * c[1].x) * t + 6 * c[2].x) * t + 2 * c[3].x;
    a.y = ((20 * c[0].y * t + 12 * c[1].y) * t + 6 * c[2].y) * t + 2 * c[3].y;
    a.z = ((20 * c[0].z * t + 12 * c[1].z) * t + 6 * c[2].z) * t + 2 * c[3].z + kGravity;
    return a.norm();
  };
  // Point evaluations give definite verdicts.
  for (double t : {t1, t2}) {
    const double f = thrust_norm_at(t);
    if (f < amin || f > amax) return Feasibility::kInfeasible;
  }

  AxisRange ar[3];
  for (int axis = 0; axis < 3; ++axis) ar[axis] = accel_range(c, axis, t1, t2);
  ar[2].lo += kGravity;
  ar[2].hi += kGravity;

  double upper_sq = 0.0;    // >= max_t ||a + g||^2
  double lower_min = 0.0;   // <= min_t ||a + g||, via max_i min_t |a_i|
  double lower_peak = 0.0;  // <= max_t ||a + g||, via max_i max_t |a_i|
  for (const auto& r : ar) {
    upper_sq += max_abs(r) * max_abs(r);
    lower_min = std::max(lower_min, min_abs(r));
    lower_peak = std::max(lower_peak, max_abs(r));
  }
  if (lower_peak > amax) return Feasibility::kInfeasible;   // some instant exceeds f_max
  if (std::sqrt(upper_sq) < amin) return Feasibility::kInfeasible;  // always below f_min

  bool rate_ok = true;
  if (omega_max > 0.0 && std::isfinite(omega_max)) {
    double jerk_sq = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const double m = max_abs(jerk_range(c, axis, t1, t2));
      jerk_sq += m * m;
    }
    rate_ok = rate_floor > 0.0 && std::sqrt(jerk_sq) / rate_floor <= omega_max;
  }

  if (std::sqrt(upper_sq) <= amax && lower_min >= amin && rate_ok) return Feasibility::kFeasible;
  if (t2 - t1 < dt_min) return Feasibility::kIndeterminate;

  const double tm = 0.5 * (t1 + t2);
  const Feasibility first = feasibility_section(c, t1, tm, amin, amax, omega_max, rate_floor, dt_min);
  if (first == Feasibility::kInfeasible) return Feasibility::kInfeasible;
  const Feasibility second = feasibility_section(c, tm, t2, amin, amax, omega_max, rate_floor, dt_min);
  if (second == Feasibility::kInfeasible) return Feasibility::kInfeasible;
  if (first == Feasibility::kIndeterminate || second == Feasibility::kIndeterminate) {
    return Feasibility::kIndeterminate;
  }
  return Feasibility::kFeasible;
}

}  // namespace detail

/// Recursive interval bounding of the required thrust-acceleration norm
/// ||s"(t) + g|| against [f_min/m, f_max/m], plus a conservative body-rate
/// proxy (peak jerk norm over f_min/m). Sections narrower than dt_min that
/// stay unresolved come back Indeterminate.
inline Feasibility check_input_feasibility(const QuinticPrimitive& p,
                                           const FeasibilityLimits& limits, double mass,
                                           double dt_min = 0.02) {
  if (!(mass > 0.0)) throw NonPositiveMass();
  if (!(dt_min > 0.0)) throw PlannerError("dt_min must be positive");
  const double amin = limits.f_min / mass;
  const double amax = limits.f_max / mass;
  return detail::feasibility_section(p.position_coeffs(), 0.0, p.duration(), amin, amax,
                                     limits.omega_max, amin, dt_min);
}

}  // namespace rappids
