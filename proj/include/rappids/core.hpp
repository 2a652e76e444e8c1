#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rappids {

inline constexpr double kGravity = 9.80665;  // m/s^2, world z-up

// Contract violations. Callers that can recover catch these; everything else
// is a bug in the calling code.
struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveDepth : PlannerError {
  NonPositiveDepth() : PlannerError("depth must be positive") {}
};
struct NonPositiveDuration : PlannerError {
  NonPositiveDuration() : PlannerError("duration must be positive") {}
};
struct TimeOutOfRange : PlannerError {
  TimeOutOfRange() : PlannerError("time outside [0, T]") {}
};
struct AllCoefficientsZero : PlannerError {
  AllCoefficientsZero() : PlannerError("polynomial is identically zero") {}
};
struct OutOfFrustum : PlannerError {
  OutOfFrustum() : PlannerError("point projects outside the image") {}
};
struct StartOutsidePyramid : PlannerError {
  StartOutsidePyramid() : PlannerError("sweep start not inside pyramid") {}
};
struct NonPositiveMass : PlannerError {
  NonPositiveMass() : PlannerError("mass must be positive") {}
};
struct CommandOutOfRange : PlannerError {
  CommandOutOfRange() : PlannerError("motor command outside [0, 1]") {}
};
struct NonPositiveHoverFit : PlannerError {
  NonPositiveHoverFit() : PlannerError("hover-throttle fit must be positive") {}
};
struct ConfigInvalid : PlannerError {
  explicit ConfigInvalid(const std::string& what) : PlannerError("config: " + what) {}
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  constexpr double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Unit quaternion; rotates vectors from the local frame into the parent frame.
class Rotation {
 public:
  Rotation() = default;
  Rotation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) { normalize(); }

  static Rotation identity() { return Rotation(); }

  static Rotation from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-15) return Rotation();
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    return Rotation(std::cos(h), axis.x * s, axis.y * s, axis.z * s);
  }

  static Rotation from_yaw(double yaw) { return from_axis_angle({0, 0, 1}, yaw); }

  /// Builds the rotation whose columns are the given orthonormal basis
  /// vectors expressed in the parent frame (Shepperd's method).
  static Rotation from_columns(const Vec3& cx, const Vec3& cy, const Vec3& cz) {
    const double m[3][3] = {{cx.x, cy.x, cz.x}, {cx.y, cy.y, cz.y}, {cx.z, cy.z, cz.z}};
    const double tr = m[0][0] + m[1][1] + m[2][2];
    double w, x, y, z;
    if (tr > 0) {
      const double s = std::sqrt(tr + 1.0) * 2;
      w = 0.25 * s;
      x = (m[2][1] - m[1][2]) / s;
      y = (m[0][2] - m[2][0]) / s;
      z = (m[1][0] - m[0][1]) / s;
    } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
      const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2;
      w = (m[2][1] - m[1][2]) / s;
      x = 0.25 * s;
      y = (m[0][1] + m[1][0]) / s;
      z = (m[0][2] + m[2][0]) / s;
    } else if (m[1][1] > m[2][2]) {
      const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2;
      w = (m[0][2] - m[2][0]) / s;
      x = (m[0][1] + m[1][0]) / s;
      y = 0.25 * s;
      z = (m[1][2] + m[2][1]) / s;
    } else {
      const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2;
      w = (m[1][0] - m[0][1]) / s;
      x = (m[0][2] + m[2][0]) / s;
      y = (m[1][2] + m[2][1]) / s;
      z = 0.25 * s;
    }
    return Rotation(w, x, y, z);
  }

  Vec3 rotate(const Vec3& v) const {
    // v' = v + 2*q_vec x (q_vec x v + w*v)
    const Vec3 q{x_, y_, z_};
    const Vec3 t = q.cross(v) * 2.0;
    return v + t * w_ + q.cross(t);
  }
  Vec3 operator*(const Vec3& v) const { return rotate(v); }

  Rotation operator*(const Rotation& o) const {
    return Rotation(w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
                    w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
                    w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
                    w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_);
  }

  Rotation inverse() const {
    Rotation r;
    r.w_ = w_; r.x_ = -x_; r.y_ = -y_; r.z_ = -z_;
    return r;
  }

  /// Spherical interpolation from *this toward target by fraction t in [0,1].
  Rotation slerp(const Rotation& target, double t) const {
    double dot = w_ * target.w_ + x_ * target.x_ + y_ * target.y_ + z_ * target.z_;
    Rotation b = target;
    if (dot < 0) {  // take the short way around
      b.w_ = -b.w_; b.x_ = -b.x_; b.y_ = -b.y_; b.z_ = -b.z_;
      dot = -dot;
    }
    if (dot > 1.0 - 1e-10) {
      return Rotation(w_ + t * (b.w_ - w_), x_ + t * (b.x_ - x_),
                      y_ + t * (b.y_ - y_), z_ + t * (b.z_ - z_));
    }
    const double theta = std::acos(dot);
    const double sa = std::sin((1.0 - t) * theta) / std::sin(theta);
    const double sb = std::sin(t * theta) / std::sin(theta);
    Rotation r;
    r.w_ = sa * w_ + sb * b.w_;
    r.x_ = sa * x_ + sb * b.x_;
    r.y_ = sa * y_ + sb * b.y_;
    r.z_ = sa * z_ + sb * b.z_;
    r.normalize();
    return r;
  }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

 private:
  void normalize() {
    const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
    w_ /= n; x_ /= n; y_ /= n; z_ /= n;
  }
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Inertial-frame vehicle state. z is up; gravity acts along -z.
/// `acceleration` holds the thrust-derived estimate used for planning, not a
/// raw IMU value.
struct VehicleState {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
  Rotation attitude;
  double yaw = 0.0;   // rad
  double time = 0.0;  // s
};

/// Fixed mounting of a forward-looking depth camera on a z-up, x-forward
/// body: camera x = -body y (right), camera y = -body z (down),
/// camera z = +body x (optical axis).
inline Rotation camera_from_body() {
  return Rotation::from_columns({0, -1, 0}, {0, 0, -1}, {1, 0, 0});
}

}  // namespace rappids
