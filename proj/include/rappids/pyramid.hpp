#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "rappids/camera.hpp"
#include "rappids/core.hpp"
#include "rappids/cubic.hpp"
#include "rappids/trajectory.hpp"

namespace rappids {

/// Rectangular free-space pyramid in the camera frame. The expanded pyramid
/// has its apex at the camera origin and lateral faces through the pixel
/// rectangle's outer edges; the shrunk region offsets every lateral face
/// inward by the vehicle radius and pulls the base plane in by the same
/// amount, so containment of the vehicle center implies whole-body clearance
/// from everything outside the expanded rectangle or beyond its base.
struct Pyramid {
  Vec3 apex;                       // camera origin at capture
  double u_min = 0, u_max = 0;     // px, expanded rectangle outer edges
  double v_min = 0, v_max = 0;
  double base_depth = 0;           // m, expanded base plane
  double shrunk_base_depth = 0;    // base_depth - r
  double lateral_offset = 0;       // r
  std::array<Vec3, 4> normals{};   // unit inward normals of the expanded faces

  double lateral_margin(const Vec3& point_cam) const {
    const Vec3 p = point_cam - apex;
    double m = normals[0].dot(p);
    for (int i = 1; i < 4; ++i) m = std::min(m, normals[i].dot(p));
    return m;
  }
};

/// True iff the point satisfies all four shrunk lateral half-spaces and
/// 0 <= z <= shrunk_base_depth (closed set).
inline bool point_in_shrunk(const Pyramid& pyr, const Vec3& point_cam, double tol = 0.0) {
  const double z = point_cam.z - pyr.apex.z;
  if (z < -tol || z > pyr.shrunk_base_depth + tol) return false;
  return pyr.lateral_margin(point_cam) >= pyr.lateral_offset - tol;
}

enum class CollisionVerdict { kCollisionFree, kInCollision };

namespace detail {

inline Vec3 pixel_ray(double u, double v, const CameraIntrinsics& intr) {
  return {(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
}

inline std::array<Vec3, 4> face_normals(double u_min, double u_max, double v_min, double v_max,
                                        const CameraIntrinsics& intr) {
  const Vec3 tl = pixel_ray(u_min, v_min, intr);
  const Vec3 tr = pixel_ray(u_max, v_min, intr);
  const Vec3 br = pixel_ray(u_max, v_max, intr);
  const Vec3 bl = pixel_ray(u_min, v_max, intr);
  const Vec3 center = pixel_ray(0.5 * (u_min + u_max), 0.5 * (v_min + v_max), intr);
  std::array<Vec3, 4> n = {tr.cross(br).normalized(), br.cross(bl).normalized(),
                           bl.cross(tl).normalized(), tl.cross(tr).normalized()};
  for (auto& v : n) {
    if (v.dot(center) < 0) v = -v;
  }
  return n;
}

/// First t in (t_start, T] where the ascending-power quintic q drops below
/// zero, or nullopt. Root isolation walks the derivative chain: the second
/// derivative is a cubic with closed-form roots, which brackets the first
/// derivative's roots, which bracket the quintic's monotonic pieces.
class QuinticCrossing {
 public:
  QuinticCrossing(const std::array<double, 6>& q, double t_start, double t_end)
      : q_(q), t0_(t_start), t1_(t_end) {}

  std::optional<double> first_drop_below_zero() const {
    // Critical points of g' = roots of g'' (cubic).
    std::array<double, 7> breaks{};
    int nb = 0;
    breaks[nb++] = t0_;
    const double c3 = 20 * q_[5], c2 = 12 * q_[4], c1 = 6 * q_[3], c0 = 2 * q_[2];
    if (c3 != 0.0 || c2 != 0.0 || c1 != 0.0 || c0 != 0.0) {
      for (double r : solve_cubic(c3, c2, c1, c0)) {
        if (r > t0_ && r < t1_) breaks[nb++] = r;
      }
    }
    breaks[nb++] = t1_;

    // g' roots bracketed by its monotonic pieces.
    std::array<double, 7> crit{};
    int nc = 0;
    crit[nc++] = t0_;
    for (int i = 0; i + 1 < nb; ++i) {
      const double a = breaks[i], b = breaks[i + 1];
      const double da = d1(a), db = d1(b);
      if (da == 0.0 && a > t0_) crit[nc++] = a;
      if ((da < 0) != (db < 0) && da != 0.0 && db != 0.0) {
        crit[nc++] = bisect([&](double t) { return d1(t); }, a, b, da < 0);
      }
    }
    crit[nc++] = t1_;

    // Scan monotonic pieces of g for the first downward crossing.
    for (int i = 0; i + 1 < nc; ++i) {
      double a = crit[i];
      const double b = crit[i + 1];
      if (b - a <= 0.0) continue;
      const double va = value(a), vb = value(b);
      if (va >= 0.0 && vb < 0.0) {
        // Refine to <= 1e-6 s and report the inside endpoint of the bracket.
        double hi = b;
        for (int it = 0; it < 48 && (hi - a) > 1e-6; ++it) {
          const double m = 0.5 * (a + hi);
          (value(m) >= 0.0 ? a : hi) = m;
        }
        return a;
      }
      if (va < 0.0) {
        if (i == 0 && vb > va) continue;  // boundary start recovering inward
        return a;
      }
    }
    return std::nullopt;
  }

 private:
  double value(double t) const {
    return ((((q_[5] * t + q_[4]) * t + q_[3]) * t + q_[2]) * t + q_[1]) * t + q_[0];
  }
  double d1(double t) const {
    return (((5 * q_[5] * t + 4 * q_[4]) * t + 3 * q_[3]) * t + 2 * q_[2]) * t + q_[1];
  }

  // Bracketed bisection to 1e-6 s for derivative roots.
  template <typename F>
  static double bisect(F&& f, double a, double b, bool rising) {
    for (int it = 0; it < 48 && (b - a) > 1e-6; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if ((fm < 0.0) == rising) {
        a = m;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  }

  std::array<double, 6> q_;  // ascending powers t^0..t^5
  double t0_, t1_;
};

}  // namespace detail

/// Earliest time in (t_start, T] at which the primitive leaves the shrunk
/// pyramid through any of its six bounding constraints, or nullopt when it
/// stays inside for the remainder of its duration.
inline std::optional<double> first_exit_time(const QuinticPrimitive& primitive,
                                             const Pyramid& pyr, double t_start) {
  if (!point_in_shrunk(pyr, primitive.eval(t_start).position, 1e-7)) {
    throw StartOutsidePyramid();
  }
  const auto c = primitive.position_coeffs();  // power order t^5..t^0
  const double T = primitive.duration();

  std::optional<double> exit;
  auto consider = [&](const std::array<double, 6>& q_ascending) {
    detail::QuinticCrossing crossing(q_ascending, t_start, exit ? *exit : T);
    if (auto t = crossing.first_drop_below_zero()) {
      if (!exit || *t < *exit) exit = t;
    }
  };

  for (const Vec3& n : pyr.normals) {
    std::array<double, 6> q{};
    for (int k = 0; k < 6; ++k) q[5 - k] = n.dot(c[k] - (k == 5 ? pyr.apex : Vec3{}));
    q[0] -= pyr.lateral_offset;
    consider(q);
  }
  {  // base plane: shrunk_base_depth - z(t) >= 0
    std::array<double, 6> q{};
    for (int k = 0; k < 6; ++k) q[5 - k] = -c[k].z;
    q[0] += pyr.shrunk_base_depth + pyr.apex.z;
    consider(q);
  }
  {  // camera plane: z(t) >= 0
    std::array<double, 6> q{};
    for (int k = 0; k < 6; ++k) q[5 - k] = c[k].z;
    q[0] -= pyr.apex.z;
    consider(q);
  }
  return exit;
}

/// Free-space model for one planning cycle: a depth image plus the pyramids
/// inflated from it so far. Owned by a single cycle; candidate checks reuse
/// cached pyramids.
class FreeSpaceModel {
 public:
  FreeSpaceModel(const DepthImage& image, double vehicle_radius, double fov_free_distance,
                 double start_clearance = 0.15)
      : image_(&image),
        radius_(vehicle_radius),
        fov_free_(fov_free_distance),
        start_clearance_(start_clearance) {}

  const DepthImage& image() const { return *image_; }
  double vehicle_radius() const { return radius_; }
  double fov_free_distance() const { return fov_free_; }
  double start_clearance() const { return start_clearance_; }
  const std::vector<Pyramid>& pyramids() const { return pyramids_; }
  int inflation_attempts() const { return inflation_attempts_; }

  /// Grows the largest rectangle around the query point's spiral-nearest
  /// viable seed pixel, then offsets its faces by the vehicle radius.
  /// Returns nullopt when no pyramid containing the point can be built.
  std::optional<Pyramid> inflate_pyramid(const Vec3& point_cam) {
    const CameraIntrinsics& intr = image_->intrinsics;
    if (point_cam.z <= 0.0) throw OutOfFrustum();
    const PixelCoord px = project(point_cam, intr);
    if (px.u < 0 || px.u >= intr.width || px.v < 0 || px.v >= intr.height) throw OutOfFrustum();
    ++inflation_attempts_;

    const double depth_cap = std::min(fov_free_, image_->max_range);
    const double min_seed_depth = point_cam.z + radius_;
    if (min_seed_depth > depth_cap) return std::nullopt;

    const int i0 = std::clamp(static_cast<int>(px.u), 0, intr.width - 1);
    const int j0 = std::clamp(static_cast<int>(px.v), 0, intr.height - 1);
    int seed_i = -1, seed_j = -1;
    for (int ring = 0; ring <= kSpiralRadius && seed_i < 0; ++ring) {
      if (!scan_ring(i0, j0, ring, min_seed_depth, seed_i, seed_j)) break;
    }
    if (seed_i < 0) return std::nullopt;

    double base = std::min(depth_cap, static_cast<double>(image_->at(seed_i, seed_j)));
    int left = seed_i, right = seed_i, top = seed_j, bottom = seed_j;
    grow_rectangle(point_cam, left, right, top, bottom, base);

    Pyramid pyr;
    pyr.apex = Vec3{0, 0, 0};
    pyr.u_min = left;
    pyr.u_max = right + 1;
    pyr.v_min = top;
    pyr.v_max = bottom + 1;
    pyr.base_depth = base;
    pyr.shrunk_base_depth = base - radius_;
    pyr.lateral_offset = radius_;
    pyr.normals = detail::face_normals(pyr.u_min, pyr.u_max, pyr.v_min, pyr.v_max, intr);
    if (!point_in_shrunk(pyr, point_cam)) return std::nullopt;
    return pyr;
  }

  /// Cached pyramid strictly containing the point, if any.
  const Pyramid* find_cached(const Vec3& point_cam, double strict_margin = 1e-6) const {
    for (const Pyramid& pyr : pyramids_) {
      const double z = point_cam.z - pyr.apex.z;
      if (z < strict_margin || z > pyr.shrunk_base_depth - strict_margin) continue;
      if (pyr.lateral_margin(point_cam) >= pyr.lateral_offset + strict_margin) return &pyr;
    }
    return nullptr;
  }

  /// Covers [0, T] with shrunk pyramids as described in the module contract.
  /// The prefix inside the start-clearance ball around s(0) is exempt from
  /// pyramid coverage, guarded by requiring every occupied pixel to lie at
  /// least (|s(0)| + r + start_clearance) from the camera.
  CollisionVerdict trajectory_collision_free(const QuinticPrimitive& primitive) {
    const Vec3 s0 = primitive.initial_position();
    const double T = primitive.duration();

    double t_cur = 0.0;
    const std::optional<double> bubble_exit = exit_from_ball(primitive, s0, start_clearance_);
    if (!start_region_clear(s0)) return CollisionVerdict::kInCollision;
    if (!bubble_exit) return CollisionVerdict::kCollisionFree;
    t_cur = *bubble_exit;

    for (int used = 0; used < kMaxPyramidsPerCandidate; ++used) {
      if (t_cur >= T - 1e-9) return CollisionVerdict::kCollisionFree;
      const Vec3 p = primitive.eval(t_cur).position;
      const Pyramid* pyr = find_cached(p);
      if (pyr == nullptr) {
        if (p.z <= 1e-9) return CollisionVerdict::kInCollision;
        const PixelCoord px = project(p, image_->intrinsics);
        if (px.u < 0 || px.u >= image_->intrinsics.width || px.v < 0 ||
            px.v >= image_->intrinsics.height) {
          return CollisionVerdict::kInCollision;
        }
        std::optional<Pyramid> fresh = inflate_pyramid(p);
        if (!fresh) return CollisionVerdict::kInCollision;
        pyramids_.push_back(*fresh);
        pyr = &pyramids_.back();
      }
      const std::optional<double> exit = first_exit_time(primitive, *pyr, t_cur);
      if (!exit) return CollisionVerdict::kCollisionFree;
      if (*exit <= t_cur + 1e-9) return CollisionVerdict::kInCollision;  // no progress
      t_cur = *exit;
    }
    return CollisionVerdict::kInCollision;  // pyramid budget exhausted
  }

  /// Squared-distance scan for the nearest occupied pixel point; cached.
  bool start_region_clear(const Vec3& start_cam) {
    if (min_occupied_sq_ < 0) compute_min_occupied();
    const double needed = start_cam.norm() + radius_ + start_clearance_;
    return min_occupied_sq_ >= needed * needed;
  }

  void dump_pyramids_jsonl(std::ostream& out) const {
    for (const Pyramid& p : pyramids_) {
      out << "{\"apex\":[" << p.apex.x << "," << p.apex.y << "," << p.apex.z << "]"
          << ",\"rect\":[" << p.u_min << "," << p.u_max << "," << p.v_min << "," << p.v_max << "]"
          << ",\"base_depth\":" << p.base_depth
          << ",\"shrunk_base_depth\":" << p.shrunk_base_depth << "}\n";
    }
  }

  static constexpr int kMaxPyramidsPerCandidate = 8;
  static constexpr int kSpiralRadius = 25;

 private:
  // One Chebyshev ring of the seed spiral; returns false once the whole ring
  // falls outside the image.
  bool scan_ring(int i0, int j0, int ring, double min_depth, int& seed_i, int& seed_j) const {
    const CameraIntrinsics& intr = image_->intrinsics;
    auto try_pixel = [&](int i, int j) {
      if (i < 0 || i >= intr.width || j < 0 || j >= intr.height) return false;
      if (image_->at(i, j) >= min_depth) {
        seed_i = i;
        seed_j = j;
        return true;
      }
      return false;
    };
    if (ring == 0) return try_pixel(i0, j0) || true;
    bool any_inside = false;
    for (int i = i0 - ring; i <= i0 + ring; ++i) {  // top and bottom rows
      for (int j : {j0 - ring, j0 + ring}) {
        if (i >= 0 && i < intr.width && j >= 0 && j < intr.height) any_inside = true;
      }
      if (try_pixel(i, j0 - ring) || try_pixel(i, j0 + ring)) return true;
    }
    for (int j = j0 - ring + 1; j <= j0 + ring - 1; ++j) {  // side columns
      for (int i : {i0 - ring, i0 + ring}) {
        if (i >= 0 && i < intr.width && j >= 0 && j < intr.height) any_inside = true;
      }
      if (try_pixel(i0 - ring, j) || try_pixel(i0 + ring, j)) return true;
    }
    return any_inside;
  }

  // Spiral growth: one row/column at a time in the order right, down, left,
  // up. A line of pixels at or beyond the current base extends the side; a
  // shallower line may instead lower the base when the query stays strictly
  // inside the shrunk pyramid, otherwise the side stops.
  void grow_rectangle(const Vec3& query, int& left, int& right, int& top, int& bottom,
                      double& base) const {
    const CameraIntrinsics& intr = image_->intrinsics;
    bool open_right = true, open_down = true, open_left = true, open_up = true;

    auto line_min = [&](int fixed, int from, int to, bool is_column) {
      double m = std::numeric_limits<double>::infinity();
      for (int k = from; k <= to; ++k) {
        const double d = is_column ? image_->at(fixed, k) : image_->at(k, fixed);
        m = std::min(m, d);
      }
      return m;
    };

    auto query_ok = [&](int l, int r, int t, int b, double candidate_base) {
      if (!(query.z < candidate_base - radius_)) return false;
      const auto normals = detail::face_normals(l, r + 1, t, b + 1, intr);
      for (const Vec3& n : normals) {
        if (!(n.dot(query) > radius_)) return false;
      }
      return true;
    };

    // Accepting a line: either it is entirely at/beyond base, or the base is
    // lowered to the line minimum while the query remains strictly inside.
    auto attempt = [&](bool& open, int l, int r, int t, int b, int fixed, int from, int to,
                       bool is_column) {
      const double m = line_min(fixed, from, to, is_column);
      if (m >= base) return true;
      if (m > radius_ && query_ok(l, r, t, b, std::min(m, base))) {
        base = std::min(m, base);
        return true;
      }
      open = false;
      return false;
    };

    while (open_right || open_down || open_left || open_up) {
      if (open_right) {
        if (right + 1 >= intr.width) {
          open_right = false;
        } else if (attempt(open_right, left, right + 1, top, bottom, right + 1, top, bottom, true)) {
          ++right;
        }
      }
      if (open_down) {
        if (bottom + 1 >= intr.height) {
          open_down = false;
        } else if (attempt(open_down, left, right, top, bottom + 1, bottom + 1, left, right, false)) {
          ++bottom;
        }
      }
      if (open_left) {
        if (left - 1 < 0) {
          open_left = false;
        } else if (attempt(open_left, left - 1, right, top, bottom, left - 1, top, bottom, true)) {
          --left;
        }
      }
      if (open_up) {
        if (top - 1 < 0) {
          open_up = false;
        } else if (attempt(open_up, left, right, top - 1, bottom, top - 1, left, right, false)) {
          --top;
        }
      }
    }
  }

  // First time the primitive leaves the ball of radius `rad` around `center`,
  // by grid scan plus bisection. nullopt when it never does.
  static std::optional<double> exit_from_ball(const QuinticPrimitive& primitive,
                                              const Vec3& center, double rad) {
    const double T = primitive.duration();
    const double r2 = rad * rad;
    auto outside = [&](double t) {
      return (primitive.eval(t).position - center).squared_norm() > r2;
    };
    constexpr int kGrid = 128;
    double prev = 0.0;
    for (int k = 1; k <= kGrid; ++k) {
      const double t = T * k / kGrid;
      if (outside(t)) {
        double a = prev, b = t;
        for (int it = 0; it < 40 && (b - a) > 1e-6; ++it) {
          const double m = 0.5 * (a + b);
          (outside(m) ? b : a) = m;
        }
        return 0.5 * (a + b);
      }
      prev = t;
    }
    return std::nullopt;
  }

  void compute_min_occupied() {
    const CameraIntrinsics& intr = image_->intrinsics;
    // Per-row/column squared ray factors so the scan stays multiply-compare.
    std::vector<double> col_sq(intr.width), row_sq(intr.height);
    for (int i = 0; i < intr.width; ++i) {
      const double x = (i + 0.5 - intr.cx) / intr.fx;
      col_sq[i] = x * x;
    }
    for (int j = 0; j < intr.height; ++j) {
      const double y = (j + 0.5 - intr.cy) / intr.fy;
      row_sq[j] = y * y;
    }
    double best = std::numeric_limits<double>::infinity();
    const float sentinel = static_cast<float>(image_->max_range);
    for (int j = 0; j < intr.height; ++j) {
      for (int i = 0; i < intr.width; ++i) {
        const float d = image_->at(i, j);
        if (d >= sentinel) continue;  // no-return: free to max_range
        const double sq = static_cast<double>(d) * d * (1.0 + col_sq[i] + row_sq[j]);
        best = std::min(best, sq);
      }
    }
    min_occupied_sq_ = best;
  }

  const DepthImage* image_;
  double radius_;
  double fov_free_;
  double start_clearance_;
  std::vector<Pyramid> pyramids_;
  double min_occupied_sq_ = -1.0;
  int inflation_attempts_ = 0;
};

}  // namespace rappids
