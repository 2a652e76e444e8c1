#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rappids/core.hpp"

namespace rappids {

/// Pinhole model. Pixel (i, j) samples the ray through (i + 0.5, j + 0.5);
/// image u grows right, v grows down, optical axis is +z.
struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // px
  double cx = 0.0, cy = 0.0;  // px
  int width = 0, height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx > 0 && cx < width && cy > 0 &&
           cy < height;
  }
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

inline PixelCoord project(const Vec3& point_cam, const CameraIntrinsics& intr) {
  if (point_cam.z <= 0.0) throw NonPositiveDepth();
  return {intr.fx * point_cam.x / point_cam.z + intr.cx,
          intr.fy * point_cam.y / point_cam.z + intr.cy};
}

inline Vec3 back_project(double u, double v, double depth, const CameraIntrinsics& intr) {
  if (depth <= 0.0) throw NonPositiveDepth();
  return {(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth};
}

/// Row-major metric depth image. A value equal to max_range is the no-return
/// sentinel: free along that ray up to max_range, unknown beyond.
struct DepthImage {
  CameraIntrinsics intrinsics;
  std::vector<float> depths;
  double max_range = 0.0;  // m

  DepthImage() = default;
  DepthImage(const CameraIntrinsics& intr, double range, float fill)
      : intrinsics(intr),
        depths(static_cast<size_t>(intr.width) * intr.height, fill),
        max_range(range) {}

  float at(int u, int v) const { return depths[static_cast<size_t>(v) * intrinsics.width + u]; }
  float& at(int u, int v) { return depths[static_cast<size_t>(v) * intrinsics.width + u]; }
  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }
};

// --- PFM serialization (grayscale "Pf", little-endian, rows bottom-up) ---

inline void write_pfm(const DepthImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot open for writing: " + path);
  out << "Pf\n" << image.width() << " " << image.height() << "\n-1.0\n";
  for (int v = image.height() - 1; v >= 0; --v) {
    out.write(reinterpret_cast<const char*>(&image.depths[static_cast<size_t>(v) * image.width()]),
              static_cast<std::streamsize>(image.width() * sizeof(float)));
  }
}

inline DepthImage read_pfm(const std::string& path, const CameraIntrinsics& intr,
                           double max_range) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot open for reading: " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (magic != "Pf" || scale >= 0) throw ConfigInvalid("not a little-endian grayscale PFM: " + path);
  if (w != intr.width || h != intr.height) throw ConfigInvalid("PFM dimensions mismatch: " + path);
  in.get();  // single whitespace after the header
  DepthImage image(intr, max_range, 0.0f);
  for (int v = h - 1; v >= 0; --v) {
    in.read(reinterpret_cast<char*>(&image.depths[static_cast<size_t>(v) * w]),
            static_cast<std::streamsize>(w * sizeof(float)));
  }
  if (!in) throw ConfigInvalid("truncated PFM payload: " + path);
  return image;
}

}  // namespace rappids
