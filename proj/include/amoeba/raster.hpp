#pragma once

// Pixel-grid amoeba images (n = 2) and point clouds (n = 3), with the
// undercounting area estimate covered-pixels * pixel-area. Forward sampling
// only ever marks true amoeba points, so estimates converge to the area
// from below.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amoeba/ratfun.hpp"

namespace amoeba {

struct Box {
  std::vector<double> lo, hi;  // per-axis bounds, lo[i] < hi[i]

  std::size_t dim() const { return lo.size(); }
  bool contains(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] >= hi[i]) return false;
    return true;
  }
};

// Pixel state is a 4-bit subcell mask; a pixel counts as covered once all
// four quadrants have received a sample. Requiring full quadrant coverage
// keeps boundary-straddling pixels out of the count, so the area estimate
// approaches the true area from below instead of dilating past it.
struct AmoebaRaster {
  Box window;
  int resolution = 0;                      // pixels per axis (n = 2)
  std::vector<std::uint8_t> covered;       // row-major subcell masks, n = 2
  std::vector<std::vector<double>> cloud;  // points, n = 3
  double area_estimate = 0.0;              // n = 2 only
  std::uint64_t samples_used = 0;

  static constexpr std::uint8_t kFull = 0x0F;

  double pixel_area() const {
    const double px = (window.hi[0] - window.lo[0]) / resolution;
    const double py = (window.hi[1] - window.lo[1]) / resolution;
    return px * py;
  }

  // Marks the subcell containing (x, y); `confirm` marks the whole pixel
  // (used when the point is exact rather than sampled). Returns the pixel
  // index, or -1 when outside the window.
  long long mark(double x, double y, bool confirm = false) {
    const double fx = (x - window.lo[0]) / (window.hi[0] - window.lo[0]);
    const double fy = (y - window.lo[1]) / (window.hi[1] - window.lo[1]);
    if (!(fx >= 0.0) || fx >= 1.0 || !(fy >= 0.0) || fy >= 1.0) return -1;
    const double px = fx * resolution, py = fy * resolution;
    const int ix = static_cast<int>(px), iy = static_cast<int>(py);
    const long long idx = static_cast<long long>(iy) * resolution + ix;
    if (confirm) {
      covered[idx] = kFull;
    } else {
      const int sub = (px - ix < 0.5 ? 0 : 1) | (py - iy < 0.5 ? 0 : 2);
      covered[idx] |= static_cast<std::uint8_t>(1U << sub);
    }
    return idx;
  }

  bool pixel_covered(std::size_t idx) const { return covered[idx] == kFull; }

  std::uint64_t covered_count() const {
    std::uint64_t n = 0;
    for (std::uint8_t c : covered) n += (c == kFull);
    return n;
  }

  void finalize_area() { area_estimate = covered_count() * pixel_area(); }
};

// Binary P5, row-major, top-left origin: the first row is the top of the
// window (max y). Covered pixels are black on white.
inline void write_ppm(std::ostream& os, const AmoebaRaster& r) {
  os << "P5\n" << r.resolution << " " << r.resolution << "\n255\n";
  for (int row = 0; row < r.resolution; ++row) {
    const int iy = r.resolution - 1 - row;
    for (int ix = 0; ix < r.resolution; ++ix) {
      // any touched subcell renders; the area estimate stays conservative
      const std::uint8_t v =
          r.covered[static_cast<std::size_t>(iy) * r.resolution + ix] ? 0 : 255;
      os.put(static_cast<char>(v));
    }
  }
}

inline void write_cloud_csv(std::ostream& os, const AmoebaRaster& r) {
  for (const auto& p : r.cloud) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ",";
      os << detail::format_double(p[i]);
    }
    os << "\n";
  }
}

inline nlohmann::json raster_report_json(const AmoebaRaster& r) {
  nlohmann::json j;
  j["window"] = {{"lo", r.window.lo}, {"hi", r.window.hi}};
  j["resolution"] = r.resolution;
  j["samples"] = r.samples_used;
  if (!r.covered.empty()) {
    j["covered_pixels"] = r.covered_count();
    j["area_estimate"] = r.area_estimate;
  }
  if (!r.cloud.empty()) j["cloud_points"] = r.cloud.size();
  return j;
}

}  // namespace amoeba
