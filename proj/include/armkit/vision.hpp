#pragma once

// Fallback object locator for the fixed top-down camera: background
// subtraction, largest 4-connected blob, and a pixel -> table-plane homography.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "armkit/image.hpp"

namespace armkit {

class VisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pixel set iff |frame - background| > threshold.
inline BinaryMask subtract_images(const GrayImage& background, const GrayImage& frame, int threshold) {
  if (background.width != frame.width || background.height != frame.height) {
    throw VisionError("image dimensions differ: " + std::to_string(background.width) + "x" +
                      std::to_string(background.height) + " vs " + std::to_string(frame.width) + "x" +
                      std::to_string(frame.height));
  }
  if (threshold < 0 || threshold > 255) throw VisionError("threshold must lie in [0, 255]");
  BinaryMask mask(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    const int diff = std::abs(static_cast<int>(frame.pixels[i]) - static_cast<int>(background.pixels[i]));
    mask.bits[i] = diff > threshold ? 1 : 0;
  }
  return mask;
}

struct Blob {
  Eigen::Vector2d centroid;  // (x = column, y = row), mean of member pixel coordinates
  std::size_t area = 0;
};

/// Largest 4-connected component with area >= min_area. Equal areas resolve to
/// the component found first in raster order.
inline std::optional<Blob> largest_blob(const BinaryMask& mask, std::size_t min_area) {
  const std::size_t w = mask.width, h = mask.height;
  std::vector<std::uint8_t> seen(w * h, 0);
  std::vector<std::size_t> stack;
  std::optional<Blob> best;

  for (std::size_t start = 0; start < w * h; ++start) {
    if (!mask.bits[start] || seen[start]) continue;
    // Integer coordinate sums keep the centroid exact for any blob that fits in memory.
    std::uint64_t area = 0, sum_x = 0, sum_y = 0;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const std::size_t x = idx % w, y = idx / w;
      ++area;
      sum_x += x;
      sum_y += y;
      auto visit = [&](std::size_t n) {
        if (mask.bits[n] && !seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (x > 0) visit(idx - 1);
      if (x + 1 < w) visit(idx + 1);
      if (y > 0) visit(idx - w);
      if (y + 1 < h) visit(idx + w);
    }
    if (area >= min_area && (!best || area > best->area)) {
      const double n = static_cast<double>(area);
      best = Blob{Eigen::Vector2d(static_cast<double>(sum_x) / n, static_cast<double>(sum_y) / n),
                  static_cast<std::size_t>(area)};
    }
  }
  return best;
}

/// Projective map from homogeneous pixel coordinates to the table plane (meters),
/// scaled so that m(2, 2) == 1.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  Homography inverse() const {
    Eigen::Matrix3d inv = m.inverse();
    return Homography{inv / inv(2, 2)};
  }
};

struct Correspondence {
  Eigen::Vector2d pixel;
  Eigen::Vector2d world;  // meters on the table plane
};

namespace detail {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
inline Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0)) throw VisionError("degenerate correspondences: all points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * c.x(), 0.0, s, -s * c.y(), 0.0, 0.0, 1.0;
  return t;
}

inline Eigen::Vector2d apply(const Eigen::Matrix3d& t, const Eigen::Vector2d& p) {
  const Eigen::Vector3d r = t * p.homogeneous();
  return r.hnormalized();
}

inline void require_general_position(const std::vector<Eigen::Vector2d>& normalized, const char* which) {
  const std::size_t n = normalized.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((normalized[i] - normalized[j]).norm() < 1e-9) {
        throw VisionError(std::string("degenerate correspondences: duplicate ") + which + " points");
      }
    }
  }
  if (n != 4) return;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Eigen::Vector2d u = normalized[j] - normalized[i];
        const Eigen::Vector2d v = normalized[k] - normalized[i];
        if (std::abs(u.x() * v.y() - u.y() * v.x()) < 1e-9) {
          throw VisionError(std::string("degenerate correspondences: three collinear ") + which + " points");
        }
      }
    }
  }
}

}  // namespace detail

/// Normalized direct linear transform over >= 4 correspondences.
inline Homography estimate_homography(std::span<const Correspondence> pairs) {
  if (pairs.size() < 4) {
    throw VisionError("homography needs at least 4 correspondences, got " + std::to_string(pairs.size()));
  }
  std::vector<Eigen::Vector2d> px, wd;
  for (const auto& c : pairs) {
    px.push_back(c.pixel);
    wd.push_back(c.world);
  }
  const Eigen::Matrix3d tp = detail::normalizing_transform(px);
  const Eigen::Matrix3d tw = detail::normalizing_transform(wd);
  for (auto& p : px) p = detail::apply(tp, p);
  for (auto& p : wd) p = detail::apply(tw, p);
  detail::require_general_position(px, "pixel");
  detail::require_general_position(wd, "world");

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = px[static_cast<std::size_t>(i)].x(), y = px[static_cast<std::size_t>(i)].y();
    const double u = wd[static_cast<std::size_t>(i)].x(), v = wd[static_cast<std::size_t>(i)].y();
    a.row(2 * i) << -x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  // A full-rank 8-dimensional row space is required for a unique solution.
  if (sv.size() >= 8 && sv(7) <= 1e-10 * sv(0)) {
    throw VisionError("degenerate correspondences: homography is not uniquely determined");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Eigen::Matrix3d full = tw.inverse() * hn * tp;
  if (std::abs(full(2, 2)) < 1e-12 * full.cwiseAbs().maxCoeff()) {
    throw VisionError("degenerate correspondences: pixel origin maps to infinity");
  }
  full /= full(2, 2);
  if (!(std::abs(full.determinant()) > 1e-12)) throw VisionError("degenerate correspondences: singular homography");
  return Homography{full};
}

/// Table-plane point under pixel `p`, with z set to the table height.
inline Eigen::Vector3d pixel_to_world(const Homography& h, const Eigen::Vector2d& p, double table_height) {
  const Eigen::Vector3d r = h.m * p.homogeneous();
  if (std::abs(r.z()) < 1e-12) throw VisionError("pixel maps to infinity under the homography");
  return Eigen::Vector3d(r.x() / r.z(), r.y() / r.z(), table_height);
}

/// Calibration fixture: JSON array of {px, py, wx_m, wy_m}.
inline std::vector<Correspondence> load_calibration(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw VisionError(std::string("malformed calibration file: ") + e.what());
  }
  if (!doc.is_array()) throw VisionError("calibration file must be a JSON array");
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "calibration entry " + std::to_string(i);
    if (!e.is_object()) throw VisionError(where + " must be an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      const std::string& k = it.key();
      if (k != "px" && k != "py" && k != "wx_m" && k != "wy_m") throw VisionError(where + ": unknown field '" + k + "'");
    }
    auto num = [&](const char* key) {
      auto it = e.find(key);
      if (it == e.end() || !it->is_number()) throw VisionError(where + ": '" + key + "' must be a number");
      return it->get<double>();
    };
    out.push_back({Eigen::Vector2d(num("px"), num("py")), Eigen::Vector2d(num("wx_m"), num("wy_m"))});
  }
  if (out.size() < 4) throw VisionError("calibration needs at least 4 correspondences");
  return out;
}

struct DetectParams {
  int threshold = 30;
  std::size_t min_area = 20;
  double table_height = 0.0;  // m
};

struct Detection {
  Eigen::Vector2d pixel_centroid;
  std::size_t area = 0;
  Eigen::Vector3d world_point;
};

inline std::optional<Detection> detect_object(const GrayImage& background, const GrayImage& frame,
                                              const Homography& h, const DetectParams& params) {
  const BinaryMask mask = subtract_images(background, frame, params.threshold);
  const auto blob = largest_blob(mask, params.min_area);
  if (!blob) return std::nullopt;
  return Detection{blob->centroid, blob->area, pixel_to_world(h, blob->centroid, params.table_height)};
}

}  // namespace armkit
