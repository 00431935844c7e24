// Copyright 2026 The DWE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dwe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dwe/error.hpp"

namespace dwe {
namespace {

struct Point {
  double y, x;
};

double segment_distance(Point p, Point a, Point b) {
  const double vy = b.y - a.y, vx = b.x - a.x;
  const double len2 = vy * vy + vx * vx;
  double t = len2 > 0 ? ((p.y - a.y) * vy + (p.x - a.x) * vx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dy = p.y - (a.y + t * vy), dx = p.x - (a.x + t * vx);
  return std::sqrt(dy * dy + dx * dx);
}

class Painter {
 public:
  Painter(std::size_t h, std::size_t w) : h_(h), w_(w), canvas_(h * w, 0.0) {}

  template <typename Dist>
  void paint(Dist dist, double thickness) {
    for (std::size_t r = 0; r < h_; ++r)
      for (std::size_t c = 0; c < w_; ++c) {
        const double d = dist(Point{static_cast<double>(r), static_cast<double>(c)});
        canvas_[r * w_ + c] = std::max(canvas_[r * w_ + c], std::exp(-d * d / (2 * thickness * thickness)));
      }
  }

  void quantize(double cutoff, std::uint8_t* out) const {
    const double peak = *std::max_element(canvas_.begin(), canvas_.end());
    for (std::size_t i = 0; i < canvas_.size(); ++i) {
      const double v = peak > 0 ? canvas_[i] / peak : 0.0;
      out[i] = v < cutoff ? 0 : static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }

 private:
  std::size_t h_, w_;
  std::vector<double> canvas_;
};

}  // namespace

std::string_view to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::Blob: return "blob";
    case ShapeClass::Ring: return "ring";
    case ShapeClass::Stroke: return "stroke";
    case ShapeClass::Cross: return "cross";
  }
  return "unknown";
}

ImageSet make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.count == 0 || cfg.height < 4 || cfg.width < 4)
    fail(ErrorKind::InvalidArgument, "synthetic set needs count >= 1 and images of at least 4x4");
  if (!(cfg.cutoff >= 0.0 && cfg.cutoff < 1.0)) fail(ErrorKind::InvalidArgument, "cutoff must lie in [0, 1)");
  ImageSet set;
  set.height = cfg.height;
  set.width = cfg.width;
  set.pixels.assign(cfg.count * cfg.height * cfg.width, 0);
  set.labels.resize(cfg.count);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  // Geometry is specified for 28x28 and scaled to the requested size.
  const double scale = static_cast<double>(std::min(cfg.height, cfg.width)) / 28.0;
  const Point mid{(cfg.height - 1) / 2.0, (cfg.width - 1) / 2.0};
  const double pi = std::numbers::pi;

  for (std::size_t i = 0; i < cfg.count; ++i) {
    const auto cls = static_cast<ShapeClass>(i % kShapeClassCount);
    const Point c{mid.y + scale * uniform(-3.0, 3.0), mid.x + scale * uniform(-3.0, 3.0)};
    const double thick = scale * uniform(0.8, 1.3);
    Painter p(cfg.height, cfg.width);
    auto stroke = [&](double angle, double length) {
      const double hy = 0.5 * length * std::sin(angle), hx = 0.5 * length * std::cos(angle);
      const Point a{c.y - hy, c.x - hx}, b{c.y + hy, c.x + hx};
      p.paint([&](Point q) { return segment_distance(q, a, b); }, thick);
    };
    switch (cls) {
      case ShapeClass::Blob:
        p.paint([&](Point q) { return std::hypot(q.y - c.y, q.x - c.x); }, scale * uniform(1.5, 3.0));
        break;
      case ShapeClass::Ring: {
        const double radius = scale * uniform(4.0, 8.0);
        p.paint([&](Point q) { return std::abs(std::hypot(q.y - c.y, q.x - c.x) - radius); }, thick);
        break;
      }
      case ShapeClass::Stroke:
        stroke(uniform(0.0, pi), scale * uniform(10.0, 18.0));
        break;
      case ShapeClass::Cross: {
        const double angle = uniform(0.0, pi);
        stroke(angle, scale * uniform(8.0, 14.0));
        stroke(angle + uniform(pi / 3, 2 * pi / 3), scale * uniform(8.0, 14.0));
        break;
      }
    }
    p.quantize(cfg.cutoff, set.pixels.data() + i * cfg.height * cfg.width);
    set.labels[i] = static_cast<std::uint8_t>(cls);
  }
  return set;
}

}  // namespace dwe
