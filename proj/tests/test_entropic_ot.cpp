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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dwe/entropic_ot.hpp"
#include "dwe/error.hpp"
#include "dwe/exact_ot.hpp"
#include "oracles.hpp"

using namespace dwe;

namespace {

SinkhornConfig tight(double epsilon) {
  SinkhornConfig c;
  c.epsilon = epsilon;
  c.tolerance = 1e-10;
  c.max_iters = 200000;
  return c;
}

Histogram centered_gaussian(std::size_t n, double sigma) {
  std::vector<double> m(n * n);
  const double c = (double(n) - 1) / 2;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m[i * n + j] = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
  return normalize(m, n, n);
}

double total_variation(const Histogram& a, const Histogram& b) {
  double tv = 0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2;
}

// Closed form for one input with weight 1: the scaling loop reaches its fixed
// point after one sweep, giving K^T (a / K 1) with K the Gibbs kernel.
std::vector<double> single_input_fixed_point(const Histogram& a, double epsilon) {
  const std::size_t n = a.size();
  const GroundCost cost(a.height(), a.width());
  std::vector<double> k1(n, 0.0), out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k1[i] += std::exp(-cost(i, j) / epsilon);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += std::exp(-cost(i, j) / epsilon) * a[i] / k1[i];
  return out;
}

}  // namespace

TEST_SUITE("entropic_ot") {
  TEST_CASE("config validation and defaults") {
    SinkhornConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.tolerance = -1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    const SinkhornConfig d = default_sinkhorn_config(28, 28);
    CHECK(d.epsilon == doctest::Approx(0.05 * median_cost(28, 28, true)));
    CHECK(d.log_domain);
  }

  TEST_CASE("self transport vanishes up to the entropic blur") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
      const Histogram h = testing::random_dense(rng, 8, 8);
      for (double eps : {0.5, 0.2, 0.1}) {
        SinkhornConfig c;
        c.epsilon = eps;
        c.max_iters = 100000;
        const SinkhornResult r = sinkhorn_w2(h, h, c);
        CHECK(r.converged);
        CHECK(r.objective >= 0.0);
        CHECK(r.objective <= 10 * eps);
      }
    }
  }

  TEST_CASE("objective is symmetric") {
    std::mt19937_64 rng(3);
    const SinkhornConfig c = tight(0.1 * median_cost(8, 8, true));
    for (int t = 0; t < 20; ++t) {
      const Histogram a = testing::random_histogram(rng, 8, 8, 12), b = testing::random_dense(rng, 8, 8);
      CHECK(std::abs(sinkhorn_w2(a, b, c).objective - sinkhorn_w2(b, a, c).objective) <= 1e-7);
    }
  }

  TEST_CASE("epsilon sweep approaches the exact cost monotonically") {
    std::mt19937_64 rng(4);
    const double base = 0.1 * median_cost(8, 8, true);
    for (int t = 0; t < 10; ++t) {
      const Histogram a = testing::random_dense(rng, 8, 8), b = testing::random_dense(rng, 8, 8);
      const double exact = w2_exact(a, b).objective;
      double previous = INFINITY;
      for (double f : {4.0, 2.0, 1.0, 0.5}) {
        const double gap = std::abs(sinkhorn_w2(a, b, tight(f * base)).objective - exact);
        CHECK(gap <= previous);
        previous = gap;
      }
    }
  }

  TEST_CASE("small epsilon recovers the exact cost") {
    std::mt19937_64 rng(5);
    const SinkhornConfig c = tight(0.01 * median_cost(8, 8, true));
    for (int t = 0; t < 10; ++t) {
      const Histogram a = testing::random_dense(rng, 8, 8), b = testing::random_dense(rng, 8, 8);
      const double exact = w2_exact(a, b).objective;
      const SinkhornResult r = sinkhorn_w2(a, b, c);
      CHECK(r.converged);
      CHECK(r.marginal_violation <= c.tolerance);
      CHECK(std::abs(r.objective - exact) / exact <= 0.05);
    }
  }

  TEST_CASE("kernel domain agrees with log domain at moderate epsilon") {
    std::mt19937_64 rng(6);
    SinkhornConfig c = tight(0.1 * median_cost(8, 8, true));
    const Histogram a = testing::random_dense(rng, 8, 8), b = testing::random_dense(rng, 8, 8);
    const double log_obj = sinkhorn_w2(a, b, c).objective;
    c.log_domain = false;
    CHECK(sinkhorn_w2(a, b, c).objective == doctest::Approx(log_obj).epsilon(1e-8));
  }

  TEST_CASE("kernel domain reports underflow, log domain stays finite") {
    std::mt19937_64 rng(7);
    const Histogram a = testing::random_bumps(rng, 28, 28, 2), b = testing::random_bumps(rng, 28, 28, 2);
    SinkhornConfig c;
    c.epsilon = 1e-3 * median_cost(28, 28, true);
    c.max_iters = 20000;
    const SinkhornResult r = sinkhorn_w2(a, b, c);
    CHECK(std::isfinite(r.objective));
    CHECK(r.converged);
    CHECK(r.objective >= w2_exact(a, b).objective - 1e-6);
    c.log_domain = false;
    try {
      sinkhorn_w2(a, b, c);
      FAIL("expected NumericalUnderflow");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NumericalUnderflow);
    }
  }

  TEST_CASE("sinkhorn rejects mismatched grids and invalid configs") {
    const Histogram a = testing::dirac(3, 3, 0), b = testing::dirac(3, 4, 0);
    try {
      sinkhorn_w2(a, b, SinkhornConfig{});
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
    SinkhornConfig bad;
    bad.epsilon = -1;
    CHECK_THROWS_AS(sinkhorn_w2(a, a, bad), Error);
  }

  TEST_CASE("single input barycenter is the blurred input") {
    std::mt19937_64 rng(8);
    const double eps = 0.5 * median_cost(8, 8, true);
    SinkhornConfig c = default_sinkhorn_config(8, 8);
    c.epsilon = eps;
    const double w[] = {1.0};
    const Histogram sharp[] = {testing::random_histogram(rng, 8, 8, 10)};
    const BarycenterResult r = bregman_barycenter(sharp, w, c);
    const std::vector<double> expected = single_input_fixed_point(sharp[0], eps);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(r.barycenter[i] == doctest::Approx(expected[i]).epsilon(1e-9));

    const Histogram smooth[] = {centered_gaussian(8, 3.0)};
    CHECK(total_variation(bregman_barycenter(smooth, w, c).barycenter, smooth[0]) <= 0.1);
  }

  TEST_CASE("duplicated input matches the single input barycenter") {
    std::mt19937_64 rng(9);
    const Histogram h = testing::random_bumps(rng, 8, 8, 2);
    const SinkhornConfig c = default_sinkhorn_config(8, 8);
    const Histogram one[] = {h}, two[] = {h, h};
    const double w1[] = {1.0}, w2[] = {0.5, 0.5};
    const Histogram a = bregman_barycenter(one, w1, c).barycenter, b = bregman_barycenter(two, w2, c).barycenter;
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }

  TEST_CASE("two Diracs meet in the middle") {
    const Histogram hs[] = {testing::dirac(1, 9, 0), testing::dirac(1, 9, 8)};
    const double w[] = {0.5, 0.5};
    const BarycenterResult r = bregman_barycenter(hs, w, default_sinkhorn_config(1, 9));
    const auto m = r.barycenter.mass();
    CHECK(std::max_element(m.begin(), m.end()) - m.begin() == 4);
    double total = 0;
    for (double v : m) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("barycenter does not depend on input order") {
    std::mt19937_64 rng(10);
    const Histogram a = testing::random_bumps(rng, 8, 8, 1), b = testing::random_bumps(rng, 8, 8, 2),
                    c = testing::random_dense(rng, 8, 8);
    const SinkhornConfig cfg = default_sinkhorn_config(8, 8);
    const Histogram fwd[] = {a, b, c}, rev[] = {c, a, b};
    const double wf[] = {0.2, 0.3, 0.5}, wr[] = {0.5, 0.2, 0.3};
    const Histogram x = bregman_barycenter(fwd, wf, cfg).barycenter, y = bregman_barycenter(rev, wr, cfg).barycenter;
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-9));
  }

  TEST_CASE("barycenter weight and shape errors") {
    const Histogram hs[] = {testing::dirac(2, 2, 0), testing::dirac(2, 2, 3)};
    const SinkhornConfig c = default_sinkhorn_config(2, 2);
    auto kind_of = [&](std::span<const Histogram> h, std::span<const double> w) {
      try {
        bregman_barycenter(h, w, c);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::InvalidArgument;
    };
    const double short_w[] = {1.0}, negative[] = {1.5, -0.5}, off[] = {0.5, 0.6};
    CHECK(kind_of(hs, short_w) == ErrorKind::WeightError);
    CHECK(kind_of(hs, negative) == ErrorKind::WeightError);
    CHECK(kind_of(hs, off) == ErrorKind::WeightError);
    const Histogram mixed[] = {testing::dirac(2, 2, 0), testing::dirac(1, 4, 0)};
    const double even[] = {0.5, 0.5};
    CHECK(kind_of(mixed, even) == ErrorKind::DimensionMismatch);
  }
}
