// Copyright 2026 The snnprune Authors
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

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <catch_amalgamated.hpp>

#include "snnprune/sparsity.hpp"

using namespace snnprune;

namespace {

// Exhaustive minimizer of 1/2||W - w_bar||^2 + eta1*y*||W||^2_{ceil(s),2}:
// for every choice of which k elements decay, build the candidate and score
// it with the true objective.
std::vector<double> prox_bruteforce(const std::vector<double>& w_bar, double s,
                                    double y, double eta1) {
  const std::size_t n = w_bar.size();
  const auto k = static_cast<std::size_t>(std::ceil(s));
  const double factor = 1.0 / (1.0 + 2.0 * eta1 * y);
  std::vector<double> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    std::vector<double> cand = w_bar;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ull << i)) cand[i] *= factor;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cand[i] - w_bar[i];
      obj += 0.5 * d * d;
    }
    obj += eta1 * y * bottom_s2_sq(cand, static_cast<double>(k));
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("bottom norm closed forms") {
  const std::vector<double> v = {3.0, -1.0, 2.0};
  CHECK(bottom_s2_sq(v, 0.0) == 0.0);
  CHECK(bottom_s2_sq(v, 2.0) == 5.0);
  CHECK(bottom_s2_sq(v, 1.5) == 5.0);  // ceil(s) elements
  CHECK(bottom_s2_sq(v, 3.0) == 14.0);
  CHECK_THROWS_AS(bottom_s2_sq(v, -0.1), std::domain_error);
  CHECK_THROWS_AS(bottom_s2_sq(v, 3.1), std::domain_error);
}

TEST_CASE("bottom norm is non-decreasing in s") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(17);
    for (double& x : v) x = gauss(rng);
    SortedSquares ss(v);
    double prev = 0.0;
    for (std::size_t s = 0; s <= v.size(); ++s) {
      const double cur = bottom_s2_sq(ss, static_cast<double>(s));
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("straight-through derivative of the bottom norm") {
  const std::vector<double> v = {3.0, -1.0, 2.0};
  CHECK(ste_sparsity_grad(v, 1.0) == 4.0);
  CHECK(ste_sparsity_grad(v, 3.0) == 9.0);  // index clamps at Dim
  CHECK(ste_sparsity_grad(v, 0.0) == 1.0);
  CHECK(ste_sparsity_grad(v, 1.5) == 4.0);  // floor(s)+1
}

TEST_CASE("ste grad equals the forward difference exactly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(1 + rep % 23);
    for (double& x : v) x = gauss(rng);
    SortedSquares ss(v);
    std::uniform_real_distribution<double> sdist(
        0.0, static_cast<double>(v.size()));
    const double s = sdist(rng);
    const auto fl = std::floor(s);
    const double hi =
        bottom_s2_sq(ss, std::min(static_cast<double>(v.size()), fl + 1));
    const double lo = bottom_s2_sq(ss, fl);
    CHECK(ste_sparsity_grad(ss, s) == hi - lo);  // bit-exact, not approximate
  }
}

TEST_CASE("DC reformulation: zero bottom norm iff enough exact zeros") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + rep % 20;
    const std::size_t zeros = rng() % (n + 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = i < zeros ? 0.0 : gauss(rng) + (gauss(rng) > 0 ? 1.0 : -1.0);
    std::shuffle(v.begin(), v.end(), rng);
    SortedSquares ss(v);
    for (std::size_t s = 0; s <= n; ++s) {
      const bool is_zero = bottom_s2_sq(ss, static_cast<double>(s)) == 0.0;
      CHECK(is_zero == (zeros >= s));
    }
  }
}

TEST_CASE("proximal operator worked example") {
  const std::vector<double> w = {3.0, -1.0, 2.0};
  const std::vector<double> out = prox_sparsity(w, 2.0, 1.0, 0.5);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -0.5);
  CHECK(out[2] == 1.0);
}

TEST_CASE("proximal operator edge behavior") {
  const std::vector<double> w = {3.0, -1.0, 2.0};
  CHECK(prox_sparsity(w, 2.0, 0.0, 0.5) == w);  // y = 0 decays nothing
  // s = Dim: no square strictly exceeds the max square, all decay.
  const std::vector<double> all = prox_sparsity(w, 3.0, 1.0, 0.5);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(all[i] == w[i] / 2.0);
  CHECK_THROWS_AS(prox_sparsity(w, 1.0, -0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS(prox_sparsity(w, 1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("prox never raises magnitudes and keeps survivors bitwise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> w(12);
    for (double& x : w) x = gauss(rng);
    std::uniform_real_distribution<double> sdist(0.0, 12.0);
    const double s = sdist(rng);
    const std::vector<double> out = prox_sparsity(w, s, 0.7, 0.3);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(std::fabs(out[i]) <= std::fabs(w[i]));
      if (out[i] == w[i]) ++kept;
    }
    CHECK(kept == w.size() - static_cast<std::size_t>(std::ceil(s)));
  }
}

TEST_CASE("prox matches the brute-force minimizer on small vectors") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rep % 7;  // dim <= 8
    std::vector<double> w(n);
    for (double& x : w) x = gauss(rng);
    std::uniform_real_distribution<double> sdist(0.0, static_cast<double>(n));
    const double s = sdist(rng);
    const double y = unit(rng);
    const double eta1 = unit(rng);
    const std::vector<double> fast = prox_sparsity(w, s, y, eta1);
    const std::vector<double> slow = prox_bruteforce(w, s, y, eta1);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::fabs(fast[i] - slow[i]) <= 1e-6);
  }
}

TEST_CASE("exact zero counting with snap tolerance") {
  CHECK(count_zeros({0.0, 0.0, 0.0}, 0.0) == 3);
  CHECK(count_zeros({1e-12, 0.5}, 1e-8) == 1);
  CHECK(count_zeros({0.1, -0.2}, 0.0) == 0);
  CHECK_THROWS_AS(count_zeros({1.0}, -1.0), std::domain_error);
}

TEST_CASE("selection helpers agree with full sorts") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(40);
    for (double& x : v) x = gauss(rng);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    SortedSquares ss(v);
    for (std::size_t k = 1; k <= v.size(); k += 7) {
      CHECK(kth_smallest_square(sq, k) == ss.sq[k - 1]);
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += ss.sq[i];
      CHECK_THAT(sum_bottom_squares(sq, k),
                 Catch::Matchers::WithinRel(sum, 1e-12));
    }
  }
}

TEST_CASE("flat view bijection over prunable weights") {
  SpikingNetwork net;
  net.layers.push_back(Layer::linear(3, 2));
  net.layers.push_back(Layer::linear(2, 2));
  net.layers[0].prunable = true;
  net.layers[1].prunable = false;
  FlatView fv = FlatView::unstructured(net);
  REQUIRE(fv.size() == 6);
  net.layers[0].w.vec() = {1, 2, 3, 4, 5, 6};
  fv.refresh(net);
  CHECK(fv.values() == std::vector<double>{1, 2, 3, 4, 5, 6});
  fv.apply_values(net, {6, 5, 4, 3, 2, 1});
  CHECK(net.layers[0].w.vec() == std::vector<double>{6, 5, 4, 3, 2, 1});
}

TEST_CASE("structured view uses column norms") {
  SpikingNetwork net;
  net.layers.push_back(Layer::linear(2, 2));
  net.layers[0].w.vec() = {3, 0, 4, 0};  // columns (3,4) and (0,0)
  FlatView fv = FlatView::structured(net);
  REQUIRE(fv.size() == 2);
  fv.refresh(net);
  CHECK(fv.values()[0] == 5.0);
  CHECK(fv.values()[1] == 0.0);

  // Scaling a group scales all member weights uniformly.
  fv.apply_values(net, {2.5, 0.0});
  CHECK(net.layers[0].w.vec() == std::vector<double>{1.5, 0, 2.0, 0});

  // Zeroing the bottom group wipes the whole column.
  fv.refresh(net);
  fv.zero_bottom(net, 1);
  CHECK(net.layers[0].w.vec() == std::vector<double>{1.5, 0, 2.0, 0});
  fv.refresh(net);
  fv.zero_bottom(net, 2);
  CHECK(net.layers[0].w.vec() == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("unstructured zero_bottom removes smallest magnitudes") {
  SpikingNetwork net;
  net.layers.push_back(Layer::linear(2, 2));
  net.layers[0].w.vec() = {3, -1, 2, -4};
  FlatView fv = FlatView::unstructured(net);
  fv.refresh(net);
  fv.zero_bottom(net, 2);
  CHECK(net.layers[0].w.vec() == std::vector<double>{3, 0, 0, -4});
}

TEST_CASE("prunability threshold on connection count") {
  SpikingNetwork net;
  net.layers.push_back(Layer::linear(3, 2));  // 6 weights
  net.layers.push_back(Layer::linear(2, 3));  // 6 weights
  mark_prunable(net, 5);
  CHECK(net.layers[0].prunable);
  CHECK(net.layers[1].prunable);
  mark_prunable(net, 6);
  CHECK_FALSE(net.layers[0].prunable);
  CHECK_FALSE(net.layers[1].prunable);
}
