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

#include <numbers>

#include <catch_amalgamated.hpp>

#include "snnprune/lif.hpp"

using snnprune::heaviside;
using snnprune::LifParams;
using snnprune::LifState;
using snnprune::surrogate_derivative;
using snnprune::Tensor;

TEST_CASE("heaviside semantics") {
  CHECK(heaviside(0.0) == 1.0);
  CHECK(heaviside(-0.1) == 0.0);
  CHECK(heaviside(5.0) == 1.0);
  CHECK(heaviside(-0.0) == 1.0);  // signed zero still fires
}

TEST_CASE("lif params validation") {
  CHECK_THROWS_AS((LifParams{0.0, 0.0, 1.0}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS((LifParams{2.0, 1.0, 1.0}).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(LifParams{}.validate());
}

TEST_CASE("lif step matches the hand-traced table") {
  const LifParams p{2.0, 0.0, 1.0};

  SECTION("subthreshold input") {
    LifState st({1});
    st.reset(p.v_rest);
    const Tensor& s = st.step(Tensor({1}, {1.0}), p);
    CHECK(st.h_cache[0][0] == 0.5);
    CHECK(s[0] == 0.0);
    CHECK(st.v[0] == 0.5);
  }

  SECTION("spiking input resets to v_rest") {
    LifState st({1});
    st.reset(p.v_rest);
    const Tensor& s = st.step(Tensor({1}, {3.0}), p);
    CHECK(st.h_cache[0][0] == 1.5);
    CHECK(s[0] == 1.0);
    CHECK(st.v[0] == 0.0);
  }

  SECTION("quiescent neuron") {
    LifState st({1});
    st.reset(p.v_rest);
    const Tensor& s = st.step(Tensor({1}, {0.0}), p);
    CHECK(st.h_cache[0][0] == 0.0);
    CHECK(s[0] == 0.0);
    CHECK(st.v[0] == 0.0);
  }
}

TEST_CASE("spikes are binary and caches grow per step") {
  const LifParams p{2.0, 0.0, 1.0};
  LifState st({4});
  st.reset(p.v_rest);
  const Tensor x({4}, {-1.0, 0.4, 2.5, 10.0});
  for (int t = 0; t < 3; ++t) {
    const Tensor& s = st.step(x, p);
    for (std::size_t i = 0; i < s.numel(); ++i)
      CHECK((s[i] == 0.0 || s[i] == 1.0));
    // Post-spike potential equals v_rest wherever S = 1.
    for (std::size_t i = 0; i < s.numel(); ++i)
      if (s[i] == 1.0) CHECK(st.v[i] == p.v_rest);
  }
  CHECK(st.steps() == 3);
  CHECK(st.h_cache.size() == 3);
}

TEST_CASE("lif step rejects shape mismatch") {
  LifState st({2});
  st.reset(0.0);
  CHECK_THROWS_AS(st.step(Tensor({3}), LifParams{}), snnprune::DimensionError);
}

TEST_CASE("surrogate derivative closed form") {
  CHECK(surrogate_derivative(0.0) == 1.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK_THAT(surrogate_derivative(1.0),
             Catch::Matchers::WithinRel(1.0 / (1.0 + pi2), 1e-15));
  // Tails decay monotonically in |u|.
  double prev = surrogate_derivative(0.0);
  for (double u = 0.5; u <= 16.0; u += 0.5) {
    const double cur = surrogate_derivative(u);
    CHECK(cur < prev);
    CHECK(cur == surrogate_derivative(-u));
    prev = cur;
  }
  CHECK(surrogate_derivative(1e6) < 1e-10);
}

TEST_CASE("smooth fire is the antiderivative shape") {
  CHECK(snnprune::smooth_fire(0.0) == 0.5);
  CHECK(snnprune::smooth_fire(1e9) > 0.999);
  CHECK(snnprune::smooth_fire(-1e9) < 0.001);
  // Central difference of h matches the surrogate derivative.
  const double eps = 1e-6;
  for (double u : {-2.0, -0.3, 0.0, 0.7, 1.5}) {
    const double fd =
        (snnprune::smooth_fire(u + eps) - snnprune::smooth_fire(u - eps)) /
        (2 * eps);
    CHECK_THAT(fd, Catch::Matchers::WithinAbs(surrogate_derivative(u), 1e-6));
  }
}
