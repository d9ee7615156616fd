#pragma once

#include <random>
#include <vector>

#include "dipolar/design.hpp"
#include "dipolar/emission.hpp"

namespace testing {

using namespace dipolar;

inline Layer slab(double n, double thickness = kSemiInfinite) {
  return {Material::constant({n, 0.0}), thickness};
}
inline Layer slab(complex n, double thickness = kSemiInfinite) { return {Material::constant(n), thickness}; }

inline Stack homogeneous(double n = 1.0) { return Stack({slab(n), slab(n, 300.0), slab(n)}, 1, 150.0); }

// 2.2 | 1.5 (350 nm) | 1.0 (200 nm) | gold, emitter 200 nm above the substrate.
inline Stack fig1_stack(double h = 200.0, double spacer = 200.0, double n3 = 1.0, double t = 350.0) {
  return Stack({slab(2.2), slab(1.5, t), slab(n3, spacer), {bundled_gold(), kSemiInfinite}}, 1, h);
}

inline StackTemplate fig1_template() { return {fig1_stack(), 637.0, 2, {2}, false}; }

// 2 to 5 layers, indices in [1, 3.5], thicknesses in [10, 1000] nm. The bottom half-space
// gets the largest index so that no mode is trapped in the stack.
inline Stack random_lossless_stack(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 5);
  std::uniform_real_distribution<double> index(1.0, 3.5);
  std::uniform_real_distribution<double> thickness(10.0, 1000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<double> nj(static_cast<std::size_t>(n));
  for (auto& v : nj) v = index(rng);
  std::swap(nj.front(), *std::max_element(nj.begin(), nj.end()));
  std::vector<Layer> layers;
  for (int j = 0; j < n; ++j) {
    const bool outer = j == 0 || j == n - 1;
    layers.push_back(slab(nj[static_cast<std::size_t>(j)], outer ? kSemiInfinite : thickness(rng)));
  }
  const std::size_t e = n == 2 ? 1 : std::uniform_int_distribution<std::size_t>(1, n - 2)(rng);
  const double h = layers[e].semi_infinite() ? 50.0 + 200.0 * unit(rng) : unit(rng) * layers[e].thickness_nm;
  return Stack(std::move(layers), e, h);
}

}  // namespace testing
