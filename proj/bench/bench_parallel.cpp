// Serial reference vs OpenMP kernels on the Fig 1 stack.
//   bench_parallel [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "dipolar/design.hpp"

using namespace dipolar;

namespace {

double seconds(const std::function<void()>& f, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

Stack fig1() {
  const auto n = [](double v) { return Material::constant({v, 0.0}); };
  return Stack({{n(2.2), kSemiInfinite}, {n(1.5), 350.0}, {n(1.0), 200.0}, {bundled_gold(), kSemiInfinite}}, 1,
               200.0);
}

void row(const char* name, const std::function<void(Execution)>& f, int repeats) {
  const double serial = seconds([&] { f(Execution::serial); }, repeats);
  const double parallel = seconds([&] { f(Execution::parallel); }, repeats);
  std::printf("%-22s serial %8.3f s  parallel %8.3f s  speedup %5.2f\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());

  const StackTemplate t{fig1(), 637.0, 2, {2}, false};
  std::vector<double> lambdas;
  for (double l = 450.0; l <= 900.0; l += 10.0) lambdas.push_back(l);
  const SweepSpec spec{.stack_template = t, .parameter = SweepParameter::wavelength, .values = lambdas};
  row("sweep (46 wavelengths)", [&](Execution e) { sweep(spec, e); }, repeats);

  const EmissionModel model(fig1(), 637.0);
  std::vector<double> theta;
  for (int i = 0; i <= 18000; ++i) theta.push_back(i * 0.005);
  row("pattern (18001 angles)", [&](Execution e) { far_field_pattern(model, Orientation::vertical, theta, e); },
      repeats);

  std::vector<double> positions;
  for (int i = 5; i <= 95; i += 5) positions.push_back(i * 0.01);
  const Stack channel({{Material::constant({1.77, 0.0}), kSemiInfinite},
                       {Material::constant({1.5, 0.0}), 200.0},
                       {Material::constant({1.35, 0.0}), 200.0},
                       {Material::constant({1.5, 0.0}), 200.0},
                       {bundled_gold(), kSemiInfinite}},
                      2, 100.0);
  const StackTemplate ct{channel, 650.0, 3, {}, false};
  row("channel scan (19 pos)", [&](Execution e) { channel_scan(ct, 500.0, positions, 90.0, e); }, repeats);
  return 0;
}
