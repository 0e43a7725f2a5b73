// Times the OpenMP kernels against their serial counterparts, and the cached
// grid evaluator against the plain per-point reference transcription.

#include <chrono>
#include <cstdio>
#include <functional>

#include "fcs/counting_statistics.hpp"
#include "fcs/fock_oracle.hpp"
#include "fcs/parallel.hpp"
#include "fcs/quantum_model.hpp"
#include "fcs/scattering_models.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const char* name, const char* a, double a_ms, const char* b, double b_ms,
            double deviation) {
  std::printf("%-26s %-9s %9.2f ms   %-9s %9.2f ms   ratio %6.2fx   max|diff| %.3g\n", name, a,
              a_ms, b, b_ms, a_ms / b_ms, deviation);
}

double max_value_gap(const fcs::ChiSamples& x, const fcs::ChiSamples& y) {
  double dev = 0.0;
  for (size_t k = 0; k < x.values.size(); ++k) {
    dev = std::max(dev, std::abs(x.values[k] - y.values[k]));
  }
  return dev;
}

}  // namespace

int main() {
  using namespace fcs;
  std::printf("threads: %d (OpenMP %s)\n", max_threads(), openmp_enabled() ? "on" : "off");

  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(0.35);
  spec.circumference = kTwoPi;
  spec.mu_l = 0.5;
  spec.mu_r = 20.5;
  spec.cutoff = 32.5;
  const QuantumModel model = build_two_circle(spec);  // dim 130

  {
    ChiSamples reference, cached;
    const double t_ref =
        time_ms([&] { reference = sample_chi_reference(model, ChiVariant::Regularized, 48); });
    const double t_cached =
        time_ms([&] { cached = sample_chi(model, ChiVariant::Regularized, 48); });
    report("chi grid (dim 130, M=48)", "reference", t_ref, "cached", t_cached,
           max_value_gap(reference, cached));
  }

  {
    ChiSamples one, many;
    set_num_threads(1);
    const double t_serial = time_ms([&] { one = sample_chi(model, ChiVariant::LesLev, 256); });
    set_num_threads(0);
    const double t_parallel = time_ms([&] { many = sample_chi(model, ChiVariant::LesLev, 256); });
    report("chi grid (same kernel)", "1 thread", t_serial, "N threads", t_parallel,
           max_value_gap(one, many));
  }

  {
    const ComplexMatrix u = haar_unitary(11, 10);
    fock::FockOperator serial, parallel;
    const double t_serial = time_ms([&] { serial = fock::gamma_reference(u); });
    const double t_parallel = time_ms([&] { parallel = fock::gamma(u); });
    report("gamma (d=10, 1024^2)", "serial", t_serial, "parallel", t_parallel,
           max_abs(serial - parallel));
  }

  {
    const QuantumModel small = random_model(3, 8, ModelKind::MixedCommuting);
    const ChiSamples samples = sample_chi(small, ChiVariant::LesLev, 2048);
    CountingDistribution dist;
    const double t = time_ms([&] { dist = distribution_from_chi(samples); });
    std::printf("%-26s %-9s %9.2f ms   (total %.6f)\n", "inverse DFT (M=2048)", "parallel", t,
                dist.total());
  }

  return 0;
}
