#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace dynbf {

// Deterministic stream RNG. A stream is addressed by (seed, a, b, c); the ids are
// folded into the mt19937_64 seed through the SplitMix64 finalizer so distinct
// tracks/steps get decorrelated streams from one master seed. Gaussians come from
// an explicit Box-Muller transform over 53-bit uniforms, so the produced doubles
// are reproducible bit-for-bit wherever the standard mt19937_64 engine is.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                       std::uint64_t c = 0) {
        std::uint64_t h = mix(seed ^ 0x243f6a8885a308d3ull);
        h = mix(h ^ a);
        h = mix(h ^ b);
        h = mix(h ^ c);
        gen_.seed(h);
    }

    // Uniform on (0, 1]; never returns 0 so log() below is safe.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
    }

    // Standard normal pair via Box-Muller.
    void gaussian_pair(double& z0, double& z1) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        z0 = r * std::cos(phi);
        z1 = r * std::sin(phi);
    }

    double gaussian() {
        double z0, z1;
        gaussian_pair(z0, z1);
        return z0;
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = 1 (variance 1/2 per part).
    std::complex<double> cgaussian_unit() {
        double z0, z1;
        gaussian_pair(z0, z1);
        return {z0 * M_SQRT1_2, z1 * M_SQRT1_2};
    }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace dynbf
