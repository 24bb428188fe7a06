#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vesp/besov.hpp"
#include "vesp/multipliers.hpp"

namespace vesp {

/// Deterministic child seed (splitmix64 finalizer).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Band and slope of a random field. Blocks q_lo..q_hi are kept (clamped to
/// the grid's range); the coefficients decay like |xi|^slope.
struct BandSpec {
    int q_lo = -100;
    int q_hi = 100;
    double slope = 0.0;
};

inline double default_slope(const Grid& g) { return -0.5 * (g.dim + 1); }

/// Gaussian white noise filtered to a band, dealiased, mean removed.
inline Spectrum random_spectrum(const Grid& g, std::uint64_t seed, const BandSpec& band) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Field noise(g);
    for (auto& v : noise.values()) v = gauss(rng);
    Spectrum s = forward(noise);
    const auto t = block_table(g);
    const int lo = std::max(band.q_lo, t->qmin);
    const int hi = std::min(band.q_hi, t->qmax);
    const auto& r = s.geo().radius;
    s = apply_symbol(std::move(s), [&](std::size_t m) {
        if (m == 0) return 0.0;
        double w = 0.0;
        for (int q = lo; q <= hi; ++q) w += t->weight(m, q);
        return w * std::pow(r[m], band.slope);
    });
    return dealias(s);
}

inline VectorSpectrum random_vector_spectrum(const Grid& g, std::uint64_t seed, const BandSpec& band) {
    std::vector<Spectrum> c;
    for (int j = 0; j < g.dim; ++j) c.push_back(random_spectrum(g, sub_seed(seed, j), band));
    return VectorSpectrum(g.dim, std::move(c));
}

inline TensorSpectrum random_tensor_spectrum(const Grid& g, std::uint64_t seed, const BandSpec& band) {
    std::vector<Spectrum> c;
    for (int j = 0; j < g.dim * g.dim; ++j) c.push_back(random_spectrum(g, sub_seed(seed, j), band));
    return TensorSpectrum(g.dim, std::move(c));
}

inline Field random_field(const Grid& g, std::uint64_t seed, const BandSpec& band) {
    return inverse(random_spectrum(g, seed, band));
}

}  // namespace vesp
