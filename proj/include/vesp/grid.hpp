#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "vesp/error.hpp"

namespace vesp {

/// Periodic box [0, L)^dim sampled with n points per axis.
///
/// Physical samples are stored row-major (last axis fastest). Spectral
/// coefficients use the real-to-complex half layout: the last axis keeps
/// wavenumbers 0..n/2, the others keep all n wavenumbers in FFT order.
struct Grid {
    int dim = 2;
    int n = 64;
    double length = 2.0 * std::numbers::pi;
    double dealias_fraction = 2.0 / 3.0;

    void validate() const {
        if (dim != 2 && dim != 3) throw PreconditionError("grid dim must be 2 or 3");
        if (n < 16 || (n & (n - 1)) != 0)
            throw PreconditionError("points_per_dim must be a power of two >= 16, got " +
                                    std::to_string(n));
        if (!(length > 0.0)) throw PreconditionError("grid period must be positive");
        if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
            throw PreconditionError("dealias_fraction must lie in (0, 1]");
    }

    std::size_t points() const {
        std::size_t p = 1;
        for (int d = 0; d < dim; ++d) p *= static_cast<std::size_t>(n);
        return p;
    }
    int half() const { return n / 2 + 1; }
    std::size_t modes() const { return points() / static_cast<std::size_t>(n) * half(); }

    /// 2*pi/L, the spacing of the wavevector lattice.
    double unit() const { return 2.0 * std::numbers::pi / length; }
    double spacing() const { return length / n; }
    double volume() const { return std::pow(length, dim); }
    double cell_volume() const { return volume() / static_cast<double>(points()); }
    /// Radius of the 2/3-rule ball in physical wavevector units.
    double dealias_radius() const { return dealias_fraction * (n / 2) * unit(); }
    /// Largest |xi| present on the grid (the corner mode).
    double max_radius() const { return unit() * (n / 2) * std::sqrt(static_cast<double>(dim)); }

    bool operator==(const Grid&) const = default;
};

inline bool same_grid(const Grid& a, const Grid& b) { return a == b; }

/// Per-mode wavevector data for one grid, shared by all fields on it.
struct SpectralGeometry {
    Grid grid;
    std::vector<double> xi;      // dim entries per mode
    std::vector<double> radius;  // |xi|
    std::vector<double> weight;  // Parseval multiplicity of the half-spectrum entry
    std::vector<unsigned char> nyquist;  // mode touches k = -n/2 on some axis

    explicit SpectralGeometry(const Grid& g) : grid(g) {
        const std::size_t m = g.modes();
        xi.resize(m * g.dim);
        radius.resize(m);
        weight.resize(m);
        nyquist.resize(m);
        const int n = g.n;
        const int h = g.half();
        const double unit = g.unit();
        auto signed_k = [n](int i) { return i < n / 2 ? i : i - n; };
        std::size_t idx = 0;
        if (g.dim == 2) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < h; ++j, ++idx) fill(idx, {signed_k(i), j}, j, n, unit);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < h; ++l, ++idx)
                        fill(idx, {signed_k(i), signed_k(j), l}, l, n, unit);
        }
    }

private:
    void fill(std::size_t idx, std::vector<int> k, int last, int n, double unit) {
        const int d = static_cast<int>(k.size());
        double r2 = 0.0;
        bool nyq = false;
        for (int a = 0; a < d; ++a) {
            const double x = unit * k[a];
            xi[idx * d + a] = x;
            r2 += x * x;
            if (std::abs(k[a]) == n / 2) nyq = true;
        }
        radius[idx] = std::sqrt(r2);
        weight[idx] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
        nyquist[idx] = nyq ? 1 : 0;
    }
};

/// Process-wide, internally synchronized geometry cache.
inline std::shared_ptr<const SpectralGeometry> geometry(const Grid& g) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, double, double>, std::shared_ptr<const SpectralGeometry>>
        cache;
    g.validate();
    const auto key = std::make_tuple(g.dim, g.n, g.length, g.dealias_fraction);
    std::lock_guard lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto geo = std::make_shared<const SpectralGeometry>(g);
    cache.emplace(key, geo);
    return geo;
}

}  // namespace vesp
