#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vesp/error.hpp"
#include "vesp/fft.hpp"
#include "vesp/grid.hpp"

namespace vesp {

using complex = std::complex<double>;
using Point = std::array<double, 3>;

/// Real scalar field sampled on a periodic grid.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g) : grid_(g), values_(g.points(), 0.0) { g.validate(); }
    Field(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
        g.validate();
        require(values_.size() == g.points(), "field value count does not match grid");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    Field& operator+=(const Field& o) {
        check(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }

private:
    void check(const Field& o) const {
        if (!(grid_ == o.grid_)) throw PreconditionError("fields live on different grids");
    }
    Grid grid_{};
    std::vector<double> values_;
};

/// Fourier coefficients of a real field in the orthonormal basis
/// L^{-N/2} e^{i xi.x}, so that sum |c|^2 (with half-spectrum multiplicity)
/// equals the continuum L^2 norm squared.
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(const Grid& g) : geo_(geometry(g)), coef_(g.modes(), complex{}) {}
    Spectrum(const Grid& g, std::vector<complex> c) : geo_(geometry(g)), coef_(std::move(c)) {
        require(coef_.size() == g.modes(), "spectrum size does not match grid");
    }

    const Grid& grid() const { return geo_->grid; }
    const SpectralGeometry& geo() const { return *geo_; }
    std::size_t size() const { return coef_.size(); }
    std::span<const complex> coef() const { return coef_; }
    std::span<complex> coef() { return coef_; }
    complex operator[](std::size_t i) const { return coef_[i]; }
    complex& operator[](std::size_t i) { return coef_[i]; }

    /// Coefficient of the full-lattice wavenumber k (integers in [-n/2, n/2)).
    complex at(const std::array<int, 3>& k) const {
        const Grid& g = grid();
        const int n = g.n;
        auto wrap = [n](int v) { return ((v % n) + n) % n; };
        int last = k[g.dim - 1];
        bool conj = false;
        std::array<int, 3> kk = k;
        if (wrap(last) > n / 2) {
            conj = true;
            for (int d = 0; d < g.dim; ++d) kk[d] = -k[d];
        }
        std::size_t idx = 0;
        for (int d = 0; d < g.dim - 1; ++d) idx = idx * n + wrap(kk[d]);
        idx = idx * g.half() + wrap(kk[g.dim - 1]);
        return conj ? std::conj(coef_[idx]) : coef_[idx];
    }

    Spectrum& operator+=(const Spectrum& o) {
        check(o);
        for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += o.coef_[i];
        return *this;
    }
    Spectrum& operator-=(const Spectrum& o) {
        check(o);
        for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= o.coef_[i];
        return *this;
    }
    Spectrum& operator*=(double s) {
        for (auto& c : coef_) c *= s;
        return *this;
    }
    /// this += s * o
    Spectrum& axpy(double s, const Spectrum& o) {
        check(o);
        for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += s * o.coef_[i];
        return *this;
    }
    friend Spectrum operator+(Spectrum a, const Spectrum& b) { return a += b; }
    friend Spectrum operator-(Spectrum a, const Spectrum& b) { return a -= b; }
    friend Spectrum operator*(Spectrum a, double s) { return a *= s; }
    friend Spectrum operator*(double s, Spectrum a) { return a *= s; }

private:
    void check(const Spectrum& o) const {
        if (!(grid() == o.grid())) throw PreconditionError("spectra live on different grids");
    }
    std::shared_ptr<const SpectralGeometry> geo_;
    std::vector<complex> coef_;
};

/// Fixed-size family of components sharing one grid (vectors: dim,
/// tensors: dim*dim stored row-major so that (i, j) -> i*dim + j).
template <class S>
class Components {
public:
    Components() = default;
    Components(int dim, std::size_t count, const Grid& g) : dim_(dim), c_(count, S(g)) {}
    Components(int dim, std::vector<S> c) : dim_(dim), c_(std::move(c)) {
        for (const auto& s : c_)
            if (!(s.grid() == c_.front().grid()))
                throw PreconditionError("components must share one grid");
    }

    int dim() const { return dim_; }
    std::size_t count() const { return c_.size(); }
    const Grid& grid() const { return c_.front().grid(); }
    S& operator[](std::size_t i) { return c_[i]; }
    const S& operator[](std::size_t i) const { return c_[i]; }
    S& operator()(int i, int j) { return c_[static_cast<std::size_t>(i * dim_ + j)]; }
    const S& operator()(int i, int j) const { return c_[static_cast<std::size_t>(i * dim_ + j)]; }
    auto begin() { return c_.begin(); }
    auto end() { return c_.end(); }
    auto begin() const { return c_.begin(); }
    auto end() const { return c_.end(); }

    Components& operator+=(const Components& o) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Components& operator-=(const Components& o) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Components& operator*=(double s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    friend Components operator+(Components a, const Components& b) { return a += b; }
    friend Components operator-(Components a, const Components& b) { return a -= b; }
    friend Components operator*(Components a, double s) { return a *= s; }
    friend Components operator*(double s, Components a) { return a *= s; }

private:
    int dim_ = 0;
    std::vector<S> c_;
};

using VectorField = Components<Field>;
using TensorField = Components<Field>;
using VectorSpectrum = Components<Spectrum>;
using TensorSpectrum = Components<Spectrum>;

template <class S>
Components<S> make_vector(const Grid& g) {
    return Components<S>(g.dim, static_cast<std::size_t>(g.dim), g);
}
template <class S>
Components<S> make_tensor(const Grid& g) {
    return Components<S>(g.dim, static_cast<std::size_t>(g.dim * g.dim), g);
}
inline VectorField zero_vector_field(const Grid& g) { return make_vector<Field>(g); }
inline TensorField zero_tensor_field(const Grid& g) { return make_tensor<Field>(g); }

// --- transforms -----------------------------------------------------------

inline Spectrum forward(const Field& f) {
    const Grid& g = f.grid();
    Spectrum s(g);
    detail::plan_for(g)->forward(f.values().data(), s.coef().data());
    const double scale = std::pow(g.length, 0.5 * g.dim) / static_cast<double>(g.points());
    s *= scale;
    return s;
}

inline Field inverse(const Spectrum& s) {
    const Grid& g = s.grid();
    std::vector<complex> work(s.coef().begin(), s.coef().end());
    Field f(g);
    detail::plan_for(g)->backward(work.data(), f.values().data());
    f *= std::pow(g.length, -0.5 * g.dim);
    return f;
}

template <class From, class Fn>
auto map_components(const Components<From>& in, Fn&& fn) {
    using To = std::decay_t<decltype(fn(in[0]))>;
    std::vector<To> out;
    out.reserve(in.count());
    for (const auto& c : in) out.push_back(fn(c));
    return Components<To>(in.dim(), std::move(out));
}

inline VectorSpectrum forward(const VectorField& v) {
    return map_components(v, [](const Field& f) { return forward(f); });
}
inline VectorField inverse(const VectorSpectrum& v) {
    return map_components(v, [](const Spectrum& s) { return inverse(s); });
}

/// Multiplies every coefficient by sym(m), m the half-layout mode index.
template <class Sym>
Spectrum apply_symbol(Spectrum s, Sym&& sym) {
    for (std::size_t m = 0; m < s.size(); ++m) s[m] *= sym(m);
    return s;
}

// --- sampling and pointwise helpers -----------------------------------------

/// Evaluates fn(x) at every grid point, x = (i0*h, i1*h[, i2*h]).
inline Field sample(const Grid& g, const std::function<double(const Point&)>& fn) {
    Field f(g);
    const int n = g.n;
    const double h = g.spacing();
    std::size_t idx = 0;
    if (g.dim == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) f[idx++] = fn({i * h, j * h, 0.0});
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) f[idx++] = fn({i * h, j * h, l * h});
    }
    return f;
}

inline Field pointwise_product(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw PreconditionError("fields live on different grids");
    Field out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline double mean(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s / static_cast<double>(f.size());
}

inline double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double min_value(const Field& f) {
    return *std::min_element(f.values().begin(), f.values().end());
}

/// Continuum L^2 norm from grid samples (exact for band-limited fields).
inline double l2_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_volume());
}

inline double l2_norm_squared(const Spectrum& s) {
    const auto& w = s.geo().weight;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += w[i] * std::norm(s[i]);
    return acc;
}
inline double l2_norm(const Spectrum& s) { return std::sqrt(l2_norm_squared(s)); }

/// Real L^2 inner product <a, b>.
inline double inner(const Spectrum& a, const Spectrum& b) {
    const auto& w = a.geo().weight;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * std::real(std::conj(a[i]) * b[i]);
    return acc;
}

template <class S>
double l2_norm(const Components<S>& v) {
    double acc = 0.0;
    for (const auto& c : v) {
        const double x = l2_norm(c);
        acc += x * x;
    }
    return std::sqrt(acc);
}

/// Mean value of a field from its zero mode.
inline double mean(const Spectrum& s) { return std::real(s[0]) / std::sqrt(s.grid().volume()); }

}  // namespace vesp
