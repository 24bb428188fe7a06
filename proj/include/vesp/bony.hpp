#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vesp/besov.hpp"
#include "vesp/multipliers.hpp"
#include "vesp/random.hpp"

namespace vesp {

namespace detail {

/// Physical-space blocks Delta_q f, q = q_min..q_max.
inline std::vector<Field> physical_blocks(const Spectrum& s) {
    const auto t = block_table(s.grid());
    std::vector<Field> out;
    for (int q = t->qmin; q <= t->qmax; ++q)
        out.push_back(inverse(apply_symbol(s, [&](std::size_t m) { return t->weight(m, q); })));
    return out;
}

inline void require_pair(const Spectrum& f, const Spectrum& g) {
    if (!(f.grid() == g.grid())) throw PreconditionError("paraproduct operands live on different grids");
    for (const Spectrum* s : {&f, &g})
        if (std::abs((*s)[0]) > 1e-10 * l2_norm(*s))
            throw PreconditionError("homogeneous paraproducts need mean-zero operands");
}

}  // namespace detail

/// T_f g = sum_q S_{q-1} f Delta_q g, dealiased.
inline Spectrum paraproduct(const Spectrum& f, const Spectrum& g) {
    detail::require_pair(f, g);
    const auto fb = detail::physical_blocks(f);
    const auto gb = detail::physical_blocks(g);
    const Grid& grid = f.grid();
    Field low(grid);  // S_{q-1} f = sum_{p <= q-2} Delta_p f
    Field acc(grid);
    for (std::size_t k = 0; k < gb.size(); ++k) {
        if (k >= 2) low += fb[k - 2];
        if (k >= 2) acc += pointwise_product(low, gb[k]);
    }
    return dealias(forward(acc));
}

/// R(f, g) = sum_{|p-q| <= 1} Delta_p f Delta_q g, dealiased.
inline Spectrum remainder(const Spectrum& f, const Spectrum& g) {
    detail::require_pair(f, g);
    const auto fb = detail::physical_blocks(f);
    const auto gb = detail::physical_blocks(g);
    const Grid& grid = f.grid();
    Field acc(grid);
    const std::size_t nb = fb.size();
    for (std::size_t k = 0; k < nb; ++k) {
        Field near = gb[k];
        if (k > 0) near += gb[k - 1];
        if (k + 1 < nb) near += gb[k + 1];
        acc += pointwise_product(fb[k], near);
    }
    return dealias(forward(acc));
}

inline Field paraproduct(const Field& f, const Field& g) { return inverse(paraproduct(forward(f), forward(g))); }
inline Field remainder(const Field& f, const Field& g) { return inverse(remainder(forward(f), forward(g))); }

struct ReconstructionResult {
    double residual = 0.0;
    bool absolute = false;  // ||fg|| vanished, residual is not normalized
};

/// Relative L^2 defect of T_f g + T_g f + R(f, g) against the dealiased product.
inline ReconstructionResult bony_reconstruct(const Spectrum& f, const Spectrum& g) {
    const Spectrum fg = dealiased_product(inverse(f), inverse(g));
    Spectrum sum = paraproduct(f, g);
    sum += paraproduct(g, f);
    sum += remainder(f, g);
    const double defect = l2_norm(sum - fg);
    const double ref = l2_norm(fg);
    if (ref == 0.0) return {defect, true};
    return {defect / ref, false};
}

// --- product-estimate harness --------------------------------------------------

enum class ProductEstimate {
    moser,
    product,
    para_hybrid_low,
    para_hybrid_high,
    remainder_hybrid,
    para_inf_one,
    para_one_inf,
    remainder_inf_one
};

inline const std::vector<ProductEstimate>& all_product_estimates() {
    static const std::vector<ProductEstimate> all{ProductEstimate::moser, ProductEstimate::product,
                                                  ProductEstimate::para_hybrid_low, ProductEstimate::para_hybrid_high,
                                                  ProductEstimate::remainder_hybrid, ProductEstimate::para_inf_one,
                                                  ProductEstimate::para_one_inf, ProductEstimate::remainder_inf_one};
    return all;
}

inline std::string estimate_name(ProductEstimate e) {
    switch (e) {
        case ProductEstimate::moser: return "moser";
        case ProductEstimate::product: return "product";
        case ProductEstimate::para_hybrid_low: return "para_hybrid_low";
        case ProductEstimate::para_hybrid_high: return "para_hybrid_high";
        case ProductEstimate::remainder_hybrid: return "remainder_hybrid";
        case ProductEstimate::para_inf_one: return "para_inf_one";
        case ProductEstimate::para_one_inf: return "para_one_inf";
        case ProductEstimate::remainder_inf_one: return "remainder_inf_one";
    }
    return "?";
}

inline ProductEstimate parse_estimate(const std::string& name) {
    for (auto e : all_product_estimates())
        if (estimate_name(e) == name) return e;
    throw PreconditionError("unknown product estimate '" + name + "'");
}

/// Indices of one estimate. For product, s and t play the roles of s1 and s2.
struct ProductParams {
    ProductEstimate id = ProductEstimate::moser;
    double s = 0.5;
    double t = 0.5;
    double r = 1.0;
    double mu = 1.0;
};

/// Default index choices inside every side condition for dimension N.
inline ProductParams default_params(ProductEstimate id, int N) {
    const double h = 0.5 * N;
    switch (id) {
        case ProductEstimate::moser: return {id, 0.5, 0.0, 1.0, 1.0};
        case ProductEstimate::product: return {id, h - 0.25, h - 0.25, 1.0, 1.0};
        case ProductEstimate::para_hybrid_low: return {id, h, 0.5, inf, 1.0};
        case ProductEstimate::para_hybrid_high: return {id, h, 0.5, 1.0, 1.0};
        case ProductEstimate::remainder_hybrid: return {id, h, 0.5, 2.0, 1.0};
        case ProductEstimate::para_inf_one: return {id, h, 0.5, inf, 1.0};
        case ProductEstimate::para_one_inf: return {id, h - 1.0, 1.0, inf, 1.0};
        case ProductEstimate::remainder_inf_one: return {id, h, 0.5, inf, 1.0};
    }
    return {};
}

/// Throws naming the violated side condition.
inline void check_side_conditions(const ProductParams& p, int N) {
    const double h = 0.5 * N;
    const double w = std::isinf(p.r) ? 1.0 : 1.0 - 2.0 / p.r;
    auto fail = [&](const std::string& cond) {
        throw PreconditionError(estimate_name(p.id) + " requires " + cond);
    };
    if (!(p.r >= 1.0)) fail("r >= 1");
    if (!(p.mu > 0.0)) fail("mu > 0");
    switch (p.id) {
        case ProductEstimate::moser:
            if (!(p.s > 0.0)) fail("s > 0");
            break;
        case ProductEstimate::product:
            if (!(p.s <= h && p.t <= h)) fail("s1, s2 <= N/2");
            if (!(p.s + p.t > 0.0)) fail("s1 + s2 > 0");
            break;
        case ProductEstimate::para_hybrid_low:
            if (!(p.s <= std::min(w + h, h))) fail("s <= min(1 - 2/r + N/2, N/2)");
            break;
        case ProductEstimate::para_hybrid_high:
        case ProductEstimate::para_inf_one:
            if (!(p.s <= h)) fail("s <= N/2");
            break;
        case ProductEstimate::remainder_hybrid:
            if (!(p.s + p.t > std::max(0.0, w))) fail("s + t > max(0, 1 - 2/r)");
            break;
        case ProductEstimate::para_one_inf:
            if (!(p.s <= h - 1.0)) fail("s <= N/2 - 1");
            break;
        case ProductEstimate::remainder_inf_one:
            if (!(p.s + p.t > 0.0)) fail("s + t > 0");
            break;
    }
}

namespace detail {

inline Spectrum strip_mean(Spectrum s) {
    s[0] = 0.0;
    return s;
}

inline double hyb(const BlockProfile& p, double s, double r, double mu) {
    return besov_norm(p, NormSpec{s, r, mu, Flavor::hybrid, inf});
}
inline double hom(const BlockProfile& p, double s) {
    return besov_norm(p, NormSpec{s, 1.0, 1.0, Flavor::homogeneous, inf});
}

}  // namespace detail

struct ProductSample {
    std::uint64_t seed = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// lhs and rhs of one estimate for one pair (u, v). Both are mean-zero.
inline ProductSample evaluate_product_estimate(const ProductParams& p, const Spectrum& u, const Spectrum& v) {
    const int N = u.grid().dim;
    const double h = 0.5 * N;
    const auto pu = block_profile(u);
    const auto pv = block_profile(v);
    ProductSample out;
    using detail::hom;
    using detail::hyb;
    switch (p.id) {
        case ProductEstimate::moser: {
            const auto prod = block_profile(detail::strip_mean(dealiased_product(inverse(u), inverse(v))));
            out.lhs = hom(prod, p.s);
            out.rhs = max_abs(inverse(u)) * hom(pv, p.s) + max_abs(inverse(v)) * hom(pu, p.s);
            break;
        }
        case ProductEstimate::product: {
            const auto prod = block_profile(detail::strip_mean(dealiased_product(inverse(u), inverse(v))));
            out.lhs = hom(prod, p.s + p.t - h);
            out.rhs = hom(pu, p.s) * hom(pv, p.t);
            break;
        }
        case ProductEstimate::para_hybrid_low: {
            const auto tp = block_profile(detail::strip_mean(paraproduct(u, v)));
            out.lhs = hyb(tp, p.s + p.t - h, p.r, p.mu);
            out.rhs = hyb(pu, p.s, p.r, p.mu) * hom(pv, p.t);
            break;
        }
        case ProductEstimate::para_hybrid_high: {
            const auto tp = block_profile(detail::strip_mean(paraproduct(u, v)));
            out.lhs = hyb(tp, p.s + p.t - h, p.r, p.mu);
            out.rhs = hom(pu, p.s) * hyb(pv, p.t, p.r, p.mu);
            break;
        }
        case ProductEstimate::remainder_hybrid: {
            const auto rp = block_profile(detail::strip_mean(remainder(u, v)));
            out.lhs = hyb(rp, p.s + p.t - h, p.r, p.mu);
            out.rhs = hyb(pu, p.s, p.r, p.mu) * hom(pv, p.t);
            break;
        }
        case ProductEstimate::para_inf_one: {
            const auto tp = block_profile(detail::strip_mean(paraproduct(u, v)));
            out.lhs = hom(tp, p.s + p.t - h);
            out.rhs = hyb(pu, p.s, inf, p.mu) * hyb(pv, p.t, 1.0, p.mu);
            break;
        }
        case ProductEstimate::para_one_inf: {
            const auto tp = block_profile(detail::strip_mean(paraproduct(u, v)));
            out.lhs = hom(tp, p.s + p.t - h);
            out.rhs = hyb(pu, p.s, 1.0, p.mu) * hyb(pv, p.t, inf, p.mu);
            break;
        }
        case ProductEstimate::remainder_inf_one: {
            const auto rp = block_profile(detail::strip_mean(remainder(u, v)));
            out.lhs = hom(rp, p.s + p.t - h);
            out.rhs = hyb(pu, p.s, inf, p.mu) * hyb(pv, p.t, 1.0, p.mu);
            break;
        }
    }
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    return out;
}

/// Seeded family of mean-zero pairs: member k uses sub-seeds (2k, 2k+1).
struct Ensemble {
    Grid grid;
    std::uint64_t seed = 0;
    int members = 20;
    BandSpec band{-100, 100, -1.5};
};

struct ProductEstimateReport {
    ProductParams params;
    std::vector<ProductSample> samples;
    int skipped = 0;  // members with rhs = 0
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    double c_max = 1e3;
    bool pass = true;
};

inline ProductEstimateReport product_estimate_harness(const ProductParams& params, const Ensemble& ens,
                                                      double c_max = 1e3) {
    check_side_conditions(params, ens.grid.dim);
    ProductEstimateReport rep;
    rep.params = params;
    rep.c_max = c_max;
    for (int k = 0; k < ens.members; ++k) {
        const std::uint64_t su = sub_seed(ens.seed, 2 * k);
        const std::uint64_t sv = sub_seed(ens.seed, 2 * k + 1);
        const Spectrum u = random_spectrum(ens.grid, su, ens.band);
        const Spectrum v = random_spectrum(ens.grid, sv, ens.band);
        ProductSample smp = evaluate_product_estimate(params, u, v);
        smp.seed = su;
        if (!(smp.rhs > 0.0)) {
            ++rep.skipped;
            continue;
        }
        rep.samples.push_back(smp);
    }
    std::vector<double> ratios;
    for (const auto& s : rep.samples) ratios.push_back(s.ratio);
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        rep.max_ratio = ratios.back();
        const std::size_t n = ratios.size();
        rep.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
    }
    for (double r : ratios)
        if (!std::isfinite(r) || r < 0.0) rep.pass = false;
    if (rep.max_ratio > c_max) rep.pass = false;
    return rep;
}

}  // namespace vesp
