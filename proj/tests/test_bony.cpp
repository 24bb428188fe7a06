#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vesp/bony.hpp"

using namespace vesp;

namespace {

constexpr double pi = std::numbers::pi;

Spectrum mode(const Grid& g, int k0, int k1) {
    const double u = g.unit();
    return forward(sample(g, [&](const Point& x) { return std::cos(u * (k0 * x[0] + k1 * x[1])); }));
}

double rel(const Spectrum& a, const Spectrum& b) {
    const double nb = l2_norm(b);
    return nb > 0 ? l2_norm(a - b) / nb : l2_norm(a - b);
}

const Grid g64{2, 64};

}  // namespace

TEST(Paraproduct, SeparatedModes) {
    // f = cos x (blocks -1, 0); g = cos 11x (block 3 only). S_2 f = f.
    const Spectrum f = mode(g64, 1, 0), g = mode(g64, 11, 0);
    const Spectrum fg = dealiased_product(inverse(f), inverse(g));
    EXPECT_LE(rel(paraproduct(f, g), fg), 1e-12);
    EXPECT_LE(l2_norm(paraproduct(g, f)), 1e-12 * l2_norm(fg));
    EXPECT_LE(l2_norm(remainder(f, g)), 1e-12 * l2_norm(fg));
    EXPECT_EQ(l2_norm(paraproduct(Spectrum(g64), g)), 0.0);
    EXPECT_EQ(l2_norm(remainder(Spectrum(g64), g)), 0.0);
}

TEST(Paraproduct, Preconditions) {
    const Spectrum f = mode(g64, 1, 0);
    EXPECT_THROW(paraproduct(f, mode(Grid{2, 32}, 1, 0)), PreconditionError);
    Field biased = inverse(f);
    for (auto& v : biased.values()) v += 1.0;
    EXPECT_THROW(paraproduct(forward(biased), f), PreconditionError);
}

TEST(Paraproduct, Bilinearity) {
    const Grid g{2, 64};
    const BandSpec band{-10, 10, -1.5};
    const Spectrum f = random_spectrum(g, 1, band), h = random_spectrum(g, 2, band),
                   k = random_spectrum(g, 3, band);
    const double a = 0.37, b = -2.1;
    const Spectrum lhs = paraproduct(f * a + h * b, k);
    const Spectrum rhs = paraproduct(f, k) * a + paraproduct(h, k) * b;
    EXPECT_LE(rel(lhs, rhs), 1e-12);
}

TEST(Remainder, Symmetry) {
    const Grid g{2, 64};
    for (int seed = 0; seed < 5; ++seed) {
        const Spectrum f = random_spectrum(g, sub_seed(seed, 0), {-10, 10, -1.5});
        const Spectrum h = random_spectrum(g, sub_seed(seed, 1), {-10, 10, -1.5});
        const Spectrum r = remainder(f, h);
        EXPECT_LE(l2_norm(r - remainder(h, f)), 1e-12 * l2_norm(r));
    }
}

TEST(Reconstruction, SingleModesAndZero) {
    const auto z = bony_reconstruct(Spectrum(g64), mode(g64, 3, 2));
    EXPECT_TRUE(z.absolute);
    EXPECT_EQ(z.residual, 0.0);
    const auto r = bony_reconstruct(mode(g64, 3, 2), mode(g64, 5, -1));
    EXPECT_FALSE(r.absolute);
    EXPECT_LE(r.residual, 1e-12);
    // f = g single block: T parts vanish, R carries the whole product.
    const Spectrum f = mode(g64, 11, 0);
    const Spectrum ff = dealiased_product(inverse(f), inverse(f));
    EXPECT_LE(rel(remainder(f, f), ff), 1e-12);
}

TEST(Reconstruction, SeededEnsemble) {
    const Grid g{2, 128};
    for (int k = 0; k < 50; ++k) {
        const Spectrum f = random_spectrum(g, sub_seed(77, 2 * k), {-10, 10, -1.5});
        const Spectrum h = random_spectrum(g, sub_seed(77, 2 * k + 1), {-10, 10, -1.5});
        EXPECT_LE(bony_reconstruct(f, h).residual, 1e-10);
    }
}

TEST(Harness, SideConditionsNamed) {
    ProductParams p = default_params(ProductEstimate::para_inf_one, 2);
    p.s = 1.5;
    try {
        check_side_conditions(p, 2);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("s <= N/2"), std::string::npos);
    }
    p = default_params(ProductEstimate::remainder_inf_one, 2);
    p.s = -1.0;
    p.t = 0.5;
    EXPECT_THROW(check_side_conditions(p, 2), PreconditionError);
    p = default_params(ProductEstimate::para_hybrid_low, 2);
    p.r = 1.0;  // min{1 - 2 + 1, 1} = 0 < s = 1
    EXPECT_THROW(check_side_conditions(p, 2), PreconditionError);
    for (auto id : all_product_estimates()) EXPECT_NO_THROW(check_side_conditions(default_params(id, 2), 2));
    for (auto id : all_product_estimates()) EXPECT_NO_THROW(check_side_conditions(default_params(id, 3), 3));
}

TEST(Harness, EmptyEnsemble) {
    Ensemble ens{g64, 1, 0, {-10, 10, -1.5}};
    const auto rep = product_estimate_harness(default_params(ProductEstimate::product, 2), ens);
    EXPECT_TRUE(rep.samples.empty());
    EXPECT_EQ(rep.max_ratio, 0.0);
    EXPECT_TRUE(rep.pass);
}

TEST(Harness, OneTermOracleForParaInfOne) {
    // u = cos x, v = cos 11x, s = N/2 = 1, t = 0. Both sides follow from
    // evaluating the cutoffs at the radii 1, 10, 11, 12 directly.
    const CutoffFamily fam;
    const double c = pi * std::sqrt(2.0);  // L^2 norm of one cosine on [0, 2pi)^2
    auto phi = [&](double r, int q) { return fam.phi_q(r, q); };
    // lhs: T_u v = uv = (cos 10x + cos 12x) / 2, measured in the s + t - 1 = 0 norm.
    double lhs = 0.0;
    for (int q = -1; q <= 7; ++q) lhs += 0.5 * c * std::hypot(phi(10, q), phi(12, q));
    // ||u||_{B~^{1,inf}_1} = sum 2^q max{1, 2^{-q}} ||Delta_q u||.
    double nu = 0.0;
    for (int q = -1; q <= 7; ++q) nu += std::exp2(q) * std::max(1.0, std::exp2(-q)) * c * phi(1, q);
    // ||v||_{B~^{0,1}_1} = sum max{1, 2^{-q}}^{-1} ||Delta_q v||.
    double nv = 0.0;
    for (int q = -1; q <= 7; ++q) nv += c * phi(11, q) / std::max(1.0, std::exp2(-q));
    ProductParams p{ProductEstimate::para_inf_one, 1.0, 0.0, inf, 1.0};
    const auto smp = evaluate_product_estimate(p, mode(g64, 1, 0), mode(g64, 11, 0));
    EXPECT_NEAR(smp.lhs, lhs, 1e-12 * lhs);
    EXPECT_NEAR(smp.rhs, nu * nv, 1e-12 * nu * nv);
    EXPECT_NEAR(smp.ratio, lhs / (nu * nv), 1e-12);
}

TEST(Harness, RandomEnsembleProduct) {
    const Grid g{2, 128};
    Ensemble ens{g, 5, 20, {-10, 10, default_slope(g)}};
    const auto rep = product_estimate_harness(default_params(ProductEstimate::product, 2), ens);
    EXPECT_EQ(rep.samples.size(), 20u);
    for (const auto& s : rep.samples) {
        EXPECT_TRUE(std::isfinite(s.ratio));
        EXPECT_GT(s.rhs, 0.0);
    }
    EXPECT_TRUE(rep.pass);
    EXPECT_GT(rep.max_ratio, 0.0);
    EXPECT_LE(rep.median_ratio, rep.max_ratio);
}

TEST(Harness, DeterministicForSeed) {
    Ensemble ens{g64, 9, 4, {-10, 10, -1.5}};
    const auto a = product_estimate_harness(default_params(ProductEstimate::remainder_hybrid, 2), ens);
    const auto b = product_estimate_harness(default_params(ProductEstimate::remainder_hybrid, 2), ens);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].ratio, b.samples[i].ratio);
}
