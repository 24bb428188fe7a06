#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vesp/besov.hpp"
#include "vesp/bony.hpp"
#include "vesp/dyadic.hpp"
#include "vesp/random.hpp"

namespace vesp {

/// One named invariant with its worst observed value and pass threshold.
struct CheckResult {
    std::string name;
    double value = 0.0;
    double lo = -inf;
    double hi = inf;
    bool pass = false;
    std::vector<double> samples;  // per-member values, when the check has members
};

struct CheckSuite {
    std::vector<CheckResult> checks;

    void add(std::string name, double value, double lo, double hi, std::vector<double> samples = {}) {
        const bool ok = std::isfinite(value) && value >= lo && value <= hi;
        checks.push_back({std::move(name), value, lo, hi, ok, std::move(samples)});
    }
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass) out.push_back(c.name);
        return out;
    }
};

/// Littlewood-Paley invariants on one grid: partition of unity at every
/// nonzero mode, Bernstein ratios over a seeded ensemble, quasi-orthogonality
/// of blocks two or more apart, and reconstruction by the block sum.
inline CheckSuite lp_check_suite(const Grid& g, const CutoffFamily& fam, std::uint64_t seed, int members = 20) {
    require(members >= 1, "ensemble needs at least one member");
    CheckSuite suite;

    const auto c = dyadic_cutoffs(g, fam);
    double pu = 0.0;
    for (std::size_t m = 1; m < g.modes(); ++m) {
        double sum = c.chi[m];
        for (const auto& p : c.phi) sum += p[m];
        pu = std::max(pu, std::abs(sum - 1.0));
    }
    suite.add("partition_of_unity", pu, 0.0, 1e-12);

    double bmin = inf, bmax = 0.0, orth = 0.0, recon = 0.0;
    for (int k = 0; k < members; ++k) {
        const Spectrum s = random_spectrum(g, sub_seed(seed, k), {-100, 100, default_slope(g)});
        const double ns = l2_norm(s);
        Spectrum sum(g);
        std::vector<Spectrum> blocks;
        for (int q = c.qmin; q <= c.qmax; ++q) {
            blocks.push_back(dyadic_block(s, q, fam));
            const Spectrum& b = blocks.back();
            sum += b;
            const double nb = l2_norm(b);
            if (nb < 1e-14 * ns) continue;
            const double ratio = l2_norm(grad(b)) / (std::exp2(q) * nb);
            bmin = std::min(bmin, ratio);
            bmax = std::max(bmax, ratio);
        }
        for (int q = c.qmin; q <= c.qmax; ++q)
            for (int p = c.qmin; p <= c.qmax; ++p)
                if (std::abs(p - q) >= 2 && ns > 0.0)
                    orth = std::max(orth, l2_norm(dyadic_block(blocks[q - c.qmin], p, fam)) / ns);
        if (ns > 0.0) recon = std::max(recon, l2_norm(sum - s) / ns);  // s is mean-free and dealiased
    }
    if (bmax == 0.0) bmin = bmax = 1.0;  // no resolved block anywhere
    suite.add("bernstein_min", bmin, 0.75, inf);
    suite.add("bernstein_max", bmax, 0.0, 8.0 / 3.0);
    suite.add("quasi_orthogonality", orth, 0.0, 1e-12);
    suite.add("reconstruction", recon, 0.0, 1e-10);
    return suite;
}

/// Bony reconstruction T_f g + T_g f + R(f, g) = fg over seeded band-limited pairs.
inline CheckSuite bony_check_suite(const Grid& g, std::uint64_t seed, int pairs = 50, double tol = 1e-10) {
    require(pairs >= 1, "ensemble needs at least one pair");
    CheckSuite suite;
    std::vector<double> res;
    for (int k = 0; k < pairs; ++k) {
        const Spectrum f = random_spectrum(g, sub_seed(seed, 2 * k), {-100, 100, -1.5});
        const Spectrum h = random_spectrum(g, sub_seed(seed, 2 * k + 1), {-100, 100, -1.5});
        res.push_back(bony_reconstruct(f, h).residual);
    }
    suite.add("bony_reconstruction", *std::max_element(res.begin(), res.end()), 0.0, tol, res);
    return suite;
}

}  // namespace vesp
