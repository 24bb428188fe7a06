#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "vesp/grid.hpp"

namespace vesp::detail {

/// FFTW plan pair for one (dim, n). Plans are created under a lock and then
/// executed through the thread-safe new-array interface.
class FftPlan {
public:
    FftPlan(int dim, int n) : dim_(dim), n_(n) {
        std::vector<int> shape(dim, n);
        std::size_t points = 1;
        for (int d = 0; d < dim; ++d) points *= static_cast<std::size_t>(n);
        const std::size_t modes = points / n * (n / 2 + 1);
        std::vector<double> real(points);
        std::vector<std::complex<double>> cplx(modes);
        auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft_r2c(dim, shape.data(), real.data(), c, flags);
        backward_ = fftw_plan_dft_c2r(dim, shape.data(), c, real.data(), flags);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    /// Unnormalized r2c transform; the input is preserved.
    void forward(const double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    }
    /// Unnormalized c2r transform; `in` is overwritten.
    void backward(std::complex<double>* in, double* out) const {
        fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
    }

private:
    int dim_;
    int n_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

inline std::shared_ptr<const FftPlan> plan_for(const Grid& g) {
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
    std::lock_guard lock(planner_mutex());
    const auto key = std::make_pair(g.dim, g.n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto plan = std::make_shared<const FftPlan>(g.dim, g.n);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace vesp::detail
