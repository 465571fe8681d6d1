#pragma once

#include <vector>

#include "uvtex/tensor.hpp"

namespace uvtex {

// Forward-process tables. betas[t-1] holds beta_t for t in [1,T];
// alpha_bars[t] holds the cumulative product with alpha_bars[0] = 1.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars; // size T+1
};

// Linear beta ramp from beta_start to beta_end inclusive; derived tables in
// double precision.
NoiseSchedule make_schedule(int T, double beta_start, double beta_end);

// Closed form x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps; t in [0, T],
// t = 0 returns x0 exactly.
Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& schedule);

} // namespace uvtex
