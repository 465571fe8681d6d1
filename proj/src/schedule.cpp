#include "uvtex/schedule.hpp"

#include <cmath>

namespace uvtex {

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
    check(T >= 1, Err::BadRange, "T must be >= 1");
    check(beta_start > 0 && beta_start <= beta_end && beta_end < 1, Err::BadRange,
          "need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(T);
    s.alphas.resize(T);
    s.alpha_bars.resize(T + 1);
    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        double frac = T > 1 ? static_cast<double>(t - 1) / (T - 1) : 0.0;
        double beta = beta_start + (beta_end - beta_start) * frac;
        s.betas[t - 1] = beta;
        s.alphas[t - 1] = 1.0 - beta;
        s.alpha_bars[t] = s.alpha_bars[t - 1] * s.alphas[t - 1];
    }
    return s;
}

Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& schedule) {
    check(t >= 0 && t <= schedule.T, Err::BadTimestep, "t out of [0, T]");
    check_same_shape(x0, eps, "q_sample noise shape");
    if (t == 0) return x0;
    double ab = schedule.alpha_bars[t];
    float sa = static_cast<float>(std::sqrt(ab));
    float sb = static_cast<float>(std::sqrt(1.0 - ab));
    Tensor out(x0.shape);
    for (int64_t i = 0; i < x0.numel(); ++i) out[i] = sa * x0[i] + sb * eps[i];
    return out;
}

} // namespace uvtex
