#pragma once

#include <cstdint>

#include "swarm/mat.hpp"
#include "swarm/tomo.hpp"
#include "swarm/wavelet.hpp"

namespace swarm {

/// Geometric noise grid sigma_t = sigma_min * (sigma_max/sigma_min)^(t/(T-1)).
struct NoiseSchedule {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int n_steps = 0;
    std::vector<double> sigmas;

    static NoiseSchedule geometric(double sigma_min, double sigma_max, int n_steps);
    double sigma(int t) const;
};

struct LangevinConfig {
    double snr = 0.16;
    int n_corrector_steps = 1;

    void validate() const;
};

/// Time-conditioned score s(x, t) ~ grad_x log p_t(x).
class ScoreFunction {
  public:
    virtual ~ScoreFunction() = default;
    virtual Mat evaluate(const Mat& x, int t) const = 0;
};

/// Forward VE perturbation: x0 + sigma_t * z with z ~ N(0, I).
Mat perturb(const Mat& x0, int t, const NoiseSchedule& sched, uint64_t rng_seed);

/// One reverse-diffusion Euler-Maruyama step from level t to t-1:
/// x + (sigma_t^2 - sigma_{t-1}^2) * s(x,t) + sqrt(sigma_t^2 - sigma_{t-1}^2) * z.
/// `noise_override` substitutes the z draw (test hook).
Mat predictor_step(const Mat& x, int t, const ScoreFunction& score, const NoiseSchedule& sched,
                   uint64_t rng_seed, const Mat* noise_override = nullptr);

/// One Langevin step at level t: x + eps * s(x,t) + sqrt(2 eps) * z with
/// eps = 2 (snr * ||z|| / ||s||)^2.
Mat corrector_step(const Mat& x, int t, const ScoreFunction& score, const LangevinConfig& cfg,
                   uint64_t rng_seed, const Mat* noise_override = nullptr);

/// Hard sinogram data consistency: rows in op.kept_indices replaced by the
/// measured rows of y_sparse (bit-exact); other rows untouched.
Sinogram dc_sinogram(const Sinogram& x, const Sinogram& y_sparse, const SamplingOperator& op);

/// Wavelet-domain data consistency: dc_sinogram then extract_hf.
HighFrequencySet dc_wavelet_hf(const Sinogram& x_s_half, const Sinogram& y_sparse,
                               const SamplingOperator& op);

/// Frobenius norm of (x - y_sparse) restricted to the kept rows.
double kept_row_residual(const Sinogram& x, const Sinogram& y_sparse, const SamplingOperator& op);

} // namespace swarm
