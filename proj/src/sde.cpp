#include "swarm/sde.hpp"

#include <cmath>
#include <cstring>

#include "swarm/errors.hpp"
#include "swarm/rng.hpp"

namespace swarm {

NoiseSchedule NoiseSchedule::geometric(double sigma_min, double sigma_max, int n_steps) {
    if (!(sigma_min > 0.0)) throw ArgumentError("schedule: sigma_min must be > 0");
    if (!(sigma_max > sigma_min)) throw ArgumentError("schedule: sigma_max must exceed sigma_min");
    if (n_steps < 2) throw ArgumentError("schedule: n_steps must be >= 2");
    NoiseSchedule s;
    s.sigma_min = sigma_min;
    s.sigma_max = sigma_max;
    s.n_steps = n_steps;
    s.sigmas.resize(n_steps);
    const double ratio = sigma_max / sigma_min;
    for (int t = 0; t < n_steps; ++t)
        s.sigmas[t] = sigma_min * std::pow(ratio, static_cast<double>(t) / (n_steps - 1));
    s.sigmas.front() = sigma_min;
    s.sigmas.back() = sigma_max;
    return s;
}

double NoiseSchedule::sigma(int t) const {
    if (t < 0 || t >= n_steps) throw ArgumentError("schedule: step index out of range");
    return sigmas[t];
}

void LangevinConfig::validate() const {
    if (!(snr >= 0.0) || !std::isfinite(snr)) throw ArgumentError("langevin: snr must be finite and >= 0");
    if (n_corrector_steps < 0) throw ArgumentError("langevin: n_corrector_steps must be >= 0");
}

Mat perturb(const Mat& x0, int t, const NoiseSchedule& sched, uint64_t rng_seed) {
    const double s = sched.sigma(t);
    Rng rng(derive_seed(rng_seed, 0x70657274ULL, static_cast<uint64_t>(t))); // "pert"
    Mat out = x0;
    for (double& x : out.v) x += s * rng.gaussian();
    return out;
}

Mat predictor_step(const Mat& x, int t, const ScoreFunction& score, const NoiseSchedule& sched,
                   uint64_t rng_seed, const Mat* noise_override) {
    if (t < 1) throw ArgumentError("predictor_step: t must be >= 1 (no predecessor level)");
    const double s_t = sched.sigma(t);
    const double s_p = sched.sigma(t - 1);
    const double dvar = s_t * s_t - s_p * s_p;

    const Mat g = score.evaluate(x, t);
    if (!g.same_shape(x)) throw NumericError("predictor_step: score output shape mismatch");
    if (!all_finite(g)) throw NumericError("predictor_step: non-finite score output");

    Mat out = x;
    const double noise_scale = std::sqrt(dvar);
    if (noise_override) {
        if (!noise_override->same_shape(x)) throw ArgumentError("predictor_step: noise shape mismatch");
        for (size_t i = 0; i < out.v.size(); ++i)
            out.v[i] += dvar * g.v[i] + noise_scale * noise_override->v[i];
    } else {
        Rng rng(derive_seed(rng_seed, 0x70726564ULL, static_cast<uint64_t>(t))); // "pred"
        for (size_t i = 0; i < out.v.size(); ++i)
            out.v[i] += dvar * g.v[i] + noise_scale * rng.gaussian();
    }
    return out;
}

Mat corrector_step(const Mat& x, int t, const ScoreFunction& score, const LangevinConfig& cfg,
                   uint64_t rng_seed, const Mat* noise_override) {
    cfg.validate();
    const Mat g = score.evaluate(x, t);
    if (!g.same_shape(x)) throw NumericError("corrector_step: score output shape mismatch");
    if (!all_finite(g)) throw NumericError("corrector_step: non-finite score output");

    Mat z;
    if (noise_override) {
        if (!noise_override->same_shape(x)) throw ArgumentError("corrector_step: noise shape mismatch");
        z = *noise_override;
    } else {
        Rng rng(derive_seed(rng_seed, 0x636f7272ULL, static_cast<uint64_t>(t))); // "corr"
        z = rng.gaussian_mat(x.rows, x.cols);
    }

    const double g_norm = frob_norm(g);
    const double z_norm = frob_norm(z);
    double eps = 0.0;
    if (g_norm > 0.0 && cfg.snr > 0.0) {
        const double r = cfg.snr * z_norm / g_norm;
        eps = 2.0 * r * r;
    }
    if (!std::isfinite(eps)) eps = 0.0;

    Mat out = x;
    const double noise_scale = std::sqrt(2.0 * eps);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += eps * g.v[i] + noise_scale * z.v[i];
    return out;
}

Sinogram dc_sinogram(const Sinogram& x, const Sinogram& y_sparse, const SamplingOperator& op) {
    op.validate();
    if (!x.data.same_shape(y_sparse.data))
        throw ArgumentError("dc_sinogram: shape mismatch between state and measurement");
    if (op.full_angles != x.geo.n_angles)
        throw ArgumentError("dc_sinogram: operator angle count does not match sinogram");
    Sinogram out = x;
    const size_t row_bytes = static_cast<size_t>(x.data.cols) * sizeof(double);
    for (int k : op.kept_indices)
        std::memcpy(&out.data.v[static_cast<size_t>(k) * x.data.cols],
                    &y_sparse.data.v[static_cast<size_t>(k) * x.data.cols], row_bytes);
    return out;
}

HighFrequencySet dc_wavelet_hf(const Sinogram& x_s_half, const Sinogram& y_sparse,
                               const SamplingOperator& op) {
    const Sinogram merged = dc_sinogram(x_s_half, y_sparse, op);
    return extract_hf(merged.data);
}

double kept_row_residual(const Sinogram& x, const Sinogram& y_sparse, const SamplingOperator& op) {
    op.validate();
    if (!x.data.same_shape(y_sparse.data)) throw ArgumentError("kept_row_residual: shape mismatch");
    double s = 0.0;
    for (int k : op.kept_indices)
        for (int j = 0; j < x.data.cols; ++j) {
            const double d = x.data.at(k, j) - y_sparse.data.at(k, j);
            s += d * d;
        }
    return std::sqrt(s);
}

} // namespace swarm
