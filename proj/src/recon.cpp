#include "swarm/recon.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "swarm/errors.hpp"
#include "swarm/rng.hpp"
#include "swarm/wavelet.hpp"

namespace swarm {

const char* to_string(ReconMode mode) {
    switch (mode) {
        case ReconMode::swarm: return "swarm";
        case ReconMode::srm_only: return "srm_only";
        case ReconMode::shd_only: return "shd_only";
    }
    return "?";
}

ReconMode recon_mode_from_string(const std::string& name) {
    if (name == "swarm") return ReconMode::swarm;
    if (name == "srm_only") return ReconMode::srm_only;
    if (name == "shd_only") return ReconMode::shd_only;
    throw ArgumentError("unknown reconstruction mode: " + name);
}

std::string ReconTrace::to_text() const {
    std::string out = "t stage band resid_pre resid_post\n";
    char buf[160];
    for (const TraceRecord& r : records) {
        if (r.dc_applied) {
            std::snprintf(buf, sizeof(buf), "%d %s %d %.17g %.17g\n", r.t, r.stage.c_str(), r.band,
                          r.resid_pre, r.resid_post);
        } else {
            std::snprintf(buf, sizeof(buf), "%d %s %d %.17g -\n", r.t, r.stage.c_str(), r.band,
                          r.resid_pre);
        }
        out += buf;
    }
    return out;
}

bool ReconTrace::has_stage(const std::string& prefix) const {
    for (const TraceRecord& r : records)
        if (r.stage.rfind(prefix, 0) == 0) return true;
    return false;
}

namespace {

// rng stream tags
constexpr uint64_t kInitS = 0x696e6953ULL;  // "iniS"
constexpr uint64_t kInitH = 0x696e6948ULL;  // "iniH"
constexpr uint64_t kSinoPred = 0x73707264ULL;
constexpr uint64_t kSinoCorr = 0x73636f72ULL;
constexpr uint64_t kHfPred = 0x68707264ULL;
constexpr uint64_t kHfCorr = 0x68636f72ULL;

struct Engine {
    const Sinogram& y;
    const ReconConfig& cfg;
    const SamplingOperator& op;
    ReconTrace trace;

    Sinogram make_sino(Mat data) const {
        Sinogram s;
        s.geo = y.geo;
        s.data = std::move(data);
        return s;
    }

    void record(int t, const char* stage, int band, double pre, double post, bool dc) {
        trace.records.push_back(TraceRecord{t, stage, band, pre, post, dc});
    }

    // DC on a full sinogram state; returns the projected state and records
    // the pre/post kept-row residuals.
    Sinogram dc_and_record(Sinogram state, int t, const char* stage, int band) {
        const double pre = kept_row_residual(state, y, op);
        if (!std::isfinite(pre))
            throw NumericError(std::string("reconstruction: non-finite state at t=") +
                               std::to_string(t) + " stage=" + stage);
        Sinogram out = dc_sinogram(state, y, op);
        const double post = kept_row_residual(out, y, op);
        record(t, stage, band, pre, post, true);
        return out;
    }
};

ReconResult run_reconstruction(const Sinogram& y_sparse, const ReconConfig& cfg, ReconMode mode) {
    y_sparse.validate();
    cfg.sampling.validate();
    cfg.langevin.validate();
    if (cfg.schedule.n_steps < 2) throw ConfigError("reconstruction: schedule must have T >= 2");
    if (cfg.sampling.full_angles != y_sparse.geo.n_angles)
        throw ConfigError("reconstruction: sampling operator does not match sinogram angles");
    if (mode != ReconMode::shd_only && !cfg.srm_score)
        throw ConfigError("reconstruction: srm score required for this mode");
    if (mode != ReconMode::srm_only && !cfg.shd_score)
        throw ConfigError("reconstruction: shd score required for this mode");

    int image_size = cfg.image_size;
    if (image_size <= 0)
        image_size = static_cast<int>(std::floor(y_sparse.geo.n_detectors *
                                                 y_sparse.geo.detector_spacing / std::numbers::sqrt2));
    if (image_size < 1) throw ConfigError("reconstruction: cannot infer image size");

    const NoiseSchedule& sched = cfg.schedule;
    const int T = sched.n_steps;
    const double sigma_max = sched.sigma_max;
    Engine eng{y_sparse, cfg, cfg.sampling, {}};

    const int rows = y_sparse.geo.n_angles;
    const int cols = y_sparse.geo.n_detectors;
    const int band_rows = (rows + 1) / 2;
    const int band_cols = (cols + 1) / 2;

    // Alg. line 1: both states start as sigma_max-scaled white noise.
    Sinogram ys = eng.make_sino(Rng(derive_seed(cfg.rng_seed, kInitS)).gaussian_mat(rows, cols, sigma_max));
    Mat bands[3];
    for (int i = 0; i < 3; ++i)
        bands[i] = Rng(derive_seed(cfg.rng_seed, kInitH, i)).gaussian_mat(band_rows, band_cols, sigma_max);

    const bool do_sino_diffusion = mode != ReconMode::shd_only;
    const bool do_hf = mode != ReconMode::srm_only;

    for (int t = T - 1; t >= 1; --t) {
        // ---- stage 1: sinogram ----
        if (do_sino_diffusion) {
            Mat x = predictor_step(ys.data, t, *cfg.srm_score, sched,
                                   derive_seed(cfg.rng_seed, kSinoPred, t));
            ys = eng.dc_and_record(eng.make_sino(std::move(x)), t, "sino_pred", -1);
            Mat c = ys.data;
            for (int k = 0; k < cfg.langevin.n_corrector_steps; ++k)
                c = corrector_step(c, t - 1, *cfg.srm_score, cfg.langevin,
                                   derive_seed(cfg.rng_seed, kSinoCorr, t, k));
            ys = eng.dc_and_record(eng.make_sino(std::move(c)), t, "sino_corr", -1);
        } else {
            ys = dc_sinogram(ys, y_sparse, cfg.sampling);
        }

        // ---- stage 2: wavelet detail bands ----
        // The band states persist across iterations (noise-seeded at t = T-1)
        // and are refined by their own predictor/corrector/DC; only the LL
        // band is re-derived from the stage-1 sinogram.
        if (do_hf) {
            WaveletBands wb = dwt2(ys.data);
            const Mat ll_ret = wb.ll;
            auto synth = [&]() {
                WaveletBands b;
                b.ll = ll_ret;
                b.lh = bands[0];
                b.hl = bands[1];
                b.hh = bands[2];
                b.parent_rows = rows;
                b.parent_cols = cols;
                return idwt2(b);
            };
            for (int i = 0; i < 3; ++i) {
                bands[i] = predictor_step(bands[i], t, *cfg.shd_score, sched,
                                          derive_seed(cfg.rng_seed, kHfPred, t, i));
                Sinogram merged = eng.dc_and_record(eng.make_sino(synth()), t, "hf_pred", i);
                bands[i] = extract_hf(merged.data).bands[i];

                Mat c = bands[i];
                for (int k = 0; k < cfg.langevin.n_corrector_steps; ++k)
                    c = corrector_step(c, t - 1, *cfg.shd_score, cfg.langevin,
                                       derive_seed(cfg.rng_seed, kHfCorr, t, i * 64 + k));
                bands[i] = std::move(c);
                merged = eng.dc_and_record(eng.make_sino(synth()), t, "hf_corr", i);
                bands[i] = extract_hf(merged.data).bands[i];
            }
            if (cfg.merge_every_iteration)
                ys = dc_sinogram(eng.make_sino(synth()), y_sparse, cfg.sampling);
        }

        if (cfg.snapshot_every > 0 && !cfg.snapshot_dir.empty() &&
            (T - 1 - t) % cfg.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "/snap_t%04d", t);
            std::filesystem::create_directories(cfg.snapshot_dir);
            save_sinogram(cfg.snapshot_dir + name, ys);
        }
    }

    ReconResult res;
    res.stage1_sinogram = ys;
    if (mode == ReconMode::srm_only) {
        res.sinogram = std::move(ys);
    } else {
        // merge retained LL with the optimized detail bands
        WaveletBands wb = dwt2(ys.data);
        WaveletBands merged;
        merged.ll = std::move(wb.ll);
        merged.lh = bands[0];
        merged.hl = bands[1];
        merged.hh = bands[2];
        merged.parent_rows = rows;
        merged.parent_cols = cols;
        Sinogram out = eng.make_sino(idwt2(merged));
        const double resid = kept_row_residual(out, y_sparse, cfg.sampling);
        eng.record(0, "merge", -1, resid, resid, false);
        res.sinogram = std::move(out);
    }
    res.image = fbp(res.sinogram, image_size, cfg.fbp_filter);
    res.trace = std::move(eng.trace);
    return res;
}

} // namespace

ReconResult swarm_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg) {
    return run_reconstruction(y_sparse, cfg, ReconMode::swarm);
}

ReconResult srm_only_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg) {
    return run_reconstruction(y_sparse, cfg, ReconMode::srm_only);
}

ReconResult shd_only_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg) {
    return run_reconstruction(y_sparse, cfg, ReconMode::shd_only);
}

} // namespace swarm
