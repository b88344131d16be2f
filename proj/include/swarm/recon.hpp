#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/sde.hpp"
#include "swarm/tomo.hpp"

namespace swarm {

enum class ReconMode { swarm, srm_only, shd_only };
const char* to_string(ReconMode mode);
ReconMode recon_mode_from_string(const std::string& name);

struct ReconConfig {
    NoiseSchedule schedule;
    LangevinConfig langevin;
    SamplingOperator sampling;
    ReconMode mode = ReconMode::swarm;
    uint64_t rng_seed = 0;
    int snapshot_every = 0;    // dump the working sinogram every k steps
    std::string snapshot_dir;  // required when snapshot_every > 0
    bool merge_every_iteration = false;
    int image_size = 0; // 0: inferred from the detector span
    FbpFilter fbp_filter = FbpFilter::ram_lak;
    const ScoreFunction* srm_score = nullptr; // required unless shd_only
    const ScoreFunction* shd_score = nullptr; // required unless srm_only
};

struct TraceRecord {
    int t = 0;
    std::string stage; // sino_pred | sino_corr | hf_pred | hf_corr | merge
    int band = -1;     // 0..2 for hf stages
    double resid_pre = 0.0;
    double resid_post = 0.0;
    bool dc_applied = false;
};

struct ReconTrace {
    std::vector<TraceRecord> records;

    std::string to_text() const;
    bool has_stage(const std::string& prefix) const;
};

struct ReconResult {
    Mat image;
    Sinogram sinogram;        // merged full-view sinogram (stage-1 state for srm_only)
    Sinogram stage1_sinogram; // final DC-corrected stage-1 state before the merge
    ReconTrace trace;
};

/// Two-stage cascade: per reverse step, sinogram predictor -> DC ->
/// corrector -> DC, then per detail band predictor -> DC -> corrector -> DC;
/// after the loop the retained LL band is merged with the optimized detail
/// bands and the result backprojected with FBP.
/// `y_sparse` must be the full-shape sinogram with rows populated exactly at
/// cfg.sampling.kept_indices.
ReconResult swarm_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg);

/// Sinogram diffusion only; the detail-band loop and merge are skipped.
ReconResult srm_only_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg);

/// Detail-band diffusion only; the sinogram stage degenerates to the DC row
/// merge each step.
ReconResult shd_only_reconstruct(const Sinogram& y_sparse, const ReconConfig& cfg);

} // namespace swarm
