#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swarm/masks.hpp"
#include "swarm/mat.hpp"
#include "swarm/nn.hpp"
#include "swarm/sde.hpp"

namespace swarm {

enum class ModelFamily : uint8_t { none = 0, srm = 1, shd = 2 };
const char* to_string(ModelFamily family);

/// Trainable score model: architecture + flat weights + the input scale the
/// network was trained with. The score is parameterized as
///   s(x, t) = net(x / sqrt(sigma_t^2 + data_scale^2), log sigma_t) / sigma_t.
struct ScoreModelParams {
    nn::ArchDescriptor arch;
    std::vector<double> weights;
    ModelFamily family = ModelFamily::none;
    double data_scale = 1.0;
    // training metadata
    double sigma_min = 0.0, sigma_max = 0.0;
    int sched_steps = 0;
    int trained_iterations = 0;
    double learning_rate = 0.0;
    double ema_decay = 0.0;
    uint64_t rng_seed = 0;
};

/// Kaiming-initialized network, reproducible from seed.
ScoreModelParams build_score_network(const nn::ArchDescriptor& arch, uint64_t rng_seed);

/// Versioned little-endian binary checkpoint; reload is bit-exact.
void save_checkpoint(const std::string& path, const ScoreModelParams& params);
ScoreModelParams load_checkpoint(const std::string& path);

/// Exact score of N(mu, s2*I) convolved with the VE kernel:
/// s(x, t) = (mu - x) / (s2 + sigma_t^2).
class AnalyticGaussianScore : public ScoreFunction {
  public:
    AnalyticGaussianScore(Mat mu, double s2, NoiseSchedule sched);
    Mat evaluate(const Mat& x, int t) const override;

  private:
    Mat mu_;
    double s2_;
    NoiseSchedule sched_;
};

/// Learned score function backed by a ScoreModelParams checkpoint.
class NetScore : public ScoreFunction {
  public:
    NetScore(ScoreModelParams params, NoiseSchedule sched);
    Mat evaluate(const Mat& x, int t) const override;
    const ScoreModelParams& params() const { return params_; }

  private:
    ScoreModelParams params_;
    NoiseSchedule sched_;
    nn::NetLayout layout_;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 2;
    int n_iterations = 500;
    uint64_t rng_seed = 0;
    double ema_decay = 0.99;

    void validate() const;
};

/// Test hook: replaces the model score s(x_t, t) inside dsm_loss.
using ScoreOverride = std::function<Mat(const Mat& x_t, int t)>;

struct DsmResult {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// Denoising score matching on one batch: per item draws t uniformly over the
/// schedule, perturbs with the VE kernel and evaluates
/// lambda_t * ||s(x_t,t) - (x0 - x_t)/sigma_t^2||^2 with lambda_t = sigma_t^2,
/// averaged over batch and pixels, plus its exact parameter gradient.
DsmResult dsm_loss(const ScoreModelParams& params, const std::vector<Mat>& batch,
                   const NoiseSchedule& sched, uint64_t rng_seed,
                   const ScoreOverride& score_override = nullptr);

struct TrainLogEntry {
    int iteration = 0;
    double loss = 0.0;
    std::string tag; // mask kind or band index
    double wall_ms = 0.0;
};
using TrainLogger = std::function<void(const TrainLogEntry&)>;

/// Sinogram random-mask training: each iteration corrupts fresh batch draws
/// with freshly generated random masks, then optimizes dsm_loss with Adam.
/// Returns EMA weights.
ScoreModelParams train_srm(const std::vector<Mat>& dataset, const MaskSpec& mask_family,
                           const NoiseSchedule& sched, const TrainConfig& cfg,
                           const nn::ArchDescriptor& arch, const TrainLogger& logger = nullptr);

/// Wavelet high-frequency training: each iteration picks one detail band of
/// each drawn sinogram uniformly at random. Returns EMA weights.
ScoreModelParams train_shd(const std::vector<Mat>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg, const nn::ArchDescriptor& arch,
                           const TrainLogger& logger = nullptr);

} // namespace swarm
