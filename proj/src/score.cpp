#include "swarm/score.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "swarm/errors.hpp"
#include "swarm/io.hpp"
#include "swarm/rng.hpp"
#include "swarm/wavelet.hpp"

namespace swarm {

const char* to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::none: return "none";
        case ModelFamily::srm: return "srm";
        case ModelFamily::shd: return "shd";
    }
    return "?";
}

ScoreModelParams build_score_network(const nn::ArchDescriptor& arch, uint64_t rng_seed) {
    arch.validate();
    ScoreModelParams p;
    p.arch = arch;
    p.weights = nn::kaiming_init(arch, rng_seed);
    p.rng_seed = rng_seed;
    return p;
}

namespace {

constexpr char kCkptMagic[8] = {'S', 'W', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void put(std::string& out, const T& x) {
    const char* p = reinterpret_cast<const char*>(&x);
    out.append(p, sizeof(T));
}

template <typename T>
T take(const std::string& in, size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw IoError("checkpoint: truncated file");
    T x;
    std::memcpy(&x, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return x;
}

} // namespace

void save_checkpoint(const std::string& path, const ScoreModelParams& p) {
    std::string out;
    out.append(kCkptMagic, sizeof(kCkptMagic));
    put<uint8_t>(out, static_cast<uint8_t>(p.family));
    put<int32_t>(out, p.arch.in_channels);
    put<int32_t>(out, p.arch.base_channels);
    put<int32_t>(out, static_cast<int32_t>(p.arch.channel_mult.size()));
    for (int m : p.arch.channel_mult) put<int32_t>(out, m);
    put<int32_t>(out, p.arch.emb_dim);
    put<int32_t>(out, p.arch.fourier_feats);
    put<double>(out, p.data_scale);
    put<double>(out, p.sigma_min);
    put<double>(out, p.sigma_max);
    put<int32_t>(out, p.sched_steps);
    put<int32_t>(out, p.trained_iterations);
    put<double>(out, p.learning_rate);
    put<double>(out, p.ema_decay);
    put<uint64_t>(out, p.rng_seed);
    put<uint64_t>(out, static_cast<uint64_t>(p.weights.size()));
    out.append(reinterpret_cast<const char*>(p.weights.data()), p.weights.size() * sizeof(double));
    io::write_text_file(path, out);
}

ScoreModelParams load_checkpoint(const std::string& path) {
    const std::string in = io::read_text_file(path);
    if (in.size() < sizeof(kCkptMagic) || std::memcmp(in.data(), kCkptMagic, sizeof(kCkptMagic)) != 0)
        throw IoError("checkpoint: bad magic in " + path);
    size_t pos = sizeof(kCkptMagic);
    ScoreModelParams p;
    p.family = static_cast<ModelFamily>(take<uint8_t>(in, pos));
    p.arch.in_channels = take<int32_t>(in, pos);
    p.arch.base_channels = take<int32_t>(in, pos);
    const int32_t n_mult = take<int32_t>(in, pos);
    if (n_mult < 1 || n_mult > 16) throw IoError("checkpoint: bad channel_mult count");
    p.arch.channel_mult.resize(n_mult);
    for (int i = 0; i < n_mult; ++i) p.arch.channel_mult[i] = take<int32_t>(in, pos);
    p.arch.emb_dim = take<int32_t>(in, pos);
    p.arch.fourier_feats = take<int32_t>(in, pos);
    p.data_scale = take<double>(in, pos);
    p.sigma_min = take<double>(in, pos);
    p.sigma_max = take<double>(in, pos);
    p.sched_steps = take<int32_t>(in, pos);
    p.trained_iterations = take<int32_t>(in, pos);
    p.learning_rate = take<double>(in, pos);
    p.ema_decay = take<double>(in, pos);
    p.rng_seed = take<uint64_t>(in, pos);
    const uint64_t n_weights = take<uint64_t>(in, pos);
    if (n_weights != nn::param_count(p.arch))
        throw IoError("checkpoint: weight count does not match architecture");
    p.weights.resize(n_weights);
    if (pos + n_weights * sizeof(double) > in.size()) throw IoError("checkpoint: truncated weights");
    std::memcpy(p.weights.data(), in.data() + pos, n_weights * sizeof(double));
    return p;
}

AnalyticGaussianScore::AnalyticGaussianScore(Mat mu, double s2, NoiseSchedule sched)
    : mu_(std::move(mu)), s2_(s2), sched_(std::move(sched)) {
    if (!(s2 > 0.0)) throw ArgumentError("analytic_gaussian_score: s2 must be > 0");
}

Mat AnalyticGaussianScore::evaluate(const Mat& x, int t) const {
    if (!x.same_shape(mu_)) throw ArgumentError("analytic score: shape mismatch");
    const double s = sched_.sigma(t);
    const double denom = s2_ + s * s;
    Mat out(x.rows, x.cols);
    for (size_t i = 0; i < x.v.size(); ++i) out.v[i] = (mu_.v[i] - x.v[i]) / denom;
    return out;
}

NetScore::NetScore(ScoreModelParams params, NoiseSchedule sched)
    : params_(std::move(params)), sched_(std::move(sched)), layout_(nn::NetLayout::build(params_.arch)) {
    if (params_.weights.size() != layout_.total)
        throw ConfigError("net score: weight count does not match architecture");
}

// Skip-scaled denoiser parameterization: the network predicts the residual
// part of D(x, sigma) ~ E[x0 | x] and the score follows as (D - x)/sigma^2.
//   c_in  = 1/sqrt(sigma^2 + ds^2)   (whitens the input)
//   c_skip = ds^2/(sigma^2 + ds^2)   (analytic shrinkage toward the data basin)
//   c_out = sigma * ds * c_in        (bounds the learned correction)
struct DenoiserScales {
    double c_in, c_skip, c_out;
};

static DenoiserScales denoiser_scales(double sigma, double data_scale) {
    const double v = sigma * sigma + data_scale * data_scale;
    DenoiserScales s;
    s.c_in = 1.0 / std::sqrt(v);
    s.c_skip = data_scale * data_scale / v;
    s.c_out = sigma * data_scale * s.c_in;
    return s;
}

Mat NetScore::evaluate(const Mat& x, int t) const {
    const double sigma = sched_.sigma(t);
    const DenoiserScales sc = denoiser_scales(sigma, params_.data_scale);
    nn::Tensor in(1, x.rows, x.cols);
    for (size_t i = 0; i < x.v.size(); ++i) in.v[i] = x.v[i] * sc.c_in;
    nn::Workspace ws;
    const nn::Tensor out = nn::forward(layout_, params_.weights.data(), in, std::log(sigma), ws);
    Mat s(x.rows, x.cols);
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (size_t i = 0; i < s.v.size(); ++i) {
        const double denoised = sc.c_skip * x.v[i] + sc.c_out * out.v[i];
        s.v[i] = (denoised - x.v[i]) * inv_s2;
    }
    return s;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("train config: learning_rate must be > 0");
    if (batch_size < 1) throw ArgumentError("train config: batch_size must be >= 1");
    if (n_iterations < 0) throw ArgumentError("train config: n_iterations must be >= 0");
    if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ArgumentError("train config: ema_decay must be in [0,1)");
}

DsmResult dsm_loss(const ScoreModelParams& params, const std::vector<Mat>& batch,
                   const NoiseSchedule& sched, uint64_t rng_seed,
                   const ScoreOverride& score_override) {
    if (batch.empty()) throw ArgumentError("dsm_loss: empty batch");
    const nn::NetLayout layout = nn::NetLayout::build(params.arch);
    if (params.weights.size() != layout.total)
        throw ConfigError("dsm_loss: weight count does not match architecture");

    DsmResult res;
    res.gradient.assign(layout.total, 0.0);
    const int b_count = static_cast<int>(batch.size());

    for (int b = 0; b < b_count; ++b) {
        const Mat& x0 = batch[b];
        if (x0.empty()) throw ArgumentError("dsm_loss: empty batch item");
        Rng trng(derive_seed(rng_seed, 0x74647277ULL, static_cast<uint64_t>(b))); // "tdrw"
        const int t = trng.uniform_int(sched.n_steps);
        const double sigma = sched.sigma(t);
        Rng zrng(derive_seed(rng_seed, 0x7a647277ULL, static_cast<uint64_t>(b))); // "zdrw"
        Mat z = zrng.gaussian_mat(x0.rows, x0.cols);

        // x_t = x0 + sigma z; kernel score target = (x0 - x_t)/sigma^2 = -z/sigma
        Mat x_t = x0;
        for (size_t i = 0; i < x_t.v.size(); ++i) x_t.v[i] += sigma * z.v[i];

        const double inv_d = 1.0 / static_cast<double>(x0.size());
        const double lambda = sigma * sigma;

        if (score_override) {
            const Mat s = score_override(x_t, t);
            if (!s.same_shape(x0)) throw ArgumentError("dsm_loss: override shape mismatch");
            double item = 0.0;
            for (size_t i = 0; i < s.v.size(); ++i) {
                const double diff = s.v[i] + z.v[i] / sigma;
                item += diff * diff;
            }
            res.loss += lambda * item * inv_d / b_count;
            continue;
        }

        const DenoiserScales sc = denoiser_scales(sigma, params.data_scale);
        nn::Tensor in(1, x0.rows, x0.cols);
        for (size_t i = 0; i < x_t.v.size(); ++i) in.v[i] = x_t.v[i] * sc.c_in;
        nn::Workspace ws;
        const nn::Tensor raw = nn::forward(layout, params.weights.data(), in, std::log(sigma), ws);

        // lambda * (s - target)^2 collapses to ((D - x0)/sigma)^2 with
        // D = c_skip x_t + c_out raw
        double item = 0.0;
        nn::Tensor dy(1, x0.rows, x0.cols);
        const double inv_sigma = 1.0 / sigma;
        for (size_t i = 0; i < raw.v.size(); ++i) {
            const double denoised = sc.c_skip * x_t.v[i] + sc.c_out * raw.v[i];
            const double diff = (denoised - x0.v[i]) * inv_sigma;
            item += diff * diff;
            dy.v[i] = 2.0 * diff * inv_sigma * sc.c_out * inv_d / b_count;
        }
        const double item_loss = item * inv_d;
        if (!std::isfinite(item_loss))
            throw NumericError("dsm_loss: non-finite loss at t=" + std::to_string(t));
        res.loss += item_loss / b_count;
        nn::backward(layout, params.weights.data(), ws, dy, res.gradient.data());
    }
    if (!std::isfinite(res.loss)) throw NumericError("dsm_loss: non-finite loss");
    return res;
}

namespace {

struct AdamState {
    std::vector<double> m, v;
    int step = 0;
    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}

    void update(std::vector<double>& w, const std::vector<double>& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++step;
        const double c1 = 1.0 - std::pow(b1, step);
        const double c2 = 1.0 - std::pow(b2, step);
        for (size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

double dataset_rms(const std::vector<Mat>& items) {
    double s = 0.0;
    size_t n = 0;
    for (const Mat& m : items) {
        for (double x : m.v) s += x * x;
        n += m.size();
    }
    const double rms = n ? std::sqrt(s / n) : 0.0;
    return std::max(rms, 1e-6);
}

using BatchMaker = std::function<Mat(int iteration, int item, std::string* tag)>;

ScoreModelParams train_loop(const std::vector<Mat>& dataset, const NoiseSchedule& sched,
                            const TrainConfig& cfg, const nn::ArchDescriptor& arch,
                            ModelFamily family, double data_scale, const BatchMaker& make_item,
                            const TrainLogger& logger) {
    if (dataset.empty()) throw ArgumentError("train: empty dataset");
    cfg.validate();

    ScoreModelParams p = build_score_network(arch, derive_seed(cfg.rng_seed, 0x6e657477ULL));
    p.family = family;
    p.data_scale = data_scale;
    p.sigma_min = sched.sigma_min;
    p.sigma_max = sched.sigma_max;
    p.sched_steps = sched.n_steps;
    p.trained_iterations = cfg.n_iterations;
    p.learning_rate = cfg.learning_rate;
    p.ema_decay = cfg.ema_decay;
    p.rng_seed = cfg.rng_seed;

    std::vector<double> ema = p.weights;
    AdamState adam(p.weights.size());

    for (int it = 0; it < cfg.n_iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<Mat> batch;
        batch.reserve(cfg.batch_size);
        std::string tag;
        for (int b = 0; b < cfg.batch_size; ++b) {
            std::string item_tag;
            batch.push_back(make_item(it, b, &item_tag));
            if (b == 0) tag = item_tag;
        }
        DsmResult r = dsm_loss(p, batch, sched, derive_seed(cfg.rng_seed, 0x64736d6cULL, it));
        adam.update(p.weights, r.gradient, cfg.learning_rate);
        for (size_t i = 0; i < ema.size(); ++i)
            ema[i] = cfg.ema_decay * ema[i] + (1.0 - cfg.ema_decay) * p.weights[i];
        if (logger) {
            const auto t1 = std::chrono::steady_clock::now();
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            logger(TrainLogEntry{it, r.loss, tag, ms});
        }
    }
    p.weights = std::move(ema);
    return p;
}

} // namespace

ScoreModelParams train_srm(const std::vector<Mat>& dataset, const MaskSpec& mask_family,
                           const NoiseSchedule& sched, const TrainConfig& cfg,
                           const nn::ArchDescriptor& arch, const TrainLogger& logger) {
    if (dataset.empty()) throw ArgumentError("train_srm: empty dataset");
    const double scale = dataset_rms(dataset);
    auto make_item = [&](int it, int b, std::string* tag) {
        Rng pick(derive_seed(cfg.rng_seed, 0x70696b73ULL, it, b)); // "piks"
        const Mat& y = dataset[pick.uniform_int(static_cast<int>(dataset.size()))];
        MaskSpec spec = mask_family;
        spec.rng_seed = derive_seed(cfg.rng_seed, 0x6d736b73ULL, it, b); // "msks"
        const Mask m = generate_mask(spec, y.rows, y.cols);
        if (tag) *tag = to_string(m.kind);
        return apply_mask(y, m);
    };
    return train_loop(dataset, sched, cfg, arch, ModelFamily::srm, scale, make_item, logger);
}

ScoreModelParams train_shd(const std::vector<Mat>& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg, const nn::ArchDescriptor& arch,
                           const TrainLogger& logger) {
    if (dataset.empty()) throw ArgumentError("train_shd: empty dataset");
    std::vector<Mat> all_bands;
    all_bands.reserve(dataset.size() * 3);
    for (const Mat& y : dataset) {
        HighFrequencySet hf = extract_hf(y);
        for (int i = 0; i < 3; ++i) all_bands.push_back(std::move(hf.bands[i]));
    }
    const double scale = dataset_rms(all_bands);
    auto make_item = [&](int it, int b, std::string* tag) {
        Rng pick(derive_seed(cfg.rng_seed, 0x70696b68ULL, it, b)); // "pikh"
        const Mat& y = dataset[pick.uniform_int(static_cast<int>(dataset.size()))];
        const HighFrequencySet hf = extract_hf(y);
        SelectedBand sel = select_random_hf(hf, derive_seed(cfg.rng_seed, 0x62616e64ULL, it, b));
        if (tag) *tag = "band" + std::to_string(sel.index);
        return std::move(sel.band);
    };
    return train_loop(dataset, sched, cfg, arch, ModelFamily::shd, scale, make_item, logger);
}

} // namespace swarm
