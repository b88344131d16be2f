#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm::nn {

/// Channel-major activation block (ch x rows x cols, row-major planes).
struct Tensor {
    int ch = 0, rows = 0, cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c, int r, int co)
        : ch(c), rows(r), cols(co), v(static_cast<size_t>(c) * r * co, 0.0) {}

    double* plane(int c) { return v.data() + static_cast<size_t>(c) * rows * cols; }
    const double* plane(int c) const { return v.data() + static_cast<size_t>(c) * rows * cols; }
    size_t plane_size() const { return static_cast<size_t>(rows) * cols; }
    size_t size() const { return v.size(); }
};

/// Encoder-decoder score network shape: `levels() = channel_mult.size()`
/// resolutions, channels(l) = base_channels * channel_mult[l], conditioned on
/// log(sigma) through a small MLP feeding per-block channel biases.
struct ArchDescriptor {
    int in_channels = 1;
    int base_channels = 16;
    std::vector<int> channel_mult{1, 2, 4, 6};
    int emb_dim = 32;
    int fourier_feats = 8;

    int levels() const { return static_cast<int>(channel_mult.size()); }
    int channels(int level) const { return base_channels * channel_mult[level]; }
    void validate() const;
    bool operator==(const ArchDescriptor&) const = default;
};

struct Slice {
    size_t off = 0;
    size_t n = 0;
};

struct ConvSpec {
    int oc = 0, ic = 0, stride = 1;
    Slice w, b;
};

struct LinSpec {
    int out = 0, in = 0;
    Slice w, b;
};

/// Fixed traversal order of all parameters in one flat vector.
struct NetLayout {
    ArchDescriptor arch;
    LinSpec emb1, emb2;
    ConvSpec conv_in;
    std::vector<ConvSpec> enc_conv;  // per level
    std::vector<LinSpec> enc_film;   // per level
    std::vector<ConvSpec> down_conv; // levels-1
    ConvSpec mid_conv;
    LinSpec mid_film;
    std::vector<ConvSpec> up_conv;  // levels-1, index = target level
    std::vector<ConvSpec> dec_conv; // levels-1
    std::vector<LinSpec> dec_film;  // levels-1
    ConvSpec conv_out;
    size_t total = 0;

    static NetLayout build(const ArchDescriptor& arch);
};

struct LayerInfo {
    std::string name;
    size_t w_off = 0, w_count = 0;
    int fan_in = 0;
};

/// Weight (non-bias) slices with their fan-in, for init diagnostics.
std::vector<LayerInfo> layer_infos(const NetLayout& layout);

size_t param_count(const ArchDescriptor& arch);

/// Kaiming-initialized flat parameter vector: weights ~ N(0, 2/fan_in),
/// biases zero. Reproducible from seed.
std::vector<double> kaiming_init(const ArchDescriptor& arch, uint64_t rng_seed);

/// Activations retained between forward and backward.
struct Workspace {
    std::vector<double> ff, e1_pre, e1, e;
    Tensor x;
    std::vector<Tensor> h_in;     // input of enc block per level
    std::vector<Tensor> enc_pre;  // post-film pre-silu
    std::vector<Tensor> skip;     // post-silu
    std::vector<Tensor> down_pre; // levels-1
    Tensor mid_pre, mid_out;
    std::vector<Tensor> up_t;    // upsampled+cropped input of up_conv
    std::vector<Tensor> up_pre;  // up_conv out pre-silu
    std::vector<Tensor> up_q;    // post-silu
    std::vector<Tensor> cat;     // concat(up_q, skip)
    std::vector<Tensor> dec_pre; // post-film pre-silu
    std::vector<Tensor> dec_out; // post-silu
};

/// Forward pass; retains activations in `ws`.
Tensor forward(const NetLayout& layout, const double* w, const Tensor& x, double log_sigma,
               Workspace& ws);

/// Reverse-mode pass: accumulates parameter gradients into `grad`
/// (size layout.total) given dy = dL/d(output). Uses activations from the
/// matching forward call.
void backward(const NetLayout& layout, const double* w, const Workspace& ws, const Tensor& dy,
              double* grad);

} // namespace swarm::nn
