#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm/mat.hpp"
#include "swarm/tomo.hpp"

namespace swarm {

enum class MaskKind { sparse_view, circles, strip };
const char* to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& name);

/// Seed family for random mask generation. When `kind` is unset, a kind is
/// drawn uniformly per mask. Parameters are clamped to the target grid.
struct MaskSpec {
    std::optional<MaskKind> kind;
    std::vector<int> sparse_view_choices{10, 20, 30, 60, 90, 120, 180, 720};
    std::optional<int> sparse_view_kept; // overrides the choice draw
    int circle_count = 3;
    double circle_radius = 48.0;
    int strip_denominator = 5; // strip width = floor(cols / strip_denominator)
    uint64_t rng_seed = 0;
};

/// Binary mask: 0 on the randomly generated zero-set, 1 elsewhere.
struct Mask {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> data;
    MaskKind kind = MaskKind::sparse_view; // kind actually drawn

    uint8_t at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

Mask generate_mask(const MaskSpec& spec, int rows, int cols);

Mat apply_mask(const Mat& x, const Mask& mask);
Sinogram apply_mask(const Sinogram& sino, const Mask& mask);

void save_mask(const std::string& stem, const Mask& mask);
void save_mask_pgm(const std::string& path, const Mask& mask);

/// Mask value model for the variance check: the shipped binary {0,1} masks,
/// or zero-mean {-1,+1} test masks for which the cross term has mean zero.
enum class MaskValueModel { binary01, symmetric_pm1 };

struct VarianceReport {
    double var_raw = 0.0;        // sigma^2(x)
    double var_perturbed = 0.0;  // mean over trials of sigma^2(x + x .* m)
    double cross_term_mean = 0.0;
    double cross_term_stderr = 0.0;
    bool inflated = false;
};

/// Monte-Carlo estimate of the variance inflation induced by random masking.
/// Each trial draws one mask per sample, perturbs x_i to x_i + x_i .* m_i and
/// measures the corpus variance of the perturbed set.
VarianceReport variance_inflation_check(const std::vector<Mat>& samples, const MaskSpec& family,
                                        int trials, uint64_t rng_seed,
                                        MaskValueModel model = MaskValueModel::binary01);

} // namespace swarm
