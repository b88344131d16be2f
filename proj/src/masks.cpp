#include "swarm/masks.hpp"

#include <algorithm>
#include <cmath>

#include "swarm/errors.hpp"
#include "swarm/io.hpp"
#include "swarm/rng.hpp"

namespace swarm {

const char* to_string(MaskKind kind) {
    switch (kind) {
        case MaskKind::sparse_view: return "sparse_view";
        case MaskKind::circles: return "circles";
        case MaskKind::strip: return "strip";
    }
    return "?";
}

MaskKind mask_kind_from_string(const std::string& name) {
    if (name == "sparse_view") return MaskKind::sparse_view;
    if (name == "circles") return MaskKind::circles;
    if (name == "strip") return MaskKind::strip;
    throw ArgumentError("unknown mask kind: " + name);
}

Mask generate_mask(const MaskSpec& spec, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ArgumentError("generate_mask: shape must be positive");
    Rng rng(derive_seed(spec.rng_seed, 0x6d61736bULL)); // "mask"

    Mask m;
    m.rows = rows;
    m.cols = cols;
    m.data.assign(static_cast<size_t>(rows) * cols, 1);
    m.kind = spec.kind ? *spec.kind : static_cast<MaskKind>(rng.uniform_int(3));

    switch (m.kind) {
        case MaskKind::sparse_view: {
            int kept;
            if (spec.sparse_view_kept) {
                kept = *spec.sparse_view_kept;
            } else {
                if (spec.sparse_view_choices.empty())
                    throw ArgumentError("generate_mask: empty sparse_view_choices");
                kept = spec.sparse_view_choices[rng.uniform_int(
                    static_cast<int>(spec.sparse_view_choices.size()))];
            }
            kept = std::clamp(kept, 1, rows);
            const SamplingOperator op = SamplingOperator::uniform(rows, kept);
            std::fill(m.data.begin(), m.data.end(), 0);
            for (int k : op.kept_indices)
                std::fill_n(m.data.begin() + static_cast<size_t>(k) * cols, cols, 1);
            break;
        }
        case MaskKind::circles: {
            const double radius = std::min(spec.circle_radius, static_cast<double>(std::min(rows, cols)));
            for (int c = 0; c < spec.circle_count; ++c) {
                const double cr = rng.uniform() * rows;
                const double cc = rng.uniform() * cols;
                const int r0 = std::max(0, static_cast<int>(std::floor(cr - radius)));
                const int r1 = std::min(rows - 1, static_cast<int>(std::ceil(cr + radius)));
                const int c0 = std::max(0, static_cast<int>(std::floor(cc - radius)));
                const int c1 = std::min(cols - 1, static_cast<int>(std::ceil(cc + radius)));
                for (int r = r0; r <= r1; ++r)
                    for (int cl = c0; cl <= c1; ++cl) {
                        const double dr = r - cr;
                        const double dc = cl - cc;
                        if (dr * dr + dc * dc <= radius * radius)
                            m.data[static_cast<size_t>(r) * cols + cl] = 0;
                    }
            }
            break;
        }
        case MaskKind::strip: {
            const int width = std::max(1, cols / std::max(1, spec.strip_denominator));
            const int start = rng.uniform_int(cols - width + 1);
            for (int r = 0; r < rows; ++r)
                std::fill_n(m.data.begin() + static_cast<size_t>(r) * cols + start, width, 0);
            break;
        }
    }
    return m;
}

Mat apply_mask(const Mat& x, const Mask& mask) {
    if (x.rows != mask.rows || x.cols != mask.cols)
        throw ArgumentError("apply_mask: shape mismatch");
    Mat out = x;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= mask.data[i];
    return out;
}

Sinogram apply_mask(const Sinogram& sino, const Mask& mask) {
    Sinogram out = sino;
    out.data = apply_mask(sino.data, mask);
    return out;
}

void save_mask(const std::string& stem, const Mask& mask) {
    Mat m(mask.rows, mask.cols);
    for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = mask.data[i];
    io::HeaderFields fields{
        {"kind", "mask"},
        {"mask_kind", to_string(mask.kind)},
        {"n_angles", std::to_string(mask.rows)},
        {"n_detectors", std::to_string(mask.cols)},
    };
    io::write_mat(stem, m, fields);
}

void save_mask_pgm(const std::string& path, const Mask& mask) {
    io::write_pgm8_binary(path, mask.rows, mask.cols, mask.data.data());
}

VarianceReport variance_inflation_check(const std::vector<Mat>& samples, const MaskSpec& family,
                                        int trials, uint64_t rng_seed, MaskValueModel model) {
    if (samples.empty()) throw ArgumentError("variance_inflation_check: empty sample set");
    if (trials < 1) throw ArgumentError("variance_inflation_check: trials must be >= 1");
    const int n = static_cast<int>(samples.size());
    const Mat& first = samples.front();
    for (const Mat& s : samples)
        if (!s.same_shape(first)) throw ArgumentError("variance_inflation_check: sample shapes differ");
    const size_t d = first.size();
    if (d == 0) throw ArgumentError("variance_inflation_check: empty samples");

    // Corpus mean and raw variance (scalar: mean over pixels of the
    // per-pixel population variance).
    Mat mu(first.rows, first.cols);
    for (const Mat& s : samples)
        for (size_t i = 0; i < d; ++i) mu.v[i] += s.v[i];
    for (double& x : mu.v) x /= n;
    double var_raw = 0.0;
    for (const Mat& s : samples)
        for (size_t i = 0; i < d; ++i) {
            const double dv = s.v[i] - mu.v[i];
            var_raw += dv * dv;
        }
    var_raw /= static_cast<double>(n) * d;

    std::vector<Mat> masked(n);
    double sum_var = 0.0, sum_var2 = 0.0;
    double sum_f = 0.0, sum_f2 = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        // x_M per sample under a fresh mask draw.
        Mat mu_m(first.rows, first.cols);
        for (int i = 0; i < n; ++i) {
            const uint64_t mask_seed = derive_seed(rng_seed, 0x76696e66ULL, static_cast<uint64_t>(trial),
                                                   static_cast<uint64_t>(i)); // "vinf"
            Mat xm = samples[i];
            if (model == MaskValueModel::binary01) {
                MaskSpec spec = family;
                spec.rng_seed = mask_seed;
                const Mask mk = generate_mask(spec, first.rows, first.cols);
                for (size_t p = 0; p < d; ++p) xm.v[p] *= mk.data[p];
            } else {
                // zero-mean i.i.d. {-1,+1} test masks: the idealized setting in
                // which the cross term has expectation exactly zero
                Rng rng(derive_seed(mask_seed, 0x706d31ULL)); // "pm1"
                for (size_t p = 0; p < d; ++p) xm.v[p] *= (rng.next_u64() & 1) ? 1.0 : -1.0;
            }
            for (size_t p = 0; p < d; ++p) mu_m.v[p] += xm.v[p];
            masked[i] = std::move(xm);
        }
        for (double& x : mu_m.v) x /= n;

        double var_t = 0.0, f_t = 0.0;
        for (int i = 0; i < n; ++i) {
            for (size_t p = 0; p < d; ++p) {
                const double a = samples[i].v[p] - mu.v[p];
                const double b = masked[i].v[p] - mu_m.v[p];
                var_t += (a + b) * (a + b);
                f_t += 2.0 * a * b;
            }
        }
        var_t /= static_cast<double>(n) * d;
        f_t /= static_cast<double>(n) * d;
        sum_var += var_t;
        sum_var2 += var_t * var_t;
        sum_f += f_t;
        sum_f2 += f_t * f_t;
    }

    VarianceReport rep;
    rep.var_raw = var_raw;
    rep.var_perturbed = sum_var / trials;
    rep.cross_term_mean = sum_f / trials;
    const double f_var = std::max(0.0, sum_f2 / trials - rep.cross_term_mean * rep.cross_term_mean);
    rep.cross_term_stderr = trials > 1 ? std::sqrt(f_var / (trials - 1)) : 0.0;
    const double v_var = std::max(0.0, sum_var2 / trials - rep.var_perturbed * rep.var_perturbed);
    const double v_stderr = trials > 1 ? std::sqrt(v_var / (trials - 1)) : 0.0;
    rep.inflated = rep.var_perturbed >= var_raw - 3.0 * v_stderr;
    return rep;
}

} // namespace swarm
