#include "swarm/tomo.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <mutex>
#include <numbers>

#include "swarm/errors.hpp"
#include "swarm/io.hpp"
#include "swarm/rng.hpp"

namespace swarm {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// FFTW plan creation is not thread-safe; execution on distinct plans is.
std::mutex g_fftw_mutex;

} // namespace

void Geometry::validate() const {
    if (n_angles < 1) throw ArgumentError("geometry: n_angles must be >= 1");
    if (n_detectors < 1) throw ArgumentError("geometry: n_detectors must be >= 1");
    if (!(detector_spacing > 0.0)) throw ArgumentError("geometry: detector_spacing must be > 0");
    if (!(angle_span > 0.0)) throw ArgumentError("geometry: angle_span must be > 0");
}

double Geometry::angle(int i) const { return angle_start + angle_span * i / n_angles; }

Geometry default_geometry(int image_size, int n_angles, int n_detectors, double detector_spacing) {
    if (image_size < 1) throw ArgumentError("default_geometry: image_size must be >= 1");
    if (!(detector_spacing > 0.0)) throw ArgumentError("default_geometry: detector_spacing must be > 0");
    Geometry g;
    g.n_angles = n_angles;
    g.detector_spacing = detector_spacing;
    if (n_detectors > 0) {
        g.n_detectors = n_detectors;
    } else {
        // even count so single-level wavelet bands of the sinogram tile exactly
        int nd = static_cast<int>(std::ceil(image_size * std::numbers::sqrt2 / detector_spacing));
        if (nd % 2 == 1) ++nd;
        g.n_detectors = nd;
    }
    g.validate();
    return g;
}

void Sinogram::validate() const {
    geo.validate();
    if (data.rows != geo.n_angles || data.cols != geo.n_detectors)
        throw ArgumentError("sinogram: data shape does not match geometry");
}

void SamplingOperator::validate() const {
    if (full_angles < 1) throw ArgumentError("sampling operator: full_angles must be >= 1");
    if (kept_indices.empty()) throw ArgumentError("sampling operator: kept_indices empty");
    int prev = -1;
    for (int k : kept_indices) {
        if (k < 0 || k >= full_angles) throw ArgumentError("sampling operator: index out of range");
        if (k <= prev) throw ArgumentError("sampling operator: indices must be strictly increasing");
        prev = k;
    }
}

bool SamplingOperator::keeps(int angle_index) const {
    return std::binary_search(kept_indices.begin(), kept_indices.end(), angle_index);
}

SamplingOperator SamplingOperator::uniform(int full_angles, int kept_count) {
    if (kept_count < 1 || kept_count > full_angles)
        throw ArgumentError("sampling operator: kept_count out of range");
    SamplingOperator op;
    op.full_angles = full_angles;
    op.kept_indices.reserve(kept_count);
    for (int i = 0; i < kept_count; ++i)
        op.kept_indices.push_back(static_cast<int>(static_cast<int64_t>(i) * full_angles / kept_count));
    op.validate();
    return op;
}

namespace {

struct RaySetup {
    double sin_a, cos_a;
    bool step_rows; // true: iterate image rows, interpolate along x
};

RaySetup ray_setup(const Geometry& geo, int angle_index) {
    const double a = geo.angle(angle_index);
    RaySetup s;
    s.sin_a = std::sin(a);
    s.cos_a = std::cos(a);
    s.step_rows = std::fabs(s.cos_a) >= std::fabs(s.sin_a);
    return s;
}

} // namespace

Sinogram forward_project(const Mat& image, const Geometry& geo) {
    geo.validate();
    if (image.rows != image.cols || image.rows < 1)
        throw ArgumentError("forward_project: image must be square and non-empty");
    const int n = image.rows;
    const double diag = n * std::numbers::sqrt2;
    if (geo.n_detectors * geo.detector_spacing + 1e-9 < diag)
        throw ConfigError("forward_project: detector span smaller than image diagonal");

    Sinogram sino;
    sino.geo = geo;
    sino.data = Mat(geo.n_angles, geo.n_detectors);

    const double c = (n - 1) / 2.0;
    const double det_center = (geo.n_detectors - 1) / 2.0;

    for (int a = 0; a < geo.n_angles; ++a) {
        const RaySetup rs = ray_setup(geo, a);
        for (int k = 0; k < geo.n_detectors; ++k) {
            const double s = (k - det_center) * geo.detector_spacing;
            double acc = 0.0;
            if (rs.step_rows) {
                // x(y) = c + s/cos - tan * (y - c)
                const double x0c = c + s / rs.cos_a;
                const double slope = rs.sin_a / rs.cos_a;
                for (int y = 0; y < n; ++y) {
                    const double x = x0c - slope * (y - c);
                    const int xi = static_cast<int>(std::floor(x));
                    const double w1 = x - xi;
                    if (xi >= 0 && xi < n) acc += (1.0 - w1) * image.at(y, xi);
                    if (xi + 1 >= 0 && xi + 1 < n) acc += w1 * image.at(y, xi + 1);
                }
                acc /= std::fabs(rs.cos_a);
            } else {
                // y(x) = c + s/sin + cot * (c - x)
                const double y0c = c + s / rs.sin_a;
                const double slope = rs.cos_a / rs.sin_a;
                for (int x = 0; x < n; ++x) {
                    const double y = y0c + slope * (c - x);
                    const int yi = static_cast<int>(std::floor(y));
                    const double w1 = y - yi;
                    if (yi >= 0 && yi < n) acc += (1.0 - w1) * image.at(yi, x);
                    if (yi + 1 >= 0 && yi + 1 < n) acc += w1 * image.at(yi + 1, x);
                }
                acc /= std::fabs(rs.sin_a);
            }
            sino.data.at(a, k) = acc;
        }
    }
    return sino;
}

Mat back_project(const Sinogram& sino, int image_size) {
    sino.validate();
    if (image_size < 1) throw ArgumentError("back_project: image_size must be >= 1");
    const Geometry& geo = sino.geo;
    const int n = image_size;
    Mat img(n, n);

    const double c = (n - 1) / 2.0;
    const double det_center = (geo.n_detectors - 1) / 2.0;

    for (int a = 0; a < geo.n_angles; ++a) {
        const RaySetup rs = ray_setup(geo, a);
        for (int k = 0; k < geo.n_detectors; ++k) {
            const double q = sino.data.at(a, k);
            if (q == 0.0) continue;
            const double s = (k - det_center) * geo.detector_spacing;
            if (rs.step_rows) {
                const double x0c = c + s / rs.cos_a;
                const double slope = rs.sin_a / rs.cos_a;
                const double qw = q / std::fabs(rs.cos_a);
                for (int y = 0; y < n; ++y) {
                    const double x = x0c - slope * (y - c);
                    const int xi = static_cast<int>(std::floor(x));
                    const double w1 = x - xi;
                    if (xi >= 0 && xi < n) img.at(y, xi) += (1.0 - w1) * qw;
                    if (xi + 1 >= 0 && xi + 1 < n) img.at(y, xi + 1) += w1 * qw;
                }
            } else {
                const double y0c = c + s / rs.sin_a;
                const double slope = rs.cos_a / rs.sin_a;
                const double qw = q / std::fabs(rs.sin_a);
                for (int x = 0; x < n; ++x) {
                    const double y = y0c + slope * (c - x);
                    const int yi = static_cast<int>(std::floor(y));
                    const double w1 = y - yi;
                    if (yi >= 0 && yi < n) img.at(yi, x) += (1.0 - w1) * qw;
                    if (yi + 1 >= 0 && yi + 1 < n) img.at(yi + 1, x) += w1 * qw;
                }
            }
        }
    }
    return img;
}

Sinogram add_noise(const Sinogram& sino, double sigma, uint64_t rng_seed) {
    sino.validate();
    if (sigma < 0.0) throw ArgumentError("add_noise: sigma must be >= 0");
    Sinogram out = sino;
    if (sigma == 0.0) return out;
    Rng rng(derive_seed(rng_seed, 0x6e6f6973ULL)); // "nois"
    for (double& x : out.data.v) x += sigma * rng.gaussian();
    return out;
}

Sinogram subsample_compact(const Sinogram& sino, const SamplingOperator& op) {
    sino.validate();
    op.validate();
    if (op.full_angles != sino.geo.n_angles)
        throw ArgumentError("subsample: operator angle count does not match sinogram");
    const int m = static_cast<int>(op.kept_indices.size());
    int stride = 1;
    if (m > 1) {
        stride = op.kept_indices[1] - op.kept_indices[0];
        for (int i = 1; i < m; ++i)
            if (op.kept_indices[i] - op.kept_indices[i - 1] != stride)
                throw ArgumentError("subsample_compact: kept indices must be uniformly strided");
    }
    Sinogram out;
    out.geo = sino.geo;
    out.geo.n_angles = m;
    out.geo.angle_start = sino.geo.angle(op.kept_indices[0]);
    out.geo.angle_span = sino.geo.angle_span * stride * m / sino.geo.n_angles;
    out.data = Mat(m, sino.geo.n_detectors);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < sino.geo.n_detectors; ++k)
            out.data.at(i, k) = sino.data.at(op.kept_indices[i], k);
    return out;
}

Sinogram subsample_zeroed(const Sinogram& sino, const SamplingOperator& op) {
    sino.validate();
    op.validate();
    if (op.full_angles != sino.geo.n_angles)
        throw ArgumentError("subsample: operator angle count does not match sinogram");
    Sinogram out;
    out.geo = sino.geo;
    out.data = Mat(sino.data.rows, sino.data.cols);
    for (int k : op.kept_indices)
        for (int j = 0; j < sino.data.cols; ++j) out.data.at(k, j) = sino.data.at(k, j);
    return out;
}

FbpFilter fbp_filter_from_string(const std::string& name) {
    if (name == "ram-lak" || name == "ramlak" || name == "ramp") return FbpFilter::ram_lak;
    if (name == "shepp-logan") return FbpFilter::shepp_logan;
    if (name == "hann") return FbpFilter::hann;
    throw ArgumentError("unknown fbp filter: " + name);
}

Mat fbp(const Sinogram& sino, int image_size, FbpFilter filter) {
    sino.validate();
    if (!all_finite(sino.data)) throw ArgumentError("fbp: sinogram contains non-finite values");
    if (sino.geo.n_detectors < 2) throw ConfigError("fbp: n_detectors must be >= 2");
    if (image_size < 1) throw ArgumentError("fbp: image_size must be >= 1");

    const int nd = sino.geo.n_detectors;
    int pad = 8;
    while (pad < 2 * nd) pad *= 2;

    fftw_complex* buf;
    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        buf = fftw_alloc_complex(pad);
        fwd = fftw_plan_dft_1d(pad, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(pad, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    // Ramp response from the sampled real-space kernel (correct DC handling),
    // with optional apodization.
    std::vector<double> fw(pad);
    {
        for (int k = 0; k < pad; ++k) {
            buf[k][0] = 0.0;
            buf[k][1] = 0.0;
        }
        buf[0][0] = 0.25;
        for (int m = 1; m <= pad / 2; m += 2) {
            const double v = -1.0 / (kPi * kPi * m * m);
            buf[m][0] = v;
            buf[pad - m][0] = v;
        }
        fftw_execute(fwd);
        for (int k = 0; k < pad; ++k) {
            double w = buf[k][0] / sino.geo.detector_spacing;
            const double f = std::min(k, pad - k) / static_cast<double>(pad); // cycles/sample
            const double x = f / 0.5; // fraction of Nyquist
            switch (filter) {
                case FbpFilter::ram_lak: break;
                case FbpFilter::shepp_logan:
                    if (x > 0.0) w *= std::sin(kPi * x / 2.0) / (kPi * x / 2.0);
                    break;
                case FbpFilter::hann: w *= 0.5 * (1.0 + std::cos(kPi * x)); break;
            }
            fw[k] = w;
        }
    }

    Sinogram filtered;
    filtered.geo = sino.geo;
    filtered.data = Mat(sino.data.rows, sino.data.cols);
    for (int a = 0; a < sino.geo.n_angles; ++a) {
        for (int k = 0; k < pad; ++k) {
            buf[k][0] = k < nd ? sino.data.at(a, k) : 0.0;
            buf[k][1] = 0.0;
        }
        fftw_execute(fwd);
        for (int k = 0; k < pad; ++k) {
            buf[k][0] *= fw[k];
            buf[k][1] *= fw[k];
        }
        fftw_execute(inv);
        for (int k = 0; k < nd; ++k) filtered.data.at(a, k) = buf[k][0] / pad;
    }

    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
        fftw_free(buf);
    }

    // Pixel-driven backprojection of the filtered rows.
    const int n = image_size;
    Mat img(n, n);
    const double c = (n - 1) / 2.0;
    const double det_center = (sino.geo.n_detectors - 1) / 2.0;
    for (int a = 0; a < sino.geo.n_angles; ++a) {
        const double ang = sino.geo.angle(a);
        const double cos_a = std::cos(ang);
        const double sin_a = std::sin(ang);
        const double* q = &filtered.data.v[static_cast<size_t>(a) * nd];
        for (int y = 0; y < n; ++y) {
            const double sy = (y - c) * sin_a;
            double* row = &img.v[static_cast<size_t>(y) * n];
            for (int x = 0; x < n; ++x) {
                const double s = (x - c) * cos_a + sy;
                const double k = s / sino.geo.detector_spacing + det_center;
                const int k0 = static_cast<int>(std::floor(k));
                const double w = k - k0;
                double v = 0.0;
                if (k0 >= 0 && k0 < nd) v += (1.0 - w) * q[k0];
                if (k0 + 1 >= 0 && k0 + 1 < nd) v += w * q[k0 + 1];
                row[x] += v;
            }
        }
    }
    const double scale = sino.geo.angle_span / sino.geo.n_angles;
    const double r2 = (n / 2.0) * (n / 2.0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
            img.at(y, x) = d2 <= r2 ? img.at(y, x) * scale : 0.0;
        }
    return img;
}

void save_sinogram(const std::string& stem, const Sinogram& sino) {
    sino.validate();
    io::HeaderFields fields{
        {"kind", "sinogram"},
        {"n_angles", std::to_string(sino.geo.n_angles)},
        {"n_detectors", std::to_string(sino.geo.n_detectors)},
        {"detector_spacing", fmt_g17(sino.geo.detector_spacing)},
        {"angle_start", fmt_g17(sino.geo.angle_start)},
        {"angle_span", fmt_g17(sino.geo.angle_span)},
    };
    io::write_mat(stem, sino.data, fields);
}

Sinogram load_sinogram(const std::string& stem) {
    io::Header h;
    Mat data = io::read_mat(stem, &h);
    Sinogram sino;
    sino.geo.n_angles = data.rows;
    sino.geo.n_detectors = data.cols;
    if (h.has("detector_spacing")) sino.geo.detector_spacing = h.get_double("detector_spacing");
    if (h.has("angle_start")) sino.geo.angle_start = h.get_double("angle_start");
    if (h.has("angle_span")) sino.geo.angle_span = h.get_double("angle_span");
    sino.data = std::move(data);
    sino.validate();
    return sino;
}

void save_image(const std::string& stem, const Mat& img) {
    io::HeaderFields fields{
        {"kind", "image"},
        {"width", std::to_string(img.cols)},
        {"height", std::to_string(img.rows)},
    };
    io::write_mat(stem, img, fields);
}

Mat load_image(const std::string& stem) { return io::read_mat(stem); }

} // namespace swarm
