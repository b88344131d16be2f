#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/mat.hpp"

namespace swarm {

/// Parallel-beam acquisition geometry. Angles are evenly spaced over
/// [angle_start, angle_start + angle_span). Detector offsets are centered:
/// bin k sits at (k - (n_detectors-1)/2) * detector_spacing, in pixel units.
struct Geometry {
    int n_angles = 0;
    int n_detectors = 0;
    double detector_spacing = 1.0;
    double angle_start = 0.0;
    double angle_span = 3.14159265358979323846;

    void validate() const;
    double angle(int i) const;
    bool operator==(const Geometry&) const = default;
};

/// Geometry whose detector span covers the image diagonal; n_detectors is
/// forced even so the sinogram's wavelet bands tile exactly.
Geometry default_geometry(int image_size, int n_angles, int n_detectors = 0,
                          double detector_spacing = 1.0);

struct Sinogram {
    Geometry geo;
    Mat data; // n_angles x n_detectors

    void validate() const;
};

/// Sparse-view sampling operator P: keeps the listed angle rows.
struct SamplingOperator {
    int full_angles = 0;
    std::vector<int> kept_indices;

    void validate() const;
    bool keeps(int angle_index) const;
    /// kept_count rows at uniform stride (round-robin when not divisible).
    static SamplingOperator uniform(int full_angles, int kept_count);
};

/// Ray-driven line integrals (Joseph-style bilinear interpolation along the
/// ray's dominant axis). Image must be square; the detector span must cover
/// the image diagonal.
Sinogram forward_project(const Mat& image, const Geometry& geo);

/// Exact adjoint of forward_project (unfiltered backprojection).
Mat back_project(const Sinogram& sino, int image_size);

/// Adds elementwise N(0, sigma^2) noise, reproducible from rng_seed.
Sinogram add_noise(const Sinogram& sino, double sigma, uint64_t rng_seed);

/// Row-selection view of P: a sinogram containing only the kept angle rows.
/// Requires uniformly strided kept indices so the result has an evenly
/// spaced geometry.
Sinogram subsample_compact(const Sinogram& sino, const SamplingOperator& op);

/// Row-mask view of P: full shape with non-kept rows zeroed (idempotent).
Sinogram subsample_zeroed(const Sinogram& sino, const SamplingOperator& op);

enum class FbpFilter { ram_lak, shepp_logan, hann };
FbpFilter fbp_filter_from_string(const std::string& name);

/// Frequency-domain ramp filtering per angle followed by backprojection.
/// The output is masked to the inscribed circle of the image grid.
Mat fbp(const Sinogram& sino, int image_size, FbpFilter filter = FbpFilter::ram_lak);

void save_sinogram(const std::string& stem, const Sinogram& sino);
Sinogram load_sinogram(const std::string& stem);
void save_image(const std::string& stem, const Mat& img);
Mat load_image(const std::string& stem);

} // namespace swarm
