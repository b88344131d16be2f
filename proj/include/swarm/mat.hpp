#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm {

/// Dense row-major matrix of doubles. Used for images, sinograms, wavelet
/// bands and network activations alike.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw ArgumentError("Mat: negative dimensions");
    }

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline bool all_finite(const Mat& m) {
    for (double x : m.v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double max_abs(const Mat& m) {
    double a = 0.0;
    for (double x : m.v) a = std::max(a, std::fabs(x));
    return a;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw ArgumentError("max_abs_diff: shape mismatch");
    double d = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::fabs(a.v[i] - b.v[i]));
    return d;
}

inline double frob_norm(const Mat& m) {
    double s = 0.0;
    for (double x : m.v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw ArgumentError("dot: shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s;
}

inline double mean(const Mat& m) {
    if (m.empty()) throw ArgumentError("mean: empty matrix");
    double s = 0.0;
    for (double x : m.v) s += x;
    return s / static_cast<double>(m.v.size());
}

} // namespace swarm
