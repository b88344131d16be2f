#include "swarm/wavelet.hpp"

#include <cmath>

#include "swarm/errors.hpp"
#include "swarm/rng.hpp"

namespace swarm {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Edge-replicates the last row/column so both dims are even.
Mat pad_to_even(const Mat& y) {
    const int r = y.rows + (y.rows % 2);
    const int c = y.cols + (y.cols % 2);
    if (r == y.rows && c == y.cols) return y;
    Mat p(r, c);
    for (int i = 0; i < r; ++i) {
        const int si = std::min(i, y.rows - 1);
        for (int j = 0; j < c; ++j) p.at(i, j) = y.at(si, std::min(j, y.cols - 1));
    }
    return p;
}

} // namespace

WaveletFamily wavelet_family_from_string(const std::string& name) {
    if (name == "haar") return WaveletFamily::haar;
    throw ArgumentError("unsupported wavelet family: " + name);
}

WaveletBands dwt2(const Mat& y, WaveletFamily family) {
    if (y.empty()) throw ArgumentError("dwt2: empty input");
    const Mat p = pad_to_even(y);
    const int hr = p.rows / 2;
    const int hc = p.cols / 2;

    // Filter along rows.
    Mat row_l(p.rows, hc), row_h(p.rows, hc);
    for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < hc; ++j) {
            const double a = p.at(i, 2 * j);
            const double b = p.at(i, 2 * j + 1);
            row_l.at(i, j) = (a + b) * kInvSqrt2;
            row_h.at(i, j) = (a - b) * kInvSqrt2;
        }

    // Filter along columns.
    WaveletBands out;
    out.family = family;
    out.parent_rows = y.rows;
    out.parent_cols = y.cols;
    out.ll = Mat(hr, hc);
    out.lh = Mat(hr, hc);
    out.hl = Mat(hr, hc);
    out.hh = Mat(hr, hc);
    for (int i = 0; i < hr; ++i)
        for (int j = 0; j < hc; ++j) {
            const double l0 = row_l.at(2 * i, j);
            const double l1 = row_l.at(2 * i + 1, j);
            const double h0 = row_h.at(2 * i, j);
            const double h1 = row_h.at(2 * i + 1, j);
            out.ll.at(i, j) = (l0 + l1) * kInvSqrt2;
            out.lh.at(i, j) = (l0 - l1) * kInvSqrt2;
            out.hl.at(i, j) = (h0 + h1) * kInvSqrt2;
            out.hh.at(i, j) = (h0 - h1) * kInvSqrt2;
        }
    return out;
}

Mat idwt2(const WaveletBands& bands) {
    const Mat& ll = bands.ll;
    if (ll.empty()) throw ArgumentError("idwt2: empty bands");
    if (!ll.same_shape(bands.lh) || !ll.same_shape(bands.hl) || !ll.same_shape(bands.hh))
        throw ArgumentError("idwt2: band shapes differ");
    const int hr = ll.rows;
    const int hc = ll.cols;
    const int pr = bands.parent_rows > 0 ? bands.parent_rows : 2 * hr;
    const int pc = bands.parent_cols > 0 ? bands.parent_cols : 2 * hc;
    if ((pr + 1) / 2 != hr || (pc + 1) / 2 != hc)
        throw ArgumentError("idwt2: parent shape inconsistent with band shape");

    // Invert the column stage.
    Mat row_l(2 * hr, hc), row_h(2 * hr, hc);
    for (int i = 0; i < hr; ++i)
        for (int j = 0; j < hc; ++j) {
            row_l.at(2 * i, j) = (ll.at(i, j) + bands.lh.at(i, j)) * kInvSqrt2;
            row_l.at(2 * i + 1, j) = (ll.at(i, j) - bands.lh.at(i, j)) * kInvSqrt2;
            row_h.at(2 * i, j) = (bands.hl.at(i, j) + bands.hh.at(i, j)) * kInvSqrt2;
            row_h.at(2 * i + 1, j) = (bands.hl.at(i, j) - bands.hh.at(i, j)) * kInvSqrt2;
        }

    // Invert the row stage and crop any padding.
    Mat y(pr, pc);
    for (int i = 0; i < pr; ++i)
        for (int j = 0; j < hc; ++j) {
            const double x0 = (row_l.at(i, j) + row_h.at(i, j)) * kInvSqrt2;
            const double x1 = (row_l.at(i, j) - row_h.at(i, j)) * kInvSqrt2;
            if (2 * j < pc) y.at(i, 2 * j) = x0;
            if (2 * j + 1 < pc) y.at(i, 2 * j + 1) = x1;
        }
    return y;
}

HighFrequencySet extract_hf(const Mat& y) {
    WaveletBands b = dwt2(y);
    HighFrequencySet hf;
    hf.parent_rows = b.parent_rows;
    hf.parent_cols = b.parent_cols;
    hf.bands[0] = std::move(b.lh);
    hf.bands[1] = std::move(b.hl);
    hf.bands[2] = std::move(b.hh);
    return hf;
}

SelectedBand select_random_hf(const HighFrequencySet& hfs, uint64_t rng_seed) {
    Rng rng(derive_seed(rng_seed, 0x68666265ULL)); // "hfbe"
    const int idx = rng.uniform_int(3);
    return SelectedBand{hfs.bands[idx], idx};
}

} // namespace swarm
