#pragma once

#include <cstdint>
#include <string>

#include "swarm/mat.hpp"

namespace swarm {

enum class WaveletFamily { haar };
WaveletFamily wavelet_family_from_string(const std::string& name);

/// Single-level 2-D subbands. Rows are filtered first, then columns:
/// "lh" is low-pass along rows / high-pass along columns. Each band has
/// ceil(parent/2) extent; odd parents are edge-padded to even before
/// analysis and cropped back on synthesis.
struct WaveletBands {
    Mat ll, lh, hl, hh;
    int parent_rows = 0;
    int parent_cols = 0;
    WaveletFamily family = WaveletFamily::haar;
};

/// The three detail bands, indexed 0=lh, 1=hl, 2=hh.
struct HighFrequencySet {
    Mat bands[3];
    int parent_rows = 0;
    int parent_cols = 0;

    const Mat& lh() const { return bands[0]; }
    const Mat& hl() const { return bands[1]; }
    const Mat& hh() const { return bands[2]; }
};

/// Orthonormal single-level analysis; preserves energy for even dims.
WaveletBands dwt2(const Mat& y, WaveletFamily family = WaveletFamily::haar);

/// Exact inverse of dwt2 on its range.
Mat idwt2(const WaveletBands& bands);

/// Detail bands of dwt2(y); the LL band is left to the caller.
HighFrequencySet extract_hf(const Mat& y);

struct SelectedBand {
    Mat band;
    int index; // 0=lh, 1=hl, 2=hh
};

/// Uniform seeded choice among the three detail bands.
SelectedBand select_random_hf(const HighFrequencySet& hfs, uint64_t rng_seed);

} // namespace swarm
