#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/mat.hpp"

namespace swarm {

enum class PhantomKind { shepp_logan, random_ellipses, disks };
const char* to_string(PhantomKind kind);
PhantomKind phantom_kind_from_string(const std::string& name);

struct PhantomSpec {
    PhantomKind kind = PhantomKind::random_ellipses;
    int size = 64;
    uint64_t rng_seed = 0;
    int count = 1;
};

/// Standard 10-ellipse head phantom with intensities in [0,1].
Mat shepp_logan(int size);

/// 4-8 seeded random ellipses, composite intensity clipped to [0,1].
Mat random_ellipses(int size, uint64_t rng_seed);

/// Anti-aliased disk; center in pixel coordinates, radius in pixels.
Mat disk_phantom(int size, double center_x, double center_y, double radius, double value);

/// Deterministic corpus: item i is seeded from (spec.rng_seed, i).
std::vector<Mat> make_phantoms(const PhantomSpec& spec);

} // namespace swarm
