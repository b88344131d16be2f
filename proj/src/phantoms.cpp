#include "swarm/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swarm/errors.hpp"
#include "swarm/rng.hpp"

namespace swarm {

const char* to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::shepp_logan: return "shepp_logan";
        case PhantomKind::random_ellipses: return "random_ellipses";
        case PhantomKind::disks: return "disks";
    }
    return "?";
}

PhantomKind phantom_kind_from_string(const std::string& name) {
    if (name == "shepp_logan") return PhantomKind::shepp_logan;
    if (name == "random_ellipses") return PhantomKind::random_ellipses;
    if (name == "disks") return PhantomKind::disks;
    throw ArgumentError("unknown phantom kind: " + name);
}

namespace {

struct Ellipse {
    double value, a, b, x0, y0, phi; // phi radians, unit square coords
};

constexpr int kSuper = 4; // supersampling per axis

// Renders additive ellipses over [-1,1]^2 (y up), clipped to [0,1].
Mat render_ellipses(int size, const std::vector<Ellipse>& es) {
    Mat img(size, size);
    const double half = size / 2.0;
    const double sub = 1.0 / kSuper;
    std::vector<double> cos_p(es.size()), sin_p(es.size());
    for (size_t e = 0; e < es.size(); ++e) {
        cos_p[e] = std::cos(es[e].phi);
        sin_p[e] = std::sin(es[e].phi);
    }
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            double acc = 0.0;
            for (int sy = 0; sy < kSuper; ++sy)
                for (int sx = 0; sx < kSuper; ++sx) {
                    const double u = (c + (sx + 0.5) * sub - half) / half;
                    const double v = (half - r - (sy + 0.5) * sub) / half;
                    double val = 0.0;
                    for (size_t e = 0; e < es.size(); ++e) {
                        const double dx = u - es[e].x0;
                        const double dy = v - es[e].y0;
                        const double xr = dx * cos_p[e] + dy * sin_p[e];
                        const double yr = -dx * sin_p[e] + dy * cos_p[e];
                        const double q = (xr / es[e].a) * (xr / es[e].a) +
                                         (yr / es[e].b) * (yr / es[e].b);
                        if (q <= 1.0) val += es[e].value;
                    }
                    acc += val;
                }
            img.at(r, c) = std::clamp(acc / (kSuper * kSuper), 0.0, 1.0);
        }
    return img;
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

} // namespace

Mat shepp_logan(int size) {
    if (size < 16) throw ArgumentError("shepp_logan: size must be >= 16");
    const std::vector<Ellipse> es = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.1100, 0.3100, 0.22, 0.0, deg(-18.0)},
        {-0.2, 0.1600, 0.4100, -0.22, 0.0, deg(18.0)},
        {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
        {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
        {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    };
    return render_ellipses(size, es);
}

Mat random_ellipses(int size, uint64_t rng_seed) {
    if (size < 16) throw ArgumentError("random_ellipses: size must be >= 16");
    Rng rng(derive_seed(rng_seed, 0x656c6c69ULL)); // "elli"
    std::vector<Ellipse> es;
    const int n = 4 + rng.uniform_int(5);

    // Body ellipse, then smaller internal structures.
    Ellipse body;
    body.value = 0.4 + 0.4 * rng.uniform();
    body.a = 0.55 + 0.25 * rng.uniform();
    body.b = 0.55 + 0.25 * rng.uniform();
    body.x0 = 0.1 * (rng.uniform() - 0.5);
    body.y0 = 0.1 * (rng.uniform() - 0.5);
    body.phi = std::numbers::pi * rng.uniform();
    es.push_back(body);

    for (int i = 1; i < n; ++i) {
        Ellipse e;
        e.a = 0.05 + 0.25 * rng.uniform();
        e.b = 0.05 + 0.25 * rng.uniform();
        for (int attempt = 0; attempt < 100; ++attempt) {
            e.x0 = 1.2 * (rng.uniform() - 0.5);
            e.y0 = 1.2 * (rng.uniform() - 0.5);
            if (std::hypot(e.x0, e.y0) + std::max(e.a, e.b) <= 0.88) break;
        }
        if (std::hypot(e.x0, e.y0) + std::max(e.a, e.b) > 0.88) {
            e.x0 = 0.0;
            e.y0 = 0.0;
        }
        e.phi = std::numbers::pi * rng.uniform();
        e.value = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.05 + 0.25 * rng.uniform());
        es.push_back(e);
    }
    return render_ellipses(size, es);
}

Mat disk_phantom(int size, double center_x, double center_y, double radius, double value) {
    if (size < 1) throw ArgumentError("disk_phantom: size must be >= 1");
    if (!(radius > 0.0)) throw ArgumentError("disk_phantom: radius must be > 0");
    Mat img(size, size);
    const double sub = 1.0 / kSuper;
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            int hits = 0;
            for (int sy = 0; sy < kSuper; ++sy)
                for (int sx = 0; sx < kSuper; ++sx) {
                    const double x = c + (sx + 0.5) * sub - 0.5;
                    const double y = r + (sy + 0.5) * sub - 0.5;
                    const double dx = x - center_x;
                    const double dy = y - center_y;
                    if (dx * dx + dy * dy <= radius * radius) ++hits;
                }
            img.at(r, c) = value * hits / (kSuper * kSuper);
        }
    return img;
}

std::vector<Mat> make_phantoms(const PhantomSpec& spec) {
    if (spec.size < 16) throw ArgumentError("make_phantoms: size must be >= 16");
    if (spec.count < 0) throw ArgumentError("make_phantoms: count must be >= 0");
    std::vector<Mat> out;
    out.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        const uint64_t seed = derive_seed(spec.rng_seed, 0x7068616eULL, i); // "phan"
        switch (spec.kind) {
            case PhantomKind::shepp_logan: out.push_back(shepp_logan(spec.size)); break;
            case PhantomKind::random_ellipses: out.push_back(random_ellipses(spec.size, seed)); break;
            case PhantomKind::disks: {
                Rng rng(derive_seed(seed, 0x6469736bULL)); // "disk"
                const double half = spec.size / 2.0;
                const double radius = (0.15 + 0.25 * rng.uniform()) * half;
                const double cx = (spec.size - 1) / 2.0 + 0.4 * half * (rng.uniform() - 0.5);
                const double cy = (spec.size - 1) / 2.0 + 0.4 * half * (rng.uniform() - 0.5);
                const double value = 0.5 + 0.5 * rng.uniform();
                out.push_back(disk_phantom(spec.size, cx, cy, radius, value));
                break;
            }
        }
    }
    return out;
}

} // namespace swarm
