#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "swarm/metrics.hpp"
#include "swarm/phantoms.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

// Direct windowed SSIM, no separability tricks: the brute-force oracle.
double ssim_oracle(const Mat& a, const Mat& b, double range) {
    const int win = 11;
    const double sigma = 1.5;
    std::vector<double> w(static_cast<size_t>(win) * win);
    double sum = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double dy = i - 5, dx = j - 5;
            w[i * win + j] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            sum += w[i * win + j];
        }
    for (double& x : w) x /= sum;

    const double c1 = 0.0001 * range * range, c2 = 0.0009 * range * range;
    double acc = 0.0;
    int count = 0;
    for (int r = 0; r + win <= a.rows; ++r)
        for (int c = 0; c + win <= a.cols; ++c) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double wa = w[i * win + j];
                    const double va = a.at(r + i, c + j);
                    const double vb = b.at(r + i, c + j);
                    mx += wa * va;
                    my += wa * vb;
                    xx += wa * va * va;
                    yy += wa * vb * vb;
                    xy += wa * va * vb;
                }
            const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
            acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return acc / count;
}

} // namespace

TEST_CASE("identity comparison: mse 0, ssim exactly 1, psnr infinite") {
    const Mat ph = shepp_logan(32);
    const MetricReport r = evaluate(ph, ph, 1.0);
    CHECK(r.mse == 0.0);
    CHECK(r.ssim == 1.0);
    CHECK(std::isinf(r.psnr));
}

TEST_CASE("closed form: 0.1 offset against zero reference at range 1") {
    Mat zero(16, 16, 0.0), tenth(16, 16, 0.1);
    const MetricReport r = evaluate(tenth, zero, 1.0);
    CHECK(r.mse == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.psnr == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("psnr and mse stay algebraically consistent") {
    Rng rng(5);
    const Mat a = rng.gaussian_mat(24, 24);
    const Mat b = rng.gaussian_mat(24, 24);
    const MetricReport r = evaluate(a, b, 2.0);
    CHECK(std::fabs(r.psnr - 10.0 * std::log10(4.0 / r.mse)) < 1e-9);
}

TEST_CASE("ssim matches the brute-force oracle within 1e-6") {
    Rng rng(13);
    Mat a(32, 30), b(32, 30);
    for (size_t i = 0; i < a.v.size(); ++i) {
        a.v[i] = 0.5 + 0.2 * rng.gaussian();
        b.v[i] = a.v[i] + 0.05 * rng.gaussian();
    }
    const MetricReport r = evaluate(a, b, 1.0);
    CHECK(std::fabs(r.ssim - ssim_oracle(a, b, 1.0)) < 1e-6);
    CHECK(r.ssim < 1.0);
}

TEST_CASE("ssim symmetry") {
    Rng rng(29);
    const Mat a = rng.gaussian_mat(20, 20);
    const Mat b = rng.gaussian_mat(20, 20);
    const double ab = evaluate(a, b, 1.0).ssim;
    const double ba = evaluate(b, a, 1.0).ssim;
    CHECK(std::fabs(ab - ba) < 1e-12);
}

TEST_CASE("mse and psnr are invariant under a shared pixel permutation") {
    Rng rng(31);
    const Mat a = rng.gaussian_mat(16, 16);
    const Mat b = rng.gaussian_mat(16, 16);
    Mat ap = a, bp = b;
    // deterministic permutation: reverse order
    std::reverse(ap.v.begin(), ap.v.end());
    std::reverse(bp.v.begin(), bp.v.end());
    const MetricReport r1 = evaluate(a, b, 1.0);
    const MetricReport r2 = evaluate(ap, bp, 1.0);
    CHECK(r1.mse == doctest::Approx(r2.mse).epsilon(1e-12));
    CHECK(r1.psnr == doctest::Approx(r2.psnr).epsilon(1e-12));
}

TEST_CASE("evaluate argument errors") {
    CHECK_THROWS_AS(evaluate(Mat(8, 8), Mat(8, 9), 1.0), ArgumentError);
    CHECK_THROWS_AS(evaluate(Mat(16, 16), Mat(16, 16), 0.0), ArgumentError);
    CHECK_THROWS_AS(evaluate(Mat(8, 8), Mat(8, 8), 1.0), ArgumentError); // below window
}

TEST_CASE("profile lines") {
    Mat c(12, 12, 0.6);
    const std::vector<double> flat = profile_line(c, Axis::row, 4);
    REQUIRE(flat.size() == 12);
    for (double v : flat) CHECK(v == 0.6);

    const Mat ph = shepp_logan(32);
    CHECK(profile_line(ph, Axis::col, 16) == profile_line(Mat(ph), Axis::col, 16));
    CHECK_THROWS_AS(profile_line(ph, Axis::row, 32), ArgumentError);
    CHECK_THROWS_AS(profile_line(ph, Axis::col, -1), ArgumentError);
}

TEST_CASE("disk phantom profile plateau matches the diameter within 1 pixel") {
    const int n = 64;
    const double radius = 10.3;
    const double c = (n - 1) / 2.0;
    const Mat disk = disk_phantom(n, c, c, radius, 0.8);
    // the grid has no exact center row; scan the two middle rows
    int best = 0;
    for (int row : {31, 32}) {
        const std::vector<double> p = profile_line(disk, Axis::row, row);
        int above = 0;
        for (double v : p) above += v > 0.4;
        best = std::max(best, above);
    }
    CHECK(std::fabs(best - 2.0 * radius) <= 1.0);
}

TEST_CASE("phantom corpus determinism and distinctness") {
    PhantomSpec spec;
    spec.kind = PhantomKind::random_ellipses;
    spec.size = 32;
    spec.count = 40;
    spec.rng_seed = 77;
    const std::vector<Mat> a = make_phantoms(spec);
    const std::vector<Mat> b = make_phantoms(spec);
    REQUIRE(a.size() == 40);
    for (int i = 0; i < 40; ++i) CHECK(a[i].v == b[i].v);
    for (int i = 0; i < 40; ++i)
        for (int j = i + 1; j < 40; ++j) CHECK(max_abs_diff(a[i], a[j]) > 0.0);
}

TEST_CASE("shepp-logan phantom bounds and support") {
    const Mat ph = shepp_logan(64);
    double mx = 0.0;
    for (double v : ph.v) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mx = std::max(mx, v);
    }
    CHECK(mx > 0.0);
    CHECK(mx <= 1.0);
    // corners lie outside the skull ellipse
    CHECK(ph.at(0, 0) == 0.0);
    CHECK(ph.at(0, 63) == 0.0);
    CHECK(ph.at(63, 0) == 0.0);
    CHECK(ph.at(63, 63) == 0.0);
}
