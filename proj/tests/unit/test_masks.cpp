#include <doctest.h>

#include <cmath>
#include <numbers>

#include "swarm/masks.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

std::vector<Mat> random_corpus(int n, int rows, int cols, uint64_t seed) {
    std::vector<Mat> out;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        out.push_back(rng.gaussian_mat(rows, cols));
    }
    return out;
}

} // namespace

TEST_CASE("masks are binary and deterministic") {
    MaskSpec spec;
    spec.rng_seed = 17;
    const Mask a = generate_mask(spec, 64, 64);
    const Mask b = generate_mask(spec, 64, 64);
    CHECK(a.data == b.data);
    CHECK(a.kind == b.kind);
    for (uint8_t v : a.data) CHECK((v == 0 || v == 1));
}

TEST_CASE("unspecified kind is drawn roughly uniformly") {
    MaskSpec spec;
    int counts[3] = {0, 0, 0};
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
        spec.rng_seed = derive_seed(5, i);
        ++counts[static_cast<int>(generate_mask(spec, 16, 16).kind)];
    }
    for (int c : counts) CHECK(std::fabs(c / static_cast<double>(n) - 1.0 / 3) < 0.05);
}

TEST_CASE("sparse_view with kept == n_angles is all ones") {
    MaskSpec spec;
    spec.kind = MaskKind::sparse_view;
    spec.sparse_view_kept = 720;
    spec.rng_seed = 3;
    const Mask m = generate_mask(spec, 720, 32);
    for (uint8_t v : m.data) CHECK(v == 1);
}

TEST_CASE("sparse_view zeroes whole angle rows") {
    MaskSpec spec;
    spec.kind = MaskKind::sparse_view;
    spec.sparse_view_kept = 30;
    spec.rng_seed = 3;
    const Mask m = generate_mask(spec, 90, 46);
    int ones_rows = 0;
    for (int r = 0; r < 90; ++r) {
        bool all1 = true, all0 = true;
        for (int c = 0; c < 46; ++c) {
            all1 &= m.at(r, c) == 1;
            all0 &= m.at(r, c) == 0;
        }
        CHECK((all1 || all0));
        ones_rows += all1;
    }
    CHECK(ones_rows == 30);
}

TEST_CASE("circle zero-set area bounded by 3 pi r^2") {
    MaskSpec spec;
    spec.kind = MaskKind::circles;
    spec.rng_seed = 11;
    const Mask m = generate_mask(spec, 720, 720);
    size_t zeros = 0;
    for (uint8_t v : m.data) zeros += v == 0;
    CHECK(static_cast<double>(zeros) <= 3.0 * std::numbers::pi * 48.0 * 48.0 * 1.02);
    CHECK(zeros > 0);
}

TEST_CASE("strip zeroes exactly floor(W/5) consecutive columns") {
    MaskSpec spec;
    spec.kind = MaskKind::strip;
    spec.rng_seed = 23;
    const Mask m = generate_mask(spec, 8, 720);
    int first = -1, last = -1;
    for (int c = 0; c < 720; ++c) {
        bool zero_col = true;
        for (int r = 0; r < 8; ++r) zero_col &= m.at(r, c) == 0;
        if (zero_col) {
            if (first < 0) first = c;
            last = c;
        }
    }
    REQUIRE(first >= 0);
    CHECK(last - first + 1 == 144);
    for (int c = first; c <= last; ++c)
        for (int r = 0; r < 8; ++r) CHECK(m.at(r, c) == 0);
}

TEST_CASE("apply_mask identities and locality") {
    Rng rng(9);
    const Mat x = rng.gaussian_mat(12, 10);

    Mask ones;
    ones.rows = 12;
    ones.cols = 10;
    ones.data.assign(120, 1);
    CHECK(apply_mask(x, ones).v == x.v);

    Mask zeros = ones;
    zeros.data.assign(120, 0);
    CHECK(max_abs(apply_mask(x, zeros)) == 0.0);

    Mask row_killed = ones;
    for (int c = 0; c < 10; ++c) row_killed.data[static_cast<size_t>(4) * 10 + c] = 0;
    const Mat y = apply_mask(x, row_killed);
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 10; ++c) {
            if (r == 4)
                CHECK(y.at(r, c) == 0.0);
            else
                CHECK(y.at(r, c) == x.at(r, c));
        }

    // idempotence under the same binary mask
    const Mat yy = apply_mask(y, row_killed);
    CHECK(yy.v == y.v);

    Mask wrong;
    wrong.rows = 3;
    wrong.cols = 3;
    wrong.data.assign(9, 1);
    CHECK_THROWS_AS(apply_mask(x, wrong), ArgumentError);
}

TEST_CASE("variance check: degenerate equal samples with all-ones masks") {
    MaskSpec family;
    family.kind = MaskKind::sparse_view;
    family.sparse_view_kept = 1 << 20; // clamps to all rows kept
    std::vector<Mat> samples(5, Mat(8, 8, 3.0));
    const VarianceReport rep = variance_inflation_check(samples, family, 10, 1);
    CHECK(rep.var_raw == 0.0);
    CHECK(rep.var_perturbed == 0.0);
    CHECK(rep.inflated);
}

TEST_CASE("variance check: all-zero masks leave the variance unchanged") {
    MaskSpec family;
    family.kind = MaskKind::strip;
    family.strip_denominator = 1; // strip covers the whole width
    const std::vector<Mat> samples = random_corpus(20, 8, 8, 42);
    const VarianceReport rep = variance_inflation_check(samples, family, 10, 2);
    CHECK(rep.var_perturbed == doctest::Approx(rep.var_raw).epsilon(1e-12));
    CHECK(rep.cross_term_mean == doctest::Approx(0.0));
}

TEST_CASE("variance check: random masks inflate a random corpus") {
    MaskSpec family; // uniform kind draw
    const std::vector<Mat> samples = random_corpus(50, 16, 16, 7);
    const VarianceReport rep = variance_inflation_check(samples, family, 50, 3);
    CHECK(rep.inflated);
    CHECK(rep.var_perturbed > rep.var_raw);
}

TEST_CASE("variance check: symmetric test masks have zero-mean cross term") {
    MaskSpec family;
    const std::vector<Mat> samples = random_corpus(40, 12, 12, 21);
    const VarianceReport rep = variance_inflation_check(samples, family, 200, 4,
                                                        MaskValueModel::symmetric_pm1);
    CHECK(std::fabs(rep.cross_term_mean) <= 3.0 * rep.cross_term_stderr);
    CHECK(rep.inflated);
}

TEST_CASE("variance check argument errors") {
    MaskSpec family;
    CHECK_THROWS_AS(variance_inflation_check({}, family, 5, 1), ArgumentError);
    const std::vector<Mat> samples = random_corpus(3, 4, 4, 1);
    CHECK_THROWS_AS(variance_inflation_check(samples, family, 0, 1), ArgumentError);
}

TEST_CASE("mask kind strings round trip") {
    CHECK(mask_kind_from_string("sparse_view") == MaskKind::sparse_view);
    CHECK(mask_kind_from_string("circles") == MaskKind::circles);
    CHECK(mask_kind_from_string("strip") == MaskKind::strip);
    CHECK_THROWS_AS(mask_kind_from_string("nope"), ArgumentError);
}
