#include <doctest.h>

#include "swarm/config.hpp"
#include "swarm/errors.hpp"

using namespace swarm;

TEST_CASE("defaults come from the schema") {
    RunConfig cfg;
    CHECK(cfg.get_int("geometry.image_size") == 64);
    CHECK(cfg.get("schedule.sigma_max") == "auto");
    CHECK(cfg.get_double("langevin.snr") == doctest::Approx(0.16));
    CHECK(cfg.get_bool("evaluate.check_monotone") == false);
    CHECK(cfg.get_int_list("evaluate.view_counts") == std::vector<int>{30, 60, 90, 120});
}

TEST_CASE("parsing sections, comments and whitespace") {
    const std::string text =
        "# corpus settings\n"
        "[geometry]\n"
        "image_size: 96\n"
        "n_angles: 120   # denser\n"
        "\n"
        "[seeds]\n"
        "root: 42\n";
    const RunConfig cfg = RunConfig::from_text(text);
    CHECK(cfg.get_int("geometry.image_size") == 96);
    CHECK(cfg.get_int("geometry.n_angles") == 120);
    CHECK(cfg.get_int("seeds.root") == 42);
    // untouched keys keep defaults
    CHECK(cfg.get_int("geometry.n_detectors") == 0);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(RunConfig::from_text("[geometry]\nimage_sz: 64\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("[geom]\nimage_size: 64\n"), ConfigError);
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.set("nope.nope", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.get("nope.nope"), ConfigError);
}

TEST_CASE("malformed lines are rejected with line numbers") {
    CHECK_THROWS_AS(RunConfig::from_text("image_size: 64\n"), ConfigError); // no section
    CHECK_THROWS_AS(RunConfig::from_text("[geometry\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("[geometry]\nimage_size 64\n"), ConfigError);
}

TEST_CASE("flag-style overrides win and validate") {
    RunConfig cfg = RunConfig::from_text("[geometry]\nimage_size: 96\n");
    cfg.set_kv("geometry.image_size=128");
    CHECK(cfg.get_int("geometry.image_size") == 128);
    CHECK_THROWS_AS(cfg.set_kv("geometry.image_size"), ConfigError);
    CHECK_THROWS_AS(cfg.set_kv("geometry.bogus=1"), ConfigError);
}

TEST_CASE("typed getters validate their input") {
    RunConfig cfg;
    cfg.set("geometry.image_size", "abc");
    CHECK_THROWS_AS(cfg.get_int("geometry.image_size"), ConfigError);
    cfg.set("langevin.snr", "0.16x");
    CHECK_THROWS_AS(cfg.get_double("langevin.snr"), ConfigError);
    cfg.set("simulate.export_pgm", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("simulate.export_pgm"), ConfigError);
    cfg.set("evaluate.view_counts", "30,x,90");
    CHECK_THROWS_AS(cfg.get_int_list("evaluate.view_counts"), ConfigError);
}
