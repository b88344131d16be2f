// End-to-end tests of the swarm binary. The executable path arrives through
// the SWARM_CLI_BIN environment variable set by ctest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/io.hpp"
#include "swarm/tomo.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
    const char* p = std::getenv("SWARM_CLI_BIN");
    REQUIRE(p != nullptr);
    return p;
}

struct Sandbox {
    fs::path dir;
    Sandbox(const char* name) {
        dir = fs::temp_directory_path() / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string out() const { return (dir / "out").string(); }
};

int run(const std::string& args) {
    const int rc = std::system(args.c_str());
    return WEXITSTATUS(rc);
}

// small, fast end-to-end configuration
std::string tiny_args(const Sandbox& sb) {
    return " --set paths.out_root=" + sb.out() +
           " --set geometry.image_size=32 --set geometry.n_angles=24"
           " --set simulate.count=3 --set simulate.kept_views=8"
           " --set train.n_iterations=4 --set train.batch_size=1"
           " --set train.base_channels=2 --set train.channel_mult=1,2"
           " --set train.emb_dim=4 --set train.fourier_feats=2"
           " --set schedule.n_steps=5 --set recon.kept_views=8"
           " --set recon.items=0 --set evaluate.view_counts=8,24"
           " --set evaluate.methods=fbp,swarm --set seeds.root=7";
}

std::string slurp(const std::string& path) { return swarm::io::read_text_file(path); }

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("simulate writes a complete, deterministic corpus") {
    Sandbox sb("swarm_cli_sim");
    const std::string cmd = cli_bin() + " simulate" + tiny_args(sb);
    REQUIRE(run(cmd) == 0);

    const std::string manifest = slurp(sb.out() + "/sim/manifest.txt");
    CHECK(count_lines(manifest) == 3 * 4);
    CHECK(fs::exists(sb.out() + "/sim/item000_phantom.raw"));
    CHECK(fs::exists(sb.out() + "/sim/item002_mask.hdr"));

    // byte-identical rerun
    const std::string sino_a = slurp(sb.out() + "/sim/item001_sino_full.raw");
    REQUIRE(run(cmd) == 0);
    const std::string sino_b = slurp(sb.out() + "/sim/item001_sino_full.raw");
    CHECK(sino_a == sino_b);
    CHECK(manifest == slurp(sb.out() + "/sim/manifest.txt"));
}

TEST_CASE("simulate with count=0 yields an empty manifest and exit 0") {
    Sandbox sb("swarm_cli_sim0");
    const std::string cmd = cli_bin() + " simulate" + tiny_args(sb) + " --set simulate.count=0";
    REQUIRE(run(cmd) == 0);
    CHECK(slurp(sb.out() + "/sim/manifest.txt").empty());
}

TEST_CASE("train writes checkpoints and per-iteration logs; zero iterations equal init") {
    Sandbox sb("swarm_cli_train");
    REQUIRE(run(cli_bin() + " simulate" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train srm" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train shd" + tiny_args(sb)) == 0);

    CHECK(fs::exists(sb.out() + "/ckpt/srm.ckpt"));
    CHECK(fs::exists(sb.out() + "/ckpt/shd.ckpt"));
    CHECK(count_lines(slurp(sb.out() + "/ckpt/srm_train_log.txt")) == 4);

    // n_iterations=0 reruns must be byte-identical (checkpoint == initialization)
    const std::string zero = tiny_args(sb) + " --set train.n_iterations=0";
    REQUIRE(run(cli_bin() + " train srm" + zero) == 0);
    const std::string a = slurp(sb.out() + "/ckpt/srm.ckpt");
    REQUIRE(run(cli_bin() + " train srm" + zero) == 0);
    CHECK(a == slurp(sb.out() + "/ckpt/srm.ckpt"));
    CHECK(count_lines(slurp(sb.out() + "/ckpt/srm_train_log.txt")) == 0);
}

TEST_CASE("reconstruct is byte-deterministic and leaves a clean trace") {
    Sandbox sb("swarm_cli_recon");
    REQUIRE(run(cli_bin() + " simulate" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train srm" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train shd" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " reconstruct" + tiny_args(sb)) == 0);

    const std::string dir = sb.out() + "/recon/swarm_v8";
    const std::string img_a = slurp(dir + "/item000_image.raw");
    const std::string sino_a = slurp(dir + "/item000_sino.raw");
    const std::string trace_a = slurp(dir + "/item000_trace.txt");

    // trace post-DC column must be all zeros
    std::istringstream in(trace_a);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(' ');
        const std::string post = line.substr(pos + 1);
        CHECK((post == "0" || post == "-"));
    }

    REQUIRE(run(cli_bin() + " reconstruct" + tiny_args(sb)) == 0);
    CHECK(img_a == slurp(dir + "/item000_image.raw"));
    CHECK(sino_a == slurp(dir + "/item000_sino.raw"));
    CHECK(trace_a == slurp(dir + "/item000_trace.txt"));
}

TEST_CASE("full-view reconstruction equals direct fbp (DC fixed point)") {
    Sandbox sb("swarm_cli_full");
    REQUIRE(run(cli_bin() + " simulate" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train srm" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train shd" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " reconstruct" + tiny_args(sb) + " --set recon.kept_views=24") == 0);

    using namespace swarm;
    const Sinogram full = load_sinogram(sb.out() + "/sim/item000_sino_full");
    const Mat direct = fbp(full, 32);
    const Mat rec = load_image(sb.out() + "/recon/swarm_v24/item000_image");
    // both stored as float32; compare at float precision
    CHECK(max_abs_diff(rec, direct) < 1e-5);
}

TEST_CASE("evaluate emits the views x methods table and enforces monotonicity") {
    Sandbox sb("swarm_cli_eval");
    REQUIRE(run(cli_bin() + " simulate" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train srm" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " train shd" + tiny_args(sb)) == 0);
    REQUIRE(run(cli_bin() + " reconstruct" + tiny_args(sb) + " --set recon.items=all") == 0);
    REQUIRE(run(cli_bin() + " reconstruct" + tiny_args(sb) +
                " --set recon.items=all --set recon.kept_views=24") == 0);

    // fbp-only evaluation with monotonicity check
    REQUIRE(run(cli_bin() + " evaluate" + tiny_args(sb) +
                " --set evaluate.methods=fbp --set evaluate.check_monotone=true") == 0);
    const std::string csv = slurp(sb.out() + "/eval/evaluate.csv");
    CHECK(count_lines(csv) == 1 + 2); // header + 2 view counts x 1 method
    CHECK(csv.find("8,fbp,") != std::string::npos);
    CHECK(csv.find("24,fbp,") != std::string::npos);

    // self-evaluation row sanity: reference against itself via profile export
    REQUIRE(run(cli_bin() + " evaluate" + tiny_args(sb) +
                " --set evaluate.methods=fbp,swarm --set evaluate.profile=row:16") == 0);
    CHECK(fs::exists(sb.out() + "/eval/profile_v8.csv"));

    // missing reconstructions are listed and exit nonzero
    const int rc = run(cli_bin() + " evaluate" + tiny_args(sb) +
                       " --set evaluate.methods=srm_only 2>/dev/null");
    CHECK(rc == 4);
}

TEST_CASE("config errors surface with distinct exit codes") {
    Sandbox sb("swarm_cli_err");
    // unknown config key -> 3
    CHECK(run(cli_bin() + " simulate --set geometry.bogus=1 2>/dev/null") == 3);
    // missing corpus -> 4
    CHECK(run(cli_bin() + " train srm" + tiny_args(sb) + " 2>/dev/null") == 4);
    // bad model name -> 2
    CHECK(run(cli_bin() + " train nope" + tiny_args(sb) + " 2>/dev/null") == 2);
}

TEST_CASE("check subcommand runs the quick property suites") {
    Sandbox sb("swarm_cli_check");
    REQUIRE(run(cli_bin() + " check --set seeds.root=3 --set paths.out_root=" + sb.out()) == 0);
}
