// swarm: sparse-view CT reconstruction with sinogram-domain diffusion priors.
// Subcommands: simulate | train | reconstruct | evaluate | check

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swarm/config.hpp"
#include "swarm/errors.hpp"
#include "swarm/io.hpp"
#include "swarm/rng.hpp"
#include "swarm/masks.hpp"
#include "swarm/metrics.hpp"
#include "swarm/phantoms.hpp"
#include "swarm/recon.hpp"
#include "swarm/score.hpp"
#include "swarm/sde.hpp"
#include "swarm/tomo.hpp"
#include "swarm/wavelet.hpp"

namespace fs = std::filesystem;
using namespace swarm;

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, x);
    return buf;
}

std::string item_stem(int idx, const char* kind) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "item%03d_%s", idx, kind);
    return buf;
}

struct Pipeline {
    RunConfig cfg;
    std::string out_root;

    std::string sim_dir() const { return out_root + "/sim"; }
    std::string ckpt_dir() const { return out_root + "/ckpt"; }
    std::string recon_dir(const std::string& mode, int views) const {
        return out_root + "/recon/" + mode + "_v" + std::to_string(views);
    }
    std::string eval_dir() const { return out_root + "/eval"; }

    Geometry geometry() const {
        return default_geometry(cfg.get_int("geometry.image_size"), cfg.get_int("geometry.n_angles"),
                                cfg.get_int("geometry.n_detectors"),
                                cfg.get_double("geometry.detector_spacing"));
    }

    MaskSpec mask_family() const {
        MaskSpec spec;
        const std::string kind = cfg.get("mask.kind");
        if (kind != "any") spec.kind = mask_kind_from_string(kind);
        spec.circle_count = cfg.get_int("mask.circle_count");
        spec.circle_radius = cfg.get_double("mask.circle_radius");
        spec.strip_denominator = cfg.get_int("mask.strip_denominator");
        spec.sparse_view_choices = cfg.get_int_list("mask.sparse_view_choices");
        return spec;
    }

    uint64_t root_seed() const { return static_cast<uint64_t>(cfg.get_int("seeds.root")); }

    NoiseSchedule schedule(double data_max_abs, int override_steps = 0) const {
        const double sigma_min = cfg.get_double("schedule.sigma_min");
        const std::string smax = cfg.get("schedule.sigma_max");
        double sigma_max;
        if (smax == "auto") {
            if (!(data_max_abs > 0.0))
                throw ConfigError("schedule.sigma_max is auto but no data scale is available");
            sigma_max = 50.0 * data_max_abs;
        } else {
            sigma_max = std::stod(smax);
        }
        int steps = override_steps > 0 ? override_steps : cfg.get_int("schedule.n_steps");
        return NoiseSchedule::geometric(sigma_min, sigma_max, steps);
    }

    LangevinConfig langevin() const {
        LangevinConfig lv;
        lv.snr = cfg.get_double("langevin.snr");
        lv.n_corrector_steps = cfg.get_int("langevin.n_corrector_steps");
        return lv;
    }

    nn::ArchDescriptor arch() const {
        nn::ArchDescriptor a;
        a.base_channels = cfg.get_int("train.base_channels");
        a.channel_mult = cfg.get_int_list("train.channel_mult");
        a.emb_dim = cfg.get_int("train.emb_dim");
        a.fourier_feats = cfg.get_int("train.fourier_feats");
        return a;
    }
};

struct ManifestEntry {
    int index;
    std::string kind;
    std::string stem;
    uint64_t seed;
};

std::vector<ManifestEntry> read_manifest(const std::string& sim_dir) {
    const std::string text = io::read_text_file(sim_dir + "/manifest.txt");
    std::vector<ManifestEntry> entries;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ManifestEntry e;
        std::istringstream ls(line);
        if (!(ls >> e.index >> e.kind >> e.stem >> e.seed))
            throw IoError("malformed manifest line: " + line);
        entries.push_back(e);
    }
    return entries;
}

int manifest_item_count(const std::vector<ManifestEntry>& entries) {
    int mx = -1;
    for (const auto& e : entries) mx = std::max(mx, e.index);
    return mx + 1;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Pipeline& p) {
    const Geometry geo = p.geometry();
    const int count = p.cfg.get_int("simulate.count");
    const int size = p.cfg.get_int("geometry.image_size");
    const int kept = p.cfg.get_int("simulate.kept_views");
    const double noise = p.cfg.get_double("simulate.noise_sigma");
    const bool pgm = p.cfg.get_bool("simulate.export_pgm");
    const uint64_t root = p.root_seed();

    fs::create_directories(p.sim_dir());

    PhantomSpec pspec;
    pspec.kind = phantom_kind_from_string(p.cfg.get("simulate.phantom_kind"));
    pspec.size = size;
    pspec.count = count;
    pspec.rng_seed = derive_seed(root, 0x73696d70ULL); // "simp"
    const std::vector<Mat> phantoms = make_phantoms(pspec);

    const SamplingOperator op = SamplingOperator::uniform(geo.n_angles, kept);
    const MaskSpec family = p.mask_family();

    std::string manifest;
    for (int i = 0; i < count; ++i) {
        const uint64_t item_seed = derive_seed(pspec.rng_seed, 0x7068616eULL, i);
        const std::string ph_stem = item_stem(i, "phantom");
        save_image(p.sim_dir() + "/" + ph_stem, phantoms[i]);
        manifest += std::to_string(i) + " phantom " + ph_stem + " " + std::to_string(item_seed) + "\n";

        Sinogram full = forward_project(phantoms[i], geo);
        const uint64_t noise_seed = derive_seed(root, 0x73696d6eULL, i); // "simn"
        if (noise > 0.0) full = add_noise(full, noise, noise_seed);
        const std::string full_stem = item_stem(i, "sino_full");
        save_sinogram(p.sim_dir() + "/" + full_stem, full);
        manifest += std::to_string(i) + " sino_full " + full_stem + " " + std::to_string(noise_seed) + "\n";

        const Sinogram sparse = subsample_zeroed(full, op);
        const std::string sparse_stem = item_stem(i, "sino_sparse");
        save_sinogram(p.sim_dir() + "/" + sparse_stem, sparse);
        manifest += std::to_string(i) + " sino_sparse " + sparse_stem + " " + std::to_string(noise_seed) + "\n";

        MaskSpec mspec = family;
        mspec.rng_seed = derive_seed(root, 0x73696d6dULL, i); // "simm"
        const Mask mask = generate_mask(mspec, geo.n_angles, geo.n_detectors);
        const std::string mask_stem = item_stem(i, "mask");
        save_mask(p.sim_dir() + "/" + mask_stem, mask);
        manifest += std::to_string(i) + " mask " + mask_stem + " " + std::to_string(mspec.rng_seed) + "\n";

        if (pgm) {
            io::write_pgm16(p.sim_dir() + "/" + ph_stem + ".pgm", phantoms[i]);
            io::write_pgm16(p.sim_dir() + "/" + full_stem + ".pgm", full.data);
            save_mask_pgm(p.sim_dir() + "/" + mask_stem + ".pgm", mask);
        }
    }
    io::write_text_file(p.sim_dir() + "/manifest.txt", manifest);
    std::printf("simulate: wrote %d items (%d artifacts) under %s\n", count, count * 4,
                p.sim_dir().c_str());
    return 0;
}

// ------------------------------------------------------------------- train

std::vector<Mat> load_corpus(const Pipeline& p) {
    const auto entries = read_manifest(p.sim_dir());
    std::vector<Mat> sinos;
    for (const auto& e : entries)
        if (e.kind == "sino_full") sinos.push_back(load_sinogram(p.sim_dir() + "/" + e.stem).data);
    if (sinos.empty()) throw IoError("no full-view sinograms in " + p.sim_dir());
    return sinos;
}

int cmd_train(const Pipeline& p, const std::string& model) {
    if (model != "srm" && model != "shd") throw ArgumentError("train: model must be srm or shd");
    const std::vector<Mat> corpus = load_corpus(p);
    double data_max = 0.0;
    for (const Mat& m : corpus) data_max = std::max(data_max, max_abs(m));
    const NoiseSchedule sched = p.schedule(data_max);

    TrainConfig tc;
    tc.learning_rate = p.cfg.get_double("train.learning_rate");
    tc.batch_size = p.cfg.get_int("train.batch_size");
    tc.n_iterations = p.cfg.get_int("train.n_iterations");
    tc.ema_decay = p.cfg.get_double("train.ema_decay");
    tc.rng_seed = derive_seed(p.root_seed(), 0x7472616eULL, model == "srm" ? 1 : 2); // "tran"

    std::string log;
    auto logger = [&](const TrainLogEntry& e) {
        log += std::to_string(e.iteration) + " " + fmt("%.8g", e.loss) + " " + e.tag + " " +
               fmt("%.3f", e.wall_ms) + "\n";
    };

    ScoreModelParams params;
    if (model == "srm") {
        params = train_srm(corpus, p.mask_family(), sched, tc, p.arch(), logger);
    } else {
        params = train_shd(corpus, sched, tc, p.arch(), logger);
    }

    fs::create_directories(p.ckpt_dir());
    const std::string ckpt = p.ckpt_dir() + "/" + model + ".ckpt";
    save_checkpoint(ckpt, params);
    io::write_text_file(p.ckpt_dir() + "/" + model + "_train_log.txt", log);
    std::printf("train: %s checkpoint at %s (%d iterations, %zu params, data_scale %.4g)\n",
                model.c_str(), ckpt.c_str(), tc.n_iterations, params.weights.size(),
                params.data_scale);
    return 0;
}

// ------------------------------------------------------------- reconstruct

ScoreModelParams load_ckpt_checked(const std::string& path, ModelFamily expect) {
    ScoreModelParams params = load_checkpoint(path);
    if (params.family != expect)
        throw ConfigError("checkpoint " + path + " has family '" + to_string(params.family) +
                          "', expected '" + to_string(expect) + "'");
    return params;
}

int cmd_reconstruct(const Pipeline& p) {
    const ReconMode mode = recon_mode_from_string(p.cfg.get("recon.mode"));
    const int views = p.cfg.get_int("recon.kept_views");
    const int size = p.cfg.get_int("geometry.image_size");

    std::string srm_path = p.cfg.get("recon.srm_ckpt");
    if (srm_path.empty()) srm_path = p.ckpt_dir() + "/srm.ckpt";
    std::string shd_path = p.cfg.get("recon.shd_ckpt");
    if (shd_path.empty()) shd_path = p.ckpt_dir() + "/shd.ckpt";

    std::unique_ptr<ScoreModelParams> srm, shd;
    if (mode != ReconMode::shd_only)
        srm = std::make_unique<ScoreModelParams>(load_ckpt_checked(srm_path, ModelFamily::srm));
    if (mode != ReconMode::srm_only)
        shd = std::make_unique<ScoreModelParams>(load_ckpt_checked(shd_path, ModelFamily::shd));

    // schedule: explicit sigma_max wins, otherwise the checkpoints' value
    const ScoreModelParams* meta = srm ? srm.get() : shd.get();
    if (srm && shd && srm->sigma_max > 0 && shd->sigma_max > 0) {
        const double ratio = srm->sigma_max / shd->sigma_max;
        if (ratio < 0.5 || ratio > 2.0)
            throw ConfigError("srm/shd checkpoints were trained with incompatible schedules");
    }
    const int recon_steps = p.cfg.get_int("recon.n_steps");
    NoiseSchedule sched = [&] {
        if (p.cfg.get("schedule.sigma_max") == "auto") {
            if (!(meta->sigma_max > 0))
                throw ConfigError("checkpoint carries no schedule and schedule.sigma_max is auto");
            return NoiseSchedule::geometric(p.cfg.get_double("schedule.sigma_min"), meta->sigma_max,
                                            recon_steps > 0 ? recon_steps
                                                            : p.cfg.get_int("schedule.n_steps"));
        }
        return p.schedule(0.0, recon_steps);
    }();

    std::unique_ptr<NetScore> srm_score, shd_score;
    if (srm) srm_score = std::make_unique<NetScore>(*srm, sched);
    if (shd) shd_score = std::make_unique<NetScore>(*shd, sched);

    const auto entries = read_manifest(p.sim_dir());
    const int n_items = manifest_item_count(entries);
    std::vector<int> items;
    if (p.cfg.get("recon.items") == "all") {
        for (int i = 0; i < n_items; ++i) items.push_back(i);
    } else {
        items = p.cfg.get_int_list("recon.items");
    }

    const std::string dir = p.recon_dir(to_string(mode), views);
    fs::create_directories(dir);

    for (int idx : items) {
        if (idx < 0 || idx >= n_items)
            throw ArgumentError("recon.items: index " + std::to_string(idx) + " out of range");
        const Sinogram full = load_sinogram(p.sim_dir() + "/" + item_stem(idx, "sino_full"));
        const SamplingOperator op = SamplingOperator::uniform(full.geo.n_angles, views);
        const Sinogram y_sparse = subsample_zeroed(full, op);

        ReconConfig rc;
        rc.schedule = sched;
        rc.langevin = p.langevin();
        rc.sampling = op;
        rc.mode = mode;
        rc.image_size = size;
        rc.rng_seed = derive_seed(p.root_seed(), 0x7265636eULL, static_cast<uint64_t>(views),
                                  static_cast<uint64_t>(idx)); // "recn"
        rc.snapshot_every = p.cfg.get_int("recon.snapshot_every");
        if (rc.snapshot_every > 0) rc.snapshot_dir = dir + "/" + item_stem(idx, "snapshots");
        rc.merge_every_iteration = p.cfg.get_bool("recon.merge_every_iteration");
        rc.fbp_filter = fbp_filter_from_string(p.cfg.get("recon.fbp_filter"));
        rc.srm_score = srm_score.get();
        rc.shd_score = shd_score.get();

        ReconResult res;
        switch (mode) {
            case ReconMode::swarm: res = swarm_reconstruct(y_sparse, rc); break;
            case ReconMode::srm_only: res = srm_only_reconstruct(y_sparse, rc); break;
            case ReconMode::shd_only: res = shd_only_reconstruct(y_sparse, rc); break;
        }
        save_image(dir + "/" + item_stem(idx, "image"), res.image);
        save_sinogram(dir + "/" + item_stem(idx, "sino"), res.sinogram);
        io::write_text_file(dir + "/" + item_stem(idx, "trace") + ".txt", res.trace.to_text());
        std::printf("reconstruct: %s item %d at %d views -> %s\n", to_string(mode), idx, views,
                    dir.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct CellStats {
    double psnr = 0.0, ssim = 0.0, mse = 0.0;
    int n = 0;
};

int cmd_evaluate(const Pipeline& p) {
    const auto entries = read_manifest(p.sim_dir());
    const int n_items = manifest_item_count(entries);
    if (n_items == 0) throw IoError("evaluate: empty corpus manifest");
    const std::vector<int> view_list = p.cfg.get_int_list("evaluate.view_counts");
    std::vector<std::string> methods;
    {
        std::istringstream in(p.cfg.get("evaluate.methods"));
        std::string m;
        while (std::getline(in, m, ',')) {
            if (!m.empty()) methods.push_back(m);
        }
    }
    const int size = p.cfg.get_int("geometry.image_size");

    std::vector<Mat> phantoms;
    std::vector<Sinogram> fulls;
    for (int i = 0; i < n_items; ++i) {
        phantoms.push_back(load_image(p.sim_dir() + "/" + item_stem(i, "phantom")));
        fulls.push_back(load_sinogram(p.sim_dir() + "/" + item_stem(i, "sino_full")));
    }

    std::map<std::pair<int, std::string>, CellStats> table;
    std::vector<std::string> missing;

    for (int views : view_list) {
        for (const std::string& method : methods) {
            CellStats cell;
            for (int i = 0; i < n_items; ++i) {
                Mat rec;
                if (method == "fbp") {
                    const SamplingOperator op = SamplingOperator::uniform(fulls[i].geo.n_angles, views);
                    rec = fbp(subsample_compact(fulls[i], op), size);
                } else {
                    const std::string stem =
                        p.recon_dir(method, views) + "/" + item_stem(i, "image");
                    if (!fs::exists(stem + ".raw")) {
                        missing.push_back(stem + ".raw");
                        continue;
                    }
                    rec = load_image(stem);
                }
                const double range = max_abs(phantoms[i]);
                const MetricReport r = evaluate(rec, phantoms[i], range > 0 ? range : 1.0);
                cell.psnr += r.psnr;
                cell.ssim += r.ssim;
                cell.mse += r.mse;
                ++cell.n;
            }
            if (cell.n > 0) {
                cell.psnr /= cell.n;
                cell.ssim /= cell.n;
                cell.mse /= cell.n;
            }
            table[{views, method}] = cell;
        }
    }

    // CSV + aligned text
    std::string csv = "views,method,psnr_db,ssim,mse_x1e3,items\n";
    std::string txt = "views  method     PSNR(dB)   SSIM     MSE(x1e-3)\n";
    for (int views : view_list)
        for (const std::string& method : methods) {
            const CellStats& c = table[{views, method}];
            csv += std::to_string(views) + "," + method + "," + fmt("%.4f", c.psnr) + "," +
                   fmt("%.6f", c.ssim) + "," + fmt("%.6f", c.mse * 1e3) + "," +
                   std::to_string(c.n) + "\n";
            char line[128];
            std::snprintf(line, sizeof(line), "%5d  %-9s  %8.3f  %7.4f  %10.4f\n", views,
                          method.c_str(), c.psnr, c.ssim, c.mse * 1e3);
            txt += line;
        }
    fs::create_directories(p.eval_dir());
    io::write_text_file(p.eval_dir() + "/evaluate.csv", csv);
    io::write_text_file(p.eval_dir() + "/evaluate.txt", txt);
    std::fputs(txt.c_str(), stdout);

    // optional profile lines for item 0
    const std::string prof = p.cfg.get("evaluate.profile");
    if (!prof.empty()) {
        const auto colon = prof.find(':');
        if (colon == std::string::npos)
            throw ArgumentError("evaluate.profile: expected axis:index, e.g. row:32");
        const Axis axis = prof.substr(0, colon) == "row" ? Axis::row : Axis::col;
        const int index = std::stoi(prof.substr(colon + 1));
        for (int views : view_list) {
            std::string pcsv = "position,reference";
            std::vector<std::vector<double>> cols;
            cols.push_back(profile_line(phantoms[0], axis, index));
            for (const std::string& method : methods) {
                Mat rec;
                if (method == "fbp") {
                    const SamplingOperator op =
                        SamplingOperator::uniform(fulls[0].geo.n_angles, views);
                    rec = fbp(subsample_compact(fulls[0], op), size);
                } else {
                    const std::string stem =
                        p.recon_dir(method, views) + "/" + item_stem(0, "image");
                    if (!fs::exists(stem + ".raw")) continue;
                    rec = load_image(stem);
                }
                pcsv += "," + method;
                cols.push_back(profile_line(rec, axis, index));
            }
            pcsv += "\n";
            for (size_t j = 0; j < cols[0].size(); ++j) {
                pcsv += std::to_string(j);
                for (const auto& col : cols) pcsv += "," + fmt("%.6g", col[j]);
                pcsv += "\n";
            }
            io::write_text_file(p.eval_dir() + "/profile_v" + std::to_string(views) + ".csv", pcsv);
        }
    }

    if (!missing.empty()) {
        std::fprintf(stderr, "evaluate: %zu missing reconstructions:\n", missing.size());
        for (const auto& m : missing) std::fprintf(stderr, "  %s\n", m.c_str());
        return 4;
    }

    if (p.cfg.get_bool("evaluate.check_monotone")) {
        for (const std::string& method : methods) {
            double prev = -1e300;
            for (int views : view_list) {
                const CellStats& c = table[{views, method}];
                if (c.n == 0) continue;
                if (c.psnr < prev) {
                    std::fprintf(stderr,
                                 "evaluate: PSNR not monotone for %s at %d views (%.3f < %.3f)\n",
                                 method.c_str(), views, c.psnr, prev);
                    return 1;
                }
                prev = c.psnr;
            }
        }
        std::printf("evaluate: PSNR monotone in view count for all methods\n");
    }
    return 0;
}

// ------------------------------------------------------------------- check

int cmd_check(const Pipeline& p) {
    const bool quick = p.cfg.get_bool("check.quick");
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        if (!ok) ++failures;
    };

    { // wavelet round trip + energy
        double worst = 0.0, worst_energy = 0.0;
        for (int i = 0; i < 100; ++i) {
            Rng rng(derive_seed(p.root_seed(), 0x77617665ULL, i));
            const int r = 2 * (8 + rng.uniform_int(25));
            const int c = 2 * (8 + rng.uniform_int(25));
            const Mat x = Rng(derive_seed(1, i)).gaussian_mat(r, c);
            const WaveletBands b = dwt2(x);
            worst = std::max(worst, max_abs_diff(idwt2(b), x));
            double e = 0.0, eb = 0.0;
            for (double v : x.v) e += v * v;
            for (const Mat* band : {&b.ll, &b.lh, &b.hl, &b.hh})
                for (double v : band->v) eb += v * v;
            worst_energy = std::max(worst_energy, std::fabs(e - eb) / e);
        }
        report("wavelet_round_trip", worst < 1e-10 && worst_energy < 1e-9,
               "max abs " + fmt("%.3g", worst) + ", energy rel " + fmt("%.3g", worst_energy));
    }

    { // variance inflation
        const int reps = quick ? 20 : 100;
        const int samples = quick ? 50 : 200;
        const int trials = quick ? 100 : 500;
        int inflated = 0;
        double worst_f = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<Mat> corpus;
            for (int i = 0; i < samples; ++i)
                corpus.push_back(Rng(derive_seed(p.root_seed(), 0x76636f72ULL, rep * 1000 + i))
                                     .gaussian_mat(32, 32));
            MaskSpec family;
            const VarianceReport rb = variance_inflation_check(
                corpus, family, trials, derive_seed(p.root_seed(), 0x76636872ULL, rep));
            inflated += rb.inflated;
            const VarianceReport rs =
                variance_inflation_check(corpus, family, trials,
                                         derive_seed(p.root_seed(), 0x76636873ULL, rep),
                                         MaskValueModel::symmetric_pm1);
            if (rs.cross_term_stderr > 0)
                worst_f = std::max(worst_f,
                                   std::fabs(rs.cross_term_mean) / rs.cross_term_stderr);
        }
        report("variance_inflation", inflated >= static_cast<int>(0.99 * reps) && worst_f <= 3.0,
               std::to_string(inflated) + "/" + std::to_string(reps) + " inflated, |F|/se max " +
                   fmt("%.2f", worst_f));
    }

    { // sampler vs analytic oracle
        const int runs = quick ? 300 : 2000;
        const int dim = quick ? 8 : 16;
        const int T = quick ? 60 : 200;
        const double mu_val = 0.5, s2 = 0.04;
        const NoiseSchedule sched = NoiseSchedule::geometric(0.01, 50.0, T);
        Mat mu(dim, dim, mu_val);
        const AnalyticGaussianScore score(mu, s2, sched);
        LangevinConfig lv;
        double sum = 0.0, sum2 = 0.0;
        long count = 0;
        for (int r = 0; r < runs; ++r) {
            Rng init(derive_seed(p.root_seed(), 0x73616d70ULL, r));
            Mat x = init.gaussian_mat(dim, dim, 50.0);
            for (int t = T - 1; t >= 1; --t) {
                x = predictor_step(x, t, score, sched, derive_seed(3, r, t));
                x = corrector_step(x, t - 1, score, lv, derive_seed(4, r, t));
            }
            for (double v : x.v) {
                sum += v;
                sum2 += v * v;
                ++count;
            }
        }
        const double m = sum / count;
        const double sd = std::sqrt(sum2 / count - m * m);
        const double target_sd = std::sqrt(s2 + 1e-4);
        const double mean_se = target_sd / std::sqrt(static_cast<double>(count));
        const bool ok = std::fabs(m - mu_val) < 4.0 * mean_se &&
                        std::fabs(sd - target_sd) / target_sd < (quick ? 0.07 : 0.05);
        report("sampler_vs_oracle", ok,
               "mean " + fmt("%.4f", m) + " target " + fmt("%.4f", mu_val) + ", sd " +
                   fmt("%.4f", sd) + " target " + fmt("%.4f", target_sd));
    }

    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-view CT reconstruction with sinogram diffusion priors"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string train_model;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (key: value with [sections])");
        sub->add_option("--set", overrides, "override, e.g. --set geometry.image_size=96");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate phantoms, sinograms and masks");
    add_common(sim);
    CLI::App* train = app.add_subcommand("train", "train a score model on the simulated corpus");
    train->add_option("model", train_model, "srm | shd")->required();
    add_common(train);
    CLI::App* rec = app.add_subcommand("reconstruct", "run the iterative reconstruction");
    add_common(rec);
    CLI::App* ev = app.add_subcommand("evaluate", "tabulate PSNR/SSIM/MSE against references");
    add_common(ev);
    CLI::App* chk = app.add_subcommand("check", "run the built-in property suites");
    add_common(chk);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
#ifdef _OPENMP
        if (const char* thr = std::getenv("SWARM_THREADS")) {
            const int n = std::atoi(thr);
            if (n > 0) omp_set_num_threads(n);
        }
#endif
        Pipeline p;
        if (!config_path.empty()) p.cfg = RunConfig::from_file(config_path);
        for (const std::string& kv : overrides) p.cfg.set_kv(kv);
        p.out_root = p.cfg.get("paths.out_root");
        if (const char* env_root = std::getenv("SWARM_OUT_ROOT")) p.out_root = env_root;

        if (sim->parsed()) return cmd_simulate(p);
        if (train->parsed()) return cmd_train(p, train_model);
        if (rec->parsed()) return cmd_reconstruct(p);
        if (ev->parsed()) return cmd_evaluate(p);
        if (chk->parsed()) return cmd_check(p);
        return 2;
    } catch (const ArgumentError& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
