#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swarm/masks.hpp"
#include "swarm/metrics.hpp"
#include "swarm/phantoms.hpp"
#include "swarm/recon.hpp"
#include "swarm/score.hpp"
#include "swarm/sde.hpp"
#include "swarm/tomo.hpp"
#include "swarm/wavelet.hpp"

namespace py = pybind11;
using namespace swarm;

namespace {

using Arr = py::array_t<double, py::array::c_style | py::array::forcecast>;

Mat to_mat(const Arr& a) {
    const auto info = a.request();
    if (info.ndim != 2) throw py::value_error("expected a 2-D array");
    Mat m(static_cast<int>(info.shape[0]), static_cast<int>(info.shape[1]));
    const double* src = static_cast<const double*>(info.ptr);
    std::copy(src, src + m.size(), m.v.begin());
    return m;
}

py::array_t<double> from_mat(const Mat& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.v.begin(), m.v.end(), out.mutable_data());
    return out;
}

Geometry make_geometry(int image_size, int n_angles, int n_detectors, double detector_spacing) {
    return default_geometry(image_size, n_angles, n_detectors, detector_spacing);
}

Sinogram to_sino(const Arr& a, double detector_spacing) {
    Sinogram s;
    s.data = to_mat(a);
    s.geo.n_angles = s.data.rows;
    s.geo.n_detectors = s.data.cols;
    s.geo.detector_spacing = detector_spacing;
    return s;
}

SamplingOperator make_op(int full_angles, const std::vector<int>& kept) {
    SamplingOperator op;
    op.full_angles = full_angles;
    op.kept_indices = kept;
    op.validate();
    return op;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sparse-view CT reconstruction with sinogram diffusion priors";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // ---- phantoms ----
    m.def("shepp_logan", [](int size) { return from_mat(shepp_logan(size)); }, py::arg("size"));
    m.def(
        "random_ellipses",
        [](int size, uint64_t seed) { return from_mat(random_ellipses(size, seed)); },
        py::arg("size"), py::arg("seed"));
    m.def(
        "disk_phantom",
        [](int size, double cx, double cy, double radius, double value) {
            return from_mat(disk_phantom(size, cx, cy, radius, value));
        },
        py::arg("size"), py::arg("center_x"), py::arg("center_y"), py::arg("radius"),
        py::arg("value") = 1.0);

    // ---- tomography ----
    m.def(
        "forward_project",
        [](const Arr& image, int n_angles, int n_detectors, double detector_spacing) {
            const Mat img = to_mat(image);
            const Geometry geo = make_geometry(img.rows, n_angles, n_detectors, detector_spacing);
            return from_mat(forward_project(img, geo).data);
        },
        py::arg("image"), py::arg("n_angles"), py::arg("n_detectors") = 0,
        py::arg("detector_spacing") = 1.0);
    m.def(
        "fbp",
        [](const Arr& sinogram, int image_size, const std::string& filter, double detector_spacing,
           double angle_span) {
            Sinogram s = to_sino(sinogram, detector_spacing);
            s.geo.angle_span = angle_span;
            return from_mat(fbp(s, image_size, fbp_filter_from_string(filter)));
        },
        py::arg("sinogram"), py::arg("image_size"), py::arg("filter") = "ram-lak",
        py::arg("detector_spacing") = 1.0, py::arg("angle_span") = 3.14159265358979323846);
    m.def(
        "add_noise",
        [](const Arr& sinogram, double sigma, uint64_t seed) {
            return from_mat(add_noise(to_sino(sinogram, 1.0), sigma, seed).data);
        },
        py::arg("sinogram"), py::arg("sigma"), py::arg("seed"));
    m.def(
        "uniform_kept_indices",
        [](int full_angles, int kept_count) {
            return SamplingOperator::uniform(full_angles, kept_count).kept_indices;
        },
        py::arg("full_angles"), py::arg("kept_count"));
    m.def(
        "subsample_zeroed",
        [](const Arr& sinogram, const std::vector<int>& kept) {
            Sinogram s = to_sino(sinogram, 1.0);
            return from_mat(subsample_zeroed(s, make_op(s.geo.n_angles, kept)).data);
        },
        py::arg("sinogram"), py::arg("kept_indices"));

    // ---- masks ----
    m.def(
        "generate_mask",
        [](const std::string& kind, int rows, int cols, uint64_t seed) {
            MaskSpec spec;
            if (kind != "any") spec.kind = mask_kind_from_string(kind);
            spec.rng_seed = seed;
            const Mask mk = generate_mask(spec, rows, cols);
            py::array_t<uint8_t> out({mk.rows, mk.cols});
            std::copy(mk.data.begin(), mk.data.end(), out.mutable_data());
            return py::make_tuple(out, std::string(to_string(mk.kind)));
        },
        py::arg("kind"), py::arg("rows"), py::arg("cols"), py::arg("seed"));
    m.def(
        "apply_mask",
        [](const Arr& x, const py::array_t<uint8_t, py::array::c_style>& mask) {
            const Mat xm = to_mat(x);
            const auto info = mask.request();
            if (info.ndim != 2 || info.shape[0] != xm.rows || info.shape[1] != xm.cols)
                throw py::value_error("mask shape must match the data");
            Mask mk;
            mk.rows = xm.rows;
            mk.cols = xm.cols;
            const uint8_t* src = static_cast<const uint8_t*>(info.ptr);
            mk.data.assign(src, src + xm.size());
            return from_mat(apply_mask(xm, mk));
        },
        py::arg("x"), py::arg("mask"));

    // ---- wavelets ----
    m.def("dwt2", [](const Arr& y) {
        const WaveletBands b = dwt2(to_mat(y));
        return py::make_tuple(from_mat(b.ll), from_mat(b.lh), from_mat(b.hl), from_mat(b.hh));
    });
    m.def(
        "idwt2",
        [](const Arr& ll, const Arr& lh, const Arr& hl, const Arr& hh, int rows, int cols) {
            WaveletBands b;
            b.ll = to_mat(ll);
            b.lh = to_mat(lh);
            b.hl = to_mat(hl);
            b.hh = to_mat(hh);
            b.parent_rows = rows > 0 ? rows : 2 * b.ll.rows;
            b.parent_cols = cols > 0 ? cols : 2 * b.ll.cols;
            return from_mat(idwt2(b));
        },
        py::arg("ll"), py::arg("lh"), py::arg("hl"), py::arg("hh"), py::arg("rows") = 0,
        py::arg("cols") = 0);
    m.def("extract_hf", [](const Arr& y) {
        const HighFrequencySet hf = extract_hf(to_mat(y));
        return py::make_tuple(from_mat(hf.lh()), from_mat(hf.hl()), from_mat(hf.hh()));
    });

    // ---- metrics ----
    m.def(
        "evaluate_metrics",
        [](const Arr& recon, const Arr& reference, double data_range) {
            const MetricReport r = evaluate(to_mat(recon), to_mat(reference), data_range);
            return py::make_tuple(r.psnr, r.ssim, r.mse);
        },
        py::arg("recon"), py::arg("reference"), py::arg("data_range"));

    // ---- training and reconstruction ----
    py::class_<ScoreModelParams>(m, "ScoreModel")
        .def_property_readonly("family",
                               [](const ScoreModelParams& p) { return std::string(to_string(p.family)); })
        .def_property_readonly("n_params",
                               [](const ScoreModelParams& p) { return p.weights.size(); })
        .def_property_readonly("data_scale", [](const ScoreModelParams& p) { return p.data_scale; })
        .def("save", [](const ScoreModelParams& p, const std::string& path) {
            save_checkpoint(path, p);
        });
    m.def("load_score_model", &load_checkpoint, py::arg("path"));

    auto make_arch = [](int base_channels, const std::vector<int>& channel_mult, int emb_dim,
                        int fourier_feats) {
        nn::ArchDescriptor a;
        a.base_channels = base_channels;
        a.channel_mult = channel_mult;
        a.emb_dim = emb_dim;
        a.fourier_feats = fourier_feats;
        return a;
    };

    m.def(
        "train_srm",
        [make_arch](const std::vector<Arr>& sinograms, double sigma_min, double sigma_max,
                    int n_steps, double learning_rate, int batch_size, int n_iterations,
                    uint64_t seed, double ema_decay, int base_channels,
                    const std::vector<int>& channel_mult, int emb_dim, int fourier_feats) {
            std::vector<Mat> data;
            for (const Arr& a : sinograms) data.push_back(to_mat(a));
            const NoiseSchedule sched = NoiseSchedule::geometric(sigma_min, sigma_max, n_steps);
            TrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.n_iterations = n_iterations;
            cfg.rng_seed = seed;
            cfg.ema_decay = ema_decay;
            MaskSpec family;
            return train_srm(data, family, sched, cfg,
                             make_arch(base_channels, channel_mult, emb_dim, fourier_feats));
        },
        py::arg("sinograms"), py::arg("sigma_min") = 0.01, py::arg("sigma_max") = 50.0,
        py::arg("n_steps") = 200, py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 2,
        py::arg("n_iterations") = 100, py::arg("seed") = 0, py::arg("ema_decay") = 0.99,
        py::arg("base_channels") = 8, py::arg("channel_mult") = std::vector<int>{1, 2},
        py::arg("emb_dim") = 16, py::arg("fourier_feats") = 4);
    m.def(
        "train_shd",
        [make_arch](const std::vector<Arr>& sinograms, double sigma_min, double sigma_max,
                    int n_steps, double learning_rate, int batch_size, int n_iterations,
                    uint64_t seed, double ema_decay, int base_channels,
                    const std::vector<int>& channel_mult, int emb_dim, int fourier_feats) {
            std::vector<Mat> data;
            for (const Arr& a : sinograms) data.push_back(to_mat(a));
            const NoiseSchedule sched = NoiseSchedule::geometric(sigma_min, sigma_max, n_steps);
            TrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.n_iterations = n_iterations;
            cfg.rng_seed = seed;
            cfg.ema_decay = ema_decay;
            return train_shd(data, sched, cfg,
                             make_arch(base_channels, channel_mult, emb_dim, fourier_feats));
        },
        py::arg("sinograms"), py::arg("sigma_min") = 0.01, py::arg("sigma_max") = 50.0,
        py::arg("n_steps") = 200, py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 2,
        py::arg("n_iterations") = 100, py::arg("seed") = 0, py::arg("ema_decay") = 0.99,
        py::arg("base_channels") = 8, py::arg("channel_mult") = std::vector<int>{1, 2},
        py::arg("emb_dim") = 16, py::arg("fourier_feats") = 4);

    m.def(
        "reconstruct",
        [](const Arr& y_sparse, const std::vector<int>& kept, const ScoreModelParams& srm,
           const ScoreModelParams& shd, const std::string& mode, double sigma_min,
           double sigma_max, int n_steps, double snr, int n_corrector_steps, uint64_t seed,
           int image_size) {
            Sinogram y = to_sino(y_sparse, 1.0);
            ReconConfig cfg;
            cfg.schedule = NoiseSchedule::geometric(sigma_min, sigma_max, n_steps);
            cfg.langevin.snr = snr;
            cfg.langevin.n_corrector_steps = n_corrector_steps;
            cfg.sampling = make_op(y.geo.n_angles, kept);
            cfg.mode = recon_mode_from_string(mode);
            cfg.rng_seed = seed;
            cfg.image_size = image_size;
            const NetScore srm_score(srm, cfg.schedule);
            const NetScore shd_score(shd, cfg.schedule);
            cfg.srm_score = &srm_score;
            cfg.shd_score = &shd_score;
            ReconResult res;
            switch (cfg.mode) {
                case ReconMode::swarm: res = swarm_reconstruct(y, cfg); break;
                case ReconMode::srm_only: res = srm_only_reconstruct(y, cfg); break;
                case ReconMode::shd_only: res = shd_only_reconstruct(y, cfg); break;
            }
            return py::make_tuple(from_mat(res.image), from_mat(res.sinogram.data),
                                  res.trace.to_text());
        },
        py::arg("y_sparse"), py::arg("kept_indices"), py::arg("srm"), py::arg("shd"),
        py::arg("mode") = "swarm", py::arg("sigma_min") = 0.01, py::arg("sigma_max") = 50.0,
        py::arg("n_steps") = 50, py::arg("snr") = 0.16, py::arg("n_corrector_steps") = 1,
        py::arg("seed") = 0, py::arg("image_size") = 0);

    m.attr("__version__") = "0.1.0";
}
