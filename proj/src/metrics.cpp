#include "swarm/metrics.hpp"

#include <cmath>
#include <limits>

#include "swarm/errors.hpp"

namespace swarm {

double psnr_from_mse(double mse, double data_range) {
    if (!(data_range > 0.0)) throw ArgumentError("psnr: data_range must be > 0");
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;

std::vector<double> gaussian_window() {
    std::vector<double> w(kWin);
    const int half = kWin / 2;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - half;
        w[i] = std::exp(-d * d / (2.0 * kWinSigma * kWinSigma));
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

// Separable valid-mode Gaussian filtering: (rows) x (cols-10) after the
// horizontal pass, (rows-10) x (cols-10) after the vertical pass.
Mat filt_valid(const Mat& x, const std::vector<double>& w) {
    Mat h(x.rows, x.cols - kWin + 1);
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < h.cols; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += w[k] * x.at(r, c + k);
            h.at(r, c) = acc;
        }
    Mat v(x.rows - kWin + 1, h.cols);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += w[k] * h.at(r + k, c);
            v.at(r, c) = acc;
        }
    return v;
}

} // namespace

MetricReport evaluate(const Mat& recon, const Mat& reference, double data_range) {
    if (!recon.same_shape(reference)) throw ArgumentError("evaluate: image dimensions differ");
    if (!(data_range > 0.0)) throw ArgumentError("evaluate: data_range must be > 0");
    if (recon.rows < kWin || recon.cols < kWin)
        throw ArgumentError("evaluate: images smaller than the SSIM window");

    MetricReport rep;
    double se = 0.0;
    for (size_t i = 0; i < recon.v.size(); ++i) {
        const double d = recon.v[i] - reference.v[i];
        se += d * d;
    }
    rep.mse = se / static_cast<double>(recon.v.size());
    rep.psnr = psnr_from_mse(rep.mse, data_range);

    const std::vector<double> w = gaussian_window();
    Mat xx(recon.rows, recon.cols), yy(recon.rows, recon.cols), xy(recon.rows, recon.cols);
    for (size_t i = 0; i < recon.v.size(); ++i) {
        xx.v[i] = recon.v[i] * recon.v[i];
        yy.v[i] = reference.v[i] * reference.v[i];
        xy.v[i] = recon.v[i] * reference.v[i];
    }
    const Mat mu_x = filt_valid(recon, w);
    const Mat mu_y = filt_valid(reference, w);
    const Mat e_xx = filt_valid(xx, w);
    const Mat e_yy = filt_valid(yy, w);
    const Mat e_xy = filt_valid(xy, w);

    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);
    double acc = 0.0;
    for (size_t i = 0; i < mu_x.v.size(); ++i) {
        const double mx = mu_x.v[i], my = mu_y.v[i];
        const double vx = e_xx.v[i] - mx * mx;
        const double vy = e_yy.v[i] - my * my;
        const double cov = e_xy.v[i] - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    rep.ssim = acc / static_cast<double>(mu_x.v.size());
    return rep;
}

std::vector<double> profile_line(const Mat& img, Axis axis, int index) {
    if (img.empty()) throw ArgumentError("profile_line: empty image");
    if (axis == Axis::row) {
        if (index < 0 || index >= img.rows) throw ArgumentError("profile_line: row index out of range");
        std::vector<double> out(img.cols);
        for (int c = 0; c < img.cols; ++c) out[c] = img.at(index, c);
        return out;
    }
    if (index < 0 || index >= img.cols) throw ArgumentError("profile_line: column index out of range");
    std::vector<double> out(img.rows);
    for (int r = 0; r < img.rows; ++r) out[r] = img.at(r, index);
    return out;
}

} // namespace swarm
