#pragma once

#include <string>
#include <vector>

#include "swarm/mat.hpp"

namespace swarm {

struct MetricReport {
    double psnr = 0.0; // dB; +inf when mse == 0
    double ssim = 0.0;
    double mse = 0.0;
};

double psnr_from_mse(double mse, double data_range);

/// PSNR with peak data_range, SSIM with an 11x11 Gaussian window (sigma 1.5,
/// standard stability constants scaled by data_range), plain-mean MSE.
MetricReport evaluate(const Mat& recon, const Mat& reference, double data_range);

enum class Axis { row, col };

std::vector<double> profile_line(const Mat& img, Axis axis, int index);

} // namespace swarm
