#include "swarm/nn.hpp"

#include <algorithm>
#include <cmath>

#include "swarm/rng.hpp"

namespace swarm::nn {

void ArchDescriptor::validate() const {
    if (in_channels < 1) throw ConfigError("arch: in_channels must be >= 1");
    if (base_channels < 1) throw ConfigError("arch: base_channels must be >= 1");
    if (channel_mult.empty()) throw ConfigError("arch: channel_mult must be non-empty");
    for (int m : channel_mult)
        if (m < 1) throw ConfigError("arch: channel multipliers must be >= 1");
    if (emb_dim < 1) throw ConfigError("arch: emb_dim must be >= 1");
    if (fourier_feats < 1) throw ConfigError("arch: fourier_feats must be >= 1");
}

namespace {

struct Cursor {
    size_t off = 0;
    Slice take(size_t n) {
        Slice s{off, n};
        off += n;
        return s;
    }
};

ConvSpec make_conv(Cursor& cur, int oc, int ic, int stride) {
    ConvSpec c;
    c.oc = oc;
    c.ic = ic;
    c.stride = stride;
    c.w = cur.take(static_cast<size_t>(oc) * ic * 9);
    c.b = cur.take(static_cast<size_t>(oc));
    return c;
}

LinSpec make_lin(Cursor& cur, int out, int in) {
    LinSpec l;
    l.out = out;
    l.in = in;
    l.w = cur.take(static_cast<size_t>(out) * in);
    l.b = cur.take(static_cast<size_t>(out));
    return l;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

void silu_tensor(const Tensor& pre, Tensor& post) {
    post = pre;
    for (double& x : post.v) x = silu(x);
}

} // namespace

NetLayout NetLayout::build(const ArchDescriptor& arch) {
    arch.validate();
    NetLayout lay;
    lay.arch = arch;
    const int L = arch.levels();
    Cursor cur;

    lay.emb1 = make_lin(cur, arch.emb_dim, 2 * arch.fourier_feats);
    lay.emb2 = make_lin(cur, arch.emb_dim, arch.emb_dim);
    lay.conv_in = make_conv(cur, arch.channels(0), arch.in_channels, 1);
    for (int l = 0; l < L; ++l) {
        lay.enc_conv.push_back(make_conv(cur, arch.channels(l), arch.channels(l), 1));
        lay.enc_film.push_back(make_lin(cur, arch.channels(l), arch.emb_dim));
    }
    for (int l = 0; l + 1 < L; ++l)
        lay.down_conv.push_back(make_conv(cur, arch.channels(l + 1), arch.channels(l), 2));
    lay.mid_conv = make_conv(cur, arch.channels(L - 1), arch.channels(L - 1), 1);
    lay.mid_film = make_lin(cur, arch.channels(L - 1), arch.emb_dim);
    for (int l = 0; l + 1 < L; ++l) {
        lay.up_conv.push_back(make_conv(cur, arch.channels(l), arch.channels(l + 1), 1));
        lay.dec_conv.push_back(make_conv(cur, arch.channels(l), 2 * arch.channels(l), 1));
        lay.dec_film.push_back(make_lin(cur, arch.channels(l), arch.emb_dim));
    }
    lay.conv_out = make_conv(cur, arch.in_channels, arch.channels(0), 1);
    lay.total = cur.off;
    return lay;
}

size_t param_count(const ArchDescriptor& arch) { return NetLayout::build(arch).total; }

std::vector<LayerInfo> layer_infos(const NetLayout& lay) {
    std::vector<LayerInfo> out;
    auto add_conv = [&](const std::string& name, const ConvSpec& c) {
        out.push_back({name, c.w.off, c.w.n, c.ic * 9});
    };
    auto add_lin = [&](const std::string& name, const LinSpec& l) {
        out.push_back({name, l.w.off, l.w.n, l.in});
    };
    add_lin("emb1", lay.emb1);
    add_lin("emb2", lay.emb2);
    add_conv("conv_in", lay.conv_in);
    for (size_t l = 0; l < lay.enc_conv.size(); ++l) {
        add_conv("enc_conv" + std::to_string(l), lay.enc_conv[l]);
        add_lin("enc_film" + std::to_string(l), lay.enc_film[l]);
    }
    for (size_t l = 0; l < lay.down_conv.size(); ++l)
        add_conv("down_conv" + std::to_string(l), lay.down_conv[l]);
    add_conv("mid_conv", lay.mid_conv);
    add_lin("mid_film", lay.mid_film);
    for (size_t l = 0; l < lay.up_conv.size(); ++l) {
        add_conv("up_conv" + std::to_string(l), lay.up_conv[l]);
        add_conv("dec_conv" + std::to_string(l), lay.dec_conv[l]);
        add_lin("dec_film" + std::to_string(l), lay.dec_film[l]);
    }
    add_conv("conv_out", lay.conv_out);
    return out;
}

std::vector<double> kaiming_init(const ArchDescriptor& arch, uint64_t rng_seed) {
    const NetLayout lay = NetLayout::build(arch);
    std::vector<double> w(lay.total, 0.0);
    Rng rng(derive_seed(rng_seed, 0x696e6974ULL)); // "init"
    for (const LayerInfo& li : layer_infos(lay)) {
        const double std = std::sqrt(2.0 / li.fan_in);
        for (size_t i = 0; i < li.w_count; ++i) w[li.w_off + i] = std * rng.gaussian();
    }
    return w;
}

namespace {

// ---- conv 3x3, zero padding 1, stride 1 or 2 ----

inline int conv_out_dim(int in, int stride) { return (in - 1) / stride + 1; }

void conv3x3_forward(const ConvSpec& spec, const double* params, const Tensor& x, Tensor& y) {
    const int s = spec.stride;
    const int H = x.rows, W = x.cols;
    const int Ho = conv_out_dim(H, s), Wo = conv_out_dim(W, s);
    y = Tensor(spec.oc, Ho, Wo);
    const double* wt = params + spec.w.off;
    const double* bias = params + spec.b.off;

#pragma omp parallel for schedule(static) if (spec.oc >= 8 && x.plane_size() >= 1024)
    for (int oc = 0; oc < spec.oc; ++oc) {
        double* yp = y.plane(oc);
        std::fill(yp, yp + y.plane_size(), bias[oc]);
        for (int ic = 0; ic < spec.ic; ++ic) {
            const double* xp = x.plane(ic);
            const double* wb = wt + (static_cast<size_t>(oc) * spec.ic + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int oy_lo = ky == 0 ? 1 : 0;
                const int oy_hi = std::min(Ho - 1, (H - ky) >= 0 ? (H - ky) / s : -1);
                if (s == 1) {
                    // fuse the three taps of one kernel row per output row
                    const double w0 = wb[ky * 3 + 0], w1 = wb[ky * 3 + 1], w2 = wb[ky * 3 + 2];
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const double* __restrict__ xrow = xp + static_cast<size_t>(oy + ky - 1) * W;
                        double* __restrict__ yrow = yp + static_cast<size_t>(oy) * Wo;
                        if (Wo == 1) {
                            yrow[0] += w1 * xrow[0];
                            continue;
                        }
                        yrow[0] += w1 * xrow[0] + w2 * xrow[1];
                        for (int ox = 1; ox < Wo - 1; ++ox)
                            yrow[ox] += w0 * xrow[ox - 1] + w1 * xrow[ox] + w2 * xrow[ox + 1];
                        yrow[Wo - 1] += w0 * xrow[Wo - 2] + w1 * xrow[Wo - 1];
                    }
                } else {
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = wb[ky * 3 + kx];
                        const int ox_lo = kx == 0 ? 1 : 0;
                        const int ox_hi = std::min(Wo - 1, (W - kx) >= 0 ? (W - kx) / s : -1);
                        for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                            const double* __restrict__ xrow =
                                xp + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
                            double* __restrict__ yrow = yp + static_cast<size_t>(oy) * Wo;
                            for (int ox = ox_lo; ox <= ox_hi; ++ox) yrow[ox] += wv * xrow[2 * ox];
                        }
                    }
                }
            }
        }
    }
}

void conv3x3_backward(const ConvSpec& spec, const double* params, const Tensor& x,
                      const Tensor& dy, double* grad, Tensor* dx) {
    const int s = spec.stride;
    const int H = x.rows, W = x.cols;
    const int Ho = dy.rows, Wo = dy.cols;
    double* dw = grad + spec.w.off;
    double* db = grad + spec.b.off;

#pragma omp parallel for schedule(static) if (spec.oc >= 8 && x.plane_size() >= 1024)
    for (int oc = 0; oc < spec.oc; ++oc) {
        const double* dyp = dy.plane(oc);
        double bacc = 0.0;
        for (size_t i = 0; i < dy.plane_size(); ++i) bacc += dyp[i];
        db[oc] += bacc;
        for (int ic = 0; ic < spec.ic; ++ic) {
            const double* xp = x.plane(ic);
            double* dwb = dw + (static_cast<size_t>(oc) * spec.ic + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int oy_lo = ky == 0 ? 1 : 0;
                const int oy_hi = std::min(Ho - 1, (H - ky) >= 0 ? (H - ky) / s : -1);
                for (int kx = 0; kx < 3; ++kx) {
                    const int ox_lo = kx == 0 ? 1 : 0;
                    const int ox_hi = std::min(Wo - 1, (W - kx) >= 0 ? (W - kx) / s : -1);
                    // four-lane accumulation: fixed summation order, SIMD-friendly
                    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const double* __restrict__ xrow =
                            xp + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
                        const double* __restrict__ dyrow = dyp + static_cast<size_t>(oy) * Wo;
                        int ox = ox_lo;
                        if (s == 1) {
                            for (; ox + 3 <= ox_hi; ox += 4) {
                                a0 += dyrow[ox] * xrow[ox];
                                a1 += dyrow[ox + 1] * xrow[ox + 1];
                                a2 += dyrow[ox + 2] * xrow[ox + 2];
                                a3 += dyrow[ox + 3] * xrow[ox + 3];
                            }
                            for (; ox <= ox_hi; ++ox) a0 += dyrow[ox] * xrow[ox];
                        } else {
                            for (; ox <= ox_hi; ++ox) a0 += dyrow[ox] * xrow[2 * ox];
                        }
                    }
                    dwb[ky * 3 + kx] += ((a0 + a1) + (a2 + a3));
                }
            }
        }
    }

    if (!dx) return;
    *dx = Tensor(spec.ic, H, W);
    const double* wt = params + spec.w.off;
#pragma omp parallel for schedule(static) if (spec.ic >= 8 && x.plane_size() >= 1024)
    for (int ic = 0; ic < spec.ic; ++ic) {
        double* dxp = dx->plane(ic);
        for (int oc = 0; oc < spec.oc; ++oc) {
            const double* dyp = dy.plane(oc);
            const double* wb = wt + (static_cast<size_t>(oc) * spec.ic + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int oy_lo = ky == 0 ? 1 : 0;
                const int oy_hi = std::min(Ho - 1, (H - ky) >= 0 ? (H - ky) / s : -1);
                if (s == 1) {
                    const double w0 = wb[ky * 3 + 0], w1 = wb[ky * 3 + 1], w2 = wb[ky * 3 + 2];
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        double* __restrict__ dxrow = dxp + static_cast<size_t>(oy + ky - 1) * W;
                        const double* __restrict__ dyrow = dyp + static_cast<size_t>(oy) * Wo;
                        if (W == 1) {
                            dxrow[0] += w1 * dyrow[0];
                            continue;
                        }
                        dxrow[0] += w1 * dyrow[0] + w0 * dyrow[1];
                        for (int ix = 1; ix < W - 1; ++ix)
                            dxrow[ix] += w2 * dyrow[ix - 1] + w1 * dyrow[ix] + w0 * dyrow[ix + 1];
                        dxrow[W - 1] += w2 * dyrow[W - 2] + w1 * dyrow[W - 1];
                    }
                } else {
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = wb[ky * 3 + kx];
                        const int ox_lo = kx == 0 ? 1 : 0;
                        const int ox_hi = std::min(Wo - 1, (W - kx) >= 0 ? (W - kx) / s : -1);
                        for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                            double* __restrict__ dxrow =
                                dxp + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
                            const double* __restrict__ dyrow = dyp + static_cast<size_t>(oy) * Wo;
                            for (int ox = ox_lo; ox <= ox_hi; ++ox) dxrow[2 * ox] += wv * dyrow[ox];
                        }
                    }
                }
            }
        }
    }
}

// ---- linear ----

void linear_forward(const LinSpec& spec, const double* params, const double* x, double* y) {
    const double* wt = params + spec.w.off;
    const double* b = params + spec.b.off;
    for (int o = 0; o < spec.out; ++o) {
        double acc = b[o];
        const double* wr = wt + static_cast<size_t>(o) * spec.in;
        for (int i = 0; i < spec.in; ++i) acc += wr[i] * x[i];
        y[o] = acc;
    }
}

void linear_backward(const LinSpec& spec, const double* params, const double* x, const double* dy,
                     double* grad, double* dx) {
    double* dw = grad + spec.w.off;
    double* db = grad + spec.b.off;
    const double* wt = params + spec.w.off;
    for (int o = 0; o < spec.out; ++o) {
        db[o] += dy[o];
        double* dwr = dw + static_cast<size_t>(o) * spec.in;
        for (int i = 0; i < spec.in; ++i) dwr[i] += dy[o] * x[i];
    }
    if (dx) {
        for (int i = 0; i < spec.in; ++i) {
            double acc = 0.0;
            for (int o = 0; o < spec.out; ++o) acc += wt[static_cast<size_t>(o) * spec.in + i] * dy[o];
            dx[i] += acc;
        }
    }
}

// ---- film: per-channel bias from the embedding ----

void film_forward(const LinSpec& spec, const double* params, const double* e, Tensor& h) {
    std::vector<double> bias(spec.out);
    linear_forward(spec, params, e, bias.data());
    for (int c = 0; c < h.ch; ++c) {
        double* p = h.plane(c);
        const double bc = bias[c];
        for (size_t i = 0; i < h.plane_size(); ++i) p[i] += bc;
    }
}

// d(h) passes through unchanged; accumulates film parameter grads and de.
void film_backward(const LinSpec& spec, const double* params, const double* e, const Tensor& dh,
                   double* grad, double* de) {
    std::vector<double> dbias(spec.out);
    for (int c = 0; c < dh.ch; ++c) {
        const double* p = dh.plane(c);
        double acc = 0.0;
        for (size_t i = 0; i < dh.plane_size(); ++i) acc += p[i];
        dbias[c] = acc;
    }
    linear_backward(spec, params, e, dbias.data(), grad, de);
}

// ---- nearest-neighbour 2x upsample with crop to target dims ----

void upsample2_forward(const Tensor& x, int tr, int tc, Tensor& y) {
    y = Tensor(x.ch, tr, tc);
    for (int c = 0; c < x.ch; ++c) {
        const double* xp = x.plane(c);
        double* yp = y.plane(c);
        for (int r = 0; r < tr; ++r) {
            const double* xrow = xp + static_cast<size_t>(r / 2) * x.cols;
            double* yrow = yp + static_cast<size_t>(r) * tc;
            for (int col = 0; col < tc; ++col) yrow[col] = xrow[col / 2];
        }
    }
}

void upsample2_backward(const Tensor& dy, int ir, int ic_dim, Tensor& dx) {
    dx = Tensor(dy.ch, ir, ic_dim);
    for (int c = 0; c < dy.ch; ++c) {
        const double* dyp = dy.plane(c);
        double* dxp = dx.plane(c);
        for (int r = 0; r < dy.rows; ++r) {
            const double* dyrow = dyp + static_cast<size_t>(r) * dy.cols;
            double* dxrow = dxp + static_cast<size_t>(r / 2) * ic_dim;
            for (int col = 0; col < dy.cols; ++col) dxrow[col / 2] += dyrow[col];
        }
    }
}

void concat_forward(const Tensor& a, const Tensor& b, Tensor& y) {
    y = Tensor(a.ch + b.ch, a.rows, a.cols);
    std::copy(a.v.begin(), a.v.end(), y.v.begin());
    std::copy(b.v.begin(), b.v.end(), y.v.begin() + a.v.size());
}

void split_backward(const Tensor& dy, int a_ch, Tensor& da, Tensor& db) {
    da = Tensor(a_ch, dy.rows, dy.cols);
    db = Tensor(dy.ch - a_ch, dy.rows, dy.cols);
    std::copy(dy.v.begin(), dy.v.begin() + da.v.size(), da.v.begin());
    std::copy(dy.v.begin() + da.v.size(), dy.v.end(), db.v.begin());
}

std::vector<double> fourier_features(double u, int feats) {
    std::vector<double> ff(2 * feats);
    const double log_max = std::log(1e4);
    for (int k = 0; k < feats; ++k) {
        const double freq = std::exp(-log_max * (feats > 1 ? static_cast<double>(k) / (feats - 1) : 0.0));
        ff[2 * k] = std::sin(u * freq);
        ff[2 * k + 1] = std::cos(u * freq);
    }
    return ff;
}

} // namespace

Tensor forward(const NetLayout& lay, const double* w, const Tensor& x, double log_sigma,
               Workspace& ws) {
    const ArchDescriptor& arch = lay.arch;
    if (x.ch != arch.in_channels) throw ArgumentError("net forward: channel mismatch");
    if (x.rows < 1 || x.cols < 1) throw ArgumentError("net forward: empty input");
    const int L = arch.levels();

    ws.x = x;
    ws.ff = fourier_features(log_sigma, arch.fourier_feats);
    ws.e1_pre.assign(arch.emb_dim, 0.0);
    linear_forward(lay.emb1, w, ws.ff.data(), ws.e1_pre.data());
    ws.e1.resize(arch.emb_dim);
    for (int i = 0; i < arch.emb_dim; ++i) ws.e1[i] = silu(ws.e1_pre[i]);
    ws.e.assign(arch.emb_dim, 0.0);
    linear_forward(lay.emb2, w, ws.e1.data(), ws.e.data());

    ws.h_in.assign(L, Tensor());
    ws.enc_pre.assign(L, Tensor());
    ws.skip.assign(L, Tensor());
    ws.down_pre.assign(std::max(0, L - 1), Tensor());

    conv3x3_forward(lay.conv_in, w, x, ws.h_in[0]);
    for (int l = 0; l < L; ++l) {
        conv3x3_forward(lay.enc_conv[l], w, ws.h_in[l], ws.enc_pre[l]);
        film_forward(lay.enc_film[l], w, ws.e.data(), ws.enc_pre[l]);
        silu_tensor(ws.enc_pre[l], ws.skip[l]);
        if (l + 1 < L) {
            conv3x3_forward(lay.down_conv[l], w, ws.skip[l], ws.down_pre[l]);
            silu_tensor(ws.down_pre[l], ws.h_in[l + 1]);
        }
    }

    conv3x3_forward(lay.mid_conv, w, ws.skip[L - 1], ws.mid_pre);
    film_forward(lay.mid_film, w, ws.e.data(), ws.mid_pre);
    silu_tensor(ws.mid_pre, ws.mid_out);

    ws.up_t.assign(std::max(0, L - 1), Tensor());
    ws.up_pre.assign(std::max(0, L - 1), Tensor());
    ws.up_q.assign(std::max(0, L - 1), Tensor());
    ws.cat.assign(std::max(0, L - 1), Tensor());
    ws.dec_pre.assign(std::max(0, L - 1), Tensor());
    ws.dec_out.assign(std::max(0, L - 1), Tensor());

    const Tensor* g = &ws.mid_out;
    for (int l = L - 2; l >= 0; --l) {
        upsample2_forward(*g, ws.skip[l].rows, ws.skip[l].cols, ws.up_t[l]);
        conv3x3_forward(lay.up_conv[l], w, ws.up_t[l], ws.up_pre[l]);
        silu_tensor(ws.up_pre[l], ws.up_q[l]);
        concat_forward(ws.up_q[l], ws.skip[l], ws.cat[l]);
        conv3x3_forward(lay.dec_conv[l], w, ws.cat[l], ws.dec_pre[l]);
        film_forward(lay.dec_film[l], w, ws.e.data(), ws.dec_pre[l]);
        silu_tensor(ws.dec_pre[l], ws.dec_out[l]);
        g = &ws.dec_out[l];
    }

    Tensor y;
    conv3x3_forward(lay.conv_out, w, *g, y);
    return y;
}

void backward(const NetLayout& lay, const double* w, const Workspace& ws, const Tensor& dy,
              double* grad) {
    const ArchDescriptor& arch = lay.arch;
    const int L = arch.levels();
    std::vector<double> de(arch.emb_dim, 0.0);

    // conv_out
    const Tensor& out_in = L >= 2 ? ws.dec_out[0] : ws.mid_out;
    Tensor d_g;
    conv3x3_backward(lay.conv_out, w, out_in, dy, grad, &d_g);

    // decoder, reverse of the forward l = L-2..0 loop
    std::vector<Tensor> d_skip(L);
    for (int l = 0; l + 1 < L; ++l) {
        Tensor d_dec_pre = d_g;
        for (size_t i = 0; i < d_dec_pre.v.size(); ++i)
            d_dec_pre.v[i] *= silu_grad(ws.dec_pre[l].v[i]);
        film_backward(lay.dec_film[l], w, ws.e.data(), d_dec_pre, grad, de.data());
        Tensor d_cat;
        conv3x3_backward(lay.dec_conv[l], w, ws.cat[l], d_dec_pre, grad, &d_cat);
        Tensor d_up_q, d_skip_l;
        split_backward(d_cat, ws.up_q[l].ch, d_up_q, d_skip_l);
        d_skip[l] = std::move(d_skip_l);

        for (size_t i = 0; i < d_up_q.v.size(); ++i) d_up_q.v[i] *= silu_grad(ws.up_pre[l].v[i]);
        Tensor d_up_t;
        conv3x3_backward(lay.up_conv[l], w, ws.up_t[l], d_up_q, grad, &d_up_t);
        const Tensor& src = l + 1 < L - 1 ? ws.dec_out[l + 1] : ws.mid_out;
        upsample2_backward(d_up_t, src.rows, src.cols, d_g);
    }

    // mid
    Tensor d_mid_pre = std::move(d_g);
    for (size_t i = 0; i < d_mid_pre.v.size(); ++i) d_mid_pre.v[i] *= silu_grad(ws.mid_pre.v[i]);
    film_backward(lay.mid_film, w, ws.e.data(), d_mid_pre, grad, de.data());
    {
        Tensor d_skip_mid;
        conv3x3_backward(lay.mid_conv, w, ws.skip[L - 1], d_mid_pre, grad, &d_skip_mid);
        if (d_skip[L - 1].size() == 0) {
            d_skip[L - 1] = std::move(d_skip_mid);
        } else {
            for (size_t i = 0; i < d_skip_mid.v.size(); ++i) d_skip[L - 1].v[i] += d_skip_mid.v[i];
        }
    }

    // encoder, top level down
    Tensor d_h;
    for (int l = L - 1; l >= 0; --l) {
        Tensor d_s = std::move(d_skip[l]);
        if (l + 1 < L) {
            // contribution through the down path: d_h is dL/d h_in[l+1]
            Tensor d_down_pre = std::move(d_h);
            for (size_t i = 0; i < d_down_pre.v.size(); ++i)
                d_down_pre.v[i] *= silu_grad(ws.down_pre[l].v[i]);
            Tensor d_s_add;
            conv3x3_backward(lay.down_conv[l], w, ws.skip[l], d_down_pre, grad, &d_s_add);
            for (size_t i = 0; i < d_s.v.size(); ++i) d_s.v[i] += d_s_add.v[i];
        }
        Tensor d_enc_pre = std::move(d_s);
        for (size_t i = 0; i < d_enc_pre.v.size(); ++i)
            d_enc_pre.v[i] *= silu_grad(ws.enc_pre[l].v[i]);
        film_backward(lay.enc_film[l], w, ws.e.data(), d_enc_pre, grad, de.data());
        conv3x3_backward(lay.enc_conv[l], w, ws.h_in[l], d_enc_pre, grad, &d_h);
    }
    conv3x3_backward(lay.conv_in, w, ws.x, d_h, grad, nullptr);

    // embedding MLP
    std::vector<double> de1(arch.emb_dim, 0.0);
    linear_backward(lay.emb2, w, ws.e1.data(), de.data(), grad, de1.data());
    for (int i = 0; i < arch.emb_dim; ++i) de1[i] *= silu_grad(ws.e1_pre[i]);
    linear_backward(lay.emb1, w, ws.ff.data(), de1.data(), grad, nullptr);
}

} // namespace swarm::nn
