#include "lmpkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace lmpkit {

namespace {

struct ConvDims {
    std::size_t b, cin, h, w, cout, kh, kw, oh, ow;
};

ConvDims conv_dims(const Tensor& x, const Tensor& k, Conv2dGeometry geom) {
    if (x.rank() != 4 || k.rank() != 4) {
        throw SizeError("conv2d expects rank-4 input and kernel, got " +
                        shape_to_string(x.shape()) + " and " + shape_to_string(k.shape()));
    }
    if (x.dim(1) != k.dim(1)) {
        throw SizeError("conv2d channel mismatch: input " + shape_to_string(x.shape()) +
                        ", kernel " + shape_to_string(k.shape()));
    }
    if (geom.stride == 0) throw SizeError("conv2d stride must be positive");
    ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), k.dim(0), k.dim(2), k.dim(3), 0, 0};
    d.oh = conv_output_size(d.h, d.kh, geom);
    d.ow = conv_output_size(d.w, d.kw, geom);
    return d;
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, Conv2dGeometry geom) {
    if (geom.stride == 0) throw SizeError("conv2d stride must be positive");
    if (kernel == 0 || kernel > in + 2 * geom.pad) {
        throw SizeError("kernel extent " + std::to_string(kernel) + " exceeds padded input " +
                        std::to_string(in + 2 * geom.pad));
    }
    return (in + 2 * geom.pad - kernel) / geom.stride + 1;
}

namespace {

// Kernel reordered to [cin][kh][kw][cout] so the innermost loop runs over
// output channels with unit stride.
std::vector<double> kernel_taps_last(const Tensor& k, const ConvDims& d) {
    std::vector<double> t(k.size());
    for (std::size_t co = 0; co < d.cout; ++co)
        for (std::size_t ci = 0; ci < d.cin; ++ci)
            for (std::size_t ky = 0; ky < d.kh; ++ky)
                for (std::size_t kx = 0; kx < d.kw; ++kx)
                    t[((ci * d.kh + ky) * d.kw + kx) * d.cout + co] = k[((co * d.cin + ci) * d.kh + ky) * d.kw + kx];
    return t;
}

// Input row/col of output index o at tap t, or -1 when it falls in the padding.
inline std::ptrdiff_t source_index(std::size_t o, std::size_t t, std::size_t extent, Conv2dGeometry g) {
    const auto i = static_cast<std::ptrdiff_t>(o * g.stride + t) - static_cast<std::ptrdiff_t>(g.pad);
    return i >= 0 && i < static_cast<std::ptrdiff_t>(extent) ? i : -1;
}

// Channel counts are template parameters so the inner loops get a constant
// trip count for the backbone's layer shapes; 0 means "read from dims".
template <std::size_t CIN, std::size_t COUT>
void conv_forward_impl(const ConvDims& d, Conv2dGeometry geom, const double* xin, const double* taps, double* y) {
    const std::size_t cin = CIN ? CIN : d.cin;
    const std::size_t cout = COUT ? COUT : d.cout;
    std::vector<double> acc(cout);
    const std::size_t plane_out = d.oh * d.ow;
    for (std::size_t b = 0; b < d.b; ++b) {
        const double* xb = xin + b * cin * d.h * d.w;
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                double* __restrict a = acc.data();
                for (std::size_t co = 0; co < cout; ++co) a[co] = 0.0;
                for (std::size_t ky = 0; ky < d.kh; ++ky) {
                    const std::ptrdiff_t iy = source_index(oy, ky, d.h, geom);
                    if (iy < 0) continue;
                    for (std::size_t kx = 0; kx < d.kw; ++kx) {
                        const std::ptrdiff_t ix = source_index(ox, kx, d.w, geom);
                        if (ix < 0) continue;
                        const std::size_t pix = static_cast<std::size_t>(iy) * d.w + static_cast<std::size_t>(ix);
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xv = xb[ci * d.h * d.w + pix];
                            const double* __restrict wrow = taps + ((ci * d.kh + ky) * d.kw + kx) * cout;
                            for (std::size_t co = 0; co < cout; ++co) a[co] += wrow[co] * xv;
                        }
                    }
                }
                double* yb = y + b * cout * plane_out + oy * d.ow + ox;
                for (std::size_t co = 0; co < cout; ++co) yb[co * plane_out] = a[co];
            }
        }
    }
}

template <std::size_t CIN, std::size_t COUT>
void conv_backward_impl(const ConvDims& d, Conv2dGeometry geom, const double* xin, const double* taps,
                        const double* gy, double* grad_taps, double* gx) {
    const std::size_t cin = CIN ? CIN : d.cin;
    const std::size_t cout = COUT ? COUT : d.cout;
    const std::size_t plane_out = d.oh * d.ow;
    std::vector<double> gy_hwc(plane_out * cout);
    std::vector<double> acc(cin);
    for (std::size_t b = 0; b < d.b; ++b) {
        const double* xb = xin + b * cin * d.h * d.w;
        const double* gyb = gy + b * cout * plane_out;
        for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t p = 0; p < plane_out; ++p) gy_hwc[p * cout + co] = gyb[co * plane_out + p];

        // Kernel gradient: outer product of each output cell's gradient with its input patch.
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
                const double* __restrict gyc = gy_hwc.data() + (oy * d.ow + ox) * cout;
                for (std::size_t ky = 0; ky < d.kh; ++ky) {
                    const std::ptrdiff_t iy = source_index(oy, ky, d.h, geom);
                    if (iy < 0) continue;
                    for (std::size_t kx = 0; kx < d.kw; ++kx) {
                        const std::ptrdiff_t ix = source_index(ox, kx, d.w, geom);
                        if (ix < 0) continue;
                        const std::size_t pix = static_cast<std::size_t>(iy) * d.w + static_cast<std::size_t>(ix);
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xv = xb[ci * d.h * d.w + pix];
                            double* __restrict gw = grad_taps + ((ci * d.kh + ky) * d.kw + kx) * cout;
                            for (std::size_t co = 0; co < cout; ++co) gw[co] += gyc[co] * xv;
                        }
                    }
                }
            }
        }

        // Input gradient: gather, for each input pixel, every output cell whose window covers it.
        double* gxb = gx + b * cin * d.h * d.w;
        for (std::size_t iy = 0; iy < d.h; ++iy) {
            for (std::size_t ix = 0; ix < d.w; ++ix) {
                double* __restrict a = acc.data();
                for (std::size_t ci = 0; ci < cin; ++ci) a[ci] = 0.0;
                for (std::size_t ky = 0; ky < d.kh; ++ky) {
                    const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(iy + geom.pad) - static_cast<std::ptrdiff_t>(ky);
                    if (ny < 0 || ny % static_cast<std::ptrdiff_t>(geom.stride) != 0) continue;
                    const std::size_t oy = static_cast<std::size_t>(ny) / geom.stride;
                    if (oy >= d.oh) continue;
                    for (std::size_t kx = 0; kx < d.kw; ++kx) {
                        const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(ix + geom.pad) - static_cast<std::ptrdiff_t>(kx);
                        if (nx < 0 || nx % static_cast<std::ptrdiff_t>(geom.stride) != 0) continue;
                        const std::size_t ox = static_cast<std::size_t>(nx) / geom.stride;
                        if (ox >= d.ow) continue;
                        const double* gyc = gy_hwc.data() + (oy * d.ow + ox) * cout;
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double* __restrict w = taps + ((ci * d.kh + ky) * d.kw + kx) * cout;
                            double sum = 0.0;
#pragma omp simd reduction(+ : sum)
                            for (std::size_t co = 0; co < cout; ++co) sum += w[co] * gyc[co];
                            a[ci] += sum;
                        }
                    }
                }
                for (std::size_t ci = 0; ci < cin; ++ci) gxb[ci * d.h * d.w + iy * d.w + ix] = a[ci];
            }
        }
    }
}

template <typename Fn>
void dispatch_channels(const ConvDims& d, Fn&& fn) {
    if (d.cin == 1 && d.cout == 16) return fn.template operator()<1, 16>();
    if (d.cin == 16 && d.cout == 32) return fn.template operator()<16, 32>();
    if (d.cin == 32 && d.cout == 32) return fn.template operator()<32, 32>();
    fn.template operator()<0, 0>();
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& k, Conv2dGeometry geom) {
    const ConvDims d = conv_dims(x, k, geom);
    Tensor out({d.b, d.cout, d.oh, d.ow});
    const std::vector<double> taps = kernel_taps_last(k, d);
    dispatch_channels(d, [&]<std::size_t CIN, std::size_t COUT>() {
        conv_forward_impl<CIN, COUT>(d, geom, x.data().data(), taps.data(), out.data().data());
    });
    check_finite(out, "conv2d_forward");
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& k, const Tensor& grad_out,
                            Conv2dGeometry geom) {
    const ConvDims d = conv_dims(x, k, geom);
    const Shape expected{d.b, d.cout, d.oh, d.ow};
    if (grad_out.shape() != expected) {
        throw SizeError("conv2d_backward: grad_out " + shape_to_string(grad_out.shape()) +
                        " expected " + shape_to_string(expected));
    }
    Conv2dGrads g{Tensor(x.shape()), Tensor(k.shape())};
    const std::vector<double> taps = kernel_taps_last(k, d);
    std::vector<double> grad_taps(k.size(), 0.0);  // [cin][kh][kw][cout]
    dispatch_channels(d, [&]<std::size_t CIN, std::size_t COUT>() {
        conv_backward_impl<CIN, COUT>(d, geom, x.data().data(), taps.data(), grad_out.data().data(),
                                      grad_taps.data(), g.grad_x.data().data());
    });
    for (std::size_t co = 0; co < d.cout; ++co)
        for (std::size_t ci = 0; ci < d.cin; ++ci)
            for (std::size_t ky = 0; ky < d.kh; ++ky)
                for (std::size_t kx = 0; kx < d.kw; ++kx)
                    g.grad_k[((co * d.cin + ci) * d.kh + ky) * d.kw + kx] =
                        grad_taps[((ci * d.kh + ky) * d.kw + kx) * d.cout + co];
    check_finite(g.grad_x, "conv2d_backward");
    check_finite(g.grad_k, "conv2d_backward");
    return g;
}

Tensor channel_bias_forward(const Tensor& x, const Tensor& bias) {
    if (x.rank() != 4 || bias.rank() != 1 || bias.dim(0) != x.dim(1)) {
        throw SizeError("channel bias shape mismatch: " + shape_to_string(x.shape()) + " + " +
                        shape_to_string(bias.shape()));
    }
    Tensor out = x;
    const std::size_t plane = x.dim(2) * x.dim(3);
    for (std::size_t b = 0; b < x.dim(0); ++b) {
        for (std::size_t c = 0; c < x.dim(1); ++c) {
            double* p = out.data().data() + (b * x.dim(1) + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) p[i] += bias[c];
        }
    }
    return out;
}

Tensor channel_bias_backward(const Tensor& grad_out) {
    if (grad_out.rank() != 4) throw SizeError("channel bias backward expects rank 4");
    Tensor g({grad_out.dim(1)});
    const std::size_t plane = grad_out.dim(2) * grad_out.dim(3);
    for (std::size_t b = 0; b < grad_out.dim(0); ++b) {
        for (std::size_t c = 0; c < grad_out.dim(1); ++c) {
            const double* p = grad_out.data().data() + (b * grad_out.dim(1) + c) * plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += p[i];
            g[c] += acc;
        }
    }
    return g;
}

Tensor relu_fwd(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor relu_bwd(const Tensor& x, const Tensor& grad_out) {
    if (x.shape() != grad_out.shape()) throw SizeError("relu_bwd shape mismatch");
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
    return g;
}

Tensor linear_fwd(const Tensor& x, const Tensor& w, const Tensor& bias) {
    if (x.rank() != 2 || w.rank() != 2 || bias.rank() != 1 || w.dim(1) != x.dim(1) ||
        bias.dim(0) != w.dim(0)) {
        throw SizeError("linear shape mismatch: x " + shape_to_string(x.shape()) + ", w " +
                        shape_to_string(w.shape()) + ", b " + shape_to_string(bias.shape()));
    }
    const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
    Tensor out({batch, out_dim});
    for (std::size_t b = 0; b < batch; ++b) {
        const auto xr = x.data().subspan(b * in, in);
        for (std::size_t o = 0; o < out_dim; ++o) {
            const auto wr = w.data().subspan(o * in, in);
            double acc = bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
            out.at(b, o) = acc;
        }
    }
    check_finite(out, "linear_fwd");
    return out;
}

LinearGrads linear_bwd(const Tensor& x, const Tensor& w, const Tensor& grad_out) {
    if (grad_out.rank() != 2 || grad_out.dim(0) != x.dim(0) || grad_out.dim(1) != w.dim(0) ||
        x.dim(1) != w.dim(1)) {
        throw SizeError("linear_bwd shape mismatch");
    }
    const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
    LinearGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({out_dim})};
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double go = grad_out.at(b, o);
            g.grad_b[o] += go;
            for (std::size_t i = 0; i < in; ++i) {
                g.grad_w[o * in + i] += go * x[b * in + i];
                g.grad_x[b * in + i] += go * w[o * in + i];
            }
        }
    }
    return g;
}

SoftmaxXent softmax_xent_fwd(const Tensor& logits, std::span<const std::size_t> labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
        throw SizeError("softmax_xent: logits " + shape_to_string(logits.shape()) + " vs " +
                        std::to_string(labels.size()) + " labels");
    }
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    SoftmaxXent r{0.0, Tensor(logits.shape())};
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= classes) {
            throw LabelError("label " + std::to_string(labels[b]) + " outside [0, " +
                             std::to_string(classes) + ")");
        }
        const auto row = logits.data().subspan(b * classes, classes);
        const double m = max_value(row);
        double z = 0.0;
        for (double v : row) z += std::exp(v - m);
        const double log_z = std::log(z) + m;
        for (std::size_t j = 0; j < classes; ++j) r.probs.at(b, j) = std::exp(row[j] - log_z);
        r.loss += log_z - row[labels[b]];
    }
    r.loss /= static_cast<double>(batch);
    return r;
}

Tensor softmax_xent_bwd(const SoftmaxXent& fwd, std::span<const std::size_t> labels) {
    const std::size_t batch = fwd.probs.dim(0), classes = fwd.probs.dim(1);
    if (labels.size() != batch) throw SizeError("softmax_xent_bwd label count mismatch");
    Tensor g = fwd.probs;
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= classes) throw LabelError("label out of range");
        g.at(b, labels[b]) -= 1.0;
    }
    for (double& v : g.data()) v /= static_cast<double>(batch);
    return g;
}

}  // namespace lmpkit
