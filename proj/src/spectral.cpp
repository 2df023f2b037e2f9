#include "samiqa/spectral.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace samiqa {

namespace {

using cplx = std::complex<double>;

// Iterative radix-2 Cooley-Tukey; inverse uses conjugate twiddles, no scaling.
void fft1d(cplx* a, std::size_t n, bool inverse) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / double(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// In-place 2D transform of one HxW channel.
void fft2d(std::vector<cplx>& a, std::size_t h, std::size_t w, bool inverse) {
    for (std::size_t y = 0; y < h; ++y) fft1d(a.data() + y * w, w, inverse);
    std::vector<cplx> col(h);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) col[y] = a[y * w + x];
        fft1d(col.data(), h, inverse);
        for (std::size_t y = 0; y < h; ++y) a[y * w + x] = col[y];
    }
}

void check_extents(std::size_t h, std::size_t w, const char* op) {
    if (!is_power_of_two(h) || !is_power_of_two(w)) {
        throw std::invalid_argument(std::string(op) + ": extents " +
                                    std::to_string(h) + "x" + std::to_string(w) +
                                    " must be powers of two");
    }
}

// Full DFT of a real channel; caller reads whichever bins it needs.
std::vector<cplx> dft_real_channel(const double* src, std::size_t h, std::size_t w) {
    std::vector<cplx> buf(h * w);
    for (std::size_t i = 0; i < h * w; ++i) buf[i] = cplx(src[i], 0.0);
    fft2d(buf, h, w, false);
    return buf;
}

// Hermitian completion of stored bins followed by the unnormalized inverse.
std::vector<cplx> inverse_from_half(const double* re, const double* im,
                                    std::size_t h, std::size_t w, std::size_t wb) {
    std::vector<cplx> buf(h * w);
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < wb; ++v) {
            buf[u * w + v] = cplx(re[u * wb + v], im[u * wb + v]);
        }
        for (std::size_t v = wb; v < w; ++v) {
            const std::size_t mu = (h - u) % h;
            const std::size_t mv = w - v;
            buf[u * w + v] = std::conj(cplx(re[mu * wb + mv], im[mu * wb + mv]));
        }
    }
    fft2d(buf, h, w, true);
    return buf;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

Spectrum rfft2(const Tensor& x) {
    if (x.rank() != 3) {
        throw std::invalid_argument("rfft2: expected CxHxW, got " + shape_str(x.shape()));
    }
    const std::size_t c = x.extent(0), h = x.extent(1), w = x.extent(2);
    check_extents(h, w, "rfft2");
    const std::size_t wb = w / 2 + 1;
    Spectrum s;
    s.channels = c;
    s.height = h;
    s.width_bins = wb;
    s.re.resize(c * h * wb);
    s.im.resize(c * h * wb);
    for (std::size_t ch = 0; ch < c; ++ch) {
        auto buf = dft_real_channel(x.data().data() + ch * h * w, h, w);
        for (std::size_t u = 0; u < h; ++u) {
            for (std::size_t v = 0; v < wb; ++v) {
                s.re[(ch * h + u) * wb + v] = buf[u * w + v].real();
                s.im[(ch * h + u) * wb + v] = buf[u * w + v].imag();
            }
        }
    }
    return s;
}

Tensor irfft2(const Spectrum& s, std::size_t height, std::size_t width) {
    check_extents(height, width, "irfft2");
    if (s.height != height || s.width_bins != width / 2 + 1) {
        throw std::invalid_argument("irfft2: spectrum " + std::to_string(s.height) + "x" +
                                    std::to_string(s.width_bins) +
                                    " bins do not match requested " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
    const std::size_t wb = s.width_bins;
    const double norm = 1.0 / double(height * width);
    std::vector<double> out(s.channels * height * width);
    for (std::size_t ch = 0; ch < s.channels; ++ch) {
        auto buf = inverse_from_half(s.re.data() + ch * height * wb,
                                     s.im.data() + ch * height * wb, height, width, wb);
        for (std::size_t i = 0; i < height * width; ++i) {
            out[ch * height * width + i] = buf[i].real() * norm;
        }
    }
    return Tensor({s.channels, height, width}, std::move(out));
}

Spectrum spectral_pointwise_mul(const Spectrum& a, const Spectrum& b) {
    if (a.channels != b.channels || a.height != b.height ||
        a.width_bins != b.width_bins) {
        throw std::invalid_argument("spectral_pointwise_mul: bin shape mismatch");
    }
    Spectrum out = a;
    for (std::size_t i = 0; i < a.bins(); ++i) {
        out.re[i] = a.re[i] * b.re[i] - a.im[i] * b.im[i];
        out.im[i] = a.re[i] * b.im[i] + a.im[i] * b.re[i];
    }
    return out;
}

Tensor rfft2_stack(const Tensor& x) {
    Spectrum s = rfft2(x);
    const std::size_t c = s.channels, h = s.height, wb = s.width_bins;
    std::vector<double> z(2 * c * h * wb);
    std::copy(s.re.begin(), s.re.end(), z.begin());
    std::copy(s.im.begin(), s.im.end(), z.begin() + c * h * wb);
    Tensor result({2 * c, h, wb}, std::move(z));

    if (x.requires_grad() && Tape::active() != nullptr) {
        result.set_requires_grad(true);
        auto xn = x.node_ptr();
        auto on = result.node_ptr();
        const std::size_t w = x.extent(2);
        Tape::active()->record([xn, on, c, h, w, wb]() {
            // adjoint: real part of the unnormalized inverse of the gradient
            // bins embedded into an otherwise-zero full spectrum
            std::vector<cplx> buf(h * w);
            for (std::size_t ch = 0; ch < c; ++ch) {
                std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
                const double* gre = on->grad.data() + ch * h * wb;
                const double* gim = on->grad.data() + (c + ch) * h * wb;
                for (std::size_t u = 0; u < h; ++u) {
                    for (std::size_t v = 0; v < wb; ++v) {
                        buf[u * w + v] = cplx(gre[u * wb + v], gim[u * wb + v]);
                    }
                }
                fft2d(buf, h, w, true);
                for (std::size_t i = 0; i < h * w; ++i) {
                    xn->grad[ch * h * w + i] += buf[i].real();
                }
            }
        });
    }
    return result;
}

Tensor irfft2_unstack(const Tensor& z, std::size_t width) {
    if (z.rank() != 3 || z.extent(0) % 2 != 0) {
        throw std::invalid_argument("irfft2_unstack: expected 2CxHxWb, got " +
                                    shape_str(z.shape()));
    }
    const std::size_t c = z.extent(0) / 2, h = z.extent(1), wb = z.extent(2);
    if (wb != width / 2 + 1) {
        throw std::invalid_argument("irfft2_unstack: " + std::to_string(wb) +
                                    " bins do not match width " + std::to_string(width));
    }
    check_extents(h, width, "irfft2_unstack");
    Spectrum s;
    s.channels = c;
    s.height = h;
    s.width_bins = wb;
    s.re.assign(z.data().begin(), z.data().begin() + c * h * wb);
    s.im.assign(z.data().begin() + c * h * wb, z.data().end());
    Tensor result = irfft2(s, h, width);

    if (z.requires_grad() && Tape::active() != nullptr) {
        result.set_requires_grad(true);
        auto zn = z.node_ptr();
        auto on = result.node_ptr();
        const std::size_t w = width;
        Tape::active()->record([zn, on, c, h, w, wb]() {
            // adjoint: forward DFT of the output gradient; interior columns
            // pick up weight 2 from the Hermitian mirror
            const double norm = 1.0 / double(h * w);
            for (std::size_t ch = 0; ch < c; ++ch) {
                auto buf = dft_real_channel(on->grad.data() + ch * h * w, h, w);
                double* gre = zn->grad.data() + ch * h * wb;
                double* gim = zn->grad.data() + (c + ch) * h * wb;
                for (std::size_t u = 0; u < h; ++u) {
                    for (std::size_t v = 0; v < wb; ++v) {
                        const double wgt = (v == 0 || v == w / 2) ? norm : 2.0 * norm;
                        gre[u * wb + v] += wgt * buf[u * w + v].real();
                        gim[u * wb + v] += wgt * buf[u * w + v].imag();
                    }
                }
            }
        });
    }
    return result;
}

Tensor fourier_conv(const Tensor& x, const Tensor& w, const Tensor& b,
                    bool linear_mode) {
    if (x.rank() != 3) {
        throw std::invalid_argument("fourier_conv: expected CxHxW, got " +
                                    shape_str(x.shape()));
    }
    const std::size_t c = x.extent(0);
    if (w.rank() != 4 || w.extent(0) != 2 * c || w.extent(1) != 2 * c ||
        w.extent(2) != 1 || w.extent(3) != 1) {
        throw std::invalid_argument("fourier_conv: weight " + shape_str(w.shape()) +
                                    " does not match 2C=" + std::to_string(2 * c));
    }
    Tensor z = rfft2_stack(x);
    Tensor t = conv2d(z, w, b, 1, 0);
    Tensor u = linear_mode ? t : relu(t);
    return irfft2_unstack(u, x.extent(2));
}

}  // namespace samiqa
