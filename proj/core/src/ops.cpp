#include "fpp/ops.hpp"

#include <algorithm>
#include <cmath>

#include "fpp/phase.hpp"

namespace fpp::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

void require_chw(const Tensor& t, const char* what) {
  if (t.shape().size() != 3)
    throw std::invalid_argument(std::string(what) + ": expected CxHxW tensor");
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto pa = a.impl(), pb = b.impl();
  Tensor out = make_op_output(a.shape(), {pa, pb}, [pa, pb](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) pa->accumulate_grad(i, self.grad[i]);
      if (pb->requires_grad) pb->accumulate_grad(i, self.grad[i]);
    }
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = pa->data[i] + pb->data[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto pa = a.impl(), pb = b.impl();
  Tensor out = make_op_output(a.shape(), {pa, pb}, [pa, pb](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) pa->accumulate_grad(i, self.grad[i]);
      if (pb->requires_grad) pb->accumulate_grad(i, -self.grad[i]);
    }
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = pa->data[i] - pb->data[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto pa = a.impl(), pb = b.impl();
  Tensor out = make_op_output(a.shape(), {pa, pb}, [pa, pb](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) pa->accumulate_grad(i, self.grad[i] * pb->data[i]);
      if (pb->requires_grad) pb->accumulate_grad(i, self.grad[i] * pa->data[i]);
    }
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = pa->data[i] * pb->data[i];
  return out;
}

Tensor add_scalar(const Tensor& a, double s) {
  auto pa = a.impl();
  Tensor out = make_op_output(a.shape(), {pa}, [pa](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      pa->accumulate_grad(i, self.grad[i]);
  });
  for (std::size_t i = 0; i < out.numel(); ++i) out.data()[i] = pa->data[i] + s;
  return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
  auto pa = a.impl();
  Tensor out = make_op_output(a.shape(), {pa}, [pa, s](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      pa->accumulate_grad(i, self.grad[i] * s);
  });
  for (std::size_t i = 0; i < out.numel(); ++i) out.data()[i] = pa->data[i] * s;
  return out;
}

Tensor relu(const Tensor& a) {
  auto pa = a.impl();
  Tensor out = make_op_output(a.shape(), {pa}, [pa](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (pa->data[i] > 0.0) pa->accumulate_grad(i, self.grad[i]);
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = pa->data[i] > 0.0 ? pa->data[i] : 0.0;
  return out;
}

Tensor leaky_relu(const Tensor& a, double negative_slope) {
  auto pa = a.impl();
  Tensor out =
      make_op_output(a.shape(), {pa}, [pa, negative_slope](TensorImpl& self) {
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          pa->accumulate_grad(
              i, self.grad[i] * (pa->data[i] > 0.0 ? 1.0 : negative_slope));
      });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] =
        pa->data[i] > 0.0 ? pa->data[i] : negative_slope * pa->data[i];
  return out;
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo >= hi) throw std::invalid_argument("clamp needs lo < hi");
  auto pa = a.impl();
  Tensor out = make_op_output(a.shape(), {pa}, [pa, lo, hi](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (pa->data[i] > lo && pa->data[i] < hi)
        pa->accumulate_grad(i, self.grad[i]);
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = std::clamp(pa->data[i], lo, hi);
  return out;
}

Tensor sigmoid(const Tensor& a) {
  auto pa = a.impl();
  Tensor out = make_op_output(a.shape(), {pa}, [pa](TensorImpl& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = stable_sigmoid(pa->data[i]);
      pa->accumulate_grad(i, self.grad[i] * s * (1.0 - s));
    }
  });
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = stable_sigmoid(pa->data[i]);
  return out;
}

Tensor sum(const Tensor& a) {
  auto pa = a.impl();
  Tensor out = make_op_output({1}, {pa}, [pa](TensorImpl& self) {
    const double g = self.grad[0];
    pa->ensure_grad();
    for (std::size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += g;
  });
  double acc = 0.0;
  for (double v : pa->data) acc += v;
  out.data()[0] = acc;
  return out;
}

namespace {

// Input padded by one ring of zeros per side; lets the hot loops run without
// per-pixel border branches. K is small and odd (3 or 5).
std::vector<double> zero_pad(const std::vector<double>& src, std::size_t channels,
                             std::size_t h, std::size_t w, std::size_t pad) {
  const std::size_t ph = h + 2 * pad, pw = w + 2 * pad;
  std::vector<double> dst(channels * ph * pw, 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < h; ++y) {
      const double* s = src.data() + (c * h + y) * w;
      double* d = dst.data() + (c * ph + y + pad) * pw + pad;
      std::copy(s, s + w, d);
    }
  return dst;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require_chw(x, "conv2d input");
  if (w.shape().size() != 4)
    throw std::invalid_argument("conv2d weight must be Cout x Cin x K x K");
  const std::size_t cin = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  const std::size_t cout = w.shape()[0], k = w.shape()[2];
  if (w.shape()[1] != cin || w.shape()[3] != k)
    throw std::invalid_argument("conv2d weight shape mismatch");
  if (k % 2 == 0) throw std::invalid_argument("conv2d kernel size must be odd");
  if (bias.shape() != std::vector<std::size_t>{cout})
    throw std::invalid_argument("conv2d bias shape mismatch");

  const std::size_t pad = k / 2;
  const std::size_t pw = wd + 2 * pad;
  auto px = x.impl(), pwt = w.impl(), pb = bias.impl();
  auto padded = std::make_shared<std::vector<double>>(
      zero_pad(px->data, cin, h, wd, pad));

  Tensor out = make_op_output(
      {cout, h, wd}, {px, pwt, pb},
      [px, pwt, pb, padded, cin, cout, h, wd, k, pad, pw](TensorImpl& self) {
        const std::size_t ph = h + 2 * pad;
        // d bias
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (std::size_t oc = 0; oc < cout; ++oc) {
            double acc = 0.0;
            const double* g = self.grad.data() + oc * h * wd;
            for (std::size_t i = 0; i < h * wd; ++i) acc += g[i];
            pb->grad[oc] += acc;
          }
        }
        // d weight: correlate padded input with output gradient
        if (pwt->requires_grad) {
          pwt->ensure_grad();
          for (std::size_t oc = 0; oc < cout; ++oc)
            for (std::size_t ic = 0; ic < cin; ++ic)
              for (std::size_t ky = 0; ky < k; ++ky)
                for (std::size_t kx = 0; kx < k; ++kx) {
                  double acc = 0.0;
                  for (std::size_t y = 0; y < h; ++y) {
                    const double* in_row =
                        padded->data() + (ic * ph + y + ky) * pw + kx;
                    const double* g_row = self.grad.data() + (oc * h + y) * wd;
                    for (std::size_t xw = 0; xw < wd; ++xw)
                      acc += in_row[xw] * g_row[xw];
                  }
                  pwt->grad[((oc * cin + ic) * k + ky) * k + kx] += acc;
                }
        }
        // d input: full correlation of output gradient with flipped kernel,
        // accumulated into a padded scratch then cropped.
        if (px->requires_grad) {
          px->ensure_grad();
          std::vector<double> dpad(cin * ph * pw, 0.0);
          for (std::size_t oc = 0; oc < cout; ++oc)
            for (std::size_t ic = 0; ic < cin; ++ic)
              for (std::size_t ky = 0; ky < k; ++ky)
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const double wv = pwt->data[((oc * cin + ic) * k + ky) * k + kx];
                  if (wv == 0.0) continue;
                  for (std::size_t y = 0; y < h; ++y) {
                    double* d_row = dpad.data() + (ic * ph + y + ky) * pw + kx;
                    const double* g_row = self.grad.data() + (oc * h + y) * wd;
                    for (std::size_t xw = 0; xw < wd; ++xw)
                      d_row[xw] += wv * g_row[xw];
                  }
                }
          for (std::size_t ic = 0; ic < cin; ++ic)
            for (std::size_t y = 0; y < h; ++y) {
              const double* d_row = dpad.data() + (ic * ph + y + pad) * pw + pad;
              double* g_row = px->grad.data() + (ic * h + y) * wd;
              for (std::size_t xw = 0; xw < wd; ++xw) g_row[xw] += d_row[xw];
            }
        }
      });

  // Forward: shift-and-accumulate, one AXPY row per kernel tap.
  const std::size_t ph = h + 2 * pad;
  for (std::size_t oc = 0; oc < cout; ++oc) {
    double* out_base = out.data().data() + oc * h * wd;
    const double b = pb->data[oc];
    for (std::size_t i = 0; i < h * wd; ++i) out_base[i] = b;
    for (std::size_t ic = 0; ic < cin; ++ic)
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double wv = pwt->data[((oc * cin + ic) * k + ky) * k + kx];
          if (wv == 0.0) continue;
          for (std::size_t y = 0; y < h; ++y) {
            const double* in_row = padded->data() + (ic * ph + y + ky) * pw + kx;
            double* out_row = out_base + y * wd;
            for (std::size_t xw = 0; xw < wd; ++xw)
              out_row[xw] += wv * in_row[xw];
          }
        }
  }
  return out;
}

Tensor avg_pool2(const Tensor& x) {
  require_chw(x, "avg_pool2");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (h % 2 != 0 || w % 2 != 0)
    throw std::invalid_argument("avg_pool2 needs even spatial dimensions");
  const std::size_t oh = h / 2, ow = w / 2;
  auto px = x.impl();
  Tensor out = make_op_output({c, oh, ow}, {px}, [px, c, h, w, oh, ow](TensorImpl& self) {
    px->ensure_grad();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xw = 0; xw < ow; ++xw) {
          const double g = 0.25 * self.grad[(ch * oh + y) * ow + xw];
          double* g0 = px->grad.data() + (ch * h + 2 * y) * w + 2 * xw;
          double* g1 = g0 + w;
          g0[0] += g; g0[1] += g; g1[0] += g; g1[1] += g;
        }
  });
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xw = 0; xw < ow; ++xw) {
        const double* r0 = px->data.data() + (ch * h + 2 * y) * w + 2 * xw;
        const double* r1 = r0 + w;
        out.data()[(ch * oh + y) * ow + xw] = 0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
      }
  return out;
}

Tensor upsample2(const Tensor& x) {
  require_chw(x, "upsample2");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const std::size_t oh = h * 2, ow = w * 2;
  auto px = x.impl();
  Tensor out = make_op_output({c, oh, ow}, {px}, [px, c, h, w, oh, ow](TensorImpl& self) {
    px->ensure_grad();
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xw = 0; xw < w; ++xw) {
          const double* g0 = self.grad.data() + (ch * oh + 2 * y) * ow + 2 * xw;
          const double* g1 = g0 + ow;
          px->grad[(ch * h + y) * w + xw] += g0[0] + g0[1] + g1[0] + g1[1];
        }
  });
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xw = 0; xw < w; ++xw) {
        const double v = px->data[(ch * h + y) * w + xw];
        double* o0 = out.data().data() + (ch * oh + 2 * y) * ow + 2 * xw;
        double* o1 = o0 + ow;
        o0[0] = v; o0[1] = v; o1[0] = v; o1[1] = v;
      }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_chw(a, "concat_channels");
  require_chw(b, "concat_channels");
  if (a.shape()[1] != b.shape()[1] || a.shape()[2] != b.shape()[2])
    throw std::invalid_argument("concat_channels: spatial shape mismatch");
  const std::size_t ca = a.shape()[0], cb = b.shape()[0];
  const std::size_t h = a.shape()[1], w = a.shape()[2];
  auto pa = a.impl(), pb = b.impl();
  const std::size_t na = ca * h * w;
  Tensor out = make_op_output({ca + cb, h, w}, {pa, pb}, [pa, pb, na](TensorImpl& self) {
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < na; ++i) pa->grad[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = na; i < self.grad.size(); ++i)
        pb->grad[i - na] += self.grad[i];
    }
  });
  std::copy(pa->data.begin(), pa->data.end(), out.data().begin());
  std::copy(pb->data.begin(), pb->data.end(),
            out.data().begin() + static_cast<std::ptrdiff_t>(na));
  return out;
}

Tensor circular_bilinear_sample(const Grid& phase_table, const Tensor& x_p,
                                const Grid& y_p, const Mask& mask) {
  require_chw(x_p, "circular_bilinear_sample");
  if (x_p.shape()[0] != 1)
    throw std::invalid_argument("circular_bilinear_sample expects one channel");
  const std::size_t h = x_p.shape()[1], w = x_p.shape()[2];
  if (y_p.rows() != h || y_p.cols() != w || mask.rows() != h || mask.cols() != w)
    throw std::invalid_argument("circular_bilinear_sample: coordinate shape mismatch");

  const std::size_t th = phase_table.rows(), tw = phase_table.cols();
  auto px = x_p.impl();

  // The per-pixel derivative is cheap to produce alongside the forward pass;
  // stash it for the backward closure.
  auto dval_dx = std::make_shared<std::vector<double>>(h * w, 0.0);

  Tensor out = make_op_output({1, h, w}, {px}, [px, dval_dx](TensorImpl& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      px->grad[i] += self.grad[i] * (*dval_dx)[i];
  });

  for (std::size_t i = 0; i < h * w; ++i) {
    if (!mask[i]) {
      out.data()[i] = 0.0;
      continue;
    }
    const double xf = px->data[i];
    const double yf = y_p[i];
    if (xf < 0.0 || xf > static_cast<double>(tw - 1) || yf < 0.0 ||
        yf > static_cast<double>(th - 1)) {
      out.data()[i] = 0.0;
      continue;
    }
    const auto x0 = static_cast<std::size_t>(xf);
    const auto y0 = static_cast<std::size_t>(yf);
    const std::size_t x1 = std::min(x0 + 1, tw - 1);
    const std::size_t y1 = std::min(y0 + 1, th - 1);
    const double tx = xf - static_cast<double>(x0);
    const double ty = yf - static_cast<double>(y0);

    const double p00 = phase_table(y0, x0), p01 = phase_table(y0, x1);
    const double p10 = phase_table(y1, x0), p11 = phase_table(y1, x1);

    // Angular lerp rows along x, then across y; wrapped differences keep
    // every step on the short arc, so seams between p01 and p00 interpolate
    // through +-pi instead of through 0.
    const double dx_top = phase::wrap(p01 - p00);
    const double dx_bot = phase::wrap(p11 - p10);
    const double top = p00 + tx * dx_top;
    const double bot = p10 + tx * dx_bot;
    const double dy = phase::wrap(bot - top);
    out.data()[i] = phase::wrap(top + ty * dy);
    (*dval_dx)[i] = dx_top + ty * (dx_bot - dx_top);
  }
  return out;
}

Tensor masked_l1_mean(const Tensor& pred, const Grid& target, const Mask& mask,
                      bool circular) {
  require_chw(pred, "masked_l1_mean");
  if (pred.shape()[0] != 1)
    throw std::invalid_argument("masked_l1_mean expects one channel");
  const std::size_t h = pred.shape()[1], w = pred.shape()[2];
  if (target.rows() != h || target.cols() != w || mask.rows() != h ||
      mask.cols() != w)
    throw std::invalid_argument("masked_l1_mean: shape mismatch");

  const std::size_t count = count_true(mask);
  if (count == 0) throw std::invalid_argument("masked_l1_mean: empty mask");

  auto pp = pred.impl();
  auto residual_sign = std::make_shared<std::vector<double>>(h * w, 0.0);

  Tensor out = make_op_output({1}, {pp}, [pp, residual_sign, count](TensorImpl& self) {
    if (!pp->requires_grad) return;
    pp->ensure_grad();
    const double g = self.grad[0] / static_cast<double>(count);
    for (std::size_t i = 0; i < pp->grad.size(); ++i)
      pp->grad[i] += g * (*residual_sign)[i];
  });

  double acc = 0.0;
  for (std::size_t i = 0; i < h * w; ++i) {
    if (!mask[i]) continue;
    double r = pp->data[i] - target[i];
    if (circular) r = phase::wrap(r);
    acc += std::abs(r);
    (*residual_sign)[i] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  }
  out.data()[0] = acc / static_cast<double>(count);
  return out;
}

}  // namespace fpp::nn
