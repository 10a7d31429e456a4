#include "retrofit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "retrofit/error.hpp"

namespace retrofit::ops {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 tensors, got " + a.shape_string() + " x " + b.shape_string());
    require(a.dim(1) == b.dim(0), "matmul inner dimensions differ: " + a.shape_string() + " x " + b.shape_string());
    const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    Tensor out({n, m});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = pa + i * k;
        double* orow = po + i * m;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = pb + l * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& gout, Tensor* ga, Tensor* gb) {
    const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    require(gout.rank() == 2 && gout.dim(0) == n && gout.dim(1) == m, "matmul backward: upstream shape mismatch");
    if (ga) {
        *ga = Tensor({n, k});
        double* pg = ga->data();
        const double* pb = b.data();
        const double* pu = gout.data();
        for (std::size_t i = 0; i < n; ++i) {
            const double* urow = pu + i * m;
            double* grow = pg + i * k;
            for (std::size_t l = 0; l < k; ++l) {
                const double* brow = pb + l * m;
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += urow[j] * brow[j];
                grow[l] = s;
            }
        }
    }
    if (gb) {
        *gb = Tensor({k, m});
        double* pg = gb->data();
        const double* pa = a.data();
        const double* pu = gout.data();
        for (std::size_t i = 0; i < n; ++i) {
            const double* arow = pa + i * k;
            const double* urow = pu + i * m;
            for (std::size_t l = 0; l < k; ++l) {
                const double av = arow[l];
                if (av == 0.0) continue;
                double* grow = pg + l * m;
                for (std::size_t j = 0; j < m; ++j) grow[j] += av * urow[j];
            }
        }
    }
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    require(bias.rank() == 1, "add_bias expects rank-1 bias");
    const std::size_t m = bias.size();
    require(x.rank() >= 1 && x.shape().back() == m,
            "add_bias: trailing dimension of " + x.shape_string() + " does not match bias length " + std::to_string(m));
    Tensor out = x;
    double* po = out.data();
    const double* pb = bias.data();
    const std::size_t rows = x.size() / m;
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = po + i * m;
        for (std::size_t j = 0; j < m; ++j) row[j] += pb[j];
    }
    return out;
}

void add_bias_backward(const Tensor& gout, std::size_t bias_len, Tensor* gx, Tensor* gbias) {
    if (gx) *gx = gout;
    if (gbias) {
        *gbias = Tensor({bias_len});
        double* pg = gbias->data();
        const double* pu = gout.data();
        const std::size_t rows = gout.size() / bias_len;
        for (std::size_t i = 0; i < rows; ++i) {
            const double* row = pu + i * bias_len;
            for (std::size_t j = 0; j < bias_len; ++j) pg[j] += row[j];
        }
    }
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t pad) {
    require(x.rank() == 4, "conv2d expects input [n,h,w,c], got " + x.shape_string());
    require(w.rank() == 4, "conv2d expects weights [kh,kw,cin,cout], got " + w.shape_string());
    const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2), cin = x.dim(3);
    const std::size_t kh = w.dim(0), kw = w.dim(1), cout = w.dim(3);
    require(w.dim(2) == cin, "conv2d: input channels " + std::to_string(cin) + " do not match kernel " + w.shape_string());
    require(bias.rank() == 1 && bias.size() == cout, "conv2d: bias length must equal output channels");
    require(h + 2 * pad >= kh && wd + 2 * pad >= kw, "conv2d: kernel larger than padded input");
    const std::size_t oh = h + 2 * pad - kh + 1;
    const std::size_t ow = wd + 2 * pad - kw + 1;
    Tensor out({n, oh, ow, cout});
    const double* px = x.data();
    const double* pw = w.data();
    const double* pb = bias.data();
    double* po = out.data();
    for (std::size_t in = 0; in < n; ++in) {
        const double* xi = px + in * h * wd * cin;
        double* oi = po + in * oh * ow * cout;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double* ocell = oi + (oy * ow + ox) * cout;
                for (std::size_t co = 0; co < cout; ++co) ocell[co] = pb[co];
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(pad);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                        const double* xcell = xi + (static_cast<std::size_t>(iy) * wd + static_cast<std::size_t>(ix)) * cin;
                        const double* wcell = pw + (ky * kw + kx) * cin * cout;
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xv = xcell[ci];
                            if (xv == 0.0) continue;
                            const double* wrow = wcell + ci * cout;
                            for (std::size_t co = 0; co < cout; ++co) ocell[co] += xv * wrow[co];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& x, const Tensor& w, std::size_t pad, const Tensor& gout, Tensor* gx, Tensor* gw,
                     Tensor* gbias) {
    const std::size_t n = x.dim(0), h = x.dim(1), wd = x.dim(2), cin = x.dim(3);
    const std::size_t kh = w.dim(0), kw = w.dim(1), cout = w.dim(3);
    const std::size_t oh = h + 2 * pad - kh + 1;
    const std::size_t ow = wd + 2 * pad - kw + 1;
    require(gout.rank() == 4 && gout.dim(0) == n && gout.dim(1) == oh && gout.dim(2) == ow && gout.dim(3) == cout,
            "conv2d backward: upstream shape mismatch");
    if (gx) *gx = Tensor({n, h, wd, cin});
    if (gw) *gw = Tensor(w.shape());
    if (gbias) *gbias = Tensor({cout});
    const double* px = x.data();
    const double* pw = w.data();
    const double* pu = gout.data();
    for (std::size_t in = 0; in < n; ++in) {
        const double* xi = px + in * h * wd * cin;
        const double* ui = pu + in * oh * ow * cout;
        double* gxi = gx ? gx->data() + in * h * wd * cin : nullptr;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double* ucell = ui + (oy * ow + ox) * cout;
                if (gbias) {
                    double* pgb = gbias->data();
                    for (std::size_t co = 0; co < cout; ++co) pgb[co] += ucell[co];
                }
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(pad);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                        const std::size_t cell = (static_cast<std::size_t>(iy) * wd + static_cast<std::size_t>(ix)) * cin;
                        const double* xcell = xi + cell;
                        const double* wcell = pw + (ky * kw + kx) * cin * cout;
                        double* gwcell = gw ? gw->data() + (ky * kw + kx) * cin * cout : nullptr;
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double* wrow = wcell + ci * cout;
                            double acc = 0.0;
                            for (std::size_t co = 0; co < cout; ++co) acc += wrow[co] * ucell[co];
                            if (gxi) gxi[cell + ci] += acc;
                            if (gwcell) {
                                const double xv = xcell[ci];
                                if (xv != 0.0) {
                                    double* gwrow = gwcell + ci * cout;
                                    for (std::size_t co = 0; co < cout; ++co) gwrow[co] += xv * ucell[co];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

Tensor maxpool2d(const Tensor& x, std::vector<std::size_t>* argmax) {
    require(x.rank() == 4, "maxpool2d expects input [n,h,w,c], got " + x.shape_string());
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    require(h % 2 == 0 && w % 2 == 0, "maxpool2d: height and width must be even, got " + x.shape_string());
    const std::size_t oh = h / 2, ow = w / 2;
    Tensor out({n, oh, ow, c});
    if (argmax) argmax->assign(out.size(), 0);
    const double* px = x.data();
    double* po = out.data();
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    double best = -1e300;
                    std::size_t best_idx = 0;
                    for (std::size_t dy = 0; dy < 2; ++dy) {
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            const std::size_t idx = ((in * h + (2 * oy + dy)) * w + (2 * ox + dx)) * c + ch;
                            if (px[idx] > best) {
                                best = px[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    const std::size_t oidx = ((in * oh + oy) * ow + ox) * c + ch;
                    po[oidx] = best;
                    if (argmax) (*argmax)[oidx] = best_idx;
                }
            }
        }
    }
    return out;
}

void maxpool2d_backward(const Tensor& x, const std::vector<std::size_t>& argmax, const Tensor& gout, Tensor* gx) {
    require(argmax.size() == gout.size(), "maxpool2d backward: argmax cache does not match upstream");
    *gx = Tensor(x.shape());
    double* pg = gx->data();
    const double* pu = gout.data();
    for (std::size_t i = 0; i < argmax.size(); ++i) pg[argmax[i]] += pu[i];
}

Tensor flatten(const Tensor& x) {
    require(x.rank() >= 1, "flatten expects at least rank 1");
    return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor softmax(const Tensor& logits) {
    require(logits.rank() == 2, "softmax expects [n,c], got " + logits.shape_string());
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    Tensor out({n, c});
    const double* pl = logits.data();
    double* po = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = pl + i * c;
        double* orow = po + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (std::size_t j = 0; j < c; ++j) orow[j] /= sum;
    }
    return out;
}

double cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    require(logits.rank() == 2, "cross_entropy expects [n,c], got " + logits.shape_string());
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    require(labels.size() == n, "cross_entropy: label count does not match batch");
    const double* pl = logits.data();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            throw ShapeError("cross_entropy: label " + std::to_string(y) + " outside [0," + std::to_string(c) + ")");
        }
        const double* row = pl + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
        total += std::log(lse) + mx - row[static_cast<std::size_t>(y)];
    }
    return total / static_cast<double>(n);
}

Tensor cross_entropy_backward(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    Tensor g = softmax(logits);
    double* pg = g.data();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        pg[i * c + static_cast<std::size_t>(labels[i])] -= 1.0;
        for (std::size_t j = 0; j < c; ++j) pg[i * c + j] *= inv_n;
    }
    return g;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    require(logits.rank() == 2, "argmax_rows expects [n,c]");
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    std::vector<int> out(n, 0);
    const double* pl = logits.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = pl + i * c;
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (row[j] > row[best]) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace retrofit::ops
