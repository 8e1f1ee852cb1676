#include "ied/nn/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ied::nn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

}  // namespace

Ref Graph::push(Tensor value) {
  Node n;
  n.value = std::move(value);
  if (round_)
    for (double& v : n.value.values) v = static_cast<double>(static_cast<float>(v));
  n.grad.assign(n.value.values.size(), 0.0);
  nodes_.push_back(std::move(n));
  return Ref{static_cast<int>(nodes_.size()) - 1};
}

Ref Graph::input(Tensor t) { return push(std::move(t)); }

Ref Graph::param(Parameter& p) {
  Ref r = push(p.tensor);  // copy of values; grads flow back to the parameter
  Node& n = node(r);
  n.value.grad.clear();
  n.bound = &p;
  Parameter* bound = &p;
  std::vector<double>* grad = &n.grad;
  n.back = [bound, grad]() {
    bound->tensor.ensure_grad();
    for (std::size_t i = 0; i < grad->size(); ++i)
      bound->tensor.grad[i] += (*grad)[i];
  };
  return r;
}

Ref Graph::conv1d_same(Ref xr, Ref wr, Ref br) {
  const Tensor& x = value(xr);
  const Tensor& w = value(wr);
  const Tensor& b = value(br);
  require(x.rank() == 2, "conv1d_same input must be Cin x L");
  require(w.rank() == 3, "conv1d_same weights must be Cout x Cin x K");
  require(b.rank() == 1, "conv1d_same bias must be Cout");
  const int cin = x.dim(0), len = x.dim(1);
  const int cout = w.dim(0), k = w.dim(2);
  require(w.dim(1) == cin, "conv1d_same weight Cin mismatch");
  require(b.dim(0) == cout, "conv1d_same bias Cout mismatch");
  require(k % 2 == 1, "conv1d_same kernel must be odd");
  require(len >= 1, "conv1d_same needs L >= 1");
  const int half = k / 2;

  Tensor y({cout, len});
  for (int co = 0; co < cout; ++co) {
    const double* wrow = &w.values[static_cast<std::size_t>(co) * cin * k];
    double* yrow = &y.values[static_cast<std::size_t>(co) * len];
    for (int t = 0; t < len; ++t) yrow[t] = b.values[static_cast<std::size_t>(co)];
    for (int ci = 0; ci < cin; ++ci) {
      const double* xrow = &x.values[static_cast<std::size_t>(ci) * len];
      const double* wk = wrow + static_cast<std::size_t>(ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        const double wv = wk[kk];
        if (wv == 0.0) continue;
        const int shift = kk - half;
        const int t0 = std::max(0, -shift);
        const int t1 = std::min(len, len - shift);
        for (int t = t0; t < t1; ++t) yrow[t] += wv * xrow[t + shift];
      }
    }
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  Node* wn = &node(wr);
  Node* bn = &node(br);
  on->back = [on, xn, wn, bn, cin, cout, len, k, half]() {
    const std::vector<double>& gy = on->grad;
    for (int co = 0; co < cout; ++co) {
      const double* gyrow = &gy[static_cast<std::size_t>(co) * len];
      double* gb = &bn->grad[static_cast<std::size_t>(co)];
      for (int t = 0; t < len; ++t) *gb += gyrow[t];
      for (int ci = 0; ci < cin; ++ci) {
        const double* xrow = &xn->value.values[static_cast<std::size_t>(ci) * len];
        const double* wk =
            &wn->value.values[(static_cast<std::size_t>(co) * cin + ci) * k];
        double* gw = &wn->grad[(static_cast<std::size_t>(co) * cin + ci) * k];
        double* gx = &xn->grad[static_cast<std::size_t>(ci) * len];
        for (int kk = 0; kk < k; ++kk) {
          const int shift = kk - half;
          const int t0 = std::max(0, -shift);
          const int t1 = std::min(len, len - shift);
          double acc = 0.0;
          const double wv = wk[kk];
          for (int t = t0; t < t1; ++t) {
            acc += gyrow[t] * xrow[t + shift];
            gx[t + shift] += gyrow[t] * wv;
          }
          gw[kk] += acc;
        }
      }
    }
  };
  return out;
}

Ref Graph::maxpool1d(Ref xr, int pool) {
  const Tensor& x = value(xr);
  require(x.rank() == 2, "maxpool1d input must be C x L");
  require(pool >= 1, "pool must be >= 1");
  const int c = x.dim(0), len = x.dim(1);
  require(len >= pool, "maxpool1d needs L >= pool");
  const int out_len = len / pool;

  Tensor y({c, out_len});
  auto argmax = std::make_shared<std::vector<int>>(
      static_cast<std::size_t>(c) * out_len);
  for (int ch = 0; ch < c; ++ch) {
    const double* xrow = &x.values[static_cast<std::size_t>(ch) * len];
    for (int t = 0; t < out_len; ++t) {
      int best = t * pool;
      for (int i = 1; i < pool; ++i)
        if (xrow[t * pool + i] > xrow[best]) best = t * pool + i;
      y.at(ch, t) = xrow[best];
      (*argmax)[static_cast<std::size_t>(ch) * out_len + t] = best;
    }
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, argmax, c, len, out_len]() {
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < out_len; ++t)
        xn->grad[static_cast<std::size_t>(ch) * len +
                 (*argmax)[static_cast<std::size_t>(ch) * out_len + t]] +=
            on->grad[static_cast<std::size_t>(ch) * out_len + t];
  };
  return out;
}

Ref Graph::upsample_repeat(Ref xr, int factor) {
  const Tensor& x = value(xr);
  require(x.rank() == 2, "upsample_repeat input must be C x L");
  require(factor >= 1, "factor must be >= 1");
  const int c = x.dim(0), len = x.dim(1);

  Tensor y({c, len * factor});
  for (int ch = 0; ch < c; ++ch)
    for (int t = 0; t < len; ++t)
      for (int i = 0; i < factor; ++i) y.at(ch, t * factor + i) = x.at(ch, t);

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, c, len, factor]() {
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < len; ++t) {
        double acc = 0.0;
        for (int i = 0; i < factor; ++i)
          acc += on->grad[(static_cast<std::size_t>(ch) * len + t) * factor + i];
        xn->grad[static_cast<std::size_t>(ch) * len + t] += acc;
      }
  };
  return out;
}

Ref Graph::dense(Ref xr, Ref wr, Ref br) {
  const Tensor& x = value(xr);
  const Tensor& w = value(wr);
  const Tensor& b = value(br);
  require(x.rank() == 1, "dense input must be rank 1");
  require(w.rank() == 2, "dense weights must be F x H");
  const int f = x.dim(0);
  require(w.dim(0) == f, "dense weight rows must match input size");
  const int h = w.dim(1);
  require(b.rank() == 1 && b.dim(0) == h, "dense bias must be H");

  Tensor y({h});
  for (int j = 0; j < h; ++j) y.values[static_cast<std::size_t>(j)] = b.values[static_cast<std::size_t>(j)];
  for (int i = 0; i < f; ++i) {
    const double xv = x.values[static_cast<std::size_t>(i)];
    const double* wrow = &w.values[static_cast<std::size_t>(i) * h];
    for (int j = 0; j < h; ++j) y.values[static_cast<std::size_t>(j)] += xv * wrow[j];
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  Node* wn = &node(wr);
  Node* bn = &node(br);
  on->back = [on, xn, wn, bn, f, h]() {
    const std::vector<double>& gy = on->grad;
    for (int j = 0; j < h; ++j) bn->grad[static_cast<std::size_t>(j)] += gy[static_cast<std::size_t>(j)];
    for (int i = 0; i < f; ++i) {
      const double xv = xn->value.values[static_cast<std::size_t>(i)];
      const double* wrow = &wn->value.values[static_cast<std::size_t>(i) * h];
      double* gwrow = &wn->grad[static_cast<std::size_t>(i) * h];
      double acc = 0.0;
      for (int j = 0; j < h; ++j) {
        gwrow[j] += xv * gy[static_cast<std::size_t>(j)];
        acc += wrow[j] * gy[static_cast<std::size_t>(j)];
      }
      xn->grad[static_cast<std::size_t>(i)] += acc;
    }
  };
  return out;
}

Ref Graph::activation(Ref xr, Act kind) {
  const Tensor& x = value(xr);
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double v = x.values[i];
    switch (kind) {
      case Act::tanh: y.values[i] = std::tanh(v); break;
      case Act::relu: y.values[i] = v > 0.0 ? v : 0.0; break;
      case Act::sigmoid: y.values[i] = 1.0 / (1.0 + std::exp(-v)); break;
    }
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, kind]() {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      const double yv = on->value.values[i];
      double d = 0.0;
      switch (kind) {
        case Act::tanh: d = 1.0 - yv * yv; break;
        case Act::relu: d = xn->value.values[i] > 0.0 ? 1.0 : 0.0; break;
        case Act::sigmoid: d = yv * (1.0 - yv); break;
      }
      xn->grad[i] += on->grad[i] * d;
    }
  };
  return out;
}

Ref Graph::global_avg_pool(Ref xr) {
  const Tensor& x = value(xr);
  require(x.rank() == 2, "global_avg_pool input must be C x L");
  const int c = x.dim(0), len = x.dim(1);
  require(len >= 1, "global_avg_pool needs L >= 1");

  Tensor y({c});
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (int t = 0; t < len; ++t) acc += x.at(ch, t);
    y.values[static_cast<std::size_t>(ch)] = acc / len;
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, c, len]() {
    for (int ch = 0; ch < c; ++ch) {
      const double g = on->grad[static_cast<std::size_t>(ch)] / len;
      double* gx = &xn->grad[static_cast<std::size_t>(ch) * len];
      for (int t = 0; t < len; ++t) gx[t] += g;
    }
  };
  return out;
}

Ref Graph::transpose(Ref xr) {
  const Tensor& x = value(xr);
  require(x.rank() == 2, "transpose input must be rank 2");
  const int r = x.dim(0), c = x.dim(1);
  Tensor y({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) y.at(j, i) = x.at(i, j);

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, r, c]() {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        xn->grad[static_cast<std::size_t>(i) * c + j] +=
            on->grad[static_cast<std::size_t>(j) * r + i];
  };
  return out;
}

Ref Graph::add(Ref ar, Ref br) {
  const Tensor& a = value(ar);
  const Tensor& b = value(br);
  require(a.shape == b.shape, "add operands must share a shape");
  Tensor y = a;
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += b.values[i];

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* an = &node(ar);
  Node* bn = &node(br);
  on->back = [on, an, bn]() {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      an->grad[i] += on->grad[i];
      bn->grad[i] += on->grad[i];
    }
  };
  return out;
}

Ref Graph::concat(Ref ar, Ref br) {
  const Tensor& a = value(ar);
  const Tensor& b = value(br);
  require(a.rank() == 1 && b.rank() == 1, "concat expects rank-1 operands");
  Tensor y({a.dim(0) + b.dim(0)});
  std::copy(a.values.begin(), a.values.end(), y.values.begin());
  std::copy(b.values.begin(), b.values.end(),
            y.values.begin() + a.values.size());

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* an = &node(ar);
  Node* bn = &node(br);
  const std::size_t na = a.values.size();
  on->back = [on, an, bn, na]() {
    for (std::size_t i = 0; i < na; ++i) an->grad[i] += on->grad[i];
    for (std::size_t i = 0; i < bn->grad.size(); ++i)
      bn->grad[i] += on->grad[na + i];
  };
  return out;
}

Ref Graph::concat_cols(Ref ar, Ref br) {
  const Tensor& a = value(ar);
  const Tensor& b = value(br);
  require(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0),
          "concat_cols expects L x Fa and L x Fb");
  const int l = a.dim(0), fa = a.dim(1), fb = b.dim(1);
  Tensor y({l, fa + fb});
  for (int t = 0; t < l; ++t) {
    for (int i = 0; i < fa; ++i) y.at(t, i) = a.at(t, i);
    for (int i = 0; i < fb; ++i) y.at(t, fa + i) = b.at(t, i);
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* an = &node(ar);
  Node* bn = &node(br);
  on->back = [on, an, bn, l, fa, fb]() {
    for (int t = 0; t < l; ++t) {
      for (int i = 0; i < fa; ++i)
        an->grad[static_cast<std::size_t>(t) * fa + i] +=
            on->grad[static_cast<std::size_t>(t) * (fa + fb) + i];
      for (int i = 0; i < fb; ++i)
        bn->grad[static_cast<std::size_t>(t) * fb + i] +=
            on->grad[static_cast<std::size_t>(t) * (fa + fb) + fa + i];
    }
  };
  return out;
}

Ref Graph::dropout(Ref xr, double rate, Mode mode, Rng* rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0, 1)");
  if (mode == Mode::infer || rate == 0.0) return xr;  // exact identity
  require(rng != nullptr, "train-mode dropout needs a random stream");

  const Tensor& x = value(xr);
  const double scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.values.size());
  Tensor y = x;
  for (std::size_t i = 0; i < y.values.size(); ++i) {
    const double keep = rng->uniform() < rate ? 0.0 : scale;
    (*mask)[i] = keep;
    y.values[i] *= keep;
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  on->back = [on, xn, mask]() {
    for (std::size_t i = 0; i < on->grad.size(); ++i)
      xn->grad[i] += on->grad[i] * (*mask)[i];
  };
  return out;
}

Ref Graph::lstm_seq(Ref xr, Ref wxr, Ref whr, Ref br, bool reverse_time) {
  const Tensor& x = value(xr);
  const Tensor& wx = value(wxr);
  const Tensor& wh = value(whr);
  const Tensor& b = value(br);
  require(x.rank() == 2, "lstm input must be L x F");
  const int len = x.dim(0), f = x.dim(1);
  require(len >= 1, "lstm needs L >= 1");
  require(wx.rank() == 2 && wx.dim(0) == f, "lstm input kernel must be F x 4H");
  const int h4 = wx.dim(1);
  require(h4 % 4 == 0, "lstm kernel columns must be 4H");
  const int h = h4 / 4;
  require(wh.rank() == 2 && wh.dim(0) == h && wh.dim(1) == h4,
          "lstm recurrent kernel must be H x 4H");
  require(b.rank() == 1 && b.dim(0) == h4, "lstm bias must be 4H");

  struct Ctx {
    std::vector<double> gates;   // L x 4H, post-activation [i f g o]
    std::vector<double> cells;   // L x H
    std::vector<double> tanh_c;  // L x H
  };
  auto ctx = std::make_shared<Ctx>();
  ctx->gates.assign(static_cast<std::size_t>(len) * h4, 0.0);
  ctx->cells.assign(static_cast<std::size_t>(len) * h, 0.0);
  ctx->tanh_c.assign(static_cast<std::size_t>(len) * h, 0.0);

  Tensor y({len, h});
  std::vector<double> z(static_cast<std::size_t>(h4));

  for (int step = 0; step < len; ++step) {
    const int t = reverse_time ? len - 1 - step : step;
    const int t_prev = reverse_time ? t + 1 : t - 1;
    const bool has_prev = step > 0;

    for (int j = 0; j < h4; ++j) z[static_cast<std::size_t>(j)] = b.values[static_cast<std::size_t>(j)];
    const double* xrow = &x.values[static_cast<std::size_t>(t) * f];
    for (int i = 0; i < f; ++i) {
      const double xv = xrow[i];
      const double* wrow = &wx.values[static_cast<std::size_t>(i) * h4];
      for (int j = 0; j < h4; ++j) z[static_cast<std::size_t>(j)] += xv * wrow[j];
    }
    if (has_prev) {
      const double* hprev = &y.values[static_cast<std::size_t>(t_prev) * h];
      for (int i = 0; i < h; ++i) {
        const double hv = hprev[i];
        const double* wrow = &wh.values[static_cast<std::size_t>(i) * h4];
        for (int j = 0; j < h4; ++j) z[static_cast<std::size_t>(j)] += hv * wrow[j];
      }
    }

    double* gates = &ctx->gates[static_cast<std::size_t>(t) * h4];
    double* cells = &ctx->cells[static_cast<std::size_t>(t) * h];
    double* tanhc = &ctx->tanh_c[static_cast<std::size_t>(t) * h];
    const double* cprev =
        has_prev ? &ctx->cells[static_cast<std::size_t>(t_prev) * h] : nullptr;
    for (int j = 0; j < h; ++j) {
      const double gi = 1.0 / (1.0 + std::exp(-z[static_cast<std::size_t>(j)]));
      const double gf = 1.0 / (1.0 + std::exp(-z[static_cast<std::size_t>(h + j)]));
      const double gg = std::tanh(z[static_cast<std::size_t>(2 * h + j)]);
      const double go = 1.0 / (1.0 + std::exp(-z[static_cast<std::size_t>(3 * h + j)]));
      gates[j] = gi;
      gates[h + j] = gf;
      gates[2 * h + j] = gg;
      gates[3 * h + j] = go;
      const double c = gf * (has_prev ? cprev[j] : 0.0) + gi * gg;
      cells[j] = c;
      tanhc[j] = std::tanh(c);
      y.at(t, j) = go * tanhc[j];
    }
  }

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  Node* wxn = &node(wxr);
  Node* whn = &node(whr);
  Node* bn = &node(br);
  on->back = [on, xn, wxn, whn, bn, ctx, len, f, h, h4, reverse_time]() {
    std::vector<double> dh(static_cast<std::size_t>(h), 0.0);   // carried h grad
    std::vector<double> dc(static_cast<std::size_t>(h), 0.0);   // carried c grad
    std::vector<double> dz(static_cast<std::size_t>(h4));
    for (int step = len - 1; step >= 0; --step) {
      const int t = reverse_time ? len - 1 - step : step;
      const int t_prev = reverse_time ? t + 1 : t - 1;
      const bool has_prev = step > 0;

      const double* gates = &ctx->gates[static_cast<std::size_t>(t) * h4];
      const double* tanhc = &ctx->tanh_c[static_cast<std::size_t>(t) * h];
      const double* cprev =
          has_prev ? &ctx->cells[static_cast<std::size_t>(t_prev) * h] : nullptr;

      for (int j = 0; j < h; ++j) {
        const double gi = gates[j], gf = gates[h + j], gg = gates[2 * h + j],
                     go = gates[3 * h + j];
        const double dh_t = on->grad[static_cast<std::size_t>(t) * h + j] + dh[static_cast<std::size_t>(j)];
        const double dc_t =
            dh_t * go * (1.0 - tanhc[j] * tanhc[j]) + dc[static_cast<std::size_t>(j)];
        const double di = dc_t * gg;
        const double df = dc_t * (has_prev ? cprev[j] : 0.0);
        const double dg = dc_t * gi;
        const double do_ = dh_t * tanhc[j];
        dz[static_cast<std::size_t>(j)] = di * gi * (1.0 - gi);
        dz[static_cast<std::size_t>(h + j)] = df * gf * (1.0 - gf);
        dz[static_cast<std::size_t>(2 * h + j)] = dg * (1.0 - gg * gg);
        dz[static_cast<std::size_t>(3 * h + j)] = do_ * go * (1.0 - go);
        dc[static_cast<std::size_t>(j)] = dc_t * gf;
      }

      for (int j = 0; j < h4; ++j) bn->grad[static_cast<std::size_t>(j)] += dz[static_cast<std::size_t>(j)];

      const double* xrow = &xn->value.values[static_cast<std::size_t>(t) * f];
      double* gx = &xn->grad[static_cast<std::size_t>(t) * f];
      for (int i = 0; i < f; ++i) {
        const double* wrow = &wxn->value.values[static_cast<std::size_t>(i) * h4];
        double* gwrow = &wxn->grad[static_cast<std::size_t>(i) * h4];
        double acc = 0.0;
        for (int j = 0; j < h4; ++j) {
          gwrow[j] += xrow[i] * dz[static_cast<std::size_t>(j)];
          acc += wrow[j] * dz[static_cast<std::size_t>(j)];
        }
        gx[i] += acc;
      }

      if (has_prev) {
        const double* hprev = &on->value.values[static_cast<std::size_t>(t_prev) * h];
        for (int i = 0; i < h; ++i) {
          const double* wrow = &whn->value.values[static_cast<std::size_t>(i) * h4];
          double* gwrow = &whn->grad[static_cast<std::size_t>(i) * h4];
          double acc = 0.0;
          for (int j = 0; j < h4; ++j) {
            gwrow[j] += hprev[i] * dz[static_cast<std::size_t>(j)];
            acc += wrow[j] * dz[static_cast<std::size_t>(j)];
          }
          dh[static_cast<std::size_t>(i)] = acc;
        }
      }
    }
  };
  return out;
}

Ref Graph::bce_loss(Ref pr, std::vector<double> labels) {
  const Tensor& p = value(pr);
  require(p.rank() == 1, "bce_loss expects a rank-1 probability vector");
  require(p.values.size() == labels.size(), "bce_loss batch sizes must match");
  const std::size_t n = labels.size();

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pc = std::clamp(p.values[i], kBceClip, 1.0 - kBceClip);
    acc += -(labels[i] * std::log(pc) + (1.0 - labels[i]) * std::log(1.0 - pc));
  }
  Tensor y({1});
  y.values[0] = acc / static_cast<double>(n);

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* pn = &node(pr);
  auto ls = std::make_shared<std::vector<double>>(std::move(labels));
  on->back = [on, pn, ls, n]() {
    const double g = on->grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double raw = pn->value.values[i];
      if (raw < kBceClip || raw > 1.0 - kBceClip) continue;  // clipped: flat
      pn->grad[i] += g * (-(*ls)[i] / raw + (1.0 - (*ls)[i]) / (1.0 - raw));
    }
  };
  return out;
}

Ref Graph::weighted_sum(Ref xr, std::vector<double> w) {
  const Tensor& x = value(xr);
  require(x.values.size() == w.size(), "weighted_sum weight count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x.values[i];
  Tensor y({1});
  y.values[0] = acc;

  Ref out = push(std::move(y));
  Node* on = &node(out);
  Node* xn = &node(xr);
  auto ws = std::make_shared<std::vector<double>>(std::move(w));
  on->back = [on, xn, ws]() {
    for (std::size_t i = 0; i < ws->size(); ++i)
      xn->grad[i] += on->grad[0] * (*ws)[i];
  };
  return out;
}

void Graph::backward(Ref scalar, double seed) {
  Node& loss = node(scalar);
  if (loss.value.numel() != 1)
    throw Error(ErrorCode::ShapeMismatch, "backward needs a scalar node");
  loss.grad[0] += seed;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i)
    if (nodes_[static_cast<std::size_t>(i)].back) nodes_[static_cast<std::size_t>(i)].back();
}

double bce_loss(const std::vector<double>& probs, const std::vector<double>& labels) {
  if (probs.size() != labels.size())
    throw Error(ErrorCode::ShapeMismatch, "bce_loss batch sizes must match");
  if (probs.empty())
    throw Error(ErrorCode::ShapeMismatch, "bce_loss needs at least one element");
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double pc = std::clamp(probs[i], kBceClip, 1.0 - kBceClip);
    acc += -(labels[i] * std::log(pc) + (1.0 - labels[i]) * std::log(1.0 - pc));
  }
  return acc / static_cast<double>(probs.size());
}

}  // namespace ied::nn
