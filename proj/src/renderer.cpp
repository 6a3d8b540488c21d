// Copyright 2026 The clanerf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clanerf/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clanerf/error.hpp"

namespace clanerf {

void RenderConfig::validate() const {
  if (k_coarse < 2) fail(ErrorCode::kInvalidArgument, "k_coarse must be at least 2");
  if (k_fine < 0) fail(ErrorCode::kInvalidArgument, "k_fine must be nonnegative");
  if (!(t_near >= 0.0) || !(t_far > t_near)) fail(ErrorCode::kInvalidArgument, "need 0 <= t_near < t_far");
  if (ray_chunk < 1) fail(ErrorCode::kInvalidArgument, "ray_chunk must be positive");
}

int PixelResult::label() const {
  return static_cast<int>(std::max_element(prob.begin(), prob.end()) - prob.begin());
}

std::vector<double> sample_stratified(const RenderConfig& config, const Ray& ray, Rng& rng) {
  const int k = config.k_coarse;
  const double width = (ray.t_far - ray.t_near) / k;
  std::vector<double> t(k);
  for (int i = 0; i < k; ++i) {
    const double u = config.jitter ? uniform01(rng) : 0.5;
    t[i] = ray.t_near + (i + u) * width;
  }
  return t;
}

std::vector<double> sample_hierarchical(std::span<const double> weights, std::span<const double> t, double t_far,
                                        int k_fine, bool jitter, Rng& rng) {
  const std::size_t n = t.size();
  if (weights.size() != n || n == 0) fail(ErrorCode::kContract, "weights and samples differ in length");
  std::vector<double> edges(t.begin(), t.end());
  edges.push_back(t_far);
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      fail(ErrorCode::kContract, "sampling weights must be finite and nonnegative");
    }
    w[k] = weights[k];
    total += w[k];
  }
  if (!(total > 0.0)) {
    for (std::size_t k = 0; k < n; ++k) w[k] = std::max(0.0, edges[k + 1] - edges[k]);
    total = std::accumulate(w.begin(), w.end(), 0.0);
  }
  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) cdf[k + 1] = cdf[k] + w[k] / total;
  cdf[n] = 1.0;

  std::vector<double> out(t.begin(), t.end());
  out.reserve(n + k_fine);
  for (int j = 0; j < k_fine; ++j) {
    const double u = (j + (jitter ? uniform01(rng) : 0.5)) / k_fine;
    std::size_t idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::clamp<std::size_t>(idx, 1, n) - 1;
    const double span = cdf[idx + 1] - cdf[idx];
    const double frac = span > 0.0 ? std::clamp((u - cdf[idx]) / span, 0.0, 1.0) : 0.5;
    out.push_back(edges[idx] + frac * (edges[idx + 1] - edges[idx]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_sorted(std::span<const double> t, double t_far) {
  if (t.empty()) fail(ErrorCode::kContract, "ray has no samples");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] >= t[k - 1])) fail(ErrorCode::kContract, "sample positions must be sorted ascending");
  }
  if (!(t_far >= t.back())) fail(ErrorCode::kContract, "t_far lies before the last sample");
}

void softmax(std::span<const double> s, std::vector<double>& q) {
  q.resize(s.size());
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (std::size_t c = 0; c < s.size(); ++c) z += (q[c] = std::exp(s[c] - m));
  for (double& v : q) v /= z;
}

template <typename S>
PixelResult mixture_kernel(std::span<const double> t, double t_far, std::size_t G, std::size_t C,
                           std::span<const S> sigma_in, std::span<const S> rgb_in, std::span<const S> logits_in,
                           std::span<const double> weights, const std::array<float, 3>& background,
                           std::vector<double>* sample_weights) {
  check_sorted(t, t_far);
  const std::size_t K = t.size();
  if (G < 1 || C < 2 || sigma_in.size() != K * G || rgb_in.size() != 3 * K * G ||
      logits_in.size() != C * K * G || (!weights.empty() && weights.size() != K * G)) {
    fail(ErrorCode::kContract, "composite buffers do not match the sample count");
  }
  if (sample_weights) sample_weights->assign(K, 0.0);

  PixelResult out;
  std::vector<double> seg(C, 0.0);
  double tau = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double delta = (k + 1 < K ? t[k + 1] : t_far) - t[k];
    const double T = std::exp(-tau);
    double dtau = 0.0;
    double wsum = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t e = k * G + g;
      const double W = weights.empty() ? 1.0 : weights[e];
      const double sigma = sigma_in[e];
      const double alpha = 1.0 - std::exp(-sigma * delta);
      const double a = W * alpha;
      const double w = T * a;
      for (int c = 0; c < 3; ++c) out.color[c] += w * double(rgb_in[3 * e + c]);
      for (std::size_t c = 0; c < C; ++c) seg[c] += w * double(logits_in[C * e + c]);
      wsum += w;
      dtau += (W * sigma) * delta;
    }
    tau += dtau;
    if (sample_weights) (*sample_weights)[k] = wsum;
  }
  const double t_end = std::exp(-tau);
  for (int c = 0; c < 3; ++c) out.color[c] += t_end * background[c];
  softmax(seg, out.prob);
  for (double& p : out.prob) p *= (1.0 - t_end);
  out.prob[C - 1] += t_end;
  out.alpha = 1.0 - t_end;
  return out;
}

}  // namespace

PixelResult composite_mixture(const CompositeSamples& in, const std::array<float, 3>& background,
                              std::vector<double>* sample_weights) {
  return mixture_kernel<float>(in.t, in.t_far, static_cast<std::size_t>(in.groups),
                               static_cast<std::size_t>(in.classes), in.sigma, in.rgb, in.logits, in.weights,
                               background, sample_weights);
}

PixelResult composite(std::span<const double> t, double t_far, const SampleBuffer& samples,
                      const std::array<float, 3>& background, std::vector<double>* sample_weights) {
  return mixture_kernel<float>(t, t_far, 1, static_cast<std::size_t>(samples.classes), samples.sigma, samples.rgb,
                               samples.logits, {}, background, sample_weights);
}

PixelResult composite(std::span<const double> t, double t_far, const DenseSamples& samples,
                      const std::array<float, 3>& background, std::vector<double>* sample_weights) {
  return mixture_kernel<double>(t, t_far, 1, static_cast<std::size_t>(samples.classes), samples.sigma,
                                samples.rgb, samples.logits, {}, background, sample_weights);
}

void composite_backward(std::span<const double> t, double t_far, const SampleBuffer& samples,
                        const std::array<float, 3>& background, const std::array<double, 3>& d_color,
                        std::span<const double> d_prob, CompositeGrad& grad) {
  const std::vector<double> sigma(samples.sigma.begin(), samples.sigma.end());
  const std::vector<double> rgb(samples.rgb.begin(), samples.rgb.end());
  const std::vector<double> logits(samples.logits.begin(), samples.logits.end());
  composite_backward(t, t_far, DenseSamples{samples.classes, sigma, rgb, logits}, background, d_color, d_prob,
                     grad);
}

void composite_backward(std::span<const double> t, double t_far, const DenseSamples& samples,
                        const std::array<float, 3>& background, const std::array<double, 3>& d_color,
                        std::span<const double> d_prob, CompositeGrad& grad) {
  check_sorted(t, t_far);
  const std::size_t K = t.size();
  const std::size_t C = static_cast<std::size_t>(samples.classes);
  if (samples.sigma.size() != K || samples.rgb.size() != 3 * K || samples.logits.size() != C * K ||
      d_prob.size() != C) {
    fail(ErrorCode::kContract, "backward buffers do not match");
  }

  std::vector<double> delta(K), T_next(K), w(K), seg(C, 0.0);
  double tau = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    delta[k] = (k + 1 < K ? t[k + 1] : t_far) - t[k];
    const double T = std::exp(-tau);
    const double sigma = samples.sigma[k];
    w[k] = T * (1.0 - std::exp(-sigma * delta[k]));
    tau += sigma * delta[k];
    T_next[k] = std::exp(-tau);
    for (std::size_t c = 0; c < C; ++c) seg[c] += w[k] * samples.logits[C * k + c];
  }
  const double t_end = std::exp(-tau);
  std::vector<double> q;
  softmax(seg, q);
  double dot = 0.0;
  for (std::size_t c = 0; c < C; ++c) dot += d_prob[c] * q[c];
  std::vector<double> d_seg(C);
  for (std::size_t c = 0; c < C; ++c) d_seg[c] = (1.0 - t_end) * q[c] * (d_prob[c] - dot);
  double g_end = 0.0;
  for (int c = 0; c < 3; ++c) g_end += d_color[c] * background[c];
  for (std::size_t c = 0; c < C; ++c) g_end += d_prob[c] * ((c + 1 == C ? 1.0 : 0.0) - q[c]);

  grad.d_sigma.assign(K, 0.0);
  grad.d_rgb.assign(3 * K, 0.0);
  grad.d_logits.assign(C * K, 0.0);
  std::vector<double> g(K);
  for (std::size_t k = 0; k < K; ++k) {
    double gk = 0.0;
    for (int c = 0; c < 3; ++c) {
      gk += d_color[c] * samples.rgb[3 * k + c];
      grad.d_rgb[3 * k + c] = w[k] * d_color[c];
    }
    for (std::size_t c = 0; c < C; ++c) {
      gk += d_seg[c] * samples.logits[C * k + c];
      grad.d_logits[C * k + c] = w[k] * d_seg[c];
    }
    g[k] = gk;
  }
  double behind = 0.0;  // sum over later samples of w_k g_k
  for (std::size_t m = K; m-- > 0;) {
    grad.d_sigma[m] = delta[m] * (T_next[m] * g[m] - behind - t_end * g_end);
    behind += w[m] * g[m];
  }
}

namespace {

// Classes sharing a bitwise-identical transform are evaluated once.
struct Groups {
  std::vector<RigidTransform> transforms;
  std::vector<int> class_group;
  std::vector<bool> holds_all;
};

Groups make_groups(const ClassTransforms& deform, int classes) {
  Groups gr;
  if (deform.empty()) {
    gr.transforms.push_back(RigidTransform::identity());
    gr.class_group.assign(classes, 0);
  } else {
    if (static_cast<int>(deform.size()) != classes) {
      fail(ErrorCode::kContract, "need one deformation per class including background");
    }
    for (const auto& d : deform) {
      auto it = std::find(gr.transforms.begin(), gr.transforms.end(), d);
      if (it == gr.transforms.end()) {
        gr.transforms.push_back(d);
        it = gr.transforms.end() - 1;
      }
      gr.class_group.push_back(static_cast<int>(it - gr.transforms.begin()));
    }
  }
  gr.holds_all.assign(gr.transforms.size(), false);
  if (gr.transforms.size() == 1) gr.holds_all[0] = true;
  return gr;
}

struct GroupedEval {
  std::vector<float> sigma, rgb, logits;
  std::vector<double> weights;
};

void evaluate_grouped(const RadianceField& field, const Groups& gr, std::span<const Vec3> x,
                      std::span<const Vec3> d, const Conditioner* cond, GroupedEval& out) {
  const std::size_t N = x.size();
  const std::size_t G = gr.transforms.size();
  const std::size_t C = static_cast<std::size_t>(field.num_classes());
  out.sigma.resize(N * G);
  out.rgb.resize(3 * N * G);
  out.logits.resize(C * N * G);
  out.weights.clear();
  if (G > 1) out.weights.assign(N * G, 0.0);
  SampleBuffer buf;
  std::vector<Vec3> moved;
  std::vector<double> s(C), q;
  for (std::size_t g = 0; g < G; ++g) {
    const RigidTransform& D = gr.transforms[g];
    if (D.is_identity()) {
      field.evaluate(x, d, cond, buf);
    } else {
      moved.resize(N);
      for (std::size_t i = 0; i < N; ++i) moved[i] = D.apply(x[i]);
      field.evaluate(moved, d, cond, buf);
    }
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t e = i * G + g;
      out.sigma[e] = buf.sigma[i];
      std::copy_n(buf.rgb_at(i), 3, out.rgb.data() + 3 * e);
      std::copy_n(buf.logits_at(i), C, out.logits.data() + C * e);
      if (G > 1) {
        if (gr.holds_all[g]) {
          out.weights[e] = 1.0;
          continue;
        }
        // Each class's own deformed evaluation decides whether the point belongs to it.
        const float* lg = buf.logits_at(i);
        for (std::size_t c = 0; c < C; ++c) s[c] = lg[c];
        softmax(s, q);
        double W = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          if (gr.class_group[c] == static_cast<int>(g)) W += q[c];
        }
        out.weights[e] = W;
      }
    }
  }
}

CompositeSamples view_of(const GroupedEval& ev, std::size_t offset, std::span<const double> t, double t_far,
                         int groups, int classes) {
  const std::size_t K = t.size();
  const std::size_t G = static_cast<std::size_t>(groups);
  const std::size_t C = static_cast<std::size_t>(classes);
  CompositeSamples in;
  in.t = t;
  in.t_far = t_far;
  in.groups = groups;
  in.classes = classes;
  in.sigma = std::span<const float>(ev.sigma).subspan(offset * G, K * G);
  in.rgb = std::span<const float>(ev.rgb).subspan(3 * offset * G, 3 * K * G);
  in.logits = std::span<const float>(ev.logits).subspan(C * offset * G, C * K * G);
  if (!ev.weights.empty()) in.weights = std::span<const double>(ev.weights).subspan(offset * G, K * G);
  return in;
}

}  // namespace

PixelResult composite_deformed(const RadianceField& field, const Ray& ray, std::span<const double> t,
                               const ClassTransforms& deform, const Conditioner* cond,
                               const std::array<float, 3>& background) {
  const Groups gr = make_groups(deform, field.num_classes());
  std::vector<Vec3> x(t.size()), d(t.size(), ray.direction);
  for (std::size_t k = 0; k < t.size(); ++k) x[k] = ray.at(t[k]);
  GroupedEval ev;
  evaluate_grouped(field, gr, x, d, cond, ev);
  return composite_mixture(view_of(ev, 0, t, ray.t_far, static_cast<int>(gr.transforms.size()),
                                   field.num_classes()),
                           background);
}

void render_rays(const RadianceField& field, std::span<const Ray> rays, std::span<const std::uint64_t> ids,
                 const RenderConfig& config, const ClassTransforms& deform, const Conditioner* cond,
                 std::span<PixelResult> out) {
  config.validate();
  if (ids.size() != rays.size() || out.size() != rays.size()) {
    fail(ErrorCode::kContract, "ray, id and output counts differ");
  }
  const Groups gr = make_groups(deform, field.num_classes());
  const int G = static_cast<int>(gr.transforms.size());
  const int C = field.num_classes();
  const std::size_t chunk = static_cast<std::size_t>(config.ray_chunk);
  const std::size_t n_chunks = (rays.size() + chunk - 1) / chunk;

  parallel_for(n_chunks, [&](std::size_t ci) {
    const std::size_t begin = ci * chunk;
    const std::size_t end = std::min(rays.size(), begin + chunk);
    std::vector<Rng> rngs;
    std::vector<std::vector<double>> ts(end - begin);
    std::vector<std::size_t> offsets(end - begin);
    std::vector<Vec3> x, d;
    GroupedEval ev;

    auto gather = [&]() {
      x.clear();
      d.clear();
      for (std::size_t r = begin; r < end; ++r) {
        offsets[r - begin] = x.size();
        for (double tk : ts[r - begin]) {
          x.push_back(rays[r].at(tk));
          d.push_back(rays[r].direction);
        }
      }
    };

    for (std::size_t r = begin; r < end; ++r) {
      rngs.push_back(make_rng(config.seed, ids[r]));
      ts[r - begin] = sample_stratified(config, rays[r], rngs.back());
    }
    gather();
    evaluate_grouped(field.coarse(), gr, x, d, cond, ev);
    std::vector<double> weights;
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t i = r - begin;
      const auto in = view_of(ev, offsets[i], ts[i], rays[r].t_far, G, C);
      if (config.k_fine == 0) {
        out[r] = composite_mixture(in, config.background);
      } else {
        composite_mixture(in, config.background, &weights);
        ts[i] = sample_hierarchical(weights, ts[i], rays[r].t_far, config.k_fine, config.jitter, rngs[i]);
      }
    }
    if (config.k_fine == 0) return;
    gather();
    evaluate_grouped(field, gr, x, d, cond, ev);
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t i = r - begin;
      out[r] = composite_mixture(view_of(ev, offsets[i], ts[i], rays[r].t_far, G, C), config.background);
    }
  });
}

RenderOutput pack_pixels(int width, int height, int part_count, std::span<const PixelResult> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kContract, "pixel count does not match image size");
  }
  RenderOutput out;
  out.rgb = Image(width, height, 3);
  out.alpha = Image(width, height, 1);
  out.labels = LabelImage(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const PixelResult& p = pixels[static_cast<std::size_t>(j) * width + i];
      for (int c = 0; c < 3; ++c) out.rgb.at(i, j, c) = static_cast<float>(p.color[c]);
      out.alpha.at(i, j, 0) = static_cast<float>(p.alpha);
      out.labels.at(i, j) = class_to_label(p.label(), part_count);
    }
  }
  return out;
}

RenderOutput render_image_deformed(const RadianceField& field, const Camera& camera, const RenderConfig& config,
                                   const ClassTransforms& deform, const Conditioner* cond) {
  config.validate();
  const int w = camera.width();
  const int h = camera.height();
  std::vector<Ray> rays;
  std::vector<std::uint64_t> ids;
  rays.reserve(static_cast<std::size_t>(w) * h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      rays.push_back(pixel_center_ray(camera, i, j, config.t_near, config.t_far));
      ids.push_back(static_cast<std::uint64_t>(j) * w + i);
    }
  }
  std::vector<PixelResult> px(rays.size());
  render_rays(field, rays, ids, config, deform, cond, px);
  return pack_pixels(w, h, field.part_count(), px);
}

RenderOutput render_image(const RadianceField& field, const Camera& camera, const RenderConfig& config,
                          const Conditioner* cond) {
  return render_image_deformed(field, camera, config, {}, cond);
}

}  // namespace clanerf
