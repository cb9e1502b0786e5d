#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stq/error.hpp"
#include "stq/flow.hpp"
#include "stq/frame.hpp"
#include "stq/masks.hpp"

namespace stq {

struct LossConfig {
  double alpha = 0.5;
  double beta = 0.0;
  double mask_sharpness = kDefaultMaskSharpness;
  /// Divide the temporal term by the soft-mask total.
  bool normalize_temporal = false;

  // Optimizer settings.
  double step_size = 1.0;
  int max_iters = 50000;
  double grad_tol = 1e-7;
  double armijo_c = 1e-4;
  double shrink = 0.5;

  void validate() const {
    detail::require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
    detail::require(std::isfinite(beta) && beta >= 0.0, "beta must be non-negative");
    detail::require(alpha > 0.0 || beta > 0.0, "alpha and beta must not both be zero");
    detail::require(std::isfinite(mask_sharpness) && mask_sharpness > 0.0,
                    "mask sharpness must be positive");
    detail::require(std::isfinite(step_size) && step_size > 0.0, "step size must be positive");
    detail::require(max_iters > 0, "max_iters must be positive");
    detail::require(std::isfinite(grad_tol) && grad_tol > 0.0, "grad_tol must be positive");
    detail::require(armijo_c > 0.0 && armijo_c < 1.0, "armijo_c must be in (0,1)");
    detail::require(shrink > 0.0 && shrink < 1.0, "shrink must be in (0,1)");
  }
};

/// Unweighted terms of the joint loss; total carries the alpha/beta weights.
struct LossBreakdown {
  double total = 0.0;
  double spatial_t = 0.0;
  double spatial_next = 0.0;
  double temporal = 0.0;
};

struct JointGradient {
  Frame grad_t;
  Frame grad_next;
};

/// Soft mask of the HR pair: exp(-sharpness * (hr_t - warp(hr_next))^2).
inline SoftMask temporal_mask(const Frame& hr_t, const Frame& hr_next, const FlowField& flow,
                              double sharpness) {
  return soft_mask(hr_t, warp_backward(hr_next, flow), sharpness);
}

/// Joint spatial-temporal objective for one pair of frames. The mask depends
/// only on the HR frames, so it is computed once and the objective is a
/// quadratic in the SR frames.
class JointObjective {
public:
  JointObjective(const Frame& hr_t, const Frame& hr_next, const FlowField& flow,
                 const LossConfig& cfg)
      : hr_t_(hr_t), hr_next_(hr_next), flow_(flow), cfg_(cfg) {
    cfg.validate();
    require_same_shape(hr_t, hr_next, "joint loss");
    detail::require_flow_matches(hr_t, flow, "joint loss");
    mask_ = temporal_mask(hr_t, hr_next, flow, cfg.mask_sharpness);
    temporal_scale_ = 1.0;
    if (cfg.normalize_temporal) {
      const double m = mask_.sum();
      detail::require(m > 0.0, "joint loss: soft mask total is zero");
      temporal_scale_ = 1.0 / m;
    }
  }

  const SoftMask& mask() const { return mask_; }
  const LossConfig& config() const { return cfg_; }

  LossBreakdown loss(const Frame& sr_t, const Frame& sr_next) const {
    check(sr_t, sr_next);
    LossBreakdown out;
    out.spatial_t = squared_distance(sr_t, hr_t_);
    out.spatial_next = squared_distance(sr_next, hr_next_);
    const Frame warped = warp_backward(sr_next, flow_);
    const int ch = sr_t.channels();
    const auto a = sr_t.data();
    const auto b = warped.data();
    const auto m = mask_.weights();
    double temporal = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) {
      for (int c = 0; c < ch; ++c) {
        const double r = a[p * ch + c] - b[p * ch + c];
        temporal += m[p] * r * r;
      }
    }
    out.temporal = temporal * temporal_scale_;
    out.total = cfg_.alpha * out.spatial_t + cfg_.alpha * out.spatial_next +
                cfg_.beta * out.temporal;
    return out;
  }

  JointGradient gradient(const Frame& sr_t, const Frame& sr_next) const {
    check(sr_t, sr_next);
    const Frame warped = warp_backward(sr_next, flow_);
    const int ch = sr_t.channels();
    const auto m = mask_.weights();
    // weighted = 2 beta s M (sr_t - warp(sr_next)), s the normalization factor
    Frame weighted(sr_t.width(), sr_t.height(), ch);
    const double tscale = 2.0 * cfg_.beta * temporal_scale_;
    for (std::size_t p = 0; p < m.size(); ++p) {
      for (int c = 0; c < ch; ++c) {
        const std::size_t i = p * ch + c;
        weighted.data()[i] = tscale * m[p] * (sr_t.data()[i] - warped.data()[i]);
      }
    }
    const Frame pulled = warp_adjoint(weighted, flow_);

    JointGradient g{Frame(sr_t.width(), sr_t.height(), ch),
                    Frame(sr_t.width(), sr_t.height(), ch)};
    const double s = 2.0 * cfg_.alpha;
    for (std::size_t i = 0; i < sr_t.size(); ++i) {
      g.grad_t.data()[i] = s * (sr_t.data()[i] - hr_t_.data()[i]) + weighted.data()[i];
      g.grad_next.data()[i] = s * (sr_next.data()[i] - hr_next_.data()[i]) - pulled.data()[i];
    }
    return g;
  }

private:
  void check(const Frame& sr_t, const Frame& sr_next) const {
    require_same_shape(sr_t, hr_t_, "joint loss (sr_t vs hr_t)");
    require_same_shape(sr_next, hr_next_, "joint loss (sr_next vs hr_next)");
  }

  static double squared_distance(const Frame& a, const Frame& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a.data()[i] - b.data()[i];
      sum += d * d;
    }
    return sum;
  }

  const Frame& hr_t_;
  const Frame& hr_next_;
  const FlowField& flow_;
  LossConfig cfg_;
  SoftMask mask_;
  double temporal_scale_ = 1.0;
};

inline LossBreakdown joint_loss(const Frame& sr_t, const Frame& sr_next, const Frame& hr_t,
                                const Frame& hr_next, const FlowField& flow,
                                const LossConfig& cfg) {
  return JointObjective(hr_t, hr_next, flow, cfg).loss(sr_t, sr_next);
}

inline JointGradient joint_loss_grad(const Frame& sr_t, const Frame& sr_next, const Frame& hr_t,
                                     const Frame& hr_next, const FlowField& flow,
                                     const LossConfig& cfg) {
  return JointObjective(hr_t, hr_next, flow, cfg).gradient(sr_t, sr_next);
}

enum class StopReason { GradientTolerance, MaxIterations, LineSearchStalled };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::LineSearchStalled: return "line_search_stalled";
  }
  return "unknown";
}

struct MinimizeResult {
  Frame sr_t;
  Frame sr_next;
  /// trace[0] is the initial loss; one entry per accepted step after that.
  std::vector<LossBreakdown> trace;
  StopReason stop = StopReason::MaxIterations;
};

/// Steepest descent with Armijo backtracking over the pixels of both frames.
/// Each line search starts from twice the previously accepted step (capped at
/// cfg.step_size). Iterates are not clamped.
inline MinimizeResult minimize(const Frame& hr_t, const Frame& hr_next, const FlowField& flow,
                               const Frame& init_t, const Frame& init_next,
                               const LossConfig& cfg) {
  const JointObjective objective(hr_t, hr_next, flow, cfg);
  MinimizeResult result{init_t, init_next, {}, StopReason::MaxIterations};
  Frame& x_t = result.sr_t;
  Frame& x_next = result.sr_next;

  LossBreakdown current = objective.loss(x_t, x_next);
  detail::require(std::isfinite(current.total), "minimize: non-finite initial loss");
  result.trace.push_back(current);

  constexpr int kMaxHalvings = 80;
  double step = cfg.step_size;
  Frame trial_t = x_t;
  Frame trial_next = x_next;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const JointGradient g = objective.gradient(x_t, x_next);
    double g_inf = 0.0;
    double g_sq = 0.0;
    for (const Frame* gf : {&g.grad_t, &g.grad_next}) {
      for (double v : gf->data()) {
        g_inf = std::max(g_inf, std::abs(v));
        g_sq += v * v;
      }
    }
    detail::require(std::isfinite(g_sq), "minimize: non-finite gradient");
    if (g_inf < cfg.grad_tol) {
      result.stop = StopReason::GradientTolerance;
      return result;
    }

    double t = std::min(cfg.step_size, 2.0 * step);
    bool accepted = false;
    LossBreakdown next;
    for (int k = 0; k < kMaxHalvings; ++k, t *= cfg.shrink) {
      for (std::size_t i = 0; i < x_t.size(); ++i) {
        trial_t.data()[i] = x_t.data()[i] - t * g.grad_t.data()[i];
        trial_next.data()[i] = x_next.data()[i] - t * g.grad_next.data()[i];
      }
      next = objective.loss(trial_t, trial_next);
      if (std::isfinite(next.total) && next.total <= current.total - cfg.armijo_c * t * g_sq) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.stop = StopReason::LineSearchStalled;
      return result;
    }
    step = t;
    std::swap(x_t, trial_t);
    std::swap(x_next, trial_next);
    current = next;
    result.trace.push_back(current);
  }
  return result;
}

/// CSV columns: iteration,total,spatial_t,spatial_next,temporal.
inline void write_loss_trace(std::span<const LossBreakdown> trace,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  detail::require(static_cast<bool>(out), path.string() + ": cannot open for writing");
  out << "iteration,total,spatial_t,spatial_next,temporal\n";
  char line[160];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, trace[i].total,
                  trace[i].spatial_t, trace[i].spatial_next, trace[i].temporal);
    out << line;
  }
  detail::require(static_cast<bool>(out), path.string() + ": write failed");
}

}  // namespace stq
