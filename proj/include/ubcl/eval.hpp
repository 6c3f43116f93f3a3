// Copyright 2026 The UBCL Authors. All rights reserved.
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

#ifndef UBCL_EVAL_HPP_
#define UBCL_EVAL_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ubcl/behavior.hpp"
#include "ubcl/errors.hpp"
#include "ubcl/rng.hpp"
#include "ubcl/session.hpp"

namespace ubcl {

using Point2 = std::array<double, 2>;

struct EvalProtocol {
  int n_episodes = 50;
  // Target for the evaluated agent; absent means it samples one per episode
  // like everyone else.
  std::optional<TargetVector> fixed_target;
  std::uint64_t seed = 0;
  bool greedy = false;
  int evaluated_agent = 0;
};

// One agent's result in one evaluation episode. `result` is stored at the
// 6-significant-digit export precision so statistics recomputed from the
// exported CSV reproduce the in-memory ones exactly.
struct EvalRecord {
  int episode = 0;
  int agent = 0;
  std::string policy;
  TargetVector target;
  BehaviorVector result;
  double error = 0.0;  // |result - target| / sqrt(6)
};

struct RadarSummary {
  TargetVector target;
  Vec6 mean{};
  Vec6 sigma{};  // population standard deviation
  int n = 0;
};

struct EvalRun {
  RadarSummary radar;
  std::vector<EvalRecord> records;  // every agent of every episode
};

inline BehaviorVector quantize(const BehaviorVector& b) {
  BehaviorVector q;
  for (int i = 0; i < kBehaviorDims; ++i) q[i] = round_sig6(b[i]);
  return q;
}

// Plays `n_episodes` with the given lineup. Targets are drawn per episode
// per agent, except the protocol's evaluated agent when a fixed target is set.
inline std::vector<EvalRecord> run_episodes(const EnvConfig& env, const Lineup& lineup,
                                            const EvalProtocol& protocol) {
  if (protocol.n_episodes < 1) throw ContractError("evaluation needs n_episodes >= 1");
  std::vector<EvalRecord> records;
  Rng target_rng(derive_seed(protocol.seed, 1));
  Rng policy_rng(derive_seed(protocol.seed, 2));
  for (int ep = 0; ep < protocol.n_episodes; ++ep) {
    std::array<TargetVector, kNumPlayers> targets;
    for (int i = 0; i < kNumPlayers; ++i) {
      targets[i] = sample_target(target_rng);
      if (i == protocol.evaluated_agent && protocol.fixed_target) targets[i] = *protocol.fixed_target;
    }
    const EpisodeOutcome out = run_episode(env, derive_seed(protocol.seed, 1000 + ep), lineup,
                                           targets, policy_rng);
    for (int i = 0; i < kNumPlayers; ++i) {
      EvalRecord r;
      r.episode = ep;
      r.agent = i;
      r.policy = lineup[i]->tag();
      r.target = targets[i];
      r.result = quantize(out.behavior[i]);
      r.error = normalized_error(r.result, r.target);
      records.push_back(std::move(r));
    }
  }
  return records;
}

// Mean and sigma per dimension over the records of `agent`.
inline RadarSummary radar_summary(const std::vector<EvalRecord>& records, int agent,
                                  const TargetVector& target) {
  RadarSummary s;
  s.target = target;
  for (const auto& r : records) {
    if (r.agent != agent) continue;
    for (int d = 0; d < kBehaviorDims; ++d) s.mean[d] += r.result[d];
    ++s.n;
  }
  if (s.n == 0) return s;
  for (int d = 0; d < kBehaviorDims; ++d) s.mean[d] /= s.n;
  for (const auto& r : records) {
    if (r.agent != agent) continue;
    for (int d = 0; d < kBehaviorDims; ++d) {
      s.sigma[d] += (r.result[d] - s.mean[d]) * (r.result[d] - s.mean[d]);
    }
  }
  for (int d = 0; d < kBehaviorDims; ++d) s.sigma[d] = std::sqrt(s.sigma[d] / s.n);
  return s;
}

// The evaluated agent plays with `evaluated`, the other three with `others`.
inline EvalRun run_fixed_target_eval(const EnvConfig& env, Controller& evaluated,
                                     Controller& others, const EvalProtocol& protocol) {
  Lineup lineup{&others, &others, &others, &others};
  lineup[protocol.evaluated_agent] = &evaluated;
  EvalRun run;
  run.records = run_episodes(env, lineup, protocol);
  const TargetVector target = protocol.fixed_target.value_or(TargetVector{});
  run.radar = radar_summary(run.records, protocol.evaluated_agent, target);
  return run;
}

// ---------------------------------------------------------------------------
// PCA

struct PCAProjection {
  std::array<Vec6, 2> axes{};  // orthonormal, by decreasing variance
  Vec6 mean{};
  std::array<double, 2> explained_variance{};
  std::vector<Point2> points;
  std::vector<double> errors;  // per point, when targets were supplied
  bool degenerate = false;
};

// Mean-centred covariance eigendecomposition, keeping the top two axes. Each
// axis is signed so its largest-magnitude component is positive.
inline PCAProjection fit_pca(const std::vector<Vec6>& vectors) {
  if (vectors.size() < 3) throw ContractError("project_pca needs at least 3 vectors");
  const double n = static_cast<double>(vectors.size());
  PCAProjection p;
  for (const auto& v : vectors) {
    for (int d = 0; d < kBehaviorDims; ++d) p.mean[d] += v[d] / n;
  }
  Eigen::Matrix<double, 6, 6> cov = Eigen::Matrix<double, 6, 6>::Zero();
  for (const auto& v : vectors) {
    Eigen::Matrix<double, 6, 1> c;
    for (int d = 0; d < kBehaviorDims; ++d) c(d) = v[d] - p.mean[d];
    cov += c * c.transpose();
  }
  cov /= n;
  if (cov.trace() <= 1e-300) {
    p.degenerate = true;
    p.axes[0][0] = 1.0;
    p.axes[1][1] = 1.0;
    return p;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> solver(cov);
  // Eigenvalues come back ascending.
  for (int k = 0; k < 2; ++k) {
    const int col = kBehaviorDims - 1 - k;
    Eigen::Matrix<double, 6, 1> axis = solver.eigenvectors().col(col);
    Eigen::Index big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0) axis = -axis;
    for (int d = 0; d < kBehaviorDims; ++d) p.axes[k][d] = axis(d);
    p.explained_variance[k] = std::max(0.0, solver.eigenvalues()(col));
  }
  return p;
}

inline Point2 project(const PCAProjection& p, const Vec6& v) {
  if (p.degenerate) return {0.0, 0.0};
  Point2 out{};
  for (int k = 0; k < 2; ++k) {
    for (int d = 0; d < kBehaviorDims; ++d) out[k] += (v[d] - p.mean[d]) * p.axes[k][d];
  }
  return out;
}

inline PCAProjection project_pca(const std::vector<Vec6>& vectors) {
  PCAProjection p = fit_pca(vectors);
  for (const auto& v : vectors) p.points.push_back(project(p, v));
  return p;
}

// As above with each point's normalized error against its target.
inline PCAProjection project_pca(const std::vector<BehaviorVector>& results,
                                 const std::vector<TargetVector>& targets) {
  if (results.size() != targets.size()) throw ContractError("project_pca: results/targets mismatch");
  std::vector<Vec6> v;
  for (const auto& b : results) v.push_back(b.values);
  PCAProjection p = project_pca(v);
  for (std::size_t i = 0; i < results.size(); ++i) {
    p.errors.push_back(normalized_error(results[i], targets[i]));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Error distribution

// Linear interpolation between order statistics at h = (n - 1) p.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ContractError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct DimensionErrorStats {
  double q1 = 0, median = 0, q3 = 0;
  double lo_whisker = 0, hi_whisker = 0;  // extreme samples within 1.5 IQR
  double mean = 0;
};

struct ErrorStats {
  std::array<DimensionErrorStats, kBehaviorDims> dims{};
  int n = 0;
};

inline DimensionErrorStats summarize_errors(std::vector<double> e) {
  std::sort(e.begin(), e.end());
  DimensionErrorStats s;
  s.q1 = quantile_sorted(e, 0.25);
  s.median = quantile_sorted(e, 0.5);
  s.q3 = quantile_sorted(e, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.lo_whisker = *std::find_if(e.begin(), e.end(), [&](double x) { return x >= lo_fence; });
  s.hi_whisker = *std::find_if(e.rbegin(), e.rend(), [&](double x) { return x <= hi_fence; });
  double sum = 0.0;
  for (double x : e) sum += x;
  s.mean = sum / static_cast<double>(e.size());
  return s;
}

// Per-dimension statistics of b_result - b_target.
inline ErrorStats error_stats(const std::vector<std::pair<BehaviorVector, TargetVector>>& pairs) {
  if (pairs.empty()) throw ContractError("error_stats needs at least one pair");
  ErrorStats out;
  out.n = static_cast<int>(pairs.size());
  for (int d = 0; d < kBehaviorDims; ++d) {
    std::vector<double> e;
    e.reserve(pairs.size());
    for (const auto& [b, t] : pairs) e.push_back(b[d] - t[d]);
    out.dims[d] = summarize_errors(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diversity

inline double mean_pairwise_distance(const std::vector<Vec6>& v) {
  if (v.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) sum += euclidean(v[i], v[j]);
  }
  return sum / (static_cast<double>(v.size()) * (v.size() - 1) / 2.0);
}

// Monotone-chain hull. Returns counter-clockwise vertices without repeats.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Shoelace area of the hull; `degenerate` is set when fewer than three
// non-collinear points exist.
inline double convex_hull_area(const std::vector<Point2>& pts, bool* degenerate = nullptr) {
  const auto hull = convex_hull(pts);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size() && hull.size() >= 3; ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a[0] * b[1] - b[0] * a[1];
  }
  area = std::abs(area) / 2.0;
  if (degenerate) *degenerate = hull.size() < 3 || area <= 0.0;
  return area;
}

struct SetDiversity {
  int n = 0;
  double mean_pairwise_distance = 0.0;
  double hull_area = 0.0;
  bool degenerate_hull = false;
  std::array<double, 4> bbox{};  // min x, min y, max x, max y in the PCA plane
  std::vector<Point2> points;
};

struct DiversityStats {
  SetDiversity ubcl;
  SetDiversity winonly;
  PCAProjection pca;  // fit on the union of both sets
  bool winonly_within_ubcl_bbox = false;
};

// Pairwise spread and PCA-plane hull area of each set. Inputs are sorted
// first so the result does not depend on their order.
inline DiversityStats diversity_metrics(std::vector<Vec6> ubcl_vectors,
                                        std::vector<Vec6> winonly_vectors) {
  if (ubcl_vectors.size() < 3 || winonly_vectors.size() < 3) {
    throw ContractError("diversity_metrics needs at least 3 vectors per set");
  }
  std::sort(ubcl_vectors.begin(), ubcl_vectors.end());
  std::sort(winonly_vectors.begin(), winonly_vectors.end());
  std::vector<Vec6> all = ubcl_vectors;
  all.insert(all.end(), winonly_vectors.begin(), winonly_vectors.end());
  DiversityStats out;
  out.pca = fit_pca(all);
  auto describe = [&](const std::vector<Vec6>& v) {
    SetDiversity s;
    s.n = static_cast<int>(v.size());
    s.mean_pairwise_distance = mean_pairwise_distance(v);
    for (const auto& x : v) s.points.push_back(project(out.pca, x));
    s.hull_area = convex_hull_area(s.points, &s.degenerate_hull);
    s.bbox = {s.points[0][0], s.points[0][1], s.points[0][0], s.points[0][1]};
    for (const auto& p : s.points) {
      s.bbox[0] = std::min(s.bbox[0], p[0]);
      s.bbox[1] = std::min(s.bbox[1], p[1]);
      s.bbox[2] = std::max(s.bbox[2], p[0]);
      s.bbox[3] = std::max(s.bbox[3], p[1]);
    }
    return s;
  };
  out.ubcl = describe(ubcl_vectors);
  out.winonly = describe(winonly_vectors);
  out.winonly_within_ubcl_bbox =
      out.winonly.bbox[0] >= out.ubcl.bbox[0] && out.winonly.bbox[1] >= out.ubcl.bbox[1] &&
      out.winonly.bbox[2] <= out.ubcl.bbox[2] && out.winonly.bbox[3] <= out.ubcl.bbox[3];
  return out;
}

// ---------------------------------------------------------------------------
// CSV exports

inline void write_episode_csv(std::ostream& os, const std::vector<EvalRecord>& records) {
  os << "episode,agent,policy," << csv_header("target_") << ',' << csv_header("result_")
     << ",error\n";
  for (const auto& r : records) {
    os << r.episode << ',' << r.agent << ',' << r.policy << ',' << csv_row(r.target.values) << ','
       << csv_row(r.result.values) << ',' << format_sig6(r.error) << '\n';
  }
}

inline void write_radar_csv(std::ostream& os, const RadarSummary& s) {
  os << "dimension,target,mean,sigma\n";
  for (int d = 0; d < kBehaviorDims; ++d) {
    os << kBehaviorNames[d] << ',' << format_sig6(s.target[d]) << ',' << format_sig6(s.mean[d])
       << ',' << format_sig6(s.sigma[d]) << '\n';
  }
}

inline void write_pca_csv(std::ostream& os, const PCAProjection& p,
                          const std::vector<std::string>& sources) {
  os << "x,y,error,source\n";
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    os << format_sig6(p.points[i][0]) << ',' << format_sig6(p.points[i][1]) << ','
       << (i < p.errors.size() ? format_sig6(p.errors[i]) : std::string("nan")) << ','
       << (i < sources.size() ? sources[i] : std::string()) << '\n';
  }
}

inline void write_error_stats_csv(std::ostream& os, const ErrorStats& s) {
  os << "dimension,q1,median,q3,lo_whisker,hi_whisker,mean\n";
  for (int d = 0; d < kBehaviorDims; ++d) {
    const auto& e = s.dims[d];
    os << kBehaviorNames[d] << ',' << format_sig6(e.q1) << ',' << format_sig6(e.median) << ','
       << format_sig6(e.q3) << ',' << format_sig6(e.lo_whisker) << ','
       << format_sig6(e.hi_whisker) << ',' << format_sig6(e.mean) << '\n';
  }
}

inline void write_diversity_csv(std::ostream& os, const DiversityStats& s) {
  os << "policy,n,mean_pairwise_distance,hull_area,degenerate_hull,bbox_min_x,bbox_min_y,"
        "bbox_max_x,bbox_max_y\n";
  auto row = [&os](const char* name, const SetDiversity& d) {
    os << name << ',' << d.n << ',' << format_sig6(d.mean_pairwise_distance) << ','
       << format_sig6(d.hull_area) << ',' << (d.degenerate_hull ? 1 : 0);
    for (double b : d.bbox) os << ',' << format_sig6(b);
    os << '\n';
  };
  row("ubcl", s.ubcl);
  row("winonly", s.winonly);
}

}  // namespace ubcl

#endif  // UBCL_EVAL_HPP_
