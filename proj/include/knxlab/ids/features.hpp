#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "knxlab/error.hpp"
#include "knxlab/sim/capture.hpp"

namespace knxlab::ids {

struct TooFewRecords : Error {
  TooFewRecords() : Error("capture has fewer than two records") {}
};
struct EmptyResult : Error {
  EmptyResult() : Error("no complete window in the series") {}
};
struct EmptySegment : Error {
  EmptySegment() : Error("empty inter-arrival segment") {}
};
struct SpecMismatch : Error {
  SpecMismatch() : Error("distributions use different histogram specs") {}
};

enum class Label { Attack, NoAttack, Unlabeled };

inline const char* label_name(Label l) {
  switch (l) {
    case Label::Attack: return "attack";
    case Label::NoAttack: return "no-attack";
    default: return "unlabeled";
  }
}

// I_i = t_{i+1} - t_i over a timestamp series.
inline std::vector<double> inter_arrivals(const std::vector<double>& timestamps) {
  if (timestamps.size() < 2) throw TooFewRecords();
  std::vector<double> out;
  out.reserve(timestamps.size() - 1);
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    const double gap = timestamps[i] - timestamps[i - 1];
    if (gap < 0) throw Error("timestamps are not sorted");
    out.push_back(gap);
  }
  return out;
}

inline std::vector<double> inter_arrivals(const sim::CaptureSeries& capture) {
  return inter_arrivals(capture.timestamps());
}

// One detection-time-window worth of inter-arrival values.
struct InterArrivalSegment {
  std::vector<double> values;
  double window = 0.0;
  double start_time = 0.0;
  Label label = Label::Unlabeled;
};

// Consecutive non-overlapping windows anchored at the first timestamp; a gap
// belongs to the window its first telegram arrived in. The trailing partial
// window is dropped, as are windows that saw no gap start.
inline std::vector<InterArrivalSegment> segment_series(
    const std::vector<double>& timestamps, double window,
    Label label = Label::Unlabeled) {
  if (window <= 0) throw Error("window must be positive");
  if (timestamps.size() < 2) throw TooFewRecords();
  const double t0 = timestamps.front();
  const double span = timestamps.back() - t0;
  const auto complete = static_cast<std::size_t>(span / window);
  if (complete == 0) throw EmptyResult();

  std::vector<InterArrivalSegment> segments(complete);
  for (std::size_t k = 0; k < complete; ++k) {
    segments[k].window = window;
    segments[k].start_time = t0 + static_cast<double>(k) * window;
    segments[k].label = label;
  }
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    const auto k = static_cast<std::size_t>((timestamps[i] - t0) / window);
    if (k >= complete) break;
    segments[k].values.push_back(timestamps[i + 1] - timestamps[i]);
  }
  std::erase_if(segments, [](const auto& s) { return s.values.empty(); });
  if (segments.empty()) throw EmptyResult();
  return segments;
}

inline std::vector<InterArrivalSegment> segment_series(
    const sim::CaptureSeries& capture, double window,
    Label label = Label::Unlabeled) {
  return segment_series(capture.timestamps(), window, label);
}

// Shared bin boundaries for every distribution compared by JSD. Finite bins
// cover [0, p99 of the pooled baseline inter-arrivals]: one underflow bin
// below min_edge, then geometrically spaced edges up to p99, plus an overflow
// bin. Geometric spacing resolves millisecond-scale service gaps and
// second-scale cadence with the same 50 bins; equal widths at this range
// cannot see sub-second structure.
struct HistogramSpec {
  std::vector<double> edges;  // ascending; edges[0] == 0

  std::size_t bin_count() const { return edges.size(); }  // finite + overflow

  std::size_t bin_index(double x) const {
    if (x >= edges.back()) return edges.size() - 1;  // overflow bin
    if (x <= 0.0) return 0;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
  }

  static HistogramSpec log_spaced(std::vector<double> pooled,
                                  std::size_t finite_bins = 50,
                                  double min_edge = 1e-3) {
    if (pooled.empty()) throw EmptySegment();
    if (finite_bins < 2) throw Error("need at least two bins");
    std::sort(pooled.begin(), pooled.end());
    const double p99 =
        pooled[static_cast<std::size_t>(0.99 * static_cast<double>(pooled.size() - 1))];
    HistogramSpec spec;
    spec.edges.reserve(finite_bins + 1);
    spec.edges.push_back(0.0);
    if (p99 <= min_edge * 1.0001) {
      // Degenerate traffic: fall back to equal widths over [0, max].
      const double hi = std::max(pooled.back(), min_edge);
      for (std::size_t i = 1; i <= finite_bins; ++i)
        spec.edges.push_back(hi * static_cast<double>(i) /
                             static_cast<double>(finite_bins));
      return spec;
    }
    const double ratio = std::log(p99 / min_edge) /
                         static_cast<double>(finite_bins - 1);
    for (std::size_t i = 0; i < finite_bins; ++i)
      spec.edges.push_back(min_edge * std::exp(ratio * static_cast<double>(i)));
    spec.edges.back() = p99;  // exact upper anchor
    return spec;
  }

  friend bool operator==(const HistogramSpec&, const HistogramSpec&) = default;
};

// Per-bin probabilities; sums to one.
struct Distribution {
  std::vector<double> probs;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

inline Distribution histogram(const std::vector<double>& values,
                              const HistogramSpec& spec) {
  if (values.empty()) throw EmptySegment();
  Distribution d;
  d.probs.assign(spec.bin_count(), 0.0);
  for (double v : values) d.probs[spec.bin_index(v)] += 1.0;
  const double n = static_cast<double>(values.size());
  for (double& p : d.probs) p /= n;
  return d;
}

// Kullback-Leibler divergence, base-2 logs, 0*log(0/x) = 0.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.probs.size() != q.probs.size()) throw SpecMismatch();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] <= 0.0) continue;
    if (q.probs[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p.probs[i] * std::log2(p.probs[i] / q.probs[i]);
  }
  return acc;
}

// Jensen-Shannon divergence with M = (P+Q)/2; symmetric, 0 iff P == Q, and
// bounded by 1 in base 2. M(x) == 0 implies P(x) == Q(x) == 0, so no division
// by zero can occur.
inline double jsd(const Distribution& p, const Distribution& q) {
  if (p.probs.size() != q.probs.size()) throw SpecMismatch();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    const double qi = q.probs[i];
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) acc += 0.5 * pi * std::log2(pi / mi);
    if (qi > 0.0) acc += 0.5 * qi * std::log2(qi / mi);
  }
  return std::clamp(acc, 0.0, 1.0);
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw EmptySegment();
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

// Unbiased sample variance (n-1 denominator); 0 for a single value.
inline double variance(const std::vector<double>& values) {
  if (values.empty()) throw EmptySegment();
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values.size() - 1);
}

enum class FeatureKind { Mean, Variance, MeanVar, Jsd };

inline const char* feature_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Mean: return "mean";
    case FeatureKind::Variance: return "variance";
    case FeatureKind::MeanVar: return "mean_variance";
    default: return "jsd";
  }
}

struct FeatureVector {
  std::vector<double> values;
  Label label = Label::Unlabeled;
};

inline FeatureVector moment_features(const InterArrivalSegment& seg,
                                     FeatureKind kind) {
  FeatureVector f;
  f.label = seg.label;
  switch (kind) {
    case FeatureKind::Mean: f.values = {mean(seg.values)}; break;
    case FeatureKind::Variance: f.values = {variance(seg.values)}; break;
    case FeatureKind::MeanVar:
      f.values = {mean(seg.values), variance(seg.values)};
      break;
    default:
      throw Error("moment_features does not produce JSD vectors");
  }
  return f;
}

// JSD similarity of one segment against every baseline segment distribution.
inline FeatureVector jsd_feature_vector(const Distribution& seg_dist, Label label,
                                        const std::vector<Distribution>& baseline) {
  if (baseline.empty()) throw Error("baseline distribution list is empty");
  FeatureVector f;
  f.label = label;
  f.values.reserve(baseline.size());
  for (const auto& b : baseline) f.values.push_back(jsd(seg_dist, b));
  return f;
}

inline FeatureVector jsd_feature_vector(const InterArrivalSegment& seg,
                                        const HistogramSpec& spec,
                                        const std::vector<Distribution>& baseline) {
  return jsd_feature_vector(histogram(seg.values, spec), seg.label, baseline);
}

}  // namespace knxlab::ids
