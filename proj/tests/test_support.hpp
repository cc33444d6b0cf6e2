#pragma once

// Fixture builders, random instance generators and independent oracles shared
// by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "arcs/arcs.hpp"

namespace arcs::test {

inline MeasurementRecord rec(int height, ChromaFormat chroma, double target, double quality, double decode_time,
                             double actual = -1.0, const std::string& title = "t",
                             QualityMetric metric = QualityMetric::CVVDP_JOD) {
  MeasurementRecord r;
  r.title_id = title;
  r.resolution = Resolution::from_height(height);
  r.chroma = chroma;
  r.target_bitrate = target;
  r.actual_bitrate = actual > 0 ? actual : target;
  r.quality = {metric, quality};
  r.decode_time = decode_time;
  return r;
}

inline TitleDataset make_dataset(std::vector<MeasurementRecord> records) {
  std::vector<std::size_t> rows(records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i + 1;
  auto out = detail::group_records(std::move(records), rows);
  return out.front();
}

constexpr ChromaFormat C420 = ChromaFormat::C420;
constexpr ChromaFormat C422 = ChromaFormat::C422;
constexpr ChromaFormat C444 = ChromaFormat::C444;

/// Arbitrary (non-model) instance: every (height, chroma) encode exists with
/// probability `presence`, actual bitrates jitter up to +-15% so some miss the
/// 10% window, qualities and decode times are unstructured.
inline TitleDataset random_dataset(std::mt19937_64& rng, int n_targets, double presence = 0.85,
                                   const std::string& title = "rand") {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<MeasurementRecord> records;
  double target = 400.0;
  for (int i = 0; i < n_targets; ++i) {
    target *= 1.3 + unit(rng);
    const double t = std::round(target);
    for (int h : {1080, 2160}) {
      for (auto c : kAllChromaFormats) {
        if (unit(rng) > presence) continue;
        const double actual = t * (1.0 + 0.3 * (unit(rng) - 0.5));
        const double q = 3.0 + 6.0 * unit(rng);
        const double tau = 0.005 * std::exp(3.0 * unit(rng));
        records.push_back(rec(h, c, t, q, tau, actual, title));
      }
    }
  }
  if (records.empty()) records.push_back(rec(1080, C420, 1000.0, 5.0, 0.01, 1000.0, title));
  return make_dataset(std::move(records));
}

/// Model-based synthetic title with `n_targets` targets and a random seed.
inline TitleDataset random_synth_title(std::mt19937_64& rng, int n_targets, double jitter = 0.08) {
  SynthSpec spec;
  spec.seed = rng();
  spec.titles = 1;
  spec.bitrate_jitter = jitter;
  spec.noise = 0.05;
  std::vector<double> all{600, 900, 1600, 2400, 3400, 4500, 5800, 8100, 11600, 16800};
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(n_targets));
  std::sort(all.begin(), all.end());
  spec.targets_kbps = all;
  return generate(spec).front();
}

// ---------------------------------------------------------------------------
// Oracles

/// Exhaustive scan for normalization bounds.
inline NormalizationBounds scan_bounds(const std::vector<MeasurementRecord>& records) {
  NormalizationBounds b{1e300, -1e300, 1e300, -1e300};
  for (const auto& r : records) {
    if (r.quality.value < b.q_min) b.q_min = r.quality.value;
    if (r.quality.value > b.q_max) b.q_max = r.quality.value;
    const double ld = std::log(r.decode_time);
    if (ld < b.log_d_min) b.log_d_min = ld;
    if (ld > b.log_d_max) b.log_d_max = ld;
  }
  return b;
}

/// Trapezoid quadrature of an interpolant's pointwise evaluation.
template <typename F>
double trapezoid(const F& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < intervals; ++i) s += f(a + h * i);
  return s * h;
}

/// BD percentage from dense trapezoid integration of the two interpolants.
inline double bd_by_trapezoid(const RQCurve& ref, const RQCurve& test, int intervals = 100000) {
  auto pts = [](const RQCurve& c, bool ordinate) {
    std::vector<double> v;
    for (const auto& p : c.points) v.push_back(ordinate ? p.ordinate : p.quality);
    return v;
  };
  const Pchip pr(pts(ref, false), pts(ref, true));
  const Pchip pt(pts(test, false), pts(test, true));
  const double lo = std::max(pr.x_min(), pt.x_min());
  const double hi = std::min(pr.x_max(), pt.x_max());
  const double gap = (trapezoid(pt, lo, hi, intervals) - trapezoid(pr, lo, hi, intervals)) / (hi - lo);
  return (std::exp(gap) - 1.0) * 100.0;
}

/// Random strictly-increasing-quality curve with 4-6 points.
inline RQCurve random_curve(std::mt19937_64& rng, CurveAxis axis = CurveAxis::QualityVsLogRate) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(4, 6);
  RQCurve c;
  c.axis = axis;
  const int n = count(rng);
  double q = 3.0 + 2.0 * unit(rng);
  double o = std::log(300.0 + 500.0 * unit(rng));
  for (int i = 0; i < n; ++i) {
    c.points.push_back({q, o});
    q += 0.2 + 1.2 * unit(rng);
    o += 0.1 + 0.9 * unit(rng);
  }
  return c;
}

}  // namespace arcs::test
