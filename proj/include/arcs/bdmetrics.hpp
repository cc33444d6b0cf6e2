#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arcs/error.hpp"
#include "arcs/ladder.hpp"
#include "arcs/measurements.hpp"
#include "arcs/pchip.hpp"

namespace arcs {

enum class CurveAxis { QualityVsLogRate, QualityVsLogTime };

constexpr std::string_view to_string(CurveAxis a) noexcept {
  return a == CurveAxis::QualityVsLogRate ? "log_rate" : "log_time";
}

struct CurvePoint {
  double quality = 0.0;
  double ordinate = 0.0;  // ln(kbps) or ln(seconds per frame)
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Operating points with quality strictly increasing.
struct RQCurve {
  CurveAxis axis = CurveAxis::QualityVsLogRate;
  QualityMetric metric = QualityMetric::CVVDP_JOD;
  std::vector<CurvePoint> points;
};

struct BDResult {
  double value_percent = 0.0;
  double q_low = 0.0;
  double q_high = 0.0;
  QualityMetric metric = QualityMetric::CVVDP_JOD;
  CurveAxis axis = CurveAxis::QualityVsLogRate;
};

/// Builds a BD curve from the present rungs of a ladder. Rungs are visited by
/// ascending actual bitrate and a point is kept only if its quality strictly
/// exceeds every quality kept before it.
inline RQCurve build_curve(const Ladder& ladder, CurveAxis axis) {
  std::vector<const MeasurementRecord*> recs;
  for (const auto& r : ladder.rungs)
    if (r.choice) recs.push_back(&*r.choice);
  std::stable_sort(recs.begin(), recs.end(), [](const auto* a, const auto* b) {
    if (a->actual_bitrate != b->actual_bitrate) return a->actual_bitrate < b->actual_bitrate;
    return a->target_bitrate < b->target_bitrate;
  });

  RQCurve curve;
  curve.axis = axis;
  if (!recs.empty()) curve.metric = recs.front()->quality.metric;
  for (const auto* r : recs) {
    if (r->quality.metric != curve.metric) throw Error(ErrorCode::MetricMismatch, ladder.title_id);
    if (!curve.points.empty() && !(r->quality.value > curve.points.back().quality)) continue;
    const double ord = axis == CurveAxis::QualityVsLogRate ? std::log(r->actual_bitrate) : std::log(r->decode_time);
    curve.points.push_back({r->quality.value, ord});
  }
  if (curve.points.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, ladder.title_id + " (" + std::string(to_string(ladder.method)) + "): " +
                                             std::to_string(curve.points.size()) + " usable point(s)");
  }
  return curve;
}

namespace detail {

inline Pchip curve_interpolant(const RQCurve& c) {
  std::vector<double> q, o;
  q.reserve(c.points.size());
  o.reserve(c.points.size());
  for (const auto& p : c.points) {
    q.push_back(p.quality);
    o.push_back(p.ordinate);
  }
  return Pchip(q, o);
}

}  // namespace detail

/// Bjontegaard delta of `test` against `reference`: the mean ordinate gap over
/// the shared quality interval, reported as (e^gap - 1) * 100 percent.
/// On log-rate curves this is BD-rate, on log-time curves BD decoding time.
inline BDResult bd_delta(const RQCurve& reference, const RQCurve& test) {
  if (reference.axis != test.axis) throw Error(ErrorCode::AxisMismatch, "curves use different axes");
  if (reference.metric != test.metric) throw Error(ErrorCode::MetricMismatch, "curves use different quality metrics");
  if (reference.points.size() < 2 || test.points.size() < 2) throw Error(ErrorCode::TooFewPoints, "curve needs >= 2 points");

  const auto ref = detail::curve_interpolant(reference);
  const auto tst = detail::curve_interpolant(test);
  const double lo = std::max(ref.x_min(), tst.x_min());
  const double hi = std::min(ref.x_max(), tst.x_max());
  if (!(hi > lo)) throw Error(ErrorCode::NoQualityOverlap, "quality ranges do not overlap");

  const double gap = (tst.integrate(lo, hi) - ref.integrate(lo, hi)) / (hi - lo);
  return BDResult{std::expm1(gap) * 100.0, lo, hi, reference.metric, reference.axis};
}

/// Arithmetic mean of per-title BD percentages.
inline double aggregate(const std::vector<BDResult>& results) {
  if (results.empty()) throw Error(ErrorCode::EmptyInput, "no BD results to aggregate");
  for (const auto& r : results) {
    if (r.axis != results.front().axis) throw Error(ErrorCode::AxisMismatch, "aggregate over mixed axes");
    if (r.metric != results.front().metric) throw Error(ErrorCode::MetricMismatch, "aggregate over mixed metrics");
  }
  double sum = 0.0;
  for (const auto& r : results) sum += r.value_percent;
  return sum / static_cast<double>(results.size());
}

}  // namespace arcs
