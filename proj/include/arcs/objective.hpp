#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "arcs/error.hpp"
#include "arcs/measurements.hpp"

namespace arcs {

/// Weight of the decode-time penalty against quality. The library accepts any
/// value >= 0; the CLI restricts it to [0, 1].
struct Alpha {
  double value = 0.0;

  constexpr Alpha() = default;
  constexpr explicit Alpha(double v) : value(v) {}
  friend constexpr bool operator==(Alpha, Alpha) = default;
  friend constexpr auto operator<=>(Alpha, Alpha) = default;
};

/// Per-title min/max of quality and of ln(decode time), over all records of the
/// title (every resolution, chroma and target).
struct NormalizationBounds {
  double q_min = 0.0;
  double q_max = 0.0;
  double log_d_min = 0.0;
  double log_d_max = 0.0;

  friend bool operator==(const NormalizationBounds&, const NormalizationBounds&) = default;
};

inline constexpr double kBoundsTolerance = 1e-9;

inline NormalizationBounds bounds_for(const TitleDataset& dataset) {
  if (dataset.records.empty()) throw Error(ErrorCode::EmptyDataset, dataset.title_id);
  NormalizationBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& r : dataset.records) {
    if (!(r.decode_time > 0.0)) throw Error(ErrorCode::NonPositiveDecodeTime, describe_key(r));
    const double ld = std::log(r.decode_time);
    b.q_min = std::min(b.q_min, r.quality.value);
    b.q_max = std::max(b.q_max, r.quality.value);
    b.log_d_min = std::min(b.log_d_min, ld);
    b.log_d_max = std::max(b.log_d_max, ld);
  }
  return b;
}

/// J = Q - alpha * ln(decode_time).
inline double composite_raw(double quality, double decode_time, Alpha alpha) {
  if (!(decode_time > 0.0)) throw Error(ErrorCode::NonPositiveDecodeTime, "decode_time must be > 0");
  return quality - alpha.value * std::log(decode_time);
}

/// Min-max normalized quality Q' in [0,1]; 0 when the bounds are degenerate.
inline double quality_term(double quality, const NormalizationBounds& b) noexcept {
  const double span = b.q_max - b.q_min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((quality - b.q_min) / span, 0.0, 1.0);
}

/// Min-max normalized ln(decode time) d' in [0,1]; 0 when the bounds are degenerate.
inline double decode_term(double decode_time, const NormalizationBounds& b) noexcept {
  const double span = b.log_d_max - b.log_d_min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((std::log(decode_time) - b.log_d_min) / span, 0.0, 1.0);
}

/// J' = Q' - alpha * d'. Throws BoundsMismatch if the record lies outside the
/// bounds by more than kBoundsTolerance (bounds from a different title).
inline double composite_normalized(const MeasurementRecord& record, const NormalizationBounds& bounds,
                                   Alpha alpha) {
  if (!(record.decode_time > 0.0)) throw Error(ErrorCode::NonPositiveDecodeTime, describe_key(record));
  const double q = record.quality.value;
  const double ld = std::log(record.decode_time);
  if (q < bounds.q_min - kBoundsTolerance || q > bounds.q_max + kBoundsTolerance ||
      ld < bounds.log_d_min - kBoundsTolerance || ld > bounds.log_d_max + kBoundsTolerance) {
    throw Error(ErrorCode::BoundsMismatch, describe_key(record) + " lies outside the normalization bounds");
  }
  return quality_term(q, bounds) - alpha.value * decode_term(record.decode_time, bounds);
}

}  // namespace arcs
