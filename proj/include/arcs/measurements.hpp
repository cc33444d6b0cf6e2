#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "arcs/detail/format.hpp"
#include "arcs/error.hpp"

namespace arcs {

// ---------------------------------------------------------------------------
// Chroma subsampling format

enum class ChromaFormat : std::uint8_t { C420 = 0, C422 = 1, C444 = 2 };

inline constexpr ChromaFormat kAllChromaFormats[] = {ChromaFormat::C420, ChromaFormat::C422,
                                                     ChromaFormat::C444};

constexpr int fidelity_rank(ChromaFormat c) noexcept { return static_cast<int>(c); }

/// Chroma samples per luma sample, both chroma planes counted.
constexpr double chroma_density(ChromaFormat c) noexcept {
  switch (c) {
    case ChromaFormat::C420: return 0.5;
    case ChromaFormat::C422: return 1.0;
    case ChromaFormat::C444: return 2.0;
  }
  return 0.0;
}

constexpr std::string_view to_string(ChromaFormat c) noexcept {
  switch (c) {
    case ChromaFormat::C420: return "420";
    case ChromaFormat::C422: return "422";
    case ChromaFormat::C444: return "444";
  }
  return "?";
}

inline std::optional<ChromaFormat> parse_chroma(std::string_view text) {
  text = detail::trim(text);
  if (text == "420") return ChromaFormat::C420;
  if (text == "422") return ChromaFormat::C422;
  if (text == "444") return ChromaFormat::C444;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Spatial resolution. Ordered and compared by height only; width is metadata.

struct Resolution {
  int height = 0;
  int width = 0;

  static constexpr int derived_width(int h) noexcept {
    // 16:9, rounded to an even column count
    const int w = (h * 16 + 8) / 9;
    return w + (w & 1);
  }

  static constexpr Resolution from_height(int h) noexcept { return {h, derived_width(h)}; }

  friend constexpr bool operator==(const Resolution& a, const Resolution& b) noexcept {
    return a.height == b.height;
  }
  friend constexpr std::strong_ordering operator<=>(const Resolution& a, const Resolution& b) noexcept {
    return a.height <=> b.height;
  }
};

// ---------------------------------------------------------------------------
// Quality

enum class QualityMetric : std::uint8_t { CVVDP_JOD, YUVPSNR_DB };

constexpr std::string_view to_string(QualityMetric m) noexcept {
  return m == QualityMetric::CVVDP_JOD ? "cvvdp" : "psnr";
}

inline std::optional<QualityMetric> parse_metric(std::string_view text) {
  text = detail::trim(text);
  if (text == "cvvdp") return QualityMetric::CVVDP_JOD;
  if (text == "psnr") return QualityMetric::YUVPSNR_DB;
  return std::nullopt;
}

struct PlausibleRange {
  double lo;
  double hi;
};

constexpr PlausibleRange plausible_range(QualityMetric m) noexcept {
  return m == QualityMetric::CVVDP_JOD ? PlausibleRange{0.0, 10.0} : PlausibleRange{0.0, 100.0};
}

struct QualityScore {
  QualityMetric metric = QualityMetric::CVVDP_JOD;
  double value = 0.0;

  bool plausible() const noexcept {
    const auto r = plausible_range(metric);
    return std::isfinite(value) && value >= r.lo && value <= r.hi;
  }
  friend bool operator==(const QualityScore&, const QualityScore&) = default;
};

// ---------------------------------------------------------------------------
// Records and datasets

struct MeasurementRecord {
  std::string title_id;
  Resolution resolution;
  ChromaFormat chroma = ChromaFormat::C420;
  double target_bitrate = 0.0;  // kbps
  double actual_bitrate = 0.0;  // kbps
  QualityScore quality;
  double decode_time = 0.0;  // seconds per frame

  friend bool operator==(const MeasurementRecord& a, const MeasurementRecord& b) {
    return a.title_id == b.title_id && a.resolution.height == b.resolution.height &&
           a.resolution.width == b.resolution.width && a.chroma == b.chroma &&
           a.target_bitrate == b.target_bitrate && a.actual_bitrate == b.actual_bitrate &&
           a.quality == b.quality && a.decode_time == b.decode_time;
  }
};

/// Uniqueness key within a dataset: (title, height, chroma, target).
inline auto record_key(const MeasurementRecord& r) {
  return std::make_tuple(r.title_id, r.resolution.height, fidelity_rank(r.chroma), r.target_bitrate);
}

inline std::string describe_key(const MeasurementRecord& r) {
  return "(" + r.title_id + ", " + std::to_string(r.resolution.height) + ", C" +
         std::string(to_string(r.chroma)) + ", " + detail::format_number(r.target_bitrate) + ")";
}

struct TitleDataset {
  std::string title_id;
  QualityMetric metric = QualityMetric::CVVDP_JOD;
  std::vector<MeasurementRecord> records;  // sorted: target, height, chroma
  std::vector<double> bitrate_targets;     // strictly increasing

  bool empty() const noexcept { return records.empty(); }
  friend bool operator==(const TitleDataset&, const TitleDataset&) = default;
};

namespace detail {

inline void sort_records(std::vector<MeasurementRecord>& records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.target_bitrate, a.resolution.height, fidelity_rank(a.chroma)) <
           std::make_tuple(b.target_bitrate, b.resolution.height, fidelity_rank(b.chroma));
  });
}

inline void check_record(const MeasurementRecord& r, std::size_t row) {
  auto fail = [&](std::string_view field) {
    throw Error(ErrorCode::NonPositiveValue,
                std::string(field) + " must be > 0 (row " + std::to_string(row) + ")");
  };
  if (r.resolution.height <= 0) fail("height");
  if (r.resolution.width <= 0) fail("width");
  if (!(r.target_bitrate > 0.0) || !std::isfinite(r.target_bitrate)) fail("target_kbps");
  if (!(r.actual_bitrate > 0.0) || !std::isfinite(r.actual_bitrate)) fail("actual_kbps");
  if (!(r.decode_time > 0.0) || !std::isfinite(r.decode_time)) fail("decode_s_per_frame");
  if (!std::isfinite(r.quality.value)) {
    throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": quality is not finite");
  }
}

// Groups validated records by title, preserving title order of first appearance
// only for error reporting; output is sorted by title_id.
inline std::vector<TitleDataset> group_records(std::vector<MeasurementRecord> records,
                                               const std::vector<std::size_t>& rows) {
  std::map<std::string, TitleDataset> by_title;
  std::set<decltype(record_key(records.front()))> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (!seen.insert(record_key(r)).second) {
      throw Error(ErrorCode::DuplicateRecord, describe_key(r) + " at row " + std::to_string(rows[i]));
    }
    auto [it, inserted] = by_title.try_emplace(r.title_id);
    auto& ds = it->second;
    if (inserted) {
      ds.title_id = r.title_id;
      ds.metric = r.quality.metric;
    } else if (ds.metric != r.quality.metric) {
      throw Error(ErrorCode::MixedQualityMetric, r.title_id);
    }
    ds.records.push_back(std::move(r));
  }
  std::vector<TitleDataset> out;
  out.reserve(by_title.size());
  for (auto& [title, ds] : by_title) {
    sort_records(ds.records);
    std::set<double> targets;
    for (const auto& r : ds.records) targets.insert(r.target_bitrate);
    ds.bitrate_targets.assign(targets.begin(), targets.end());
    out.push_back(std::move(ds));
  }
  return out;
}

// Splits one CSV line; double-quoted fields may contain commas.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

inline std::string quote_csv(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline constexpr std::string_view kCsvColumns[] = {"title",       "height",  "chroma",
                                                   "target_kbps", "actual_kbps", "metric",
                                                   "quality",     "decode_s_per_frame"};

}  // namespace detail

/// Parses the CSV measurement schema into per-title datasets (sorted by title).
/// An optional extra `width` column is accepted; otherwise width is derived as 16:9.
inline std::vector<TitleDataset> parse_dataset(std::istream& source) {
  std::string line;
  std::size_t line_no = 0;
  // header: first non-empty line
  while (std::getline(source, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw Error(ErrorCode::MalformedRow, "row 0: missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) {
      throw Error(ErrorCode::MalformedRow, "row " + std::to_string(line_no) + ": duplicate column " + header[i]);
    }
  }
  for (auto name : detail::kCsvColumns) {
    if (!column.count(std::string(name))) {
      throw Error(ErrorCode::MalformedRow,
                  "row " + std::to_string(line_no) + ": missing column " + std::string(name));
    }
  }
  const bool has_width = column.count("width") > 0;
  if (column.size() != std::size(detail::kCsvColumns) + (has_width ? 1 : 0)) {
    throw Error(ErrorCode::MalformedRow, "row " + std::to_string(line_no) + ": unexpected column in header");
  }

  std::vector<MeasurementRecord> records;
  std::vector<std::size_t> rows;
  while (std::getline(source, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    auto malformed = [&](const std::string& why) {
      return Error(ErrorCode::MalformedRow, "row " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != header.size()) {
      throw malformed("expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    auto field = [&](std::string_view name) -> const std::string& { return fields[column.at(std::string(name))]; };
    auto number = [&](std::string_view name) {
      auto v = detail::parse_number(field(name));
      if (!v) throw malformed("bad number in " + std::string(name) + ": '" + field(name) + "'");
      return *v;
    };
    auto integer = [&](std::string_view name) {
      const double v = number(name);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw malformed(std::string(name) + " is not an integer");
      return static_cast<int>(v);
    };

    MeasurementRecord r;
    r.title_id = field("title");
    if (r.title_id.empty()) throw malformed("empty title");
    r.resolution.height = integer("height");
    r.resolution.width = has_width && !field("width").empty() ? integer("width")
                                                              : Resolution::derived_width(r.resolution.height);
    auto chroma = parse_chroma(field("chroma"));
    if (!chroma) throw malformed("chroma must be one of 420, 422, 444");
    r.chroma = *chroma;
    r.target_bitrate = number("target_kbps");
    r.actual_bitrate = number("actual_kbps");
    auto metric = parse_metric(field("metric"));
    if (!metric) throw malformed("metric must be cvvdp or psnr");
    r.quality = {*metric, number("quality")};
    r.decode_time = number("decode_s_per_frame");
    detail::check_record(r, line_no);
    records.push_back(std::move(r));
    rows.push_back(line_no);
  }
  if (records.empty()) return {};
  return detail::group_records(std::move(records), rows);
}

inline std::vector<TitleDataset> parse_dataset_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in);
}

/// Parses the JSON array-of-objects form (same field names as the CSV columns).
inline std::vector<TitleDataset> parse_dataset_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::MalformedRow, "row 0: JSON input must be an array of objects");
  std::vector<MeasurementRecord> records;
  std::vector<std::size_t> rows;
  std::size_t row = 0;
  for (const auto& obj : doc) {
    ++row;
    auto malformed = [&](const std::string& why) {
      return Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + why);
    };
    if (!obj.is_object()) throw malformed("not an object");
    for (auto name : detail::kCsvColumns) {
      if (!obj.contains(std::string(name))) throw malformed("missing field " + std::string(name));
    }
    auto number = [&](const char* name) {
      const auto& v = obj.at(name);
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) {
        if (auto d = detail::parse_number(v.get<std::string>())) return *d;
      }
      throw malformed(std::string("bad number in ") + name);
    };
    auto text = [&](const char* name) {
      const auto& v = obj.at(name);
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      throw malformed(std::string("bad value in ") + name);
    };
    auto integer = [&](const char* name) {
      const double v = number(name);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw malformed(std::string(name) + " is not an integer");
      return static_cast<int>(v);
    };

    MeasurementRecord r;
    r.title_id = text("title");
    if (r.title_id.empty()) throw malformed("empty title");
    r.resolution.height = integer("height");
    r.resolution.width = obj.contains("width") && !obj.at("width").is_null()
                             ? integer("width")
                             : Resolution::derived_width(r.resolution.height);
    auto chroma = parse_chroma(text("chroma"));
    if (!chroma) throw malformed("chroma must be one of 420, 422, 444");
    r.chroma = *chroma;
    r.target_bitrate = number("target_kbps");
    r.actual_bitrate = number("actual_kbps");
    auto metric = parse_metric(text("metric"));
    if (!metric) throw malformed("metric must be cvvdp or psnr");
    r.quality = {*metric, number("quality")};
    r.decode_time = number("decode_s_per_frame");
    detail::check_record(r, row);
    records.push_back(std::move(r));
    rows.push_back(row);
  }
  if (records.empty()) return {};
  return detail::group_records(std::move(records), rows);
}

/// Writes datasets in the CSV schema. The width column is emitted only when some
/// record's width differs from the derived 16:9 width.
inline void write_dataset_csv(std::ostream& out, const std::vector<TitleDataset>& datasets) {
  bool need_width = false;
  for (const auto& ds : datasets)
    for (const auto& r : ds.records)
      need_width |= r.resolution.width != Resolution::derived_width(r.resolution.height);

  out << "title,height,chroma,target_kbps,actual_kbps,metric,quality,decode_s_per_frame";
  if (need_width) out << ",width";
  out << '\n';
  for (const auto& ds : datasets) {
    for (const auto& r : ds.records) {
      out << detail::quote_csv(r.title_id) << ',' << r.resolution.height << ',' << to_string(r.chroma) << ','
          << detail::format_number(r.target_bitrate) << ',' << detail::format_number(r.actual_bitrate) << ','
          << to_string(r.quality.metric) << ',' << detail::format_number(r.quality.value) << ','
          << detail::format_number(r.decode_time);
      if (need_width) out << ',' << r.resolution.width;
      out << '\n';
    }
  }
}

inline std::string dataset_to_csv(const std::vector<TitleDataset>& datasets) {
  std::ostringstream out;
  write_dataset_csv(out, datasets);
  return out.str();
}

/// Combines datasets from several sources. Datasets are keyed by (title, metric);
/// the same key appearing twice is merged, with duplicate records rejected.
inline std::vector<TitleDataset> merge_datasets(std::vector<TitleDataset> datasets) {
  std::map<std::pair<std::string, int>, TitleDataset> merged;
  for (auto& ds : datasets) {
    auto key = std::make_pair(ds.title_id, static_cast<int>(ds.metric));
    auto [it, inserted] = merged.try_emplace(key, std::move(ds));
    if (inserted) continue;
    auto& into = it->second;
    std::set<decltype(record_key(into.records.front()))> seen;
    for (const auto& r : into.records) seen.insert(record_key(r));
    for (auto& r : ds.records) {
      if (!seen.insert(record_key(r)).second) throw Error(ErrorCode::DuplicateRecord, describe_key(r));
      into.records.push_back(std::move(r));
    }
    detail::sort_records(into.records);
    std::set<double> targets(into.bitrate_targets.begin(), into.bitrate_targets.end());
    targets.insert(ds.bitrate_targets.begin(), ds.bitrate_targets.end());
    into.bitrate_targets.assign(targets.begin(), targets.end());
  }
  std::vector<TitleDataset> out;
  for (auto& [key, ds] : merged) out.push_back(std::move(ds));
  return out;
}

// ---------------------------------------------------------------------------
// Candidate filtering

struct CandidateOptions {
  double tolerance = 0.10;
  // Allow records encoded for another target to serve this one when their
  // actual bitrate falls inside the window.
  bool cross_target = false;
};

inline bool within_window(double actual, double target, double tolerance) noexcept {
  return actual >= target * (1.0 - tolerance) && actual <= target * (1.0 + tolerance);
}

/// Records usable for `target`: target_bitrate equal to `target` (unless
/// cross-target) and actual bitrate within target*(1 -+ tolerance).
/// Ordered by height, then chroma fidelity, then distance to target.
inline std::vector<MeasurementRecord> candidates_for(const TitleDataset& dataset, double target,
                                                     const CandidateOptions& opts) {
  std::vector<MeasurementRecord> out;
  for (const auto& r : dataset.records) {
    if (!opts.cross_target && r.target_bitrate != target) continue;
    if (within_window(r.actual_bitrate, target, opts.tolerance)) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [target](const auto& a, const auto& b) {
    return std::make_tuple(a.resolution.height, fidelity_rank(a.chroma), std::abs(a.actual_bitrate - target),
                           a.target_bitrate) <
           std::make_tuple(b.resolution.height, fidelity_rank(b.chroma), std::abs(b.actual_bitrate - target),
                           b.target_bitrate);
  });
  return out;
}

inline std::vector<MeasurementRecord> candidates_for(const TitleDataset& dataset, double target, double tolerance) {
  return candidates_for(dataset, target, CandidateOptions{tolerance, false});
}

// ---------------------------------------------------------------------------
// Dataset-quality warnings (non-fatal)

struct ValidationWarning {
  std::string title_id;
  std::string message;
};

inline std::vector<ValidationWarning> dataset_warnings(const TitleDataset& ds, const CandidateOptions& opts) {
  std::vector<ValidationWarning> out;
  for (const auto& r : ds.records) {
    if (!r.quality.plausible()) {
      const auto range = plausible_range(r.quality.metric);
      out.push_back({ds.title_id, "quality " + detail::format_number(r.quality.value) + " of " + describe_key(r) +
                                      " outside plausible " + std::string(to_string(r.quality.metric)) + " range [" +
                                      detail::format_number(range.lo) + ", " + detail::format_number(range.hi) + "]"});
    }
  }
  for (double target : ds.bitrate_targets) {
    if (candidates_for(ds, target, opts).empty()) {
      out.push_back({ds.title_id, "no encode within the tolerance window at target " +
                                      detail::format_number(target) + " kbps"});
    }
  }
  return out;
}

}  // namespace arcs
