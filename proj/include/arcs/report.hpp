#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arcs/detail/format.hpp"
#include "arcs/ladder.hpp"
#include "arcs/measurements.hpp"

namespace arcs {

// JSON report schema (field names are fixed):
//
// {
//   "config":    {inputs, alphas, tolerance, cross_target, mode, methods, reference,
//                 chroma_fixed, native_height, plan},
//   "titles":    [{title, optimized_on, ladders: [LadderEntry], bd: [BdEntry]}],
//   "aggregate": {rows: [AggregateRow], pmf: [PmfRow], frontier: [FrontierRow]}
// }
//
// BD values are percentages keyed BDR_P, BDR_C, BDDT_P, BDDT_C (P = PSNR data,
// C = ColorVideoVDP data); null where the metric is unavailable or the title
// was excluded. Negative BDR = bitrate savings, negative BDDT = decoding-time
// savings against the reference method.

struct ReportConfig {
  std::vector<std::string> inputs;
  std::vector<double> alphas;
  double tolerance = 0.10;
  bool cross_target = false;
  std::string mode = "dp";
  std::vector<std::string> methods;
  std::string reference = "default";
  std::string chroma_fixed = "444";
  int native_height = 2160;
  std::optional<FixedPlan> plan;

  friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct RungRow {
  double target_kbps = 0.0;
  bool present = false;
  std::optional<int> height;
  std::optional<std::string> chroma;
  std::optional<double> actual_kbps;
  std::optional<double> quality;
  std::optional<double> decode_s_per_frame;
  std::optional<double> j_prime;

  friend bool operator==(const RungRow&, const RungRow&) = default;
};

struct LadderEntry {
  std::string method;
  std::optional<double> alpha;  // null for alpha-independent methods
  std::string metric;
  std::vector<RungRow> rungs;
  std::optional<std::string> error;

  friend bool operator==(const LadderEntry&, const LadderEntry&) = default;
};

struct BdValues {
  std::optional<double> bdr_p;
  std::optional<double> bdr_c;
  std::optional<double> bddt_p;
  std::optional<double> bddt_c;

  friend bool operator==(const BdValues&, const BdValues&) = default;
};

struct BdEntry {
  std::string method;
  std::optional<double> alpha;
  BdValues values;
  std::vector<std::string> notes;  // why a value is missing

  friend bool operator==(const BdEntry&, const BdEntry&) = default;
};

struct TitleReport {
  std::string title;
  std::string optimized_on;  // metric used for J'
  std::vector<LadderEntry> ladders;
  std::vector<BdEntry> bd;

  friend bool operator==(const TitleReport&, const TitleReport&) = default;
};

struct AggregateRow {
  std::string method;
  std::optional<double> alpha;
  BdValues mean;
  int titles_p = 0;  // titles contributing to the P means
  int titles_c = 0;
  int excluded_p = 0;  // titles with P data whose BD computation failed
  int excluded_c = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct PmfRow {
  std::string method;
  std::optional<double> alpha;
  double c420 = 0.0;
  double c422 = 0.0;
  double c444 = 0.0;
  int rungs = 0;

  friend bool operator==(const PmfRow&, const PmfRow&) = default;
};

struct FrontierRow {
  std::string method;
  double alpha = 0.0;
  std::string metric;  // "C" or "P"
  std::optional<double> bdr;
  std::optional<double> bddt;

  friend bool operator==(const FrontierRow&, const FrontierRow&) = default;
};

struct Aggregate {
  std::vector<AggregateRow> rows;
  std::vector<PmfRow> pmf;
  std::vector<FrontierRow> frontier;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct Report {
  ReportConfig config;
  std::vector<TitleReport> titles;
  Aggregate aggregate;

  friend bool operator==(const Report&, const Report&) = default;
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <typename T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace detail

inline nlohmann::json to_json(const BdValues& v) {
  return {{"BDR_P", detail::opt_json(v.bdr_p)},
          {"BDR_C", detail::opt_json(v.bdr_c)},
          {"BDDT_P", detail::opt_json(v.bddt_p)},
          {"BDDT_C", detail::opt_json(v.bddt_c)}};
}

inline BdValues bd_values_from_json(const nlohmann::json& j) {
  return {detail::opt_get<double>(j, "BDR_P"), detail::opt_get<double>(j, "BDR_C"),
          detail::opt_get<double>(j, "BDDT_P"), detail::opt_get<double>(j, "BDDT_C")};
}

inline nlohmann::json to_json(const RungRow& r) {
  return {{"target_kbps", r.target_kbps},
          {"present", r.present},
          {"height", detail::opt_json(r.height)},
          {"chroma", detail::opt_json(r.chroma)},
          {"actual_kbps", detail::opt_json(r.actual_kbps)},
          {"quality", detail::opt_json(r.quality)},
          {"decode_s_per_frame", detail::opt_json(r.decode_s_per_frame)},
          {"j_prime", detail::opt_json(r.j_prime)}};
}

inline RungRow rung_row_from_json(const nlohmann::json& j) {
  return {j.at("target_kbps").get<double>(),          j.at("present").get<bool>(),
          detail::opt_get<int>(j, "height"),           detail::opt_get<std::string>(j, "chroma"),
          detail::opt_get<double>(j, "actual_kbps"),   detail::opt_get<double>(j, "quality"),
          detail::opt_get<double>(j, "decode_s_per_frame"), detail::opt_get<double>(j, "j_prime")};
}

inline nlohmann::json to_json(const LadderEntry& l) {
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& r : l.rungs) rungs.push_back(to_json(r));
  return {{"method", l.method},
          {"alpha", detail::opt_json(l.alpha)},
          {"metric", l.metric},
          {"rungs", rungs},
          {"error", detail::opt_json(l.error)}};
}

inline LadderEntry ladder_entry_from_json(const nlohmann::json& j) {
  LadderEntry l;
  l.method = j.at("method").get<std::string>();
  l.alpha = detail::opt_get<double>(j, "alpha");
  l.metric = j.at("metric").get<std::string>();
  for (const auto& r : j.at("rungs")) l.rungs.push_back(rung_row_from_json(r));
  l.error = detail::opt_get<std::string>(j, "error");
  return l;
}

inline nlohmann::json to_json(const ReportConfig& c) {
  nlohmann::json plan = nullptr;
  if (c.plan) {
    plan = nlohmann::json::array();
    for (const auto& e : *c.plan) plan.push_back({{"target_kbps", e.target_bitrate}, {"height", e.height}});
  }
  return {{"inputs", c.inputs},       {"alphas", c.alphas},         {"tolerance", c.tolerance},
          {"cross_target", c.cross_target}, {"mode", c.mode},       {"methods", c.methods},
          {"reference", c.reference}, {"chroma_fixed", c.chroma_fixed}, {"native_height", c.native_height},
          {"plan", plan}};
}

inline ReportConfig report_config_from_json(const nlohmann::json& j) {
  ReportConfig c;
  c.inputs = j.at("inputs").get<std::vector<std::string>>();
  c.alphas = j.at("alphas").get<std::vector<double>>();
  c.tolerance = j.at("tolerance").get<double>();
  c.cross_target = j.at("cross_target").get<bool>();
  c.mode = j.at("mode").get<std::string>();
  c.methods = j.at("methods").get<std::vector<std::string>>();
  c.reference = j.at("reference").get<std::string>();
  c.chroma_fixed = j.at("chroma_fixed").get<std::string>();
  c.native_height = j.at("native_height").get<int>();
  if (!j.at("plan").is_null()) {
    FixedPlan plan;
    for (const auto& e : j.at("plan")) plan.push_back({e.at("target_kbps").get<double>(), e.at("height").get<int>()});
    c.plan = std::move(plan);
  }
  return c;
}

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json titles = nlohmann::json::array();
  for (const auto& t : r.titles) {
    nlohmann::json ladders = nlohmann::json::array();
    for (const auto& l : t.ladders) ladders.push_back(to_json(l));
    nlohmann::json bd = nlohmann::json::array();
    for (const auto& b : t.bd) {
      nlohmann::json e = to_json(b.values);
      e["method"] = b.method;
      e["alpha"] = detail::opt_json(b.alpha);
      e["notes"] = b.notes;
      bd.push_back(std::move(e));
    }
    titles.push_back({{"title", t.title}, {"optimized_on", t.optimized_on}, {"ladders", ladders}, {"bd", bd}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : r.aggregate.rows) {
    nlohmann::json e = to_json(a.mean);
    e["method"] = a.method;
    e["alpha"] = detail::opt_json(a.alpha);
    e["titles_p"] = a.titles_p;
    e["titles_c"] = a.titles_c;
    e["excluded_p"] = a.excluded_p;
    e["excluded_c"] = a.excluded_c;
    rows.push_back(std::move(e));
  }
  nlohmann::json pmf = nlohmann::json::array();
  for (const auto& p : r.aggregate.pmf) {
    pmf.push_back({{"method", p.method},
                   {"alpha", detail::opt_json(p.alpha)},
                   {"420", p.c420},
                   {"422", p.c422},
                   {"444", p.c444},
                   {"rungs", p.rungs}});
  }
  nlohmann::json frontier = nlohmann::json::array();
  for (const auto& f : r.aggregate.frontier) {
    frontier.push_back({{"method", f.method},
                        {"alpha", f.alpha},
                        {"metric", f.metric},
                        {"BDR", detail::opt_json(f.bdr)},
                        {"BDDT", detail::opt_json(f.bddt)}});
  }
  return {{"config", to_json(r.config)},
          {"titles", titles},
          {"aggregate", {{"rows", rows}, {"pmf", pmf}, {"frontier", frontier}}}};
}

inline Report report_from_json(const nlohmann::json& j) {
  Report r;
  r.config = report_config_from_json(j.at("config"));
  for (const auto& t : j.at("titles")) {
    TitleReport tr;
    tr.title = t.at("title").get<std::string>();
    tr.optimized_on = t.at("optimized_on").get<std::string>();
    for (const auto& l : t.at("ladders")) tr.ladders.push_back(ladder_entry_from_json(l));
    for (const auto& b : t.at("bd")) {
      tr.bd.push_back({b.at("method").get<std::string>(), detail::opt_get<double>(b, "alpha"), bd_values_from_json(b),
                       b.at("notes").get<std::vector<std::string>>()});
    }
    r.titles.push_back(std::move(tr));
  }
  const auto& agg = j.at("aggregate");
  for (const auto& a : agg.at("rows")) {
    r.aggregate.rows.push_back({a.at("method").get<std::string>(), detail::opt_get<double>(a, "alpha"),
                                bd_values_from_json(a), a.at("titles_p").get<int>(), a.at("titles_c").get<int>(),
                                a.at("excluded_p").get<int>(), a.at("excluded_c").get<int>()});
  }
  for (const auto& p : agg.at("pmf")) {
    r.aggregate.pmf.push_back({p.at("method").get<std::string>(), detail::opt_get<double>(p, "alpha"),
                               p.at("420").get<double>(), p.at("422").get<double>(), p.at("444").get<double>(),
                               p.at("rungs").get<int>()});
  }
  for (const auto& f : agg.at("frontier")) {
    r.aggregate.frontier.push_back({f.at("method").get<std::string>(), f.at("alpha").get<double>(),
                                    f.at("metric").get<std::string>(), detail::opt_get<double>(f, "BDR"),
                                    detail::opt_get<double>(f, "BDDT")});
  }
  return r;
}

inline std::string dump_report(const Report& r) { return to_json(r).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Conversions from library types

inline RungRow to_rung_row(const Rung& rung) {
  RungRow row;
  row.target_kbps = rung.target_bitrate;
  row.present = rung.present();
  if (rung.choice) {
    row.height = rung.choice->resolution.height;
    row.chroma = std::string(to_string(rung.choice->chroma));
    row.actual_kbps = rung.choice->actual_bitrate;
    row.quality = rung.choice->quality.value;
    row.decode_s_per_frame = rung.choice->decode_time;
    row.j_prime = rung.j_prime;
  }
  return row;
}

inline nlohmann::json ladder_to_json(const Ladder& l, OptimizerMode mode) {
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& r : l.rungs) rungs.push_back(to_json(to_rung_row(r)));
  return {{"title", l.title_id},
          {"method", std::string(to_string(l.method))},
          {"alpha", uses_alpha(l.method) ? nlohmann::json(l.alpha.value) : nlohmann::json(nullptr)},
          {"mode", std::string(to_string(mode))},
          {"present_rungs", l.present_count()},
          {"sum_j_prime", l.sum_j_prime()},
          {"rungs", rungs}};
}

inline void write_ladder_csv(std::ostream& out, const Ladder& l) {
  out << "title,method,alpha,target_kbps,present,height,chroma,actual_kbps,quality,decode_s_per_frame,j_prime\n";
  for (const auto& r : l.rungs) {
    out << detail::quote_csv(l.title_id) << ',' << to_string(l.method) << ','
        << (uses_alpha(l.method) ? detail::format_number(l.alpha.value) : "") << ','
        << detail::format_number(r.target_bitrate) << ',' << (r.present() ? 1 : 0);
    if (r.choice) {
      out << ',' << r.choice->resolution.height << ',' << to_string(r.choice->chroma) << ','
          << detail::format_number(r.choice->actual_bitrate) << ',' << detail::format_number(r.choice->quality.value)
          << ',' << detail::format_number(r.choice->decode_time) << ',' << detail::format_number(*r.j_prime);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

inline void write_ladder_markdown(std::ostream& out, const Ladder& l) {
  out << "# " << l.title_id << " - " << to_string(l.method);
  if (uses_alpha(l.method)) out << " (alpha = " << detail::format_number(l.alpha.value) << ")";
  out << "\n\n| target kbps | height | chroma | actual kbps | quality | decode s/frame | J' |\n"
      << "|---:|---:|:---:|---:|---:|---:|---:|\n";
  for (const auto& r : l.rungs) {
    out << "| " << detail::format_number(r.target_bitrate) << " | ";
    if (r.choice) {
      out << r.choice->resolution.height << " | " << to_string(r.choice->chroma) << " | "
          << detail::format_fixed(r.choice->actual_bitrate, 1) << " | " << detail::format_fixed(r.choice->quality.value, 3)
          << " | " << detail::format_fixed(r.choice->decode_time, 5) << " | " << detail::format_fixed(*r.j_prime, 4)
          << " |\n";
    } else {
      out << "absent | | | | | |\n";
    }
  }
}

}  // namespace arcs
