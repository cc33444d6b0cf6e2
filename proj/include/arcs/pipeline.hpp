#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "arcs/bdmetrics.hpp"
#include "arcs/error.hpp"
#include "arcs/ladder.hpp"
#include "arcs/measurements.hpp"
#include "arcs/report.hpp"

namespace arcs {

struct RunConfig {
  std::vector<std::string> inputs;  // recorded in the report only
  std::vector<double> alphas{0.0};
  LadderOptions ladder;
  std::vector<Method> methods{Method::ARCS, Method::DynResJOD, Method::Default};
  Method reference = Method::Default;
  std::optional<FixedPlan> plan;
  ChromaFormat chroma_fixed = ChromaFormat::C444;
  int native_height = 2160;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// All data for one title: the dataset ladders are optimized on, plus an
/// optional second-metric dataset evaluated at the same operating points.
struct TitleInput {
  std::string title;
  TitleDataset primary;
  std::optional<TitleDataset> secondary;
};

/// Groups (title, metric) datasets by title. CVVDP data drives optimization
/// when present; PSNR data is then evaluated at the chosen operating points.
inline std::vector<TitleInput> group_titles(const std::vector<TitleDataset>& datasets) {
  std::map<std::string, std::map<QualityMetric, const TitleDataset*>> by_title;
  for (const auto& ds : datasets) {
    auto& slot = by_title[ds.title_id][ds.metric];
    if (slot) throw Error(ErrorCode::DuplicateRecord, ds.title_id + " has two " + std::string(to_string(ds.metric)) + " datasets");
    slot = &ds;
  }
  std::vector<TitleInput> out;
  for (const auto& [title, metrics] : by_title) {
    TitleInput in;
    in.title = title;
    if (auto it = metrics.find(QualityMetric::CVVDP_JOD); it != metrics.end()) {
      in.primary = *it->second;
      if (auto p = metrics.find(QualityMetric::YUVPSNR_DB); p != metrics.end()) in.secondary = *p->second;
    } else {
      in.primary = *metrics.begin()->second;
    }
    out.push_back(std::move(in));
  }
  return out;
}

/// Maps each present rung onto the record with the same (height, chroma,
/// target) in another dataset of the same title; rungs without a match become Absent.
inline Ladder rekey_ladder(const Ladder& ladder, const TitleDataset& other) {
  std::map<std::tuple<int, int, double>, const MeasurementRecord*> index;
  for (const auto& r : other.records) index[{r.resolution.height, fidelity_rank(r.chroma), r.target_bitrate}] = &r;
  Ladder out = ladder;
  for (auto& rung : out.rungs) {
    if (!rung.choice) continue;
    auto it = index.find({rung.choice->resolution.height, fidelity_rank(rung.choice->chroma), rung.choice->target_bitrate});
    if (it == index.end()) {
      rung.choice.reset();
      rung.j_prime.reset();
    } else {
      rung.choice = *it->second;
    }
  }
  return out;
}

inline Ladder build_method(const TitleDataset& ds, Method method, Alpha alpha, const RunConfig& cfg) {
  switch (method) {
    case Method::ARCS: return optimize_arcs(ds, alpha, cfg.ladder);
    case Method::DynResJOD: return build_dynres(ds, alpha, cfg.ladder, cfg.chroma_fixed);
    case Method::Default: return build_default(ds, cfg.ladder, cfg.native_height);
    case Method::FixedLadder:
      if (!cfg.plan) throw Error(ErrorCode::InvalidPlan, "fixed ladder requested without a plan");
      return build_fixed(ds, *cfg.plan, cfg.ladder, cfg.chroma_fixed);
  }
  throw Error(ErrorCode::InvalidPlan, "unknown method");
}

namespace detail {

struct MethodRun {
  Method method;
  std::optional<double> alpha;
};

inline std::vector<MethodRun> method_runs(const RunConfig& cfg) {
  std::vector<MethodRun> runs;
  std::vector<Method> methods = cfg.methods;
  if (std::find(methods.begin(), methods.end(), cfg.reference) == methods.end()) methods.push_back(cfg.reference);
  for (Method m : methods) {
    if (uses_alpha(m)) {
      for (double a : cfg.alphas) runs.push_back({m, a});
    } else {
      runs.push_back({m, std::nullopt});
    }
  }
  return runs;
}

inline std::string run_label(const MethodRun& r) {
  return std::string(to_string(r.method)) + (r.alpha ? "@" + format_number(*r.alpha) : "");
}

struct TitleOutcome {
  TitleReport report;
  // per run index: the ladder (if built) on the primary metric
  std::vector<std::optional<Ladder>> ladders;
};

// BD of `test` against `ref` on one metric; nullopt plus a note on failure.
inline void bd_pair(const Ladder& ref, const Ladder& test, CurveAxis axis, std::optional<double>& slot,
                    std::vector<std::string>& notes, const std::string& label) {
  try {
    slot = bd_delta(build_curve(ref, axis), build_curve(test, axis)).value_percent;
  } catch (const Error& e) {
    notes.push_back(label + " " + std::string(to_string(axis)) + ": " + e.what());
  }
}

inline TitleOutcome run_title(const TitleInput& in, const RunConfig& cfg, const std::vector<MethodRun>& runs) {
  TitleOutcome out;
  out.report.title = in.title;
  out.report.optimized_on = std::string(to_string(in.primary.metric));
  const bool primary_is_c = in.primary.metric == QualityMetric::CVVDP_JOD;

  for (const auto& run : runs) {
    LadderEntry entry;
    entry.method = std::string(to_string(run.method));
    entry.alpha = run.alpha;
    entry.metric = out.report.optimized_on;
    try {
      auto ladder = build_method(in.primary, run.method, Alpha{run.alpha.value_or(0.0)}, cfg);
      for (const auto& r : ladder.rungs) entry.rungs.push_back(to_rung_row(r));
      out.ladders.push_back(std::move(ladder));
    } catch (const Error& e) {
      if (is_input_error(e.code())) throw;
      entry.error = e.what();
      out.ladders.push_back(std::nullopt);
    }
    out.report.ladders.push_back(std::move(entry));
  }

  // An alpha-dependent reference is compared at the test run's alpha (first
  // alpha for alpha-independent test methods).
  auto reference_for = [&](const MethodRun& test) {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (runs[k].method != cfg.reference) continue;
      if (!runs[k].alpha || !test.alpha || runs[k].alpha == test.alpha) return k;
    }
    return std::size_t{0};  // unreachable: method_runs always includes the reference
  };

  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (std::find(cfg.methods.begin(), cfg.methods.end(), runs[i].method) == cfg.methods.end()) continue;
    const std::size_t ref_i = reference_for(runs[i]);
    BdEntry bd;
    bd.method = std::string(to_string(runs[i].method));
    bd.alpha = runs[i].alpha;
    const auto& test = out.ladders[i];
    const auto& ref = out.ladders[ref_i];
    if (!test || !ref) {
      bd.notes.push_back(!test ? run_label(runs[i]) + ": ladder unavailable" : "reference ladder unavailable");
      out.report.bd.push_back(std::move(bd));
      continue;
    }
    auto& rate_slot = primary_is_c ? bd.values.bdr_c : bd.values.bdr_p;
    auto& time_slot = primary_is_c ? bd.values.bddt_c : bd.values.bddt_p;
    const std::string tag = primary_is_c ? "C" : "P";
    bd_pair(*ref, *test, CurveAxis::QualityVsLogRate, rate_slot, bd.notes, tag);
    bd_pair(*ref, *test, CurveAxis::QualityVsLogTime, time_slot, bd.notes, tag);
    if (in.secondary) {
      const auto ref2 = rekey_ladder(*ref, *in.secondary);
      const auto test2 = rekey_ladder(*test, *in.secondary);
      bd_pair(ref2, test2, CurveAxis::QualityVsLogRate, bd.values.bdr_p, bd.notes, "P");
      bd_pair(ref2, test2, CurveAxis::QualityVsLogTime, bd.values.bddt_p, bd.notes, "P");
    }
    out.report.bd.push_back(std::move(bd));
  }
  return out;
}

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Builds every requested ladder for every title, compares each against the
/// reference method and aggregates. Output is independent of thread count.
inline Report run_pipeline(const std::vector<TitleDataset>& datasets, const RunConfig& cfg) {
  if (datasets.empty()) throw Error(ErrorCode::EmptyInput, "no datasets");
  const auto titles = group_titles(datasets);
  const auto runs = detail::method_runs(cfg);

  std::vector<detail::TitleOutcome> outcomes(titles.size());
  const unsigned hw = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, titles.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < titles.size(); ++i) outcomes[i] = detail::run_title(titles[i], cfg, runs);
  } else {
    std::vector<std::future<void>> tasks;
    for (std::size_t w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < titles.size(); i += workers) outcomes[i] = detail::run_title(titles[i], cfg, runs);
      }));
    }
    for (auto& t : tasks) t.get();
  }

  Report report;
  report.config.inputs = cfg.inputs;
  report.config.alphas = cfg.alphas;
  report.config.tolerance = cfg.ladder.tolerance;
  report.config.cross_target = cfg.ladder.cross_target;
  report.config.mode = std::string(to_string(cfg.ladder.mode));
  for (Method m : cfg.methods) report.config.methods.emplace_back(to_string(m));
  report.config.reference = std::string(to_string(cfg.reference));
  report.config.chroma_fixed = std::string(to_string(cfg.chroma_fixed));
  report.config.native_height = cfg.native_height;
  report.config.plan = cfg.plan;
  for (const auto& o : outcomes) report.titles.push_back(o.report);

  // aggregate BD means, in run order
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (std::find(cfg.methods.begin(), cfg.methods.end(), runs[i].method) == cfg.methods.end()) continue;
    AggregateRow row;
    row.method = std::string(to_string(runs[i].method));
    row.alpha = runs[i].alpha;
    std::vector<double> bdr_p, bdr_c, bddt_p, bddt_c;
    for (std::size_t t = 0; t < titles.size(); ++t) {
      const auto& entry = *std::find_if(outcomes[t].report.bd.begin(), outcomes[t].report.bd.end(), [&](const BdEntry& b) {
        return b.method == row.method && b.alpha == row.alpha;
      });
      const bool has_c = titles[t].primary.metric == QualityMetric::CVVDP_JOD;
      const bool has_p = !has_c || titles[t].secondary.has_value();
      // a title counts as excluded for a metric if either of its values is missing
      if (has_c) {
        if (entry.values.bdr_c && entry.values.bddt_c) {
          bdr_c.push_back(*entry.values.bdr_c);
          bddt_c.push_back(*entry.values.bddt_c);
        } else {
          ++row.excluded_c;
        }
      }
      if (has_p) {
        if (entry.values.bdr_p && entry.values.bddt_p) {
          bdr_p.push_back(*entry.values.bdr_p);
          bddt_p.push_back(*entry.values.bddt_p);
        } else {
          ++row.excluded_p;
        }
      }
    }
    row.mean = {detail::mean_of(bdr_p), detail::mean_of(bdr_c), detail::mean_of(bddt_p), detail::mean_of(bddt_c)};
    row.titles_p = static_cast<int>(bdr_p.size());
    row.titles_c = static_cast<int>(bdr_c.size());
    report.aggregate.rows.push_back(std::move(row));

    // chroma PMF over all titles for this run
    std::vector<Ladder> ladders;
    for (const auto& o : outcomes)
      if (o.ladders[i]) ladders.push_back(*o.ladders[i]);
    PmfRow pmf;
    pmf.method = std::string(to_string(runs[i].method));
    pmf.alpha = runs[i].alpha;
    for (const auto& l : ladders) pmf.rungs += static_cast<int>(l.present_count());
    if (pmf.rungs > 0) {
      const auto shares = chroma_pmf(ladders);
      pmf.c420 = shares.at(ChromaFormat::C420);
      pmf.c422 = shares.at(ChromaFormat::C422);
      pmf.c444 = shares.at(ChromaFormat::C444);
    }
    report.aggregate.pmf.push_back(pmf);
  }

  // frontier: alpha-dependent methods, preferring the CVVDP columns
  bool any_c = false;
  for (const auto& t : titles) any_c |= t.primary.metric == QualityMetric::CVVDP_JOD;
  for (const auto& row : report.aggregate.rows) {
    if (!row.alpha) continue;
    FrontierRow f;
    f.method = row.method;
    f.alpha = *row.alpha;
    f.metric = any_c ? "C" : "P";
    f.bdr = any_c ? row.mean.bdr_c : row.mean.bdr_p;
    f.bddt = any_c ? row.mean.bddt_c : row.mean.bddt_p;
    report.aggregate.frontier.push_back(f);
  }
  std::stable_sort(report.aggregate.frontier.begin(), report.aggregate.frontier.end(),
                   [](const FrontierRow& a, const FrontierRow& b) {
                     return std::tie(a.method, a.alpha) < std::tie(b.method, b.alpha);
                   });
  return report;
}

/// Builds the ladders of one method/alpha for every title (titles sorted).
/// Titles whose ladder cannot be built are reported in `failures`.
inline std::vector<Ladder> build_ladders(const std::vector<TitleDataset>& datasets, Method method, Alpha alpha,
                                         const RunConfig& cfg, std::vector<std::string>* failures = nullptr) {
  std::vector<Ladder> out;
  for (const auto& in : group_titles(datasets)) {
    try {
      out.push_back(build_method(in.primary, method, alpha, cfg));
    } catch (const Error& e) {
      if (is_input_error(e.code()) || !failures) throw;
      failures->push_back(in.title + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Human-readable output

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v, 2) : "n/a"; }

inline std::string alpha_cell(const std::optional<double>& a) { return a ? format_number(*a) : "-"; }

}  // namespace detail

inline void write_report_markdown(std::ostream& out, const Report& r) {
  out << "# Ladder comparison against " << r.config.reference << "\n\n"
      << "tolerance " << detail::format_number(r.config.tolerance) << ", optimizer " << r.config.mode
      << ", fixed chroma " << r.config.chroma_fixed << ", " << r.titles.size() << " title(s)\n\n"
      << "## Mean BD metrics [%]\n\n"
      << "| method | alpha | BDR_P | BDR_C | BDDT_P | BDDT_C | titles (P/C) | excluded (P/C) |\n"
      << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& a : r.aggregate.rows) {
    out << "| " << a.method << " | " << detail::alpha_cell(a.alpha) << " | " << detail::cell(a.mean.bdr_p) << " | "
        << detail::cell(a.mean.bdr_c) << " | " << detail::cell(a.mean.bddt_p) << " | " << detail::cell(a.mean.bddt_c)
        << " | " << a.titles_p << "/" << a.titles_c << " | " << a.excluded_p << "/" << a.excluded_c << " |\n";
  }
  out << "\n## Chroma PMF\n\n| method | alpha | 420 | 422 | 444 | rungs |\n|---|---:|---:|---:|---:|---:|\n";
  for (const auto& p : r.aggregate.pmf) {
    out << "| " << p.method << " | " << detail::alpha_cell(p.alpha) << " | " << detail::format_fixed(p.c420, 3) << " | "
        << detail::format_fixed(p.c422, 3) << " | " << detail::format_fixed(p.c444, 3) << " | " << p.rungs << " |\n";
  }
  if (!r.aggregate.frontier.empty()) {
    out << "\n## BDR-BDDT frontier\n\n| method | alpha | metric | BDR | BDDT |\n|---|---:|:---:|---:|---:|\n";
    for (const auto& f : r.aggregate.frontier) {
      out << "| " << f.method << " | " << detail::format_number(f.alpha) << " | " << f.metric << " | "
          << detail::cell(f.bdr) << " | " << detail::cell(f.bddt) << " |\n";
    }
  }
  out << "\n## Per-title BD [%]\n\n| title | method | alpha | BDR_P | BDR_C | BDDT_P | BDDT_C | notes |\n"
      << "|---|---|---:|---:|---:|---:|---:|---|\n";
  for (const auto& t : r.titles) {
    for (const auto& b : t.bd) {
      std::string notes;
      for (const auto& n : b.notes) notes += (notes.empty() ? "" : "; ") + n;
      out << "| " << t.title << " | " << b.method << " | " << detail::alpha_cell(b.alpha) << " | "
          << detail::cell(b.values.bdr_p) << " | " << detail::cell(b.values.bdr_c) << " | "
          << detail::cell(b.values.bddt_p) << " | " << detail::cell(b.values.bddt_c) << " | " << notes << " |\n";
    }
  }
  out << "\nPlot data: rate_quality.csv, rate_time.csv, frontier.csv, pmf.csv\n";
}

inline void write_aggregate_csv(std::ostream& out, const Report& r) {
  out << "method,alpha,BDR_P,BDR_C,BDDT_P,BDDT_C,titles_p,titles_c,excluded_p,excluded_c\n";
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_number(*v) : std::string(); };
  for (const auto& a : r.aggregate.rows) {
    out << a.method << ',' << (a.alpha ? detail::format_number(*a.alpha) : "") << ',' << opt(a.mean.bdr_p) << ','
        << opt(a.mean.bdr_c) << ',' << opt(a.mean.bddt_p) << ',' << opt(a.mean.bddt_c) << ',' << a.titles_p << ','
        << a.titles_c << ',' << a.excluded_p << ',' << a.excluded_c << '\n';
  }
}

inline void write_frontier_csv(std::ostream& out, const Report& r) {
  out << "method,alpha,metric,BDR,BDDT\n";
  for (const auto& f : r.aggregate.frontier) {
    out << f.method << ',' << detail::format_number(f.alpha) << ',' << f.metric << ','
        << (f.bdr ? detail::format_number(*f.bdr) : "") << ',' << (f.bddt ? detail::format_number(*f.bddt) : "") << '\n';
  }
}

inline void write_pmf_csv(std::ostream& out, const Report& r) {
  out << "method,alpha,420,422,444,rungs\n";
  for (const auto& p : r.aggregate.pmf) {
    out << p.method << ',' << (p.alpha ? detail::format_number(*p.alpha) : "") << ',' << detail::format_number(p.c420)
        << ',' << detail::format_number(p.c422) << ',' << detail::format_number(p.c444) << ',' << p.rungs << '\n';
  }
}

/// Operating points of every ladder; `time_axis` selects decode time instead of quality.
inline void write_operating_points_csv(std::ostream& out, const Report& r, bool time_axis) {
  out << "title,method,alpha,target_kbps,actual_kbps," << (time_axis ? "decode_s_per_frame" : "quality")
      << ",height,chroma\n";
  for (const auto& t : r.titles) {
    for (const auto& l : t.ladders) {
      for (const auto& rung : l.rungs) {
        if (!rung.present) continue;
        out << detail::quote_csv(t.title) << ',' << l.method << ',' << (l.alpha ? detail::format_number(*l.alpha) : "")
            << ',' << detail::format_number(rung.target_kbps) << ',' << detail::format_number(*rung.actual_kbps) << ','
            << detail::format_number(time_axis ? *rung.decode_s_per_frame : *rung.quality) << ',' << *rung.height << ','
            << *rung.chroma << '\n';
      }
    }
  }
}

}  // namespace arcs
