#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "arcs/error.hpp"
#include "arcs/measurements.hpp"
#include "arcs/objective.hpp"

namespace arcs {

enum class Method { ARCS, DynResJOD, FixedLadder, Default };

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::ARCS: return "arcs";
    case Method::DynResJOD: return "dynres";
    case Method::FixedLadder: return "fixed";
    case Method::Default: return "default";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "arcs") return Method::ARCS;
  if (s == "dynres") return Method::DynResJOD;
  if (s == "fixed") return Method::FixedLadder;
  if (s == "default") return Method::Default;
  return std::nullopt;
}

/// Whether the method's ladder depends on alpha.
constexpr bool uses_alpha(Method m) noexcept { return m == Method::ARCS || m == Method::DynResJOD; }

enum class OptimizerMode { GlobalDP, GreedySequential };

constexpr std::string_view to_string(OptimizerMode m) noexcept {
  return m == OptimizerMode::GlobalDP ? "dp" : "greedy";
}

inline std::optional<OptimizerMode> parse_mode(std::string_view s) {
  if (s == "dp") return OptimizerMode::GlobalDP;
  if (s == "greedy") return OptimizerMode::GreedySequential;
  return std::nullopt;
}

struct Rung {
  double target_bitrate = 0.0;
  std::optional<MeasurementRecord> choice;
  std::optional<double> j_prime;  // set iff choice is

  bool present() const noexcept { return choice.has_value(); }
  friend bool operator==(const Rung&, const Rung&) = default;
};

struct Ladder {
  std::string title_id;
  Alpha alpha;
  Method method = Method::ARCS;
  std::vector<Rung> rungs;  // ascending target_bitrate

  std::size_t present_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(rungs.begin(), rungs.end(), [](const Rung& r) { return r.present(); }));
  }
  double sum_j_prime() const noexcept {
    double s = 0.0;
    for (const auto& r : rungs)
      if (r.j_prime) s += *r.j_prime;
    return s;
  }
  friend bool operator==(const Ladder&, const Ladder&) = default;
};

// ---------------------------------------------------------------------------
// Monotonicity

/// A step from `prev` to `next` (next at a higher bitrate) is allowed when the
/// height increases (chroma may refresh to any format), or the height is equal
/// and chroma fidelity does not decrease.
constexpr bool transition_allowed(int prev_height, ChromaFormat prev_chroma, int next_height,
                                  ChromaFormat next_chroma) noexcept {
  if (next_height > prev_height) return true;
  if (next_height < prev_height) return false;
  return fidelity_rank(next_chroma) >= fidelity_rank(prev_chroma);
}

inline bool transition_allowed(const MeasurementRecord& prev, const MeasurementRecord& next) noexcept {
  return transition_allowed(prev.resolution.height, prev.chroma, next.resolution.height, next.chroma);
}

/// Returns a description of the first violated ladder invariant, if any.
/// Absent rungs are skipped: constraints apply between consecutive present rungs.
inline std::optional<std::string> find_violation(const std::vector<Rung>& rungs, bool require_target_match = true) {
  const MeasurementRecord* prev = nullptr;
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    const auto& r = rungs[i];
    if (i > 0 && !(r.target_bitrate > rungs[i - 1].target_bitrate)) {
      return "rung " + std::to_string(i) + ": targets not strictly increasing";
    }
    if (r.choice.has_value() != r.j_prime.has_value()) {
      return "rung " + std::to_string(i) + ": j_prime must be set iff a choice is present";
    }
    if (!r.choice) continue;
    if (require_target_match && r.choice->target_bitrate != r.target_bitrate) {
      return "rung " + std::to_string(i) + ": choice encoded for a different target";
    }
    if (prev) {
      if (r.choice->resolution.height < prev->resolution.height) {
        return "rung " + std::to_string(i) + ": resolution decreases (" + std::to_string(prev->resolution.height) +
               " -> " + std::to_string(r.choice->resolution.height) + ")";
      }
      if (!transition_allowed(*prev, *r.choice)) {
        return "rung " + std::to_string(i) + ": chroma fidelity decreases within resolution " +
               std::to_string(r.choice->resolution.height);
      }
    }
    prev = &*r.choice;
  }
  return std::nullopt;
}

inline bool is_monotone(const Ladder& ladder, bool require_target_match = true) {
  return !find_violation(ladder.rungs, require_target_match).has_value();
}

/// Constructs a ladder, rejecting rung sequences that break the invariants.
inline Ladder make_ladder(std::string title_id, Alpha alpha, Method method, std::vector<Rung> rungs,
                          bool require_target_match = true) {
  if (auto why = find_violation(rungs, require_target_match)) throw Error(ErrorCode::InvalidLadder, title_id + ": " + *why);
  return Ladder{std::move(title_id), alpha, method, std::move(rungs)};
}

// ---------------------------------------------------------------------------
// Optimizer core

struct LadderOptions {
  double tolerance = 0.10;
  bool cross_target = false;
  OptimizerMode mode = OptimizerMode::GlobalDP;

  CandidateOptions candidates() const { return {tolerance, cross_target}; }
};

namespace detail {

struct Option {
  MeasurementRecord record;
  double j_prime = 0.0;
};

/// Per-target candidate options with their J' values.
struct Problem {
  std::vector<double> targets;
  std::vector<std::vector<Option>> options;
};

// Per-rung preference: higher J', lower decode time, lower height, lower
// chroma fidelity; remaining keys only matter for cross-target candidates.
// Returns <0 if a is preferred, >0 if b is preferred, 0 if indistinguishable.
inline int compare_options(const Option& a, const Option& b, double target) noexcept {
  if (a.j_prime != b.j_prime) return a.j_prime > b.j_prime ? -1 : 1;
  if (a.record.decode_time != b.record.decode_time) return a.record.decode_time < b.record.decode_time ? -1 : 1;
  if (a.record.resolution.height != b.record.resolution.height)
    return a.record.resolution.height < b.record.resolution.height ? -1 : 1;
  if (a.record.chroma != b.record.chroma) return fidelity_rank(a.record.chroma) < fidelity_rank(b.record.chroma) ? -1 : 1;
  const double da = std::abs(a.record.actual_bitrate - target);
  const double db = std::abs(b.record.actual_bitrate - target);
  if (da != db) return da < db ? -1 : 1;
  if (a.record.target_bitrate != b.record.target_bitrate) return a.record.target_bitrate < b.record.target_bitrate ? -1 : 1;
  return 0;
}

inline constexpr int kAbsent = -1;

/// A (partial) assignment: option index per target, or kAbsent.
struct Path {
  int present = 0;
  double sum = 0.0;
  std::vector<int> picks;
};

// Total order on equal-length paths: more present rungs, then larger sum J',
// then per-rung preference from the lowest target (present before Absent).
inline bool path_better(const Path& a, const Path& b, const Problem& p) {
  if (a.present != b.present) return a.present > b.present;
  if (a.sum != b.sum) return a.sum > b.sum;
  for (std::size_t i = 0; i < a.picks.size(); ++i) {
    const int x = a.picks[i];
    const int y = b.picks[i];
    if (x == y) continue;
    if (x == kAbsent) return false;
    if (y == kAbsent) return true;
    const int c = compare_options(p.options[i][static_cast<std::size_t>(x)], p.options[i][static_cast<std::size_t>(y)],
                                  p.targets[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

inline Path extend(const Path& base, int pick, const Problem& p) {
  Path out = base;
  const std::size_t i = out.picks.size();
  out.picks.push_back(pick);
  if (pick != kAbsent) {
    out.present += 1;
    out.sum += p.options[i][static_cast<std::size_t>(pick)].j_prime;
  }
  return out;
}

// Last present (height, chroma), or none. Feasibility of the remaining rungs
// depends only on this.
using StateKey = std::optional<std::pair<int, int>>;

inline StateKey state_after(const Path& path, const Problem& p) {
  for (std::size_t i = path.picks.size(); i-- > 0;) {
    if (path.picks[i] == kAbsent) continue;
    const auto& r = p.options[i][static_cast<std::size_t>(path.picks[i])].record;
    return std::make_pair(r.resolution.height, fidelity_rank(r.chroma));
  }
  return std::nullopt;
}

inline bool feasible_from(const StateKey& state, const MeasurementRecord& next) noexcept {
  if (!state) return true;
  return transition_allowed(state->first, static_cast<ChromaFormat>(state->second), next.resolution.height, next.chroma);
}

/// Exact maximizer over constraint-feasible assignments via forward dynamic
/// programming on the last-present (height, chroma) state.
inline Path solve_dp(const Problem& p) {
  std::map<StateKey, Path> current;
  current.emplace(std::nullopt, Path{});
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    std::map<StateKey, Path> next;
    auto relax = [&](const StateKey& key, Path candidate) {
      auto it = next.find(key);
      if (it == next.end()) {
        next.emplace(key, std::move(candidate));
      } else if (path_better(candidate, it->second, p)) {
        it->second = std::move(candidate);
      }
    };
    for (const auto& [state, path] : current) {
      relax(state, extend(path, kAbsent, p));
      for (std::size_t k = 0; k < p.options[i].size(); ++k) {
        const auto& rec = p.options[i][k].record;
        if (!feasible_from(state, rec)) continue;
        relax(std::make_pair(rec.resolution.height, fidelity_rank(rec.chroma)), extend(path, static_cast<int>(k), p));
      }
    }
    current = std::move(next);
  }
  const Path* best = nullptr;
  for (const auto& [state, path] : current)
    if (!best || path_better(path, *best, p)) best = &path;
  return *best;
}

/// Ascending scan, taking the preferred candidate feasible w.r.t. the previous
/// present rung; Absent when none is feasible.
inline Path solve_greedy(const Problem& p) {
  Path path;
  StateKey state;
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    int best = kAbsent;
    for (std::size_t k = 0; k < p.options[i].size(); ++k) {
      if (!feasible_from(state, p.options[i][k].record)) continue;
      if (best == kAbsent ||
          compare_options(p.options[i][k], p.options[i][static_cast<std::size_t>(best)], p.targets[i]) < 0) {
        best = static_cast<int>(k);
      }
    }
    path = extend(path, best, p);
    if (best != kAbsent) {
      const auto& r = p.options[i][static_cast<std::size_t>(best)].record;
      state = std::make_pair(r.resolution.height, fidelity_rank(r.chroma));
    }
  }
  return path;
}

inline Problem make_problem(const TitleDataset& dataset, Alpha alpha, const LadderOptions& opts,
                            const std::function<bool(const MeasurementRecord&)>& in_pool) {
  const auto bounds = bounds_for(dataset);
  Problem p;
  p.targets = dataset.bitrate_targets;
  p.options.resize(p.targets.size());
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    for (auto& rec : candidates_for(dataset, p.targets[i], opts.candidates())) {
      if (!in_pool(rec)) continue;
      const double j = composite_normalized(rec, bounds, alpha);
      p.options[i].push_back({std::move(rec), j});
    }
  }
  return p;
}

inline Ladder to_ladder(const TitleDataset& dataset, Alpha alpha, Method method, const Problem& p, const Path& path,
                        const LadderOptions& opts) {
  std::vector<Rung> rungs;
  rungs.reserve(p.targets.size());
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    Rung rung{p.targets[i], std::nullopt, std::nullopt};
    if (path.picks[i] != kAbsent) {
      const auto& opt = p.options[i][static_cast<std::size_t>(path.picks[i])];
      rung.choice = opt.record;
      rung.j_prime = opt.j_prime;
    }
    rungs.push_back(std::move(rung));
  }
  return make_ladder(dataset.title_id, alpha, method, std::move(rungs), !opts.cross_target);
}

inline Ladder optimize_pool(const TitleDataset& dataset, Alpha alpha, const LadderOptions& opts, Method method,
                            const std::function<bool(const MeasurementRecord&)>& in_pool) {
  if (dataset.records.empty()) throw Error(ErrorCode::AllRungsAbsent, dataset.title_id + ": empty dataset");
  const auto problem = make_problem(dataset, alpha, opts, in_pool);
  const Path path = opts.mode == OptimizerMode::GlobalDP ? solve_dp(problem) : solve_greedy(problem);
  if (path.present == 0) throw Error(ErrorCode::AllRungsAbsent, dataset.title_id);
  return to_ladder(dataset, alpha, method, problem, path, opts);
}

}  // namespace detail

/// Joint resolution/chroma ladder maximizing J' under the monotonicity
/// constraints. GlobalDP maximizes the number of present rungs, then sum J'.
inline Ladder optimize_arcs(const TitleDataset& dataset, Alpha alpha, const LadderOptions& opts = {}) {
  return detail::optimize_pool(dataset, alpha, opts, Method::ARCS, [](const MeasurementRecord&) { return true; });
}

inline constexpr double kEnumerationLimit = 1e7;

/// Exhaustive search over every constraint-feasible assignment; the
/// verification oracle for optimize_arcs(GlobalDP). Same objective and ties.
inline Ladder enumerate_optimal(const TitleDataset& dataset, Alpha alpha, const LadderOptions& opts = {}) {
  if (dataset.records.empty()) throw Error(ErrorCode::AllRungsAbsent, dataset.title_id + ": empty dataset");
  const auto p = detail::make_problem(dataset, alpha, opts, [](const MeasurementRecord&) { return true; });
  double space = 1.0;
  for (const auto& opts_i : p.options) space *= static_cast<double>(opts_i.size() + 1);
  if (space > kEnumerationLimit) {
    throw Error(ErrorCode::SearchSpaceTooLarge, dataset.title_id + ": " + detail::format_number(space) + " assignments");
  }

  std::optional<detail::Path> best;
  detail::Path path;
  // Recursion carries the last present record explicitly rather than the DP state.
  std::function<void(std::size_t, const MeasurementRecord*)> visit = [&](std::size_t i, const MeasurementRecord* last) {
    if (i == p.targets.size()) {
      if (!best || detail::path_better(path, *best, p)) best = path;
      return;
    }
    for (std::size_t k = 0; k < p.options[i].size(); ++k) {
      const auto& rec = p.options[i][k].record;
      if (last && !transition_allowed(*last, rec)) continue;
      const auto saved = path;
      path = detail::extend(path, static_cast<int>(k), p);
      visit(i + 1, &rec);
      path = saved;
    }
    const auto saved = path;
    path = detail::extend(path, detail::kAbsent, p);
    visit(i + 1, last);
    path = saved;
  };
  visit(0, nullptr);
  if (best->present == 0) throw Error(ErrorCode::AllRungsAbsent, dataset.title_id);
  return detail::to_ladder(dataset, alpha, Method::ARCS, p, *best, opts);
}

// ---------------------------------------------------------------------------
// Benchmarks

/// Native-resolution, full-chroma encodes only: each rung is the
/// (native_height, C444) record in the window, else Absent.
inline Ladder build_default(const TitleDataset& dataset, const LadderOptions& opts = {}, int native_height = 2160) {
  std::vector<Rung> rungs;
  std::optional<NormalizationBounds> bounds;
  if (!dataset.records.empty()) bounds = bounds_for(dataset);
  for (double target : dataset.bitrate_targets) {
    Rung rung{target, std::nullopt, std::nullopt};
    for (const auto& rec : candidates_for(dataset, target, opts.candidates())) {
      if (rec.resolution.height == native_height && rec.chroma == ChromaFormat::C444) {
        rung.choice = rec;
        rung.j_prime = composite_normalized(rec, *bounds, Alpha{0.0});
        break;
      }
    }
    rungs.push_back(std::move(rung));
  }
  auto ladder = make_ladder(dataset.title_id, Alpha{0.0}, Method::Default, std::move(rungs), !opts.cross_target);
  if (ladder.present_count() == 0) throw Error(ErrorCode::AllRungsAbsent, dataset.title_id + " (default)");
  return ladder;
}

/// Resolution-only optimization: the ARCS machinery restricted to one chroma format.
inline Ladder build_dynres(const TitleDataset& dataset, Alpha alpha, const LadderOptions& opts = {},
                           ChromaFormat fixed_chroma = ChromaFormat::C444) {
  return detail::optimize_pool(dataset, alpha, opts, Method::DynResJOD,
                               [fixed_chroma](const MeasurementRecord& r) { return r.chroma == fixed_chroma; });
}

struct PlanEntry {
  double target_bitrate = 0.0;
  int height = 0;
  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

using FixedPlan = std::vector<PlanEntry>;

/// Parses a plan file: CSV with header `target_kbps,height`.
inline FixedPlan parse_plan(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  FixedPlan plan;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "target_kbps" || fields[1] != "height") {
        throw Error(ErrorCode::InvalidPlan, "plan header must be 'target_kbps,height'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) throw Error(ErrorCode::InvalidPlan, "line " + std::to_string(line_no) + ": expected 2 fields");
    auto t = detail::parse_number(fields[0]);
    auto h = detail::parse_number(fields[1]);
    if (!t || !h || !(*t > 0.0) || !(*h > 0.0) || *h != std::floor(*h)) {
      throw Error(ErrorCode::InvalidPlan, "line " + std::to_string(line_no) + ": bad value");
    }
    plan.push_back({*t, static_cast<int>(*h)});
  }
  if (!header_seen) throw Error(ErrorCode::InvalidPlan, "empty plan");
  return plan;
}

/// Fixed bitrate/resolution pairs at one chroma format. `alpha` only affects the
/// reported J' values.
inline Ladder build_fixed(const TitleDataset& dataset, FixedPlan plan, const LadderOptions& opts = {},
                          ChromaFormat fixed_chroma = ChromaFormat::C444, Alpha alpha = Alpha{0.0}) {
  std::sort(plan.begin(), plan.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.target_bitrate < b.target_bitrate; });
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!std::binary_search(dataset.bitrate_targets.begin(), dataset.bitrate_targets.end(), plan[i].target_bitrate)) {
      throw Error(ErrorCode::PlanTargetUnknown,
                  dataset.title_id + ": " + detail::format_number(plan[i].target_bitrate) + " kbps");
    }
    if (i > 0 && plan[i].target_bitrate == plan[i - 1].target_bitrate) {
      throw Error(ErrorCode::InvalidPlan, "target " + detail::format_number(plan[i].target_bitrate) + " planned twice");
    }
    if (i > 0 && plan[i].height < plan[i - 1].height) {
      throw Error(ErrorCode::InvalidPlan, "resolution decreases at " + detail::format_number(plan[i].target_bitrate) + " kbps");
    }
  }
  std::optional<NormalizationBounds> bounds;
  if (!dataset.records.empty()) bounds = bounds_for(dataset);
  std::vector<Rung> rungs;
  for (const auto& entry : plan) {
    Rung rung{entry.target_bitrate, std::nullopt, std::nullopt};
    for (const auto& rec : candidates_for(dataset, entry.target_bitrate, opts.candidates())) {
      if (rec.resolution.height == entry.height && rec.chroma == fixed_chroma) {
        rung.choice = rec;
        rung.j_prime = composite_normalized(rec, *bounds, alpha);
        break;
      }
    }
    rungs.push_back(std::move(rung));
  }
  try {
    return make_ladder(dataset.title_id, alpha, Method::FixedLadder, std::move(rungs), !opts.cross_target);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidPlan, e.what());
  }
}

// ---------------------------------------------------------------------------

/// Share of present rungs per chroma format across all ladders.
inline std::map<ChromaFormat, double> chroma_pmf(const std::vector<Ladder>& ladders) {
  std::map<ChromaFormat, std::size_t> counts;
  for (auto c : kAllChromaFormats) counts[c] = 0;
  std::size_t total = 0;
  for (const auto& l : ladders)
    for (const auto& r : l.rungs)
      if (r.choice) {
        ++counts[r.choice->chroma];
        ++total;
      }
  if (total == 0) throw Error(ErrorCode::NoPresentRungs, "no present rungs in " + std::to_string(ladders.size()) + " ladders");
  std::map<ChromaFormat, double> pmf;
  for (auto [c, n] : counts) pmf[c] = static_cast<double>(n) / static_cast<double>(total);
  return pmf;
}

}  // namespace arcs
