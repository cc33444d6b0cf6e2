#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arcs/error.hpp"
#include "arcs/measurements.hpp"

namespace arcs {

/// Q(b) = q_inf - slope / ln(1 + b / knee)
struct QualityModel {
  double q_inf = 9.0;
  double slope = 1.5;
  double knee_kbps = 400.0;
};

/// Parameters of the synthetic rate/quality/decode-time generator.
struct SynthSpec {
  std::uint64_t seed = 20251015;
  int titles = 15;
  std::string title_prefix = "synth";
  QualityMetric metric = QualityMetric::CVVDP_JOD;
  std::vector<int> resolutions{1080, 2160};
  std::vector<ChromaFormat> chromas{ChromaFormat::C420, ChromaFormat::C422, ChromaFormat::C444};
  std::vector<double> targets_kbps{600, 900, 1600, 2400, 3400, 4500, 5800, 8100, 11600, 16800};

  std::map<std::pair<int, ChromaFormat>, QualityModel> quality{
      {{1080, ChromaFormat::C420}, {8.30, 1.00, 250.0}}, {{1080, ChromaFormat::C422}, {8.45, 1.20, 250.0}},
      {{1080, ChromaFormat::C444}, {8.60, 1.45, 250.0}}, {{2160, ChromaFormat::C420}, {9.00, 1.60, 400.0}},
      {{2160, ChromaFormat::C422}, {9.30, 1.95, 400.0}}, {{2160, ChromaFormat::C444}, {9.60, 2.40, 400.0}},
  };

  // tau(b) = base[r] * chroma_factor[c] * (1 + rate_slope * b)
  std::map<int, double> time_base_s{{1080, 0.010}, {2160, 0.035}};
  std::map<ChromaFormat, double> chroma_time_factor{
      {ChromaFormat::C420, 1.0}, {ChromaFormat::C422, 1.4}, {ChromaFormat::C444, 2.0}};
  double rate_slope_per_kbps = 3e-5;

  double noise = 0.02;            // quality +- noise (metric units); time * (1 +- noise)
  double bitrate_jitter = 0.05;   // actual = target * (1 +- jitter)
  double content_variation = 0.6; // per-title spread of slope and chroma sensitivity

  // PSNR variant: psnr = offset + scale * Q_jod (before noise)
  double psnr_offset = 22.0;
  double psnr_scale = 2.5;

  static SynthSpec sparse() {
    SynthSpec s;
    s.bitrate_jitter = 0.15;
    return s;
  }
};

namespace detail {

// splitmix64: stdlib-independent, so generated corpora are identical everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // uniform in [-1, 1)
  double symmetric() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t title_seed(std::uint64_t seed, int index) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(index + 1)));
  return mix.next();
}

}  // namespace detail

inline void validate(const SynthSpec& s) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidSpec, why); };
  if (s.titles <= 0) throw bad("titles must be > 0");
  if (s.resolutions.empty() || s.chromas.empty() || s.targets_kbps.empty()) throw bad("empty parameter set");
  for (std::size_t i = 0; i < s.targets_kbps.size(); ++i) {
    if (!(s.targets_kbps[i] > 0.0)) throw bad("targets must be > 0");
    if (i > 0 && !(s.targets_kbps[i] > s.targets_kbps[i - 1])) throw bad("targets must be strictly increasing");
  }
  for (std::size_t i = 0; i < s.resolutions.size(); ++i) {
    if (s.resolutions[i] <= 0) throw bad("resolutions must be > 0");
    if (i > 0 && s.resolutions[i] <= s.resolutions[i - 1]) throw bad("resolutions must be strictly increasing");
  }
  for (std::size_t i = 1; i < s.chromas.size(); ++i)
    if (fidelity_rank(s.chromas[i]) <= fidelity_rank(s.chromas[i - 1])) throw bad("chromas must be in fidelity order");

  for (int h : s.resolutions) {
    if (!s.time_base_s.count(h) || !(s.time_base_s.at(h) > 0.0)) throw bad("missing/non-positive time base for " + std::to_string(h));
    for (auto c : s.chromas) {
      auto it = s.quality.find({h, c});
      if (it == s.quality.end()) throw bad("missing quality model for " + std::to_string(h) + "/" + std::string(to_string(c)));
      const auto& m = it->second;
      if (!(m.slope > 0.0) || !(m.knee_kbps > 0.0) || !(m.q_inf > 0.0)) throw bad("quality model parameters must be > 0");
    }
  }
  for (auto c : s.chromas)
    if (!s.chroma_time_factor.count(c) || !(s.chroma_time_factor.at(c) > 0.0)) throw bad("missing/non-positive chroma time factor");

  // ceilings non-decreasing in resolution and in chroma fidelity
  for (std::size_t i = 0; i < s.resolutions.size(); ++i) {
    for (std::size_t j = 0; j < s.chromas.size(); ++j) {
      const double q = s.quality.at({s.resolutions[i], s.chromas[j]}).q_inf;
      if (i > 0 && q < s.quality.at({s.resolutions[i - 1], s.chromas[j]}).q_inf) throw bad("q_inf must not decrease with resolution");
      if (j > 0 && q < s.quality.at({s.resolutions[i], s.chromas[j - 1]}).q_inf) throw bad("q_inf must not decrease with chroma fidelity");
    }
  }
  for (std::size_t j = 1; j < s.chromas.size(); ++j)
    if (s.chroma_time_factor.at(s.chromas[j]) < s.chroma_time_factor.at(s.chromas[j - 1]))
      throw bad("chroma time factor must not decrease with fidelity");

  if (!(s.rate_slope_per_kbps >= 0.0)) throw bad("rate_slope_per_kbps must be >= 0");
  if (!(s.noise >= 0.0) || !(s.bitrate_jitter >= 0.0) || !(s.bitrate_jitter < 1.0) || !(s.noise < 1.0))
    throw bad("noise and jitter must lie in [0, 1)");
  if (!(s.content_variation >= 0.0) || !(s.content_variation <= 1.0)) throw bad("content_variation must lie in [0, 1]");
  if (s.metric == QualityMetric::YUVPSNR_DB && !(s.psnr_scale > 0.0)) throw bad("psnr_scale must be > 0");
}

/// Noise-free model quality (JOD units) for a title with the given content factors.
inline double model_quality(const SynthSpec& s, int height, ChromaFormat c, double kbps, double slope_scale = 1.0,
                            double chroma_sensitivity = 1.0) {
  const auto& m = s.quality.at({height, c});
  const auto& base = s.quality.at({height, s.chromas.front()});
  const double ceiling = base.q_inf + chroma_sensitivity * (m.q_inf - base.q_inf);
  return ceiling - slope_scale * m.slope / std::log1p(kbps / m.knee_kbps);
}

inline double model_decode_time(const SynthSpec& s, int height, ChromaFormat c, double kbps) {
  return s.time_base_s.at(height) * s.chroma_time_factor.at(c) * (1.0 + s.rate_slope_per_kbps * kbps);
}

inline std::string synth_title_name(const SynthSpec& s, int index) {
  std::ostringstream os;
  os << s.title_prefix << '_' << std::setw(2) << std::setfill('0') << (index + 1);
  return os.str();
}

/// Deterministic in the seed; each title draws from its own derived sub-seed.
inline std::vector<TitleDataset> generate(const SynthSpec& s) {
  validate(s);
  std::vector<MeasurementRecord> all;
  std::vector<std::size_t> rows;
  for (int t = 0; t < s.titles; ++t) {
    detail::SplitMix64 rng(detail::title_seed(s.seed, t));
    const double slope_scale = std::exp(s.content_variation * rng.symmetric());
    const double chroma_sensitivity = 1.0 + s.content_variation * rng.symmetric();
    const std::string title = synth_title_name(s, t);
    for (double target : s.targets_kbps) {
      for (int h : s.resolutions) {
        for (auto c : s.chromas) {
          const double jitter = rng.symmetric();
          const double qn = rng.symmetric();
          const double tn = rng.symmetric();
          MeasurementRecord r;
          r.title_id = title;
          r.resolution = Resolution::from_height(h);
          r.chroma = c;
          r.target_bitrate = target;
          r.actual_bitrate = target * (1.0 + s.bitrate_jitter * jitter);
          // quality and time follow the model at the rate actually spent
          double q = model_quality(s, h, c, r.actual_bitrate, slope_scale, chroma_sensitivity);
          if (s.metric == QualityMetric::YUVPSNR_DB) q = s.psnr_offset + s.psnr_scale * q;
          r.quality = {s.metric, q + s.noise * qn};
          r.decode_time = model_decode_time(s, h, c, r.actual_bitrate) * (1.0 + s.noise * tn);
          all.push_back(std::move(r));
          rows.push_back(all.size());
        }
      }
    }
  }
  return detail::group_records(std::move(all), rows);
}

// ---------------------------------------------------------------------------
// JSON form. Missing keys keep their defaults.

inline SynthSpec synth_spec_from_json(const nlohmann::json& j, SynthSpec s = {}) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("titles")) s.titles = j.at("titles").get<int>();
    if (j.contains("title_prefix")) s.title_prefix = j.at("title_prefix").get<std::string>();
    if (j.contains("metric")) {
      auto m = parse_metric(j.at("metric").get<std::string>());
      if (!m) throw Error(ErrorCode::InvalidSpec, "metric must be cvvdp or psnr");
      s.metric = *m;
    }
    if (j.contains("resolutions")) s.resolutions = j.at("resolutions").get<std::vector<int>>();
    if (j.contains("chromas")) {
      s.chromas.clear();
      for (const auto& c : j.at("chromas")) {
        auto f = parse_chroma(c.is_string() ? c.get<std::string>() : std::to_string(c.get<int>()));
        if (!f) throw Error(ErrorCode::InvalidSpec, "bad chroma format");
        s.chromas.push_back(*f);
      }
    }
    if (j.contains("targets_kbps")) s.targets_kbps = j.at("targets_kbps").get<std::vector<double>>();
    if (j.contains("quality_model")) {
      s.quality.clear();
      for (const auto& e : j.at("quality_model")) {
        auto c = parse_chroma(e.at("chroma").is_string() ? e.at("chroma").get<std::string>()
                                                         : std::to_string(e.at("chroma").get<int>()));
        if (!c) throw Error(ErrorCode::InvalidSpec, "bad chroma in quality_model");
        s.quality[{e.at("height").get<int>(), *c}] = {e.at("q_inf").get<double>(), e.at("slope").get<double>(),
                                                      e.at("knee_kbps").get<double>()};
      }
    }
    if (j.contains("time_model")) {
      const auto& tm = j.at("time_model");
      if (tm.contains("base_s_per_frame")) {
        s.time_base_s.clear();
        for (const auto& [k, v] : tm.at("base_s_per_frame").items()) s.time_base_s[std::stoi(k)] = v.get<double>();
      }
      if (tm.contains("chroma_factor")) {
        s.chroma_time_factor.clear();
        for (const auto& [k, v] : tm.at("chroma_factor").items()) {
          auto c = parse_chroma(k);
          if (!c) throw Error(ErrorCode::InvalidSpec, "bad chroma in chroma_factor");
          s.chroma_time_factor[*c] = v.get<double>();
        }
      }
      if (tm.contains("rate_slope_per_kbps")) s.rate_slope_per_kbps = tm.at("rate_slope_per_kbps").get<double>();
    }
    if (j.contains("noise")) s.noise = j.at("noise").get<double>();
    if (j.contains("bitrate_jitter")) s.bitrate_jitter = j.at("bitrate_jitter").get<double>();
    if (j.contains("content_variation")) s.content_variation = j.at("content_variation").get<double>();
    if (j.contains("psnr_offset")) s.psnr_offset = j.at("psnr_offset").get<double>();
    if (j.contains("psnr_scale")) s.psnr_scale = j.at("psnr_scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  validate(s);
  return s;
}

inline nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["titles"] = s.titles;
  j["title_prefix"] = s.title_prefix;
  j["metric"] = std::string(to_string(s.metric));
  j["resolutions"] = s.resolutions;
  j["chromas"] = nlohmann::json::array();
  for (auto c : s.chromas) j["chromas"].push_back(std::string(to_string(c)));
  j["targets_kbps"] = s.targets_kbps;
  j["quality_model"] = nlohmann::json::array();
  for (const auto& [key, m] : s.quality) {
    j["quality_model"].push_back({{"height", key.first},
                                  {"chroma", std::string(to_string(key.second))},
                                  {"q_inf", m.q_inf},
                                  {"slope", m.slope},
                                  {"knee_kbps", m.knee_kbps}});
  }
  nlohmann::json base = nlohmann::json::object();
  for (const auto& [h, v] : s.time_base_s) base[std::to_string(h)] = v;
  nlohmann::json factor = nlohmann::json::object();
  for (const auto& [c, v] : s.chroma_time_factor) factor[std::string(to_string(c))] = v;
  j["time_model"] = {{"base_s_per_frame", base}, {"chroma_factor", factor}, {"rate_slope_per_kbps", s.rate_slope_per_kbps}};
  j["noise"] = s.noise;
  j["bitrate_jitter"] = s.bitrate_jitter;
  j["content_variation"] = s.content_variation;
  j["psnr_offset"] = s.psnr_offset;
  j["psnr_scale"] = s.psnr_scale;
  return j;
}

}  // namespace arcs
