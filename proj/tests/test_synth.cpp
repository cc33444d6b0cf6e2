#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "arcs/synth.hpp"
#include "test_support.hpp"

using namespace arcs;
using namespace arcs::test;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in) << path;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SynthSpec noiseless() {
  SynthSpec s;
  s.noise = 0.0;
  s.bitrate_jitter = 0.0;
  s.content_variation = 0.0;
  s.titles = 2;
  return s;
}

}  // namespace

TEST(Synth, NoiselessOutputFollowsClosedForm) {
  const auto s = noiseless();
  for (const auto& ds : generate(s)) {
    ASSERT_EQ(ds.records.size(), 60u);
    for (const auto& r : ds.records) {
      const auto& m = s.quality.at({r.resolution.height, r.chroma});
      const double b = r.target_bitrate;
      EXPECT_EQ(r.actual_bitrate, b);
      EXPECT_NEAR(r.quality.value, m.q_inf - m.slope / std::log(1 + b / m.knee_kbps), 1e-12);
      EXPECT_NEAR(r.decode_time,
                  s.time_base_s.at(r.resolution.height) * s.chroma_time_factor.at(r.chroma) * (1 + 3e-5 * b), 1e-15);
    }
  }
}

TEST(Synth, ChromaDecodeRatio) {
  const auto ds = generate(noiseless()).front();
  for (const auto& a : ds.records)
    for (const auto& b : ds.records)
      if (a.chroma == C444 && b.chroma == C420 && a.resolution == b.resolution && a.target_bitrate == b.target_bitrate) {
        EXPECT_NEAR(a.decode_time / b.decode_time, 2.0, 1e-12);
      }
}

TEST(Synth, SeedDeterminism) {
  SynthSpec s;
  EXPECT_EQ(generate(s), generate(s));
  auto other = s;
  other.seed += 1;
  EXPECT_NE(generate(s), generate(other));
  // title k does not depend on how many titles follow it
  auto fewer = s;
  fewer.titles = 3;
  const auto a = generate(s);
  const auto b = generate(fewer);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Synth, OutputPassesValidation) {
  for (auto s : {SynthSpec{}, SynthSpec::sparse()}) {
    const auto corpus = generate(s);
    ASSERT_EQ(corpus.size(), 15u);
    const auto back = parse_dataset_string(dataset_to_csv(corpus));
    EXPECT_EQ(back, corpus);
    for (const auto& ds : corpus) {
      EXPECT_EQ(ds.bitrate_targets, s.targets_kbps);
      for (const auto& r : ds.records) {
        EXPECT_GT(r.decode_time, 0);
        EXPECT_GE(r.actual_bitrate, r.target_bitrate * (1 - s.bitrate_jitter));
        EXPECT_LE(r.actual_bitrate, r.target_bitrate * (1 + s.bitrate_jitter));
        EXPECT_GE(r.quality.value, 0);
        EXPECT_LE(r.quality.value, 10);
      }
    }
  }
}

TEST(Synth, PsnrVariantIsAffineInQuality) {
  auto jod = noiseless();
  auto psnr = jod;
  psnr.metric = QualityMetric::YUVPSNR_DB;
  const auto a = generate(jod).front();
  const auto b = generate(psnr).front();
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_EQ(b.metric, QualityMetric::YUVPSNR_DB);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_NEAR(b.records[i].quality.value, 22.0 + 2.5 * a.records[i].quality.value, 1e-12);
}

TEST(Synth, ShippedCorpusRegenerates) {
  const auto spec = synth_spec_from_json(nlohmann::json::parse(slurp(ARCS_DATA_DIR "/synth_default.json")));
  EXPECT_EQ(dataset_to_csv(generate(spec)), slurp(ARCS_DATA_DIR "/synthetic_corpus.csv"));
  auto psnr = spec;
  psnr.metric = QualityMetric::YUVPSNR_DB;
  EXPECT_EQ(dataset_to_csv(generate(psnr)), slurp(ARCS_DATA_DIR "/synthetic_corpus_psnr.csv"));
  const auto sparse = synth_spec_from_json(nlohmann::json::parse(slurp(ARCS_DATA_DIR "/synth_sparse.json")));
  EXPECT_EQ(sparse.bitrate_jitter, SynthSpec::sparse().bitrate_jitter);
}

TEST(Synth, SpecJsonRoundTrip) {
  SynthSpec s;
  s.seed = 99;
  s.titles = 4;
  s.targets_kbps = {500, 1000};
  s.metric = QualityMetric::YUVPSNR_DB;
  const auto back = synth_spec_from_json(to_json(s));
  EXPECT_EQ(generate(back), generate(s));
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(Synth, InvalidSpecs) {
  auto expect_invalid = [](const SynthSpec& s) {
    try {
      generate(s);
      ADD_FAILURE() << "accepted an invalid spec";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    }
  };
  SynthSpec s;
  s.titles = 0;
  expect_invalid(s);
  s = {};
  s.targets_kbps = {900, 600};
  expect_invalid(s);
  s = {};
  s.bitrate_jitter = 1.0;
  expect_invalid(s);
  s = {};
  s.quality.erase({2160, C422});
  expect_invalid(s);
  s = {};
  s.quality[{2160, C444}].q_inf = 8.0;  // below 2160/422
  expect_invalid(s);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(R"({"titles":"many"})")), Error);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::array()), Error);
}
