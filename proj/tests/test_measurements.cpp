#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "arcs/measurements.hpp"
#include "test_support.hpp"

using namespace arcs;
using namespace arcs::test;

namespace {

const std::string kHeader = "title,height,chroma,target_kbps,actual_kbps,metric,quality,decode_s_per_frame\n";

std::string full_fixture_csv() {
  // 1 title, 2 resolutions x 3 chromas x 10 targets
  std::ostringstream os;
  os << kHeader;
  const double targets[] = {600, 900, 1600, 2400, 3400, 4500, 5800, 8100, 11600, 16800};
  for (double t : targets)
    for (int h : {1080, 2160})
      for (const char* c : {"420", "422", "444"})
        os << "campfire," << h << ',' << c << ',' << t << ',' << t * 1.01 << ",cvvdp,7.5,0.02\n";
  return os.str();
}

ErrorCode parse_error(const std::string& csv) {
  try {
    parse_dataset_string(csv);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parse error";
  return ErrorCode::EmptyInput;
}

}  // namespace

TEST(ChromaFormat, FidelityAndDensityOrder) {
  EXPECT_LT(fidelity_rank(C420), fidelity_rank(C422));
  EXPECT_LT(fidelity_rank(C422), fidelity_rank(C444));
  EXPECT_LT(chroma_density(C420), chroma_density(C422));
  EXPECT_LT(chroma_density(C422), chroma_density(C444));
  EXPECT_DOUBLE_EQ(chroma_density(C420), 0.5);
  EXPECT_DOUBLE_EQ(chroma_density(C444), 2.0);
}

TEST(Resolution, OrderedByHeightWithDerivedWidth) {
  EXPECT_EQ(Resolution::from_height(1080).width, 1920);
  EXPECT_EQ(Resolution::from_height(2160).width, 3840);
  EXPECT_LT(Resolution::from_height(1080), Resolution::from_height(2160));
  EXPECT_EQ((Resolution{1080, 1440}), Resolution::from_height(1080));
}

TEST(ParseDataset, SixtyRowFixtureGivesOneTitle) {
  const auto ds = parse_dataset_string(full_fixture_csv());
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].title_id, "campfire");
  EXPECT_EQ(ds[0].records.size(), 60u);
  EXPECT_EQ(ds[0].bitrate_targets.size(), 10u);
  EXPECT_TRUE(std::is_sorted(ds[0].bitrate_targets.begin(), ds[0].bitrate_targets.end()));
  EXPECT_EQ(ds[0].metric, QualityMetric::CVVDP_JOD);
}

TEST(ParseDataset, ZeroDecodeTimeIsNonPositiveValue) {
  EXPECT_EQ(parse_error(kHeader + "a,1080,420,600,610,cvvdp,7,0\n"), ErrorCode::NonPositiveValue);
  EXPECT_EQ(parse_error(kHeader + "a,1080,420,600,-1,cvvdp,7,0.1\n"), ErrorCode::NonPositiveValue);
}

TEST(ParseDataset, DuplicateKeyIsRejected) {
  EXPECT_EQ(parse_error(kHeader + "a,2160,444,4500,4400,cvvdp,8,0.1\na,2160,444,4500,4600,cvvdp,8.1,0.1\n"),
            ErrorCode::DuplicateRecord);
}

TEST(ParseDataset, MixedMetricWithinTitle) {
  EXPECT_EQ(parse_error(kHeader + "a,2160,444,4500,4400,cvvdp,8,0.1\na,2160,420,4500,4600,psnr,40,0.1\n"),
            ErrorCode::MixedQualityMetric);
}

TEST(ParseDataset, MalformedRowsReportRowIndex) {
  try {
    parse_dataset_string(kHeader + "a,2160,444,4500,4400,cvvdp,8,0.1\na,2160,411,4500,4600,cvvdp,8,0.1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(parse_error(kHeader + "a,2160,444,4500\n"), ErrorCode::MalformedRow);
  EXPECT_EQ(parse_error(kHeader + "a,2160,444,abc,4400,cvvdp,8,0.1\n"), ErrorCode::MalformedRow);
  EXPECT_EQ(parse_error(kHeader + "a,2160,444,4500,4400,vmaf,8,0.1\n"), ErrorCode::MalformedRow);
  EXPECT_EQ(parse_error("title,height\n"), ErrorCode::MalformedRow);
  EXPECT_EQ(parse_error(""), ErrorCode::MalformedRow);
}

TEST(ParseDataset, HeaderOnlyYieldsNoDatasets) { EXPECT_TRUE(parse_dataset_string(kHeader).empty()); }

TEST(ParseDataset, ColumnOrderAndOptionalWidth) {
  const auto ds = parse_dataset_string(
      "chroma,title,height,target_kbps,actual_kbps,metric,quality,decode_s_per_frame,width\n"
      "422,x,1080,900,880,psnr,38.5,0.01,1440\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].records[0].resolution.width, 1440);
  EXPECT_EQ(ds[0].records[0].chroma, C422);
  EXPECT_EQ(ds[0].metric, QualityMetric::YUVPSNR_DB);
}

TEST(ParseDataset, JsonFormMatchesCsv) {
  const auto from_csv = parse_dataset_string(kHeader + "a,2160,444,4500,4400,cvvdp,8.25,0.1\n"
                                                       "a,1080,420,600,590,cvvdp,6.5,0.02\n");
  const auto doc = nlohmann::json::parse(R"([
    {"title":"a","height":2160,"chroma":"444","target_kbps":4500,"actual_kbps":4400,"metric":"cvvdp","quality":8.25,"decode_s_per_frame":0.1},
    {"title":"a","height":1080,"chroma":420,"target_kbps":600,"actual_kbps":590,"metric":"cvvdp","quality":6.5,"decode_s_per_frame":0.02}
  ])");
  EXPECT_EQ(parse_dataset_json(doc), from_csv);
}

TEST(ParseDataset, SerializeRoundTripOnRandomData) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    std::vector<TitleDataset> in{random_dataset(rng, 6, 0.9, "title " + std::to_string(i))};
    const auto csv = dataset_to_csv(in);
    const auto back = parse_dataset_string(csv);
    ASSERT_EQ(back, in);
    EXPECT_EQ(dataset_to_csv(back), csv);
  }
}

TEST(MergeDatasets, CombinesFilesAndRejectsOverlap) {
  auto a = parse_dataset_string(kHeader + "a,2160,444,4500,4400,cvvdp,8,0.1\n");
  auto b = parse_dataset_string(kHeader + "a,2160,420,600,600,cvvdp,6,0.05\n");
  auto merged = merge_datasets({a[0], b[0]});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].records.size(), 2u);
  EXPECT_EQ(merged[0].bitrate_targets, (std::vector<double>{600, 4500}));
  EXPECT_THROW(merge_datasets({a[0], a[0]}), Error);
}

// ---------------------------------------------------------------------------

TEST(CandidatesFor, TenPercentWindow) {
  const auto ds = make_dataset({rec(1080, C420, 4500, 7, 0.01, 4049.0), rec(1080, C422, 4500, 7, 0.01, 4050.0),
                                rec(2160, C420, 4500, 7, 0.01, 4950.0), rec(2160, C444, 4500, 7, 0.01, 4951.0),
                                rec(2160, C422, 4500, 7, 0.01, 4500.0)});
  const auto c = candidates_for(ds, 4500, 0.10);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].chroma, C422);
  EXPECT_EQ(c[0].resolution.height, 1080);
  EXPECT_EQ(c[1].chroma, C420);
  EXPECT_EQ(c[2].chroma, C422);
  for (const auto& r : c) {
    EXPECT_GE(r.actual_bitrate, 4050.0);
    EXPECT_LE(r.actual_bitrate, 4950.0);
  }
}

TEST(CandidatesFor, ZeroToleranceRequiresExactRate) {
  const auto ds = make_dataset({rec(1080, C420, 600, 7, 0.01, 600.0), rec(2160, C420, 600, 7, 0.01, 600.5)});
  const auto c = candidates_for(ds, 600, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].resolution.height, 1080);
}

TEST(CandidatesFor, AllSixCombinationsInFixedOrder) {
  // hand-enumerated fixture: all six (r, c) encodes at 600 land inside +-10%
  const auto ds = make_dataset({rec(2160, C444, 600, 6, 0.04, 640), rec(1080, C422, 600, 6, 0.01, 570),
                                rec(2160, C420, 600, 6, 0.02, 545), rec(1080, C444, 600, 6, 0.02, 655),
                                rec(1080, C420, 600, 6, 0.01, 601), rec(2160, C422, 600, 6, 0.03, 600),
                                rec(2160, C444, 900, 6, 0.04, 910)});
  const auto c = candidates_for(ds, 600, 0.10);
  ASSERT_EQ(c.size(), 6u);
  const std::pair<int, ChromaFormat> expected[] = {{1080, C420}, {1080, C422}, {1080, C444},
                                                   {2160, C420}, {2160, C422}, {2160, C444}};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(c[i].resolution.height, expected[i].first);
    EXPECT_EQ(c[i].chroma, expected[i].second);
    EXPECT_EQ(c[i].target_bitrate, 600);
  }
}

TEST(CandidatesFor, CrossTargetBorrowingIsOptIn) {
  const auto ds = make_dataset({rec(1080, C420, 600, 6, 0.01, 700), rec(1080, C420, 650, 6, 0.01, 640)});
  EXPECT_TRUE(candidates_for(ds, 600, 0.10).empty());
  const auto c = candidates_for(ds, 600, CandidateOptions{0.10, true});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].target_bitrate, 650);
}

TEST(CandidatesFor, PropertyWindowIdempotentDeterministic) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> tol(0.0, 0.5);
  for (int i = 0; i < 200; ++i) {
    const auto ds = random_dataset(rng, 5);
    const double tolerance = tol(rng);
    for (double target : ds.bitrate_targets) {
      const auto a = candidates_for(ds, target, tolerance);
      EXPECT_EQ(a, candidates_for(ds, target, tolerance));
      for (const auto& r : a) {
        EXPECT_GE(r.actual_bitrate, target * (1 - tolerance));
        EXPECT_LE(r.actual_bitrate, target * (1 + tolerance));
        EXPECT_EQ(r.target_bitrate, target);
      }
      std::size_t expected = 0;
      for (const auto& r : ds.records)
        expected += r.target_bitrate == target && r.actual_bitrate >= target * (1 - tolerance) &&
                    r.actual_bitrate <= target * (1 + tolerance);
      EXPECT_EQ(a.size(), expected);
    }
  }
}

TEST(DatasetWarnings, ImplausibleQualityAndMissingCoverage) {
  const auto ds = make_dataset({rec(1080, C420, 600, 11.5, 0.01, 600), rec(1080, C420, 900, 7, 0.01, 1200)});
  const auto w = dataset_warnings(ds, {0.10, false});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NE(w[0].message.find("plausible"), std::string::npos);
  EXPECT_NE(w[1].message.find("900"), std::string::npos);
}
