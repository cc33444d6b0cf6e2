#include <gtest/gtest.h>

#include <sstream>

#include "arcs/pipeline.hpp"
#include "test_support.hpp"

using namespace arcs;
using namespace arcs::test;

namespace {

std::vector<TitleDataset> corpus(int titles = 4, QualityMetric metric = QualityMetric::CVVDP_JOD) {
  SynthSpec s;
  s.titles = titles;
  s.metric = metric;
  return generate(s);
}

const AggregateRow& row_for(const Report& r, const std::string& method, std::optional<double> alpha) {
  for (const auto& row : r.aggregate.rows)
    if (row.method == method && row.alpha == alpha) return row;
  throw std::runtime_error("no row " + method);
}

}  // namespace

TEST(Pipeline, ReportJsonRoundTrip) {
  RunConfig cfg;
  cfg.alphas = {0.0, 0.04};
  cfg.plan = FixedPlan{{600, 1080}, {16800, 2160}};
  cfg.methods.push_back(Method::FixedLadder);
  const auto r = run_pipeline(corpus(), cfg);
  const auto text = dump_report(r);
  const auto back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, r);
  EXPECT_EQ(dump_report(back), text);
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndThreadCounts) {
  RunConfig cfg;
  cfg.alphas = {0.0, 0.02};
  cfg.threads = 1;
  const auto data = corpus(6);
  const auto one = dump_report(run_pipeline(data, cfg));
  cfg.threads = 4;
  EXPECT_EQ(dump_report(run_pipeline(data, cfg)), one);
  EXPECT_EQ(dump_report(run_pipeline(data, cfg)), one);
}

TEST(Pipeline, MethodAgainstItselfIsZero) {
  RunConfig cfg;
  cfg.methods = {Method::ARCS};
  cfg.reference = Method::ARCS;
  cfg.alphas = {0.0, 0.08};
  const auto r = run_pipeline(corpus(3), cfg);
  for (const auto& t : r.titles)
    for (const auto& bd : t.bd) {
      ASSERT_TRUE(bd.values.bdr_c && bd.values.bddt_c);
      EXPECT_NEAR(*bd.values.bdr_c, 0.0, 1e-12);
      EXPECT_NEAR(*bd.values.bddt_c, 0.0, 1e-12);
    }
}

TEST(Pipeline, ArcsSavesDecodeTimeOverDefault) {
  RunConfig cfg;
  cfg.alphas = {0.04};
  const auto r = run_pipeline(corpus(), cfg);
  const auto& row = row_for(r, "arcs", 0.04);
  ASSERT_TRUE(row.mean.bddt_c);
  EXPECT_LT(*row.mean.bddt_c, 0.0);
  EXPECT_EQ(row.titles_c, 4);
  EXPECT_FALSE(row.mean.bdr_p);
}

TEST(Pipeline, UnusableTitleIsExcludedAndCounted) {
  auto data = corpus(2);
  // a title without any 2160 encodes has no Default ladder
  auto lonely = make_dataset({rec(1080, C420, 600, 6.0, 0.01, -1, "zz"), rec(1080, C444, 900, 7.0, 0.02, -1, "zz")});
  data.push_back(lonely);
  RunConfig cfg;
  const auto r = run_pipeline(data, cfg);
  const auto& row = row_for(r, "arcs", 0.0);
  EXPECT_EQ(row.titles_c, 2);
  EXPECT_EQ(row.excluded_c, 1);
  const auto& zz = r.titles.back();
  EXPECT_EQ(zz.title, "zz");
  EXPECT_FALSE(zz.bd.front().notes.empty());
  // mean over the remaining titles only
  double sum = 0;
  for (std::size_t t = 0; t < 2; ++t) sum += *r.titles[t].bd.front().values.bddt_c;
  EXPECT_NEAR(*row.mean.bddt_c, sum / 2, 1e-12);
}

TEST(Pipeline, SweepRowAtAlphaZeroEqualsSingleCompare) {
  const auto data = corpus(3);
  RunConfig single;
  RunConfig sweep;
  sweep.alphas = {0.0, 0.01, 0.02, 0.04, 0.08};
  const auto a = run_pipeline(data, single);
  const auto b = run_pipeline(data, sweep);
  EXPECT_EQ(row_for(a, "arcs", 0.0), row_for(b, "arcs", 0.0));
  ASSERT_EQ(b.aggregate.frontier.size(), 10u);
  EXPECT_EQ(b.aggregate.frontier.front().method, "arcs");
  EXPECT_EQ(b.aggregate.frontier.front().alpha, 0.0);
}

TEST(Pipeline, PsnrDataEvaluatedAtCvvdpOperatingPoints) {
  auto data = corpus(2);
  const auto psnr = corpus(2, QualityMetric::YUVPSNR_DB);
  data.insert(data.end(), psnr.begin(), psnr.end());
  RunConfig cfg;
  const auto r = run_pipeline(data, cfg);
  ASSERT_EQ(r.titles.size(), 2u);
  EXPECT_EQ(r.titles[0].optimized_on, "cvvdp");
  const auto& row = row_for(r, "arcs", 0.0);
  EXPECT_EQ(row.titles_p, 2);
  EXPECT_TRUE(row.mean.bdr_p && row.mean.bdr_c && row.mean.bddt_p);

  // rekeyed rung picks the PSNR record at the same (height, chroma, target)
  const auto ladder = optimize_arcs(data[0], Alpha{0.0});
  const auto rekeyed = rekey_ladder(ladder, psnr[0]);
  for (std::size_t i = 0; i < ladder.rungs.size(); ++i) {
    if (!ladder.rungs[i].present()) continue;
    EXPECT_EQ(rekeyed.rungs[i].choice->quality.metric, QualityMetric::YUVPSNR_DB);
    EXPECT_EQ(rekeyed.rungs[i].choice->resolution, ladder.rungs[i].choice->resolution);
    EXPECT_EQ(rekeyed.rungs[i].choice->chroma, ladder.rungs[i].choice->chroma);
  }
}

TEST(Pipeline, PsnrOnlyTitlesOptimizeOnPsnr) {
  RunConfig cfg;
  const auto r = run_pipeline(corpus(2, QualityMetric::YUVPSNR_DB), cfg);
  EXPECT_EQ(r.titles[0].optimized_on, "psnr");
  const auto& row = row_for(r, "arcs", 0.0);
  EXPECT_TRUE(row.mean.bdr_p);
  EXPECT_FALSE(row.mean.bdr_c);
  EXPECT_EQ(r.aggregate.frontier.front().metric, "P");
}

TEST(Pipeline, Writers) {
  RunConfig cfg;
  cfg.alphas = {0.0, 0.08};
  const auto r = run_pipeline(corpus(2), cfg);
  std::ostringstream md, agg, fr, pmf, pts;
  write_report_markdown(md, r);
  write_aggregate_csv(agg, r);
  write_frontier_csv(fr, r);
  write_pmf_csv(pmf, r);
  write_operating_points_csv(pts, r, false);
  EXPECT_NE(md.str().find("arcs"), std::string::npos);
  const auto frontier = fr.str();
  const auto points = pts.str();
  EXPECT_EQ(std::count(frontier.begin(), frontier.end(), '\n'), 5);  // header + arcs x2 + dynres x2
  EXPECT_NE(pmf.str().find("default"), std::string::npos);
  EXPECT_GT(std::count(points.begin(), points.end(), '\n'), 10);
}

TEST(Pipeline, EmptyInput) {
  EXPECT_THROW(run_pipeline({}, RunConfig{}), Error);
}
