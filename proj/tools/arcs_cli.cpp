// Command-line front end: validate data, generate synthetic corpora, build
// ladders, compare methods against a reference, sweep alpha, report chroma PMFs.
//
// Exit codes: 0 success, 1 input/validation error, 2 computation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arcs/arcs.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCompute = 2;

const std::vector<double> kDefaultAlphas{0.0, 0.01, 0.02, 0.04, 0.08};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> inputs;
  std::vector<double> alphas;
  double tolerance = 0.10;
  bool cross_target = false;
  std::string mode = "dp";
  std::vector<std::string> methods;
  std::string reference = "default";
  std::string plan;
  std::string chroma_fixed = "444";
  int native_height = 2160;
  std::string out;
  std::vector<std::string> formats;
  unsigned threads = 0;

  // synth
  std::string spec;
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<int> titles;
  std::string metric;
};

std::vector<arcs::TitleDataset> load_inputs(const std::vector<std::string>& paths) {
  std::vector<arcs::TitleDataset> all;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open input " + path);
    std::vector<arcs::TitleDataset> part;
    if (fs::path(path).extension() == ".json") {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw arcs::Error(arcs::ErrorCode::MalformedRow, path + ": " + e.what());
      }
      part = arcs::parse_dataset_json(doc);
    } else {
      part = arcs::parse_dataset(in);
    }
    for (auto& ds : part) all.push_back(std::move(ds));
  }
  return arcs::merge_datasets(std::move(all));
}

arcs::RunConfig make_config(const Options& o, std::vector<std::string> default_methods, std::vector<double> default_alphas) {
  arcs::RunConfig cfg;
  cfg.inputs = o.inputs;
  cfg.alphas = o.alphas.empty() ? std::move(default_alphas) : o.alphas;
  for (double a : cfg.alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("alpha must lie in [0, 1]: " + arcs::detail::format_number(a));
  if (!(o.tolerance >= 0.0 && o.tolerance <= 0.5)) throw UsageError("tolerance must lie in [0, 0.5]");
  cfg.ladder.tolerance = o.tolerance;
  cfg.ladder.cross_target = o.cross_target;
  auto mode = arcs::parse_mode(o.mode);
  if (!mode) throw UsageError("mode must be dp or greedy");
  cfg.ladder.mode = *mode;
  auto chroma = arcs::parse_chroma(o.chroma_fixed);
  if (!chroma) throw UsageError("chroma-fixed must be 420, 422 or 444");
  cfg.chroma_fixed = *chroma;
  cfg.native_height = o.native_height;
  cfg.threads = o.threads;
  if (!o.plan.empty()) {
    std::ifstream in(o.plan);
    if (!in) throw UsageError("cannot open plan " + o.plan);
    cfg.plan = arcs::parse_plan(in);
    default_methods.push_back("fixed");
  }
  cfg.methods.clear();
  for (const auto& name : o.methods.empty() ? default_methods : o.methods) {
    auto m = arcs::parse_method(name);
    if (!m) throw UsageError("unknown method " + name);
    if (*m == arcs::Method::FixedLadder && !cfg.plan) throw UsageError("method fixed requires --plan");
    if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) == cfg.methods.end()) cfg.methods.push_back(*m);
  }
  auto ref = arcs::parse_method(o.reference);
  if (!ref) throw UsageError("unknown reference method " + o.reference);
  if (*ref == arcs::Method::FixedLadder && !cfg.plan) throw UsageError("reference fixed requires --plan");
  cfg.reference = *ref;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

std::string file_safe(std::string s) {
  for (auto& ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  return s;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o) {
  if (o.inputs.empty()) throw UsageError("validate needs --input");
  if (!(o.tolerance >= 0.0 && o.tolerance <= 0.5)) throw UsageError("tolerance must lie in [0, 0.5]");
  int errors = 0;
  std::vector<arcs::TitleDataset> all;
  for (const auto& path : o.inputs) {
    try {
      auto part = load_inputs({path});
      std::size_t n = 0;
      for (const auto& ds : part) n += ds.records.size();
      std::cout << path << ": " << part.size() << " title(s), " << n << " record(s)\n";
      for (auto& ds : part) all.push_back(std::move(ds));
    } catch (const arcs::Error& e) {
      std::cout << path << ": error " << e.what() << "\n";
      ++errors;
    }
  }
  if (errors == 0) {
    try {
      all = arcs::merge_datasets(std::move(all));
      arcs::group_titles(all);
    } catch (const arcs::Error& e) {
      std::cout << "error " << e.what() << "\n";
      ++errors;
    }
  }
  std::size_t warnings = 0;
  for (const auto& ds : all) {
    for (const auto& w : arcs::dataset_warnings(ds, {o.tolerance, o.cross_target})) {
      std::cout << "warning " << w.title_id << ": " << w.message << "\n";
      ++warnings;
    }
  }
  std::cout << (errors ? "INVALID" : "OK") << " (" << errors << " error(s), " << warnings << " warning(s))\n";
  return errors ? kExitInput : kExitOk;
}

int cmd_synth(const Options& o) {
  arcs::SynthSpec spec;
  if (o.preset == "sparse") {
    spec = arcs::SynthSpec::sparse();
  } else if (o.preset != "default") {
    throw UsageError("preset must be default or sparse");
  }
  if (!o.spec.empty()) {
    std::ifstream in(o.spec);
    if (!in) throw UsageError("cannot open spec " + o.spec);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw arcs::Error(arcs::ErrorCode::InvalidSpec, e.what());
    }
    spec = arcs::synth_spec_from_json(j, spec);
  }
  if (o.seed) spec.seed = *o.seed;
  if (o.titles) spec.titles = *o.titles;
  if (!o.metric.empty()) {
    auto m = arcs::parse_metric(o.metric);
    if (!m) throw UsageError("metric must be cvvdp or psnr");
    spec.metric = *m;
  }
  const auto csv = arcs::dataset_to_csv(arcs::generate(spec));
  if (o.out.empty() || o.out == "-") {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
    std::cerr << "wrote " << o.out << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const Options& o) {
  if (o.out.empty()) throw UsageError("optimize needs --out DIR");
  auto cfg = make_config(o, {"arcs"}, {0.0});
  const auto datasets = load_inputs(o.inputs);
  if (datasets.empty()) throw UsageError("no records in input");
  const std::string format = o.formats.empty() ? "json" : o.formats.front();
  if (format != "json" && format != "csv" && format != "markdown") throw UsageError("format must be json, csv or markdown");

  std::size_t written = 0;
  std::size_t failed = 0;
  for (arcs::Method m : cfg.methods) {
    const std::vector<double> alphas = arcs::uses_alpha(m) ? cfg.alphas : std::vector<double>{0.0};
    for (double a : alphas) {
      std::vector<std::string> failures;
      const auto ladders = arcs::build_ladders(datasets, m, arcs::Alpha{a}, cfg, &failures);
      for (const auto& f : failures) std::cerr << "skipped " << f << "\n";
      failed += failures.size();
      for (const auto& l : ladders) {
        std::string stem = file_safe(l.title_id) + "_" + std::string(arcs::to_string(m));
        if (arcs::uses_alpha(m)) stem += "_a" + arcs::detail::format_number(a);
        const fs::path dir(o.out);
        if (format == "json") {
          write_file(dir / (stem + ".json"), arcs::ladder_to_json(l, cfg.ladder.mode).dump(2) + "\n");
        } else if (format == "csv") {
          write_file(dir / (stem + ".csv"), render([&](std::ostream& os) { arcs::write_ladder_csv(os, l); }));
        } else {
          write_file(dir / (stem + ".md"), render([&](std::ostream& os) { arcs::write_ladder_markdown(os, l); }));
        }
        ++written;
      }
    }
  }
  std::cout << "wrote " << written << " ladder file(s) to " << o.out;
  if (failed) std::cout << ", " << failed << " ladder(s) could not be built";
  std::cout << "\n";
  return written ? kExitOk : kExitCompute;
}

void emit_report(const Options& o, const arcs::Report& report, const std::vector<std::string>& default_formats) {
  const auto formats = o.formats.empty() ? default_formats : o.formats;
  for (const auto& f : formats)
    if (f != "json" && f != "csv" && f != "markdown") throw UsageError("format must be json, csv or markdown");
  if (o.out.empty()) {
    arcs::write_report_markdown(std::cout, report);
    return;
  }
  const fs::path dir(o.out);
  for (const auto& f : formats) {
    if (f == "json") {
      write_file(dir / "report.json", arcs::dump_report(report));
    } else if (f == "csv") {
      write_file(dir / "report.csv", render([&](std::ostream& os) { arcs::write_aggregate_csv(os, report); }));
    } else {
      write_file(dir / "report.md", render([&](std::ostream& os) { arcs::write_report_markdown(os, report); }));
      write_file(dir / "rate_quality.csv",
                 render([&](std::ostream& os) { arcs::write_operating_points_csv(os, report, false); }));
      write_file(dir / "rate_time.csv", render([&](std::ostream& os) { arcs::write_operating_points_csv(os, report, true); }));
      write_file(dir / "frontier.csv", render([&](std::ostream& os) { arcs::write_frontier_csv(os, report); }));
      write_file(dir / "pmf.csv", render([&](std::ostream& os) { arcs::write_pmf_csv(os, report); }));
    }
  }
}

void print_exclusions(const arcs::Report& report) {
  for (const auto& row : report.aggregate.rows) {
    if (row.excluded_c + row.excluded_p == 0) continue;
    std::cerr << row.method << (row.alpha ? " alpha=" + arcs::detail::format_number(*row.alpha) : "") << ": excluded "
              << row.excluded_c << " title(s) from C means, " << row.excluded_p << " from P means\n";
  }
}

int cmd_compare(const Options& o) {
  auto cfg = make_config(o, {"arcs", "dynres"}, {0.0});
  const auto datasets = load_inputs(o.inputs);
  if (datasets.empty()) throw UsageError("no records in input");
  const auto report = arcs::run_pipeline(datasets, cfg);
  print_exclusions(report);
  emit_report(o, report, {"json", "markdown"});
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  auto cfg = make_config(o, {"arcs", "dynres"}, kDefaultAlphas);
  if (cfg.alphas.size() < 2) throw UsageError("sweep needs at least two --alpha values");
  std::sort(cfg.alphas.begin(), cfg.alphas.end());
  const auto datasets = load_inputs(o.inputs);
  if (datasets.empty()) throw UsageError("no records in input");
  const auto report = arcs::run_pipeline(datasets, cfg);
  print_exclusions(report);
  arcs::write_frontier_csv(std::cout, report);
  if (!o.out.empty()) emit_report(o, report, {"json", "markdown"});
  return kExitOk;
}

int cmd_pmf(const Options& o) {
  auto cfg = make_config(o, {"arcs"}, kDefaultAlphas);
  const auto datasets = load_inputs(o.inputs);
  if (datasets.empty()) throw UsageError("no records in input");
  std::cout << "method,alpha,420,422,444,rungs\n";
  std::ostringstream csv;
  csv << "method,alpha,420,422,444,rungs\n";
  for (arcs::Method m : cfg.methods) {
    const std::vector<double> alphas = arcs::uses_alpha(m) ? cfg.alphas : std::vector<double>{0.0};
    for (double a : alphas) {
      std::vector<std::string> failures;
      const auto ladders = arcs::build_ladders(datasets, m, arcs::Alpha{a}, cfg, &failures);
      for (const auto& f : failures) std::cerr << "skipped " << f << "\n";
      const auto pmf = arcs::chroma_pmf(ladders);
      std::size_t rungs = 0;
      for (const auto& l : ladders) rungs += l.present_count();
      std::ostringstream line;
      line << arcs::to_string(m) << ',' << (arcs::uses_alpha(m) ? arcs::detail::format_number(a) : "") << ','
           << arcs::detail::format_number(pmf.at(arcs::ChromaFormat::C420)) << ','
           << arcs::detail::format_number(pmf.at(arcs::ChromaFormat::C422)) << ','
           << arcs::detail::format_number(pmf.at(arcs::ChromaFormat::C444)) << ',' << rungs << '\n';
      std::cout << line.str();
      csv << line.str();
    }
  }
  if (!o.out.empty()) write_file(fs::path(o.out) / "pmf.csv", csv.str());
  return kExitOk;
}

void add_run_options(CLI::App* cmd, Options& o, bool with_reference) {
  cmd->add_option("--input", o.inputs, "Measurement file(s): CSV, or .json array of objects")->required();
  cmd->add_option("--alpha", o.alphas, "Decode-time weight in [0,1] (repeatable)");
  cmd->add_option("--tolerance", o.tolerance, "Bitrate window as a fraction of the target")->capture_default_str();
  cmd->add_flag("--cross-target", o.cross_target, "Let encodes for other targets serve a target if inside its window");
  cmd->add_option("--mode", o.mode, "Optimizer: dp (global) or greedy")->capture_default_str();
  cmd->add_option("--method", o.methods, "Method(s): arcs, dynres, fixed, default (repeatable)");
  cmd->add_option("--plan", o.plan, "Fixed-ladder plan CSV (target_kbps,height)");
  cmd->add_option("--chroma-fixed", o.chroma_fixed, "Chroma format for dynres/fixed ladders")->capture_default_str();
  cmd->add_option("--native-height", o.native_height, "Native height of the default ladder")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  if (with_reference) cmd->add_option("--reference", o.reference, "Reference method for BD metrics")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware resolution/chroma bitrate ladders"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check measurement files and report errors/warnings");
  validate->add_option("--input", o.inputs, "Measurement file(s)")->required();
  validate->add_option("--tolerance", o.tolerance, "Bitrate window used for coverage warnings")->capture_default_str();
  validate->add_flag("--cross-target", o.cross_target, "Allow cross-target candidates in coverage warnings");

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus in the CSV schema");
  synth->add_option("--spec", o.spec, "SynthSpec JSON file");
  synth->add_option("--preset", o.preset, "default or sparse")->capture_default_str();
  synth->add_option("--seed", o.seed, "Override the spec seed");
  synth->add_option("--titles", o.titles, "Override the title count");
  synth->add_option("--metric", o.metric, "Override the quality metric: cvvdp or psnr");
  synth->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* optimize = app.add_subcommand("optimize", "Build one ladder file per (title, alpha, method)");
  add_run_options(optimize, o, false);
  optimize->add_option("--out", o.out, "Output directory")->required();
  optimize->add_option("--format", o.formats, "json, csv or markdown");

  auto* compare = app.add_subcommand("compare", "BD-rate / BD decoding time of methods against a reference");
  add_run_options(compare, o, true);
  compare->add_option("--out", o.out, "Output directory (default: markdown to stdout)");
  compare->add_option("--format", o.formats, "json, csv, markdown (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "BDR-BDDT frontier over an alpha grid");
  add_run_options(sweep, o, true);
  sweep->add_option("--out", o.out, "Output directory for the full report");
  sweep->add_option("--format", o.formats, "json, csv, markdown (repeatable)");

  auto* pmf = app.add_subcommand("pmf", "Chroma format PMF of the chosen rungs per alpha");
  add_run_options(pmf, o, false);
  pmf->add_option("--out", o.out, "Output directory for pmf.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*synth) return cmd_synth(o);
    if (*optimize) return cmd_optimize(o);
    if (*compare) return cmd_compare(o);
    if (*sweep) return cmd_sweep(o);
    if (*pmf) return cmd_pmf(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const arcs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return arcs::is_input_error(e.code()) ? kExitInput : kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitInput;
}
