#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "agecohort/analytics.hpp"
#include "agecohort/config.hpp"
#include "agecohort/connectors.hpp"
#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"
#include "agecohort/folds.hpp"
#include "agecohort/fusion.hpp"
#include "agecohort/geocoder.hpp"
#include "agecohort/inference.hpp"
#include "agecohort/io.hpp"
#include "agecohort/normalize.hpp"
#include "agecohort/sidecar.hpp"

namespace fs = std::filesystem;
using namespace agecohort;

namespace {

enum Exit { kOk = 0, kFailure = 1, kNoSources = 2, kMissingInput = 3, kTooFewPoints = 4, kBackend = 5 };

// Failure carrying the process exit code chosen by the command.
struct CommandError {
  int exit_code;
  std::string code;
  std::string message;
};

[[noreturn]] void fail(int exit_code, std::string code, std::string message) {
  throw CommandError{exit_code, std::move(code), std::move(message)};
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllAgentsFailed: return kNoSources;
    case ErrorCode::TooFewDistinctPoints: return kTooFewPoints;
    case ErrorCode::BackendUnavailable: return kBackend;
    default: return kFailure;
  }
}

void report_failure(int exit_code, const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  j["exit_code"] = exit_code;
  std::cerr << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << std::endl;
}

std::string require_input(const std::string& path, std::string_view what) {
  if (path.empty() || !fs::is_regular_file(path)) fail(kMissingInput, "MissingInput", fmt::format("{} not found: {}", what, path));
  return io::read_file(path);
}

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> overrides;
  bool verbose = false;

  config::PipelineConfig resolve() {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(kFailure, "InvalidArgument", "--set expects key=value, got " + s);
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    std::optional<fs::path> file;
    if (!config_file.empty()) {
      if (!fs::is_regular_file(config_file)) fail(kMissingInput, "MissingInput", "config file not found: " + config_file);
      file = config_file;
    }
    auto cfg = config::resolve(file, config::process_env(), overrides);
    if (!cfg.paths.data.empty()) setenv("AGECOHORT_DATA_DIR", cfg.paths.data.c_str(), 1);
    return cfg;
  }
};

// Flag value that becomes a config override when given.
template <typename T>
void bind(CLI::App* app, const std::string& flag, const std::string& key, Common& common, const std::string& help) {
  app->add_option_function<T>(
      flag, [&common, key](const T& v) { common.overrides[key] = fmt::format("{}", v); }, help);
}

std::shared_ptr<net::HttpTransport> make_transport(const config::PipelineConfig& cfg) {
  auto limiter = std::make_shared<net::RateLimiter>(cfg.http.requests_per_second, 1.0);
  std::shared_ptr<net::HttpTransport> live =
      std::make_shared<net::LiveTransport>(std::chrono::seconds(cfg.http.timeout_secs), limiter);
  if (cfg.http.mode == net::CacheMode::Live) return live;
  return std::make_shared<net::CachingTransport>(cfg.paths.cache, cfg.http.mode, live);
}

std::unique_ptr<inference::GeocoderBackend> make_geocoder(const config::PipelineConfig& cfg,
                                                          std::shared_ptr<net::HttpTransport> transport) {
  if (!cfg.endpoints.geocoder_fixture.empty()) {
    require_input(cfg.endpoints.geocoder_fixture, "geocoder fixture");
    return std::make_unique<inference::FixtureGeocoder>(inference::FixtureGeocoder::load(cfg.endpoints.geocoder_fixture));
  }
  return std::make_unique<inference::HttpGeocoder>(cfg.endpoints.geocoder, std::move(transport));
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    lines.push_back(line.substr(b, line.find_last_not_of(" \t") - b + 1));
  }
  return lines;
}

// ---- fuse --------------------------------------------------------------------

struct FuseArgs {
  std::string zensus_cells;
  std::string zensus_labels;
  bool osm = false;
  std::string monument_pages;
  std::vector<std::string> raw_inputs;
};

int cmd_fuse(Common& common, const FuseArgs& args) {
  const auto cfg = common.resolve();
  auto transport = make_transport(cfg);
  const connectors::OverpassClient overpass(cfg.endpoints.overpass, transport);

  std::map<Source, fusion::AgentFn> agents;
  if (!args.zensus_cells.empty()) {
    agents[Source::Zensus] = [&] {
      const auto labels_path =
          args.zensus_labels.empty() ? (normalize::data_dir() / "zensus_labels.csv").string() : args.zensus_labels;
      const auto labels = connectors::ZensusLabelMap::from_csv_text(require_input(labels_path, "census label map"));
      const auto cells = connectors::read_zensus_cells(require_input(args.zensus_cells, "census cells"), labels);
      auto run = connectors::run_zensus_agent(cells, overpass, labels);
      for (const auto& s : run.skipped) spdlog::warn("zensus: {}", s);
      return run.records;
    };
  }
  if (args.osm) {
    agents[Source::OSM] = [&] {
      auto run = connectors::run_osm_agent(cfg.city_box, overpass);
      for (const auto& s : run.skipped) spdlog::warn("osm: {}", s);
      return run.records;
    };
  }
  std::unique_ptr<connectors::Annotator> annotator;
  std::unique_ptr<inference::GeocoderBackend> geocoder;
  if (!args.monument_pages.empty()) {
    if (cfg.endpoints.annotator.empty()) {
      annotator = std::make_unique<connectors::RuleBasedAnnotator>();
    } else {
      annotator = std::make_unique<connectors::RemoteAnnotator>(cfg.endpoints.annotator, transport);
    }
    geocoder = make_geocoder(cfg, transport);
    agents[Source::Monument] = [&] {
      const auto pages = read_lines(require_input(args.monument_pages, "monument page list"));
      connectors::MonumentAgentConfig mc;
      mc.city_box = cfg.city_box;
      auto run = connectors::run_monument_agent(pages, *transport, mc, *annotator, *geocoder);
      for (const auto& s : run.skipped) spdlog::warn("monument: {}", s);
      return run.records;
    };
  }
  // Pre-collected raw records join as one extra agent per source they contain.
  std::map<Source, std::vector<RawRecord>> preloaded;
  for (const auto& path : args.raw_inputs) {
    for (auto& r : raw_from_csv(require_input(path, "raw record file"))) preloaded[r.source].push_back(std::move(r));
  }
  for (auto& [source, records] : preloaded) {
    auto existing = agents.count(source) ? agents[source] : fusion::AgentFn{};
    agents[source] = [existing, recs = records] {
      auto out = existing ? existing() : std::vector<RawRecord>{};
      out.insert(out.end(), recs.begin(), recs.end());
      return out;
    };
  }

  const auto outputs = fusion::run_agents(agents);
  for (const auto& [source, why] : outputs.failures) spdlog::warn("agent {} failed: {}", to_string(source), why);

  const auto result = fusion::harmonize(fusion::fuse(outputs.records), cfg.fusion);
  const int dp = cfg.fusion.coord_quantize_decimals;
  const fs::path out_dir = cfg.paths.output;
  fs::create_directories(out_dir);
  io::write_file_atomic(out_dir / "fused.csv", fused_to_csv(result.records, dp));
  io::write_file_atomic(out_dir / "fused.geojson", fusion::to_geojson(result.records, dp));
  io::write_file_atomic(out_dir / "fusion_report.json", fusion::report_to_json(result.report, dp));
  spdlog::info("fused {} records from {} groups", result.records.size(), result.report.groups_total);
  return kOk;
}

// ---- folds -------------------------------------------------------------------

int cmd_folds(Common& common, const std::string& dataset_arg) {
  const auto cfg = common.resolve();
  const fs::path out_dir = cfg.paths.output;
  const auto dataset_path = dataset_arg.empty() ? (out_dir / "fused.csv").string() : dataset_arg;
  const auto dataset = fused_from_csv(require_input(dataset_path, "fused dataset"));
  const auto assignment = folds::assign_folds(dataset, cfg.folds.k, cfg.folds.seed);
  fs::create_directories(out_dir);
  io::write_file_atomic(out_dir / "folds.csv",
                        folds::write_fold_file(dataset, assignment, cfg.folds.k, cfg.folds.seed,
                                               cfg.fusion.coord_quantize_decimals));
  return kOk;
}

// ---- infer -------------------------------------------------------------------

std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> argv;
  for (std::string part; in >> part;) argv.push_back(part);
  return argv;
}

int cmd_infer(Common& common, const std::string& addresses_path, int jobs) {
  const auto cfg = common.resolve();
  const auto addresses = read_lines(require_input(addresses_path, "address file"));

  std::unique_ptr<inference::ClassifierBackend> classifier;
  if (cfg.inference.backend == "stub") {
    classifier = std::make_unique<inference::StubBackend>(
        inference::StubBackend::from_csv_text(require_input(cfg.inference.stub_table, "stub classifier table")));
  } else if (cfg.inference.backend == "sidecar") {
    const auto argv = split_command(cfg.inference.sidecar_command);
    classifier = std::make_unique<inference::SidecarBackend>(argv, std::chrono::seconds(cfg.inference.sidecar_timeout_secs));
  } else {
    classifier = std::make_unique<inference::UniformBackend>();
  }

  auto transport = make_transport(cfg);
  auto geocoder = make_geocoder(cfg, transport);
  const fs::path out_dir = cfg.paths.output;
  fs::create_directories(out_dir / "tiles");
  inference::HttpTileSource tiles(cfg.endpoints.tile, transport, out_dir / "tiles");

  inference::PipelineStages stages;
  stages.geocoder = geocoder.get();
  stages.tiles = &tiles;
  stages.classifier = classifier.get();
  stages.city_box = cfg.city_box;
  stages.zoom = cfg.inference.zoom;
  stages.validator.tau = cfg.inference.tau;

  std::vector<inference::InferenceOutcome> outcomes(addresses.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < addresses.size(); i = next++) outcomes[i] = inference::infer_address(addresses[i], stages);
  };
  std::vector<std::thread> pool;
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(addresses.size())));
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string decisions = inference::decisions_header();
  std::string review;
  std::string audit;
  std::vector<analytics::PredictionRow> predictions;
  for (const auto& o : outcomes) {
    decisions += inference::decision_row(o);
    if (!inference::is_accepted(o.decision)) review += inference::review_row(o);
    audit += inference::audit_jsonl(o);
    if (o.prediction && o.location) predictions.push_back({*o.location, o.prediction->probs});
  }
  io::write_file_atomic(out_dir / "decisions.csv", decisions);
  io::write_file_atomic(out_dir / "predictions.csv", analytics::predictions_to_csv(predictions));
  const auto review_path = out_dir / "review.csv";
  if (!fs::exists(review_path)) io::append_file(review_path, inference::review_header());
  if (!review.empty()) io::append_file(review_path, review);
  io::append_file(out_dir / "audit.jsonl", audit);
  const auto flagged = std::count_if(outcomes.begin(), outcomes.end(),
                                     [](const auto& o) { return !inference::is_accepted(o.decision); });
  spdlog::info("{} addresses, {} flagged for review", outcomes.size(), flagged);
  return kOk;
}

// ---- report ------------------------------------------------------------------

struct ReportArgs {
  std::string dataset;
  std::string predictions;
  std::uint64_t universe = 0;
  std::vector<double> taus{0.65, 0.70, 0.75};
};

int cmd_report(Common& common, const ReportArgs& args) {
  const auto cfg = common.resolve();
  const fs::path out_dir = cfg.paths.output;
  const auto dataset_path = args.dataset.empty() ? (out_dir / "fused.csv").string() : args.dataset;
  const auto dataset = fused_from_csv(require_input(dataset_path, "fused dataset"));
  std::optional<std::vector<analytics::PredictionRow>> predictions;
  if (!args.predictions.empty()) {
    predictions = analytics::predictions_from_csv(require_input(args.predictions, "predictions file"));
  }
  fs::create_directories(out_dir);

  nlohmann::ordered_json report;
  report["records"] = dataset.size();
  if (args.universe > 0) {
    report["coverage"] = {{"labeled", dataset.size()},
                          {"universe", args.universe},
                          {"share_percent", analytics::coverage_report(dataset.size(), args.universe)}};
  }

  const auto dist = fusion::cohort_distribution(dataset);
  std::string dist_csv = "cohort,count,share_percent\n";
  auto& cohorts = report["cohorts"] = nlohmann::ordered_json::array();
  for (int c = 0; c < kNumCohorts; ++c) {
    const auto label = std::string(to_string(cohort_from_index(c)));
    cohorts.push_back({{"cohort", label}, {"count", dist[c].count}, {"share_percent", dist[c].share_percent}});
    dist_csv += fmt::format("{},{},{}\n", label, dist[c].count, format_fixed(dist[c].share_percent, 2));
  }
  io::write_file_atomic(out_dir / "cohort_distribution.csv", dist_csv);

  if (predictions) {
    std::vector<inference::PredictionResult> results;
    for (const auto& p : *predictions) {
      results.push_back(inference::make_prediction(std::vector<double>(p.probs.begin(), p.probs.end())));
    }
    std::string flag_csv = "tau,flagged,share_percent\n";
    auto& flags = report["flag_rates"] = nlohmann::ordered_json::array();
    for (const auto& row : inference::flag_rate_report(results, args.taus)) {
      flags.push_back({{"tau", row.tau}, {"flagged", row.count}, {"share_percent", row.share_percent}});
      flag_csv += fmt::format("{},{},{}\n", format_fixed(row.tau, 2), row.count, format_fixed(row.share_percent, 2));
    }
    io::write_file_atomic(out_dir / "flag_rates.csv", flag_csv);

    const auto joined = analytics::join_predictions(dataset, *predictions, cfg.fusion.coord_quantize_decimals);
    report["predictions"] = {{"total", predictions->size()}, {"matched", joined.pairs.size()}, {"unmatched", joined.unmatched}};
    if (!joined.pairs.empty()) {
      const auto m = analytics::confusion_matrix(joined.pairs);
      const auto met = analytics::metrics(m);
      report["metrics"] = nlohmann::ordered_json::parse(analytics::metrics_to_json(m, met));
      io::write_file_atomic(out_dir / "metrics.csv", analytics::metrics_to_csv(met));
      io::write_file_atomic(out_dir / "confusion.csv", analytics::confusion_to_csv(m));
    }
  }
  io::write_file_atomic(out_dir / "report.json", report.dump(2) + "\n");
  return kOk;
}

// ---- energy ------------------------------------------------------------------

int cmd_energy(Common& common, const std::string& dataset_arg, const std::string& table_arg) {
  const auto cfg = common.resolve();
  const fs::path out_dir = cfg.paths.output;
  const auto dataset_path = dataset_arg.empty() ? (out_dir / "fused.csv").string() : dataset_arg;
  const auto dataset = fused_from_csv(require_input(dataset_path, "fused dataset"));
  const auto table_path = table_arg.empty() ? (normalize::data_dir() / "uvalues.csv").string() : table_arg;
  const auto table = analytics::UValueTable::from_csv_text(require_input(table_path, "U-value table"));
  for (const auto& v : table.monotonicity_violations()) {
    spdlog::warn("U-value table: {} rises from {} ({:.2f}) to {} ({:.2f})", v.component, to_string(v.from), v.before,
                 to_string(v.to), v.after);
  }
  fs::create_directories(out_dir);
  io::write_file_atomic(out_dir / "energy.csv",
                        analytics::annotated_to_csv(analytics::annotate_uvalues(dataset, table),
                                                    cfg.fusion.coord_quantize_decimals));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("agecohort");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Building age cohort pipeline"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_file, "key = value config file");
  app.add_option("--set", common.sets, "config override key=value (repeatable)");
  app.add_flag("-v,--verbose", common.verbose, "info-level logging");
  bind<std::string>(&app, "-o,--output", "paths.output", common, "output directory");
  bind<std::string>(&app, "--cache-dir", "paths.cache", common, "HTTP cache directory");
  bind<std::string>(&app, "--http-mode", "http.mode", common, "live | record | replay");
  bind<std::string>(&app, "--city-box", "city_box", common, "south,west,north,east");

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "collect sources and harmonize them into one dataset");
  fuse->add_option("--zensus-cells", fuse_args.zensus_cells, "CSV grid_id,period_label");
  fuse->add_option("--zensus-labels", fuse_args.zensus_labels, "CSV label,year_raw");
  fuse->add_flag("--osm", fuse_args.osm, "query date-tagged OSM buildings inside the city box");
  fuse->add_option("--monument-pages", fuse_args.monument_pages, "file with one registry page URL per line");
  fuse->add_option("--raw", fuse_args.raw_inputs, "pre-collected CSV lat,lon,year_raw,source (repeatable)");
  bind<int>(fuse, "--decimals", "fusion.decimals", common, "coordinate grouping precision");

  std::string folds_dataset;
  auto* folds_cmd = app.add_subcommand("folds", "spatial cross-validation folds");
  folds_cmd->add_option("--dataset", folds_dataset, "fused dataset CSV");
  bind<int>(folds_cmd, "-k,--k", "folds.k", common, "number of folds");
  bind<std::uint64_t>(folds_cmd, "--seed", "folds.seed", common, "k-means seed");

  std::string addresses;
  int jobs = 1;
  auto* infer = app.add_subcommand("infer", "address -> cohort decisions");
  infer->add_option("--addresses", addresses, "one address per line")->required();
  infer->add_option("-j,--jobs", jobs, "parallel workers")->check(CLI::Range(1, 64));
  bind<double>(infer, "--tau", "inference.tau", common, "confidence threshold");
  bind<int>(infer, "--zoom", "inference.zoom", common, "tile zoom");
  bind<std::string>(infer, "--backend", "inference.backend", common, "stub | sidecar | uniform");
  bind<std::string>(infer, "--stub-table", "inference.stub_table", common, "CSV tile_sha256,p0..p4");
  bind<std::string>(infer, "--sidecar", "inference.sidecar", common, "sidecar command line");
  bind<std::string>(infer, "--geocoder-fixture", "endpoints.geocoder_fixture", common, "offline geocoder JSON");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "coverage, cohort, flag-rate and metrics reports");
  report->add_option("--dataset", report_args.dataset, "fused dataset CSV");
  report->add_option("--predictions", report_args.predictions, "CSV lat,lon,p0..p4");
  report->add_option("--universe", report_args.universe, "building count of the study area");
  report->add_option("--taus", report_args.taus, "flag-rate thresholds")->delimiter(',');

  std::string energy_dataset;
  std::string energy_table;
  auto* energy = app.add_subcommand("energy", "join cohort U-values onto the dataset");
  energy->add_option("--dataset", energy_dataset, "fused dataset CSV");
  energy->add_option("--uvalues", energy_table, "CSV cohort,roof,upper_ceiling,wall,floor");

  CLI11_PARSE(app, argc, argv);
  if (common.verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*fuse) return cmd_fuse(common, fuse_args);
    if (*folds_cmd) return cmd_folds(common, folds_dataset);
    if (*infer) return cmd_infer(common, addresses, jobs);
    if (*report) return cmd_report(common, report_args);
    if (*energy) return cmd_energy(common, energy_dataset, energy_table);
  } catch (const CommandError& e) {
    report_failure(e.exit_code, e.code, e.message);
    return e.exit_code;
  } catch (const Error& e) {
    const int code = exit_for(e.code());
    report_failure(code, std::string(to_string(e.code())), e.what());
    return code;
  } catch (const std::exception& e) {
    report_failure(kFailure, "Internal", e.what());
    return kFailure;
  }
  return kFailure;
}
