#include "agecohort/inference.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"
#include "agecohort/io.hpp"
#include "agecohort/normalize.hpp"
#include "agecohort/percent.hpp"

namespace agecohort::inference {
namespace {

std::string replace_token(std::string s, const std::string& token, const std::string& value) {
  for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos + value.size())) {
    s.replace(pos, token.size(), value);
  }
  return s;
}

std::string probs_text(const Probabilities& p) {
  std::string s;
  for (double v : p) s += (s.empty() ? "" : " ") + format_fixed(v, 6);
  return s;
}

std::vector<std::string> prob_columns(const std::optional<PredictionResult>& pred) {
  std::vector<std::string> cols;
  for (int i = 0; i < kNumCohorts; ++i) cols.push_back(pred ? format_fixed(pred->probs[i], 6) : "");
  return cols;
}

std::optional<double> p_max_of(const Decision& d) {
  if (const auto* a = std::get_if<Accepted>(&d)) return a->p_max;
  return std::get<Flagged>(d).p_max;
}

}  // namespace

PredictionResult make_prediction(const std::vector<double>& raw) {
  if (raw.size() != kNumCohorts) {
    throw Error(ErrorCode::InvalidProbabilityVector,
                "expected " + std::to_string(kNumCohorts) + " probabilities, got " + std::to_string(raw.size()));
  }
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::InvalidProbabilityVector, "probability outside [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidProbabilityVector, "probabilities sum to " + std::to_string(sum));
  }
  PredictionResult out;
  for (int i = 0; i < kNumCohorts; ++i) out.probs[i] = raw[i] / sum;
  int best = 0;
  for (int i = 1; i < kNumCohorts; ++i) {
    if (out.probs[i] > out.probs[best]) best = i;
  }
  out.p_max = out.probs[best];
  out.argmax = cohort_from_index(best);
  return out;
}

void validate(const ValidatorConfig& config) {
  if (!(config.tau > 0.0 && config.tau < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau must be in (0, 1)");
  }
}

Decision validate_confidence(const PredictionResult& prediction, const ValidatorConfig& config) {
  if (prediction.p_max >= config.tau) return Accepted{prediction.argmax, prediction.p_max};
  return Flagged{prediction.p_max};
}

std::string expand_tile_url(const std::string& url_template, const geodesy::TileCoord& coord) {
  std::string url = replace_token(url_template, "{z}", std::to_string(coord.z));
  url = replace_token(url, "{x}", std::to_string(coord.x));
  return replace_token(url, "{y}", std::to_string(coord.y));
}

HttpTileSource::HttpTileSource(std::string url_template, std::shared_ptr<net::HttpTransport> transport,
                               std::filesystem::path tile_dir)
    : url_template_(std::move(url_template)), transport_(std::move(transport)), tile_dir_(std::move(tile_dir)) {}

TileImage HttpTileSource::fetch(const geodesy::TileCoord& coord) {
  const auto response = transport_->send({"GET", expand_tile_url(url_template_, coord), "", ""});
  if (response.status != 200) {
    throw Error(ErrorCode::NetworkError, "tile HTTP " + std::to_string(response.status));
  }
  if (response.body.empty()) {
    throw Error(ErrorCode::MalformedResponse, "empty tile body");
  }
  TileImage tile{coord, response.body, net::sha256_hex(response.body), {}};
  tile.path = tile_dir_ / (std::to_string(coord.z) + "_" + std::to_string(coord.x) + "_" + std::to_string(coord.y) + ".img");
  if (!std::filesystem::exists(tile.path)) io::write_file_atomic(tile.path, tile.bytes);
  return tile;
}

std::vector<double> UniformBackend::probabilities(const TileImage&) {
  return std::vector<double>(kNumCohorts, 1.0 / kNumCohorts);
}

StubBackend StubBackend::from_csv_text(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto key = table.column("tile_sha256");
  std::array<std::size_t, kNumCohorts> cols{};
  for (int i = 0; i < kNumCohorts; ++i) cols[i] = table.column("p" + std::to_string(i));
  StubBackend b;
  for (const auto& row : table.rows()) {
    std::vector<double> probs;
    for (auto c : cols) probs.push_back(parse_double(row[c]));
    b.table_[row[key]] = std::move(probs);
  }
  return b;
}

StubBackend StubBackend::load(const std::filesystem::path& path) { return from_csv_text(io::read_file(path)); }

std::vector<double> StubBackend::probabilities(const TileImage& tile) {
  auto it = table_.find(tile.sha256);
  if (it == table_.end()) {
    throw Error(ErrorCode::BackendUnavailable, "stub table has no row for tile " + tile.sha256);
  }
  return it->second;
}

PredictionResult predict(const TileImage& tile, ClassifierBackend& backend) {
  return make_prediction(backend.probabilities(tile));
}

InferenceOutcome infer_address(const std::string& text, const PipelineStages& stages) {
  InferenceOutcome out;
  out.address_text = text;
  std::string stage = "parse";
  try {
    const auto address = normalize::parse_address(text);
    out.audit.push_back({stage, text, normalize::format_address(address)});

    stage = "geocode";
    if (stages.geocoder == nullptr) throw Error(ErrorCode::BackendUnavailable, "no geocoder configured");
    const auto point = geocode(address, *stages.geocoder, stages.city_box);
    out.location = point;
    out.audit.push_back({stage, normalize::format_address(address), format_fixed(point.lat, 7) + " " + format_fixed(point.lon, 7)});

    stage = "tile";
    const auto coord = geodesy::lonlat_to_tile(point, stages.zoom);
    out.audit.push_back({stage, format_fixed(point.lat, 7) + " " + format_fixed(point.lon, 7),
                         std::to_string(coord.z) + "/" + std::to_string(coord.x) + "/" + std::to_string(coord.y)});

    stage = "fetch";
    if (stages.tiles == nullptr) throw Error(ErrorCode::BackendUnavailable, "no tile source configured");
    const auto tile = stages.tiles->fetch(coord);
    out.audit.push_back({stage, std::to_string(coord.z) + "/" + std::to_string(coord.x) + "/" + std::to_string(coord.y),
                         tile.sha256});

    stage = "predict";
    if (stages.classifier == nullptr) throw Error(ErrorCode::BackendUnavailable, "no classifier configured");
    const auto prediction = predict(tile, *stages.classifier);
    out.prediction = prediction;
    out.audit.push_back({stage, tile.sha256, probs_text(prediction.probs)});

    stage = "validate";
    out.decision = validate_confidence(prediction, stages.validator);
    out.stage = stage;
    out.audit.push_back({stage, format_fixed(prediction.p_max, 6),
                         is_accepted(out.decision) ? std::string(to_string(prediction.argmax)) : "FLAGGED"});
  } catch (const Error& e) {
    out.decision = Flagged{out.prediction ? std::optional<double>(out.prediction->p_max) : std::nullopt};
    out.stage = stage;
    out.error = e.what();
    out.audit.push_back({stage, "", std::string("error: ") + e.what()});
  }
  return out;
}

std::vector<FlagRateRow> flag_rate_report(const std::vector<PredictionResult>& predictions,
                                          const std::vector<double>& taus) {
  std::vector<FlagRateRow> rows;
  for (double tau : taus) {
    std::size_t count = 0;
    for (const auto& p : predictions) {
      if (p.p_max < tau) ++count;
    }
    rows.push_back({tau, count, percent_2dp(count, predictions.size())});
  }
  return rows;
}

std::string decisions_header() { return "address,decision,cohort,p_max,lat,lon,stage,p0,p1,p2,p3,p4\n"; }

std::string decision_row(const InferenceOutcome& o) {
  const auto pm = p_max_of(o.decision);
  csv::Row row{o.address_text,
               is_accepted(o.decision) ? "accepted" : "flagged",
               is_accepted(o.decision) ? std::string(to_string(std::get<Accepted>(o.decision).cohort)) : "",
               pm ? format_fixed(*pm, 6) : "",
               o.location ? format_fixed(o.location->lat, 7) : "",
               o.location ? format_fixed(o.location->lon, 7) : "",
               o.stage};
  for (auto& c : prob_columns(o.prediction)) row.push_back(std::move(c));
  return csv::format_row(row) + "\n";
}

std::string review_header() { return "address,lat,lon,p_max,stage,p0,p1,p2,p3,p4\n"; }

std::string review_row(const InferenceOutcome& o) {
  const auto pm = p_max_of(o.decision);
  csv::Row row{o.address_text, o.location ? format_fixed(o.location->lat, 7) : "",
               o.location ? format_fixed(o.location->lon, 7) : "", pm ? format_fixed(*pm, 6) : "", o.stage};
  for (auto& c : prob_columns(o.prediction)) row.push_back(std::move(c));
  return csv::format_row(row) + "\n";
}

std::string audit_jsonl(const InferenceOutcome& o) {
  nlohmann::ordered_json j;
  j["address"] = o.address_text;
  j["decision"] = is_accepted(o.decision) ? "accepted" : "flagged";
  j["stage"] = o.stage;
  if (!o.error.empty()) j["error"] = o.error;
  j["trail"] = nlohmann::ordered_json::array();
  for (const auto& a : o.audit) j["trail"].push_back({{"stage", a.stage}, {"input", a.input}, {"output", a.output}});
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

}  // namespace agecohort::inference
