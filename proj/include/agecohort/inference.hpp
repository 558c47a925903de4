#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "agecohort/geocoder.hpp"
#include "agecohort/geodesy.hpp"
#include "agecohort/records.hpp"
#include "agecohort/transport.hpp"

namespace agecohort::inference {

using Probabilities = std::array<double, kNumCohorts>;

struct PredictionResult {
  Probabilities probs{};
  double p_max = 0.0;
  AgeCohort argmax = AgeCohort::Pre1919;
};

// Validates a backend vector: exactly five finite values in [0, 1] whose sum is within 1e-3 of one
// (renormalized), otherwise InvalidProbabilityVector. Argmax ties go to the lowest cohort index.
PredictionResult make_prediction(const std::vector<double>& raw);

inline constexpr double kDefaultTau = 0.65;
inline constexpr double kSumTolerance = 1e-3;

struct ValidatorConfig {
  double tau = kDefaultTau;
};
void validate(const ValidatorConfig& config);

struct Accepted {
  AgeCohort cohort;
  double p_max;
};
struct Flagged {
  std::optional<double> p_max;  // absent when the pipeline failed before prediction
};
using Decision = std::variant<Accepted, Flagged>;

inline bool is_accepted(const Decision& d) { return std::holds_alternative<Accepted>(d); }

// Accepted(argmax) iff p_max >= tau.
Decision validate_confidence(const PredictionResult& prediction, const ValidatorConfig& config);

// ---- Tiles -------------------------------------------------------------------

struct TileImage {
  geodesy::TileCoord coord;
  std::string bytes;
  std::string sha256;
  std::filesystem::path path;  // on-disk copy handed to sidecar classifiers
};

class TileSource {
 public:
  virtual ~TileSource() = default;
  virtual TileImage fetch(const geodesy::TileCoord& coord) = 0;
};

inline constexpr int kDefaultZoom = 19;

std::string expand_tile_url(const std::string& url_template, const geodesy::TileCoord& coord);

// GET on a {z}/{x}/{y} URL template; tiles are also written under tile_dir.
class HttpTileSource : public TileSource {
 public:
  HttpTileSource(std::string url_template, std::shared_ptr<net::HttpTransport> transport,
                 std::filesystem::path tile_dir);
  TileImage fetch(const geodesy::TileCoord& coord) override;

 private:
  std::string url_template_;
  std::shared_ptr<net::HttpTransport> transport_;
  std::filesystem::path tile_dir_;
};

// ---- Classifier backends -----------------------------------------------------

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual std::vector<double> probabilities(const TileImage& tile) = 0;
};

class UniformBackend : public ClassifierBackend {
 public:
  std::vector<double> probabilities(const TileImage& tile) override;
};

// Fixed table keyed by tile SHA-256 (CSV tile_sha256,p0,p1,p2,p3,p4). Unknown tiles: BackendUnavailable.
class StubBackend : public ClassifierBackend {
 public:
  static StubBackend load(const std::filesystem::path& path);
  static StubBackend from_csv_text(std::string_view text);
  std::vector<double> probabilities(const TileImage& tile) override;

 private:
  std::map<std::string, std::vector<double>> table_;
};

PredictionResult predict(const TileImage& tile, ClassifierBackend& backend);

// ---- End-to-end ---------------------------------------------------------------

struct PipelineStages {
  GeocoderBackend* geocoder = nullptr;
  TileSource* tiles = nullptr;
  ClassifierBackend* classifier = nullptr;
  geodesy::BoundingBox city_box{-90.0, -180.0, 90.0, 180.0};
  int zoom = kDefaultZoom;
  ValidatorConfig validator;
};

struct AuditEntry {
  std::string stage;
  std::string input;
  std::string output;
};

struct InferenceOutcome {
  std::string address_text;
  Decision decision = Flagged{};
  std::string stage;  // "accepted" path ends at "validate"; failures name the stage that failed
  std::string error;
  std::optional<GeoPoint> location;
  std::optional<PredictionResult> prediction;
  std::vector<AuditEntry> audit;
};

// parse -> geocode -> tile -> fetch -> predict -> validate. Never throws on stage failures;
// any Error becomes a Flagged decision tagged with the failing stage.
InferenceOutcome infer_address(const std::string& text, const PipelineStages& stages);

struct FlagRateRow {
  double tau = 0.0;
  std::size_t count = 0;
  double share_percent = 0.0;
};

// Count of predictions with p_max < tau per threshold; share to 2 dp.
std::vector<FlagRateRow> flag_rate_report(const std::vector<PredictionResult>& predictions,
                                          const std::vector<double>& taus);

// CSV writers for the decision and review hand-off files.
std::string decisions_header();
std::string decision_row(const InferenceOutcome& outcome);
std::string review_header();
std::string review_row(const InferenceOutcome& outcome);
std::string audit_jsonl(const InferenceOutcome& outcome);

}  // namespace agecohort::inference
