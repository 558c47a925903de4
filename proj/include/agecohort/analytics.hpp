#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agecohort/records.hpp"

namespace agecohort::analytics {

using CohortPair = std::pair<AgeCohort, AgeCohort>;  // (true, predicted)

struct ConfusionMatrix {
  // rows = true cohort, columns = predicted cohort
  std::array<std::array<std::uint64_t, kNumCohorts>, kNumCohorts> counts{};

  std::uint64_t total() const;
  std::uint64_t row_support(int i) const;
  std::uint64_t column_support(int j) const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(const std::vector<CohortPair>& pairs);

using RealMatrix = std::array<std::array<double, kNumCohorts>, kNumCohorts>;
RealMatrix row_normalize(const ConfusionMatrix& m);

struct Metrics {
  double accuracy = 0.0;
  std::array<double, kNumCohorts> precision{};
  std::array<double, kNumCohorts> recall{};  // also the per-class "accuracy" column
  std::array<double, kNumCohorts> f1{};
  std::array<std::uint64_t, kNumCohorts> support{};
  double macro_f1 = 0.0;            // mean over all five classes, unsupported ones count as 0
  double macro_f1_supported = 0.0;  // mean over classes with true support > 0
};

Metrics metrics(const ConfusionMatrix& m);

// 100 * labeled / universe, half-up at 2 dp. InvalidCounts unless 0 < universe and labeled <= universe.
double coverage_report(std::uint64_t labeled, std::uint64_t universe);

struct UValueRow {
  double roof = 0.0;
  double upper_ceiling = 0.0;
  double wall = 0.0;
  double floor = 0.0;
  friend bool operator==(const UValueRow&, const UValueRow&) = default;
};

inline constexpr std::array<std::string_view, 4> kEnvelopeComponents{"roof", "upper_ceiling", "wall", "floor"};
double component(const UValueRow& row, int index);

struct MonotonicityViolation {
  std::string component;
  AgeCohort from;  // U-value rises from this cohort to the next
  AgeCohort to;
  double before;
  double after;
};

class UValueTable {
 public:
  static UValueTable builtin();
  static UValueTable load(const std::filesystem::path& path);
  static UValueTable from_csv_text(std::string_view text);

  const UValueRow& row(AgeCohort c) const { return rows_[cohort_index(c)]; }
  // Components whose values are not non-increasing from the oldest to the newest cohort.
  std::vector<MonotonicityViolation> monotonicity_violations() const;
  std::string to_csv() const;

 private:
  std::array<UValueRow, kNumCohorts> rows_{};
};

UValueRow uvalues_for_cohort(AgeCohort c);

struct AnnotatedRecord {
  FusedRecord record;
  UValueRow uvalues;
};

std::vector<AnnotatedRecord> annotate_uvalues(const std::vector<FusedRecord>& dataset,
                                              const UValueTable& table = UValueTable::builtin());
std::string annotated_to_csv(const std::vector<AnnotatedRecord>& rows, int decimals = 6);

// Predictions CSV: lat,lon,p0,p1,p2,p3,p4
struct PredictionRow {
  GeoPoint location;
  std::array<double, kNumCohorts> probs{};
};
std::vector<PredictionRow> predictions_from_csv(std::string_view text);
std::string predictions_to_csv(const std::vector<PredictionRow>& rows);

// Matches predictions to dataset rows on coordinates quantized to `decimals`; argmax ties to the lowest index.
// Predictions without a dataset match are counted in `unmatched`.
struct JoinedPairs {
  std::vector<CohortPair> pairs;
  std::size_t unmatched = 0;
};
JoinedPairs join_predictions(const std::vector<FusedRecord>& dataset, const std::vector<PredictionRow>& predictions,
                             int decimals = 6);

std::string metrics_to_json(const ConfusionMatrix& m, const Metrics& metrics);
std::string metrics_to_csv(const Metrics& metrics);
std::string confusion_to_csv(const ConfusionMatrix& m);

}  // namespace agecohort::analytics
