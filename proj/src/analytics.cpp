#include "agecohort/analytics.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"
#include "agecohort/fusion.hpp"
#include "agecohort/io.hpp"
#include "agecohort/percent.hpp"

namespace agecohort::analytics {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto v : row) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::row_support(int i) const {
  std::uint64_t t = 0;
  for (auto v : counts[i]) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::column_support(int j) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[j];
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<CohortPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "confusion matrix needs at least one pair");
  ConfusionMatrix m;
  for (const auto& [truth, pred] : pairs) ++m.counts[cohort_index(truth)][cohort_index(pred)];
  return m;
}

RealMatrix row_normalize(const ConfusionMatrix& m) {
  RealMatrix out{};
  for (int i = 0; i < kNumCohorts; ++i) {
    const auto support = m.row_support(i);
    if (support == 0) continue;
    for (int j = 0; j < kNumCohorts; ++j) out[i][j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(support);
  }
  return out;
}

Metrics metrics(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw Error(ErrorCode::EmptyInput, "metrics need a non-empty confusion matrix");
  Metrics out;
  std::uint64_t trace = 0;
  double f1_sum = 0.0;
  double f1_supported_sum = 0.0;
  int supported = 0;
  for (int c = 0; c < kNumCohorts; ++c) {
    const auto tp = m.counts[c][c];
    trace += tp;
    const auto row = m.row_support(c);
    const auto col = m.column_support(c);
    const double p = col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
    const double r = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
    out.precision[c] = p;
    out.recall[c] = r;
    out.f1[c] = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    out.support[c] = row;
    f1_sum += out.f1[c];
    if (row > 0) {
      f1_supported_sum += out.f1[c];
      ++supported;
    }
  }
  out.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  out.macro_f1 = f1_sum / kNumCohorts;
  out.macro_f1_supported = f1_supported_sum / supported;
  return out;
}

double coverage_report(std::uint64_t labeled, std::uint64_t universe) {
  if (universe == 0 || labeled > universe) {
    throw Error(ErrorCode::InvalidCounts, fmt::format("invalid coverage counts {}/{}", labeled, universe));
  }
  return percent_2dp(labeled, universe);
}

double component(const UValueRow& row, int index) {
  switch (index) {
    case 0: return row.roof;
    case 1: return row.upper_ceiling;
    case 2: return row.wall;
    case 3: return row.floor;
  }
  throw Error(ErrorCode::InvalidArgument, "envelope component index out of range");
}

UValueTable UValueTable::builtin() {
  UValueTable t;
  t.rows_ = {{{1.95, 1.00, 2.10, 2.05},
              {1.54, 1.06, 1.41, 1.41},
              {0.75, 0.96, 1.05, 1.29},
              {0.42, 0.39, 0.52, 0.62},
              {0.24, 0.25, 0.28, 0.33}}};
  return t;
}

UValueTable UValueTable::load(const std::filesystem::path& path) { return from_csv_text(io::read_file(path)); }

UValueTable UValueTable::from_csv_text(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto cohort_col = table.column("cohort");
  std::array<std::size_t, 4> cols{};
  for (int k = 0; k < 4; ++k) cols[k] = table.column(kEnvelopeComponents[k]);

  UValueTable t;
  std::array<bool, kNumCohorts> seen{};
  for (const auto& row : table.rows()) {
    const int c = cohort_index(parse_cohort(row.at(cohort_col)));
    if (seen[c]) throw Error(ErrorCode::ParseError, "duplicate U-value row for " + row[cohort_col]);
    seen[c] = true;
    std::array<double, 4> v{};
    for (int k = 0; k < 4; ++k) {
      v[k] = parse_double(row.at(cols[k]));
      if (!(v[k] > 0.0) || !std::isfinite(v[k])) {
        throw Error(ErrorCode::ParseError, fmt::format("non-positive U-value for {} {}", row[cohort_col],
                                                       kEnvelopeComponents[k]));
      }
    }
    t.rows_[c] = {v[0], v[1], v[2], v[3]};
  }
  for (int c = 0; c < kNumCohorts; ++c) {
    if (!seen[c]) throw Error(ErrorCode::ParseError, "U-value table lacks " + std::string(to_string(cohort_from_index(c))));
  }
  return t;
}

std::vector<MonotonicityViolation> UValueTable::monotonicity_violations() const {
  std::vector<MonotonicityViolation> out;
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c + 1 < kNumCohorts; ++c) {
      const double a = component(rows_[c], k);
      const double b = component(rows_[c + 1], k);
      if (b > a) {
        out.push_back({std::string(kEnvelopeComponents[k]), cohort_from_index(c), cohort_from_index(c + 1), a, b});
      }
    }
  }
  return out;
}

std::string UValueTable::to_csv() const {
  std::string out = "cohort,roof,upper_ceiling,wall,floor\n";
  for (int c = 0; c < kNumCohorts; ++c) {
    const auto& r = rows_[c];
    out += fmt::format("{},{},{},{},{}\n", to_string(cohort_from_index(c)), format_fixed(r.roof, 2),
                       format_fixed(r.upper_ceiling, 2), format_fixed(r.wall, 2), format_fixed(r.floor, 2));
  }
  return out;
}

UValueRow uvalues_for_cohort(AgeCohort c) {
  static const UValueTable table = UValueTable::builtin();
  return table.row(c);
}

std::vector<AnnotatedRecord> annotate_uvalues(const std::vector<FusedRecord>& dataset, const UValueTable& table) {
  std::vector<AnnotatedRecord> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset) out.push_back({r, table.row(r.cohort)});
  return out;
}

std::string annotated_to_csv(const std::vector<AnnotatedRecord>& rows, int decimals) {
  std::string out = "lat,lon,chosen_year,chosen_source,cohort,roof,upper_ceiling,wall,floor\n";
  for (const auto& a : rows) {
    const auto& r = a.record;
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", format_fixed(r.location.lat, decimals),
                       format_fixed(r.location.lon, decimals), r.chosen_year, to_string(r.chosen_source),
                       to_string(r.cohort), format_fixed(a.uvalues.roof, 2), format_fixed(a.uvalues.upper_ceiling, 2),
                       format_fixed(a.uvalues.wall, 2), format_fixed(a.uvalues.floor, 2));
  }
  return out;
}

std::vector<PredictionRow> predictions_from_csv(std::string_view text) {
  const auto table = csv::Table::from_text(text);
  const auto lat = table.column("lat");
  const auto lon = table.column("lon");
  std::array<std::size_t, kNumCohorts> p{};
  for (int c = 0; c < kNumCohorts; ++c) p[c] = table.column("p" + std::to_string(c));
  std::vector<PredictionRow> out;
  for (const auto& row : table.rows()) {
    PredictionRow pr;
    pr.location = geodesy::checked_geopoint(parse_double(row.at(lat)), parse_double(row.at(lon)));
    for (int c = 0; c < kNumCohorts; ++c) pr.probs[c] = parse_double(row.at(p[c]));
    out.push_back(pr);
  }
  return out;
}

std::string predictions_to_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "lat,lon,p0,p1,p2,p3,p4\n";
  for (const auto& r : rows) {
    out += format_fixed(r.location.lat, 6) + "," + format_fixed(r.location.lon, 6);
    for (double v : r.probs) out += "," + format_fixed(v, 6);
    out += '\n';
  }
  return out;
}

JoinedPairs join_predictions(const std::vector<FusedRecord>& dataset, const std::vector<PredictionRow>& predictions,
                             int decimals) {
  std::map<fusion::LocationKey, AgeCohort> truth;
  for (const auto& r : dataset) truth.emplace(fusion::quantize(r.location, decimals), r.cohort);
  JoinedPairs out;
  for (const auto& p : predictions) {
    const auto it = truth.find(fusion::quantize(p.location, decimals));
    if (it == truth.end()) {
      ++out.unmatched;
      continue;
    }
    int best = 0;
    for (int c = 1; c < kNumCohorts; ++c)
      if (p.probs[c] > p.probs[best]) best = c;
    out.pairs.emplace_back(it->second, cohort_from_index(best));
  }
  return out;
}

std::string metrics_to_json(const ConfusionMatrix& m, const Metrics& metrics) {
  nlohmann::ordered_json j;
  j["total"] = m.total();
  j["accuracy"] = metrics.accuracy;
  j["macro_f1"] = metrics.macro_f1;
  j["macro_f1_supported"] = metrics.macro_f1_supported;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  const auto normalized = row_normalize(m);
  for (int c = 0; c < kNumCohorts; ++c) {
    nlohmann::ordered_json row;
    row["cohort"] = to_string(cohort_from_index(c));
    row["support"] = metrics.support[c];
    row["precision"] = metrics.precision[c];
    row["recall"] = metrics.recall[c];
    row["f1"] = metrics.f1[c];
    row["counts"] = m.counts[c];
    row["normalized"] = normalized[c];
    classes.push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string metrics_to_csv(const Metrics& metrics) {
  std::string out = "cohort,support,precision,recall,f1\n";
  for (int c = 0; c < kNumCohorts; ++c) {
    out += fmt::format("{},{},{},{},{}\n", to_string(cohort_from_index(c)), metrics.support[c],
                       format_fixed(metrics.precision[c], 6), format_fixed(metrics.recall[c], 6),
                       format_fixed(metrics.f1[c], 6));
  }
  out += fmt::format("accuracy,,,,{}\nmacro_f1,,,,{}\n", format_fixed(metrics.accuracy, 6),
                     format_fixed(metrics.macro_f1, 6));
  return out;
}

std::string confusion_to_csv(const ConfusionMatrix& m) {
  std::string out = "true\\pred";
  for (auto c : kAllCohorts) out += "," + std::string(to_string(c));
  out += '\n';
  for (int i = 0; i < kNumCohorts; ++i) {
    out += std::string(to_string(cohort_from_index(i)));
    for (auto v : m.counts[i]) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

}  // namespace agecohort::analytics
