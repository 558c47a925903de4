#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agecohort/records.hpp"

namespace agecohort::normalize {

struct TemporalResult {
  std::optional<int> year;
  std::optional<AgeCohort> cohort_hint;
  std::string rule_id = "no-match";

  bool matched() const { return year.has_value() || cohort_hint.has_value(); }
  friend bool operator==(const TemporalResult&, const TemporalResult&) = default;
};

enum class CenturyPart { Early, Mid, Late };

struct CenturyPhrase {
  CenturyPart part;
  int century;     // ordinal, 20 == 1901..2000
  int first_year;  // inclusive
  int last_year;   // inclusive
  AgeCohort cohort;
};

// Year the phrase stands for: window midpoint rounded half up.
int representative_year(const CenturyPhrase& phrase);

// Phrase vocabularies, loaded from data/temporal_vocab.json.
class TemporalVocabulary {
 public:
  static TemporalVocabulary load(const std::filesystem::path& path);
  static TemporalVocabulary from_json_text(std::string_view text);

  const std::vector<std::string>& circa_prefixes() const { return circa_prefixes_; }
  const std::vector<std::string>& range_separators() const { return range_separators_; }
  const std::vector<std::string>& decade_suffixes() const { return decade_suffixes_; }
  const std::map<std::string, AgeCohort>& cohort_labels() const { return cohort_labels_; }
  const std::map<std::string, CenturyPart>& qualifiers() const { return qualifiers_; }
  const std::vector<std::string>& century_suffixes() const { return century_suffixes_; }
  // Every (part, century) entry the vocabulary covers.
  const std::vector<CenturyPhrase>& century_table() const { return century_table_; }
  std::optional<CenturyPhrase> lookup(CenturyPart part, int century) const;

 private:
  std::vector<std::string> circa_prefixes_;
  std::vector<std::string> range_separators_;
  std::vector<std::string> decade_suffixes_;
  std::map<std::string, AgeCohort> cohort_labels_;
  std::map<std::string, CenturyPart> qualifiers_;
  std::vector<std::string> century_suffixes_;
  std::vector<CenturyPhrase> century_table_;
};

// Vocabulary from the shipped data directory (see data_dir()).
const TemporalVocabulary& default_vocabulary();

// Directory holding the shipped data files. AGECOHORT_DATA_DIR overrides the build-time location.
std::filesystem::path data_dir();

// Rules are tried in this order; the first that matches wins:
//   cohort-label  exact canonical/census label ("pre-1919", "vor 1919")
//   range         "1890-1900" -> floored midpoint
//   decade        "1950er", "1950s" -> mid-decade year
//   year          first plausible 4-digit year anywhere in the text
//   century       "early 19C", "Mitte des 20. Jahrhunderts" -> cohort hint only
// Circa prefixes ("um", "ca.") are removed before matching and reported as a "circa-" rule prefix.
TemporalResult normalize_temporal(std::string_view text, const TemporalVocabulary& vocab);
TemporalResult normalize_temporal(std::string_view text);

struct Address {
  std::string street;
  std::string house_number;
  std::string city;

  friend bool operator==(const Address&, const Address&) = default;
};

// "<street> <number>, <city>" or "<street> <number> [postcode] <city>". Throws UnparseableAddress.
Address parse_address(std::string_view text);
// Canonical "<street> <number>, <city>" form used as a geocoder key.
std::string format_address(const Address& a);

}  // namespace agecohort::normalize
