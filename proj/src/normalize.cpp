#include "agecohort/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agecohort/error.hpp"

#ifndef AGECOHORT_DATA_DIR_DEFAULT
#define AGECOHORT_DATA_DIR_DEFAULT "data"
#endif

namespace agecohort::normalize {
namespace {

std::string regex_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::string_view(R"(\^$.|?*+()[]{})").find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

std::string alternation(std::vector<std::string> words) {
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += '|';
    out += regex_escape(w);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

std::string clean_text(std::string_view text) {
  std::string s = to_lower_ascii(text);
  s = replace_all(s, "\xE2\x80\x93", "-");  // en dash
  s = replace_all(s, "\xE2\x80\x94", "-");  // em dash
  s = replace_all(s, "\xE2\x80\x90", "-");  // hyphen
  return collapse_spaces(s);
}

CenturyPart parse_part(const std::string& name) {
  if (name == "early") return CenturyPart::Early;
  if (name == "mid") return CenturyPart::Mid;
  if (name == "late") return CenturyPart::Late;
  throw Error(ErrorCode::ParseError, "unknown century qualifier group: " + name);
}

// Compiled matchers for a vocabulary; built lazily per vocabulary instance.
struct Matchers {
  std::regex range;
  std::regex decade;
  std::regex year;
  std::regex century;

  explicit Matchers(const TemporalVocabulary& v) {
    range = std::regex(R"((^|[^0-9])([0-9]{4})\s*(?:)" + alternation(v.range_separators()) +
                       R"()\s*([0-9]{4})(?![0-9]))");
    decade = std::regex(R"((^|[^0-9])([0-9]{3}0)(?:)" + alternation(v.decade_suffixes()) + R"()(?![a-z0-9]))");
    year = std::regex(R"((^|[^0-9])([0-9]{4})(?![0-9]))");
    std::vector<std::string> quals;
    for (const auto& [word, part] : v.qualifiers()) quals.push_back(word);
    century = std::regex(R"((?:^|[\s(,;/-])()" + alternation(quals) +
                         R"()[\s-]*([0-9]{1,2})(?:\.|st|nd|rd|th)?[\s-]*(?:)" + alternation(v.century_suffixes()) +
                         R"()(?![a-z]))");
  }
};

std::string strip_circa(const std::string& s, const TemporalVocabulary& vocab, bool& stripped) {
  std::string out = s;
  for (const auto& prefix : vocab.circa_prefixes()) {
    std::size_t pos = 0;
    while ((pos = out.find(prefix, pos)) != std::string::npos) {
      const bool start_ok = pos == 0 || out[pos - 1] == ' ' || out[pos - 1] == '(';
      const std::size_t end = pos + prefix.size();
      const bool end_ok = end < out.size() && (out[end] == ' ' || std::isdigit(static_cast<unsigned char>(out[end])));
      if (start_ok && end_ok) {
        out.erase(pos, prefix.size());
        stripped = true;
      } else {
        pos = end;
      }
    }
  }
  return collapse_spaces(out);
}

TemporalResult year_result(int year, std::string rule) {
  return {year, cohort_of(year), std::move(rule)};
}

}  // namespace

int representative_year(const CenturyPhrase& phrase) { return (phrase.first_year + phrase.last_year + 1) / 2; }

TemporalVocabulary TemporalVocabulary::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("temporal vocabulary: ") + e.what());
  }
  TemporalVocabulary v;
  try {
    for (const auto& s : j.at("circa_prefixes")) v.circa_prefixes_.push_back(to_lower_ascii(s.get<std::string>()));
    for (const auto& s : j.at("range_separators")) v.range_separators_.push_back(to_lower_ascii(s.get<std::string>()));
    for (const auto& s : j.at("decade_suffixes")) v.decade_suffixes_.push_back(to_lower_ascii(s.get<std::string>()));
    for (const auto& [label, cohort] : j.at("cohort_labels").items()) {
      v.cohort_labels_[clean_text(label)] = parse_cohort(cohort.get<std::string>());
    }
    const auto& cp = j.at("century_phrases");
    for (const auto& [group, words] : cp.at("qualifiers").items()) {
      for (const auto& w : words) v.qualifiers_[to_lower_ascii(w.get<std::string>())] = parse_part(group);
    }
    for (const auto& s : cp.at("suffixes")) v.century_suffixes_.push_back(to_lower_ascii(s.get<std::string>()));
    for (int century : cp.at("centuries")) {
      for (const auto& [group, window] : cp.at("windows").items()) {
        const int base = (century - 1) * 100;
        CenturyPhrase phrase{parse_part(group), century, base + window.at(0).get<int>(), base + window.at(1).get<int>(),
                             AgeCohort::Pre1919};
        phrase.cohort = cohort_of_unchecked(representative_year(phrase));
        v.century_table_.push_back(phrase);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("temporal vocabulary: ") + e.what());
  }
  std::sort(v.century_table_.begin(), v.century_table_.end(), [](const auto& a, const auto& b) {
    return a.first_year < b.first_year;
  });
  return v;
}

TemporalVocabulary TemporalVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::optional<CenturyPhrase> TemporalVocabulary::lookup(CenturyPart part, int century) const {
  for (const auto& p : century_table_) {
    if (p.part == part && p.century == century) return p;
  }
  return std::nullopt;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("AGECOHORT_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return AGECOHORT_DATA_DIR_DEFAULT;
}

const TemporalVocabulary& default_vocabulary() {
  static const TemporalVocabulary vocab = TemporalVocabulary::load(data_dir() / "temporal_vocab.json");
  return vocab;
}

TemporalResult normalize_temporal(std::string_view text, const TemporalVocabulary& vocab) {
  const std::string cleaned = clean_text(text);
  if (auto it = vocab.cohort_labels().find(cleaned); it != vocab.cohort_labels().end()) {
    return {std::nullopt, it->second, "cohort-label"};
  }

  bool circa = false;
  const std::string s = strip_circa(cleaned, vocab, circa);
  const std::string prefix = circa ? "circa-" : "";
  // std::regex objects are expensive to build; cache per vocabulary address.
  thread_local const TemporalVocabulary* cached_for = nullptr;
  thread_local std::optional<Matchers> matchers;
  if (cached_for != &vocab || !matchers) {
    matchers.emplace(vocab);
    cached_for = &vocab;
  }

  std::smatch m;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), matchers->range); it != std::sregex_iterator(); ++it) {
    const int a = std::stoi((*it)[2]);
    const int b = std::stoi((*it)[3]);
    if (is_plausible_year(a) && is_plausible_year(b) && a <= b) {
      return year_result((a + b) / 2, prefix + "range");
    }
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), matchers->decade); it != std::sregex_iterator(); ++it) {
    const int decade = std::stoi((*it)[2]);
    if (is_plausible_year(decade + 5)) {
      return year_result(decade + 5, prefix + "decade");
    }
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), matchers->year); it != std::sregex_iterator(); ++it) {
    const int y = std::stoi((*it)[2]);
    if (is_plausible_year(y)) {
      return year_result(y, prefix + "year");
    }
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), matchers->century); it != std::sregex_iterator(); ++it) {
    const auto q = vocab.qualifiers().find((*it)[1].str());
    if (q == vocab.qualifiers().end()) continue;
    if (auto phrase = vocab.lookup(q->second, std::stoi((*it)[2]))) {
      return {std::nullopt, phrase->cohort, prefix + "century-phrase"};
    }
  }
  return {};
}

TemporalResult normalize_temporal(std::string_view text) { return normalize_temporal(text, default_vocabulary()); }

Address parse_address(std::string_view text) {
  static const std::string kNumber = R"(([0-9]+[a-zA-Z]?(?:-[0-9]+[a-zA-Z]?)?))";
  static const std::regex kComma(R"(^\s*(.+?)\s+)" + kNumber + R"(\s*,\s*(?:[0-9]{5}\s+)?(.+?)\s*$)");
  static const std::regex kSpace(R"(^\s*(.+?)\s+)" + kNumber + R"(\s+(?:[0-9]{5}\s+)?(.+?)\s*$)");
  static const std::regex kHasLetter(R"([^\s0-9,.\-])");

  const std::string s = collapse_spaces(text);
  std::smatch m;
  if (std::regex_match(s, m, kComma) || std::regex_match(s, m, kSpace)) {
    Address a{m[1].str(), m[2].str(), m[3].str()};
    while (!a.street.empty() && a.street.back() == ',') a.street.pop_back();
    if (std::regex_search(a.street, kHasLetter) && std::regex_search(a.city, kHasLetter) &&
        a.city.find(',') == std::string::npos) {
      return a;
    }
  }
  throw Error(ErrorCode::UnparseableAddress, "cannot parse address: " + s);
}

std::string format_address(const Address& a) { return a.street + " " + a.house_number + ", " + a.city; }

}  // namespace agecohort::normalize
