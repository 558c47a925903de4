#include "agecohort/html.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "agecohort/error.hpp"

namespace agecohort::html {
namespace {

bool is_void_element(std::string_view tag) {
  static const std::set<std::string_view> kVoid{"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                                "input", "link", "meta", "param", "source", "track", "wbr"};
  return kVoid.count(tag) > 0;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_utf8(std::string& out, unsigned cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

// One compound selector, e.g. "div.entry[data-kind=monument]".
struct Compound {
  std::string tag;  // empty or "*" matches any
  std::string id;
  std::vector<std::string> classes;
  std::vector<std::pair<std::string, std::optional<std::string>>> attributes;
};

struct Step {
  Compound compound;
  bool child_of_previous = false;  // '>' combinator
};

using Chain = std::vector<Step>;

Compound parse_compound(std::string_view s, std::size_t& i) {
  Compound c;
  auto read_name = [&] {
    const std::size_t start = i;
    while (i < s.size() && is_name_char(s[i])) ++i;
    return std::string(s.substr(start, i - start));
  };
  if (i < s.size() && s[i] == '*') {
    c.tag = "*";
    ++i;
  } else if (i < s.size() && is_name_char(s[i])) {
    c.tag = lower(read_name());
  }
  while (i < s.size()) {
    if (s[i] == '#') {
      ++i;
      c.id = read_name();
    } else if (s[i] == '.') {
      ++i;
      c.classes.push_back(read_name());
    } else if (s[i] == '[') {
      ++i;
      const std::string name = lower(read_name());
      std::optional<std::string> value;
      if (i < s.size() && s[i] == '=') {
        ++i;
        if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
          const char q = s[i++];
          const std::size_t start = i;
          while (i < s.size() && s[i] != q) ++i;
          value = std::string(s.substr(start, i - start));
          ++i;
        } else {
          const std::size_t start = i;
          while (i < s.size() && s[i] != ']') ++i;
          value = std::string(s.substr(start, i - start));
        }
      }
      if (i >= s.size() || s[i] != ']') {
        throw Error(ErrorCode::InvalidArgument, "unterminated attribute selector in: " + std::string(s));
      }
      ++i;
      c.attributes.emplace_back(name, value);
    } else {
      break;
    }
  }
  if (c.tag.empty() && c.id.empty() && c.classes.empty() && c.attributes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty selector component in: " + std::string(s));
  }
  return c;
}

std::vector<Chain> parse_selector(std::string_view s) {
  std::vector<Chain> groups(1);
  std::size_t i = 0;
  bool child = false;
  while (i < s.size()) {
    const char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '>') {
      child = true;
      ++i;
    } else if (ch == ',') {
      groups.emplace_back();
      child = false;
      ++i;
    } else {
      groups.back().push_back({parse_compound(s, i), child});
      child = false;
    }
  }
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::InvalidArgument, "empty selector: " + std::string(s));
  }
  return groups;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  static const std::map<std::string_view, unsigned> kNamed{
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},   {"apos", '\''},  {"nbsp", 0xA0},
      {"auml", 0xE4},   {"ouml", 0xF6},   {"uuml", 0xFC},   {"Auml", 0xC4},  {"Ouml", 0xD6},  {"Uuml", 0xDC},
      {"szlig", 0xDF},  {"eacute", 0xE9}, {"ndash", 0x2013}, {"mdash", 0x2014}, {"shy", 0xAD}};
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '&') {
      const auto semi = text.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const std::string_view name = text.substr(i + 1, semi - i - 1);
        std::optional<unsigned> cp;
        if (!name.empty() && name[0] == '#') {
          unsigned v = 0;
          const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
          const auto digits = name.substr(hex ? 2 : 1);
          auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, hex ? 16 : 10);
          if (ec == std::errc{} && ptr == digits.data() + digits.size() && v > 0 && v < 0x110000) cp = v;
        } else if (auto it = kNamed.find(name); it != kNamed.end()) {
          cp = it->second;
        }
        if (cp) {
          // Non-breaking space behaves like whitespace for text extraction.
          if (*cp == 0xA0) out += ' ';
          else if (*cp != 0xAD) append_utf8(out, *cp);
          i = semi + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

NodeId Document::add_node(Node node, NodeId parent) {
  node.parent = parent;
  nodes_.push_back(std::move(node));
  const NodeId id = nodes_.size() - 1;
  nodes_[parent].children.push_back(id);
  return id;
}

Document Document::parse(std::string_view html) {
  Document doc;
  doc.nodes_.push_back(Node{true, "#document", {}, {}, 0, {}});
  std::vector<NodeId> stack{0};
  std::size_t i = 0;

  auto add_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    doc.add_node(Node{false, {}, {}, decode_entities(raw), 0, {}}, stack.back());
  };

  while (i < html.size()) {
    const auto lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      add_text(html.substr(i));
      break;
    }
    add_text(html.substr(i, lt - i));
    i = lt;
    if (html.substr(i, 4) == "<!--") {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const auto end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    const bool closing = i + 1 < html.size() && html[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < html.size() && is_name_char(html[j])) ++j;
    if (j == name_start) {
      // A stray '<' that does not open a tag is text.
      add_text(html.substr(i, 1));
      ++i;
      continue;
    }
    const std::string tag = lower(html.substr(name_start, j - name_start));

    if (closing) {
      const auto end = html.find('>', j);
      i = end == std::string_view::npos ? html.size() : end + 1;
      // Pop to the matching open element; ignore end tags with no open counterpart.
      for (std::size_t k = stack.size(); k-- > 1;) {
        if (doc.nodes_[stack[k]].tag == tag) {
          stack.resize(k);
          break;
        }
      }
      continue;
    }

    Node element{true, tag, {}, {}, 0, {}};
    bool self_closing = false;
    while (j < html.size()) {
      while (j < html.size() && std::isspace(static_cast<unsigned char>(html[j]))) ++j;
      if (j >= html.size()) break;
      if (html[j] == '>') {
        ++j;
        break;
      }
      if (html[j] == '/') {
        self_closing = true;
        ++j;
        continue;
      }
      const std::size_t an_start = j;
      while (j < html.size() && !std::isspace(static_cast<unsigned char>(html[j])) && html[j] != '=' &&
             html[j] != '>' && html[j] != '/')
        ++j;
      std::string name = lower(html.substr(an_start, j - an_start));
      while (j < html.size() && std::isspace(static_cast<unsigned char>(html[j]))) ++j;
      std::string value;
      if (j < html.size() && html[j] == '=') {
        ++j;
        while (j < html.size() && std::isspace(static_cast<unsigned char>(html[j]))) ++j;
        if (j < html.size() && (html[j] == '"' || html[j] == '\'')) {
          const char q = html[j++];
          const auto close = html.find(q, j);
          const std::size_t stop = close == std::string_view::npos ? html.size() : close;
          value = decode_entities(html.substr(j, stop - j));
          j = stop == html.size() ? stop : stop + 1;
        } else {
          const std::size_t v_start = j;
          while (j < html.size() && !std::isspace(static_cast<unsigned char>(html[j])) && html[j] != '>') ++j;
          value = decode_entities(html.substr(v_start, j - v_start));
        }
      }
      if (!name.empty()) element.attributes.emplace_back(std::move(name), std::move(value));
      else ++j;
    }
    i = j;
    const NodeId id = doc.add_node(std::move(element), stack.back());
    if (tag == "script" || tag == "style") {
      const std::string close_tag = "</" + tag;
      std::size_t k = i;
      std::size_t end = std::string_view::npos;
      while (k < html.size()) {
        const auto pos = html.find("</", k);
        if (pos == std::string_view::npos) break;
        if (lower(html.substr(pos, close_tag.size())) == close_tag) {
          end = pos;
          break;
        }
        k = pos + 2;
      }
      const std::size_t stop = end == std::string_view::npos ? html.size() : end;
      doc.add_node(Node{false, {}, {}, std::string(html.substr(i, stop - i)), 0, {}}, id);
      const auto gt = stop == html.size() ? std::string_view::npos : html.find('>', stop);
      i = gt == std::string_view::npos ? html.size() : gt + 1;
      continue;
    }
    if (!self_closing && !is_void_element(tag)) {
      stack.push_back(id);
    }
  }
  return doc;
}

std::optional<std::string> Document::attribute(NodeId id, std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& [k, v] : nodes_[id].attributes) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::optional<NodeId> Document::parent(NodeId id) const {
  if (id == 0) return std::nullopt;
  return nodes_[id].parent;
}

void Document::collect_text(NodeId id, std::string& out) const {
  const Node& n = nodes_[id];
  if (!n.is_element) {
    out += n.text;
    return;
  }
  if (n.tag == "script" || n.tag == "style") return;
  const bool block = n.tag == "br" || n.tag == "p" || n.tag == "div" || n.tag == "li" || n.tag == "td";
  if (block) out += ' ';
  for (NodeId c : n.children) collect_text(c, out);
  if (block) out += ' ';
}

std::string Document::text(NodeId id) const {
  std::string raw;
  collect_text(id, raw);
  std::string out;
  bool space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

std::vector<NodeId> Document::select(std::string_view selector, NodeId scope) const {
  const auto groups = parse_selector(selector);

  auto matches = [this](NodeId id, const Compound& c) {
    const Node& n = nodes_[id];
    if (!n.is_element || id == 0) return false;
    if (!c.tag.empty() && c.tag != "*" && c.tag != n.tag) return false;
    if (!c.id.empty() && attribute(id, "id").value_or("") != c.id) return false;
    if (!c.classes.empty()) {
      const std::string cls = " " + attribute(id, "class").value_or("") + " ";
      std::string normalized;
      for (char ch : cls) normalized += std::isspace(static_cast<unsigned char>(ch)) ? ' ' : ch;
      for (const auto& want : c.classes) {
        if (normalized.find(" " + want + " ") == std::string::npos) return false;
      }
    }
    for (const auto& [name, value] : c.attributes) {
      const auto have = attribute(id, name);
      if (!have || (value && *have != *value)) return false;
    }
    return true;
  };

  // Right-to-left match of a chain ending at `id`, not climbing above `scope`.
  std::function<bool(NodeId, const Chain&, std::size_t)> matches_chain = [&](NodeId id, const Chain& chain,
                                                                             std::size_t step) -> bool {
    if (!matches(id, chain[step].compound)) return false;
    if (step == 0) return true;
    const bool child_only = chain[step].child_of_previous;
    NodeId cur = id;
    while (cur != scope && cur != 0) {
      cur = nodes_[cur].parent;
      if (cur == scope && scope != 0) {
        // The scope element itself may satisfy the leading compound.
        return matches_chain(cur, chain, step - 1);
      }
      if (matches_chain(cur, chain, step - 1)) return true;
      if (child_only) return false;
    }
    return false;
  };

  std::vector<NodeId> out;
  std::function<void(NodeId)> walk = [&](NodeId id) {
    for (NodeId c : nodes_[id].children) {
      for (const auto& chain : groups) {
        if (matches_chain(c, chain, chain.size() - 1)) {
          out.push_back(c);
          break;
        }
      }
      walk(c);
    }
  };
  walk(scope);
  return out;
}

}  // namespace agecohort::html
