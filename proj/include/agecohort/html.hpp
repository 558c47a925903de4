#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agecohort::html {

using NodeId = std::size_t;

// Lenient HTML tree: unknown or mismatched end tags are tolerated, void elements
// never take children, and <script>/<style> bodies are kept as raw text.
class Document {
 public:
  static Document parse(std::string_view html);

  NodeId root() const { return 0; }
  bool is_element(NodeId id) const { return nodes_[id].is_element; }
  const std::string& tag(NodeId id) const { return nodes_[id].tag; }
  std::optional<std::string> attribute(NodeId id, std::string_view name) const;
  const std::vector<NodeId>& children(NodeId id) const { return nodes_[id].children; }
  std::optional<NodeId> parent(NodeId id) const;

  // Descendant text with whitespace collapsed and trimmed.
  std::string text(NodeId id) const;

  // CSS subset: type, #id, .class, [attr], [attr=value], descendant (" ") and child (">")
  // combinators, and "," groups. Matches are returned in document order.
  std::vector<NodeId> select(std::string_view selector, NodeId scope = 0) const;

 private:
  struct Node {
    bool is_element = false;
    std::string tag;  // lowercase for elements
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;  // text nodes only
    NodeId parent = 0;
    std::vector<NodeId> children;
  };

  NodeId add_node(Node node, NodeId parent);
  void collect_text(NodeId id, std::string& out) const;

  std::vector<Node> nodes_;
};

std::string decode_entities(std::string_view text);

}  // namespace agecohort::html
