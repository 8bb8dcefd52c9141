#pragma once

// Recursive-descent checker for the DOT language grammar (graph, stmt_list,
// node/edge/attr statements, subgraphs, quoted and HTML IDs). Collects the
// node and edge statements it sees so tests can compare counts.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace archdelta::testkit {

struct DotGraph {
  bool directed = false;
  std::string name;
  std::set<std::string> nodes;  // declared by node statements
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::string, std::map<std::string, std::string>> node_attrs;
};

class DotChecker {
 public:
  explicit DotChecker(std::string_view text) : s_(text) {}

  // The parsed graph, or nullopt with error() describing the first problem.
  std::optional<DotGraph> parse() {
    try {
      DotGraph g;
      skip();
      if (keyword("strict")) skip();
      if (keyword("digraph")) {
        g.directed = true;
      } else if (!keyword("graph")) {
        fail("expected graph or digraph");
      }
      skip();
      if (peek() != '{') g.name = id();
      expect('{');
      stmt_list(g);
      expect('}');
      skip();
      if (pos_ != s_.size()) fail("trailing content");
      return g;
    } catch (const std::string& message) {
      error_ = message;
      return std::nullopt;
    }
  }

  const std::string& error() const { return error_; }

 private:
  [[noreturn]] void fail(const std::string& what) { throw what + " at offset " + std::to_string(pos_); }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (s_.substr(pos_, 2) == "//" || (c == '#' && (pos_ == 0 || s_[pos_ - 1] == '\n'))) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (s_.substr(pos_, 2) == "/*") {
        const auto end = s_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 2;
      } else {
        break;
      }
    }
  }

  bool keyword(std::string_view word) {
    if (s_.size() - pos_ < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(s_[pos_ + i])) != word[i]) return false;
    }
    const std::size_t after = pos_ + word.size();
    if (after < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[after])) || s_[after] == '_')) return false;
    pos_ = after;
    return true;
  }

  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
    skip();
  }

  bool at_id_start() const {
    const auto c = static_cast<unsigned char>(peek());
    return std::isalpha(c) || c == '_' || c >= 0x80 || std::isdigit(c) || c == '-' || c == '.' || c == '"' ||
           c == '<';
  }

  std::string id() {
    skip();
    std::string out;
    const auto c = static_cast<unsigned char>(peek());
    if (c == '"') {
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated string");
        const char ch = s_[pos_++];
        if (ch == '"') break;
        if (ch == '\\' && pos_ < s_.size()) {
          const char next = s_[pos_++];
          if (next != '"') out += '\\';
          out += next;
          continue;
        }
        out += ch;
      }
      skip();
      // '+' concatenation of quoted strings
      while (peek() == '+') {
        ++pos_;
        skip();
        if (peek() != '"') fail("expected string after '+'");
        out += id();
      }
    } else if (c == '<') {
      int depth = 0;
      do {
        if (pos_ >= s_.size()) fail("unterminated HTML string");
        const char ch = s_[pos_++];
        depth += ch == '<' ? 1 : ch == '>' ? -1 : 0;
        out += ch;
      } while (depth > 0);
    } else if (std::isalpha(c) || c == '_' || c >= 0x80) {
      while (pos_ < s_.size()) {
        const auto ch = static_cast<unsigned char>(s_[pos_]);
        if (!(std::isalnum(ch) || ch == '_' || ch >= 0x80)) break;
        out += static_cast<char>(ch);
        ++pos_;
      }
    } else if (std::isdigit(c) || c == '-' || c == '.') {
      if (peek() == '-') out += s_[pos_++];
      bool digits = false;
      bool dot = false;
      while (pos_ < s_.size()) {
        const char ch = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
          digits = true;
        } else if (ch == '.' && !dot) {
          dot = true;
        } else {
          break;
        }
        out += ch;
        ++pos_;
      }
      if (!digits) fail("bad numeral");
    } else {
      fail("expected ID");
    }
    skip();
    return out;
  }

  std::map<std::string, std::string> attr_lists() {
    std::map<std::string, std::string> attrs;
    skip();
    if (peek() != '[') fail("expected '['");
    while (peek() == '[') {
      expect('[');
      while (peek() != ']') {
        const auto key = id();
        std::string value;
        if (peek() == '=') {
          expect('=');
          value = id();
        }
        attrs[key] = value;
        skip();
        if (peek() == ';' || peek() == ',') expect(peek());
      }
      expect(']');
    }
    return attrs;
  }

  // node_id : ID [ ':' ID [ ':' ID ] ]
  std::string node_id() {
    auto name = id();
    for (int i = 0; i < 2 && peek() == ':'; ++i) {
      expect(':');
      id();
    }
    return name;
  }

  std::vector<std::string> subgraph(DotGraph& g) {
    if (keyword("subgraph")) {
      skip();
      if (peek() != '{') id();
    }
    const auto before = g.nodes;
    expect('{');
    stmt_list(g);
    expect('}');
    std::vector<std::string> members;
    for (const auto& n : g.nodes) {
      if (before.count(n) == 0) members.push_back(n);
    }
    return members;
  }

  bool edge_op(const DotGraph& g) {
    skip();
    if (s_.substr(pos_, 2) == "->") {
      if (!g.directed) fail("'->' in undirected graph");
      pos_ += 2;
      return true;
    }
    if (s_.substr(pos_, 2) == "--") {
      if (g.directed) fail("'--' in directed graph");
      pos_ += 2;
      return true;
    }
    return false;
  }

  void stmt_list(DotGraph& g) {
    skip();
    while (peek() != '}' && pos_ < s_.size()) {
      stmt(g);
      skip();
      if (peek() == ';') expect(';');
    }
  }

  void stmt(DotGraph& g) {
    skip();
    const auto save = pos_;
    if (keyword("graph") || keyword("node") || keyword("edge")) {
      attr_lists();
      return;
    }
    pos_ = save;
    std::vector<std::string> left;
    if (peek() == '{' || keyword("subgraph")) {
      pos_ = save;
      left = subgraph(g);
    } else {
      if (!at_id_start()) fail("expected statement");
      const auto name = node_id();
      if (peek() == '=') {
        expect('=');
        id();
        return;
      }
      left = {name};
    }
    bool is_edge = false;
    while (edge_op(g)) {
      is_edge = true;
      skip();
      std::vector<std::string> right;
      if (peek() == '{' || keyword("subgraph")) {
        right = subgraph(g);
      } else {
        right = {node_id()};
      }
      for (const auto& a : left) {
        for (const auto& b : right) g.edges.emplace_back(a, b);
      }
      left = right;
    }
    std::map<std::string, std::string> attrs;
    if (peek() == '[') attrs = attr_lists();
    if (!is_edge && left.size() == 1 && save != pos_) {
      g.nodes.insert(left.front());
      auto& slot = g.node_attrs[left.front()];
      for (const auto& [k, v] : attrs) slot[k] = v;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string error_;
};

}  // namespace archdelta::testkit
