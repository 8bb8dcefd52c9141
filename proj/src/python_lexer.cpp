#include <array>
#include <cctype>
#include <string>

#include "archdelta/python_syntax.hpp"

namespace archdelta::python {

namespace {

bool is_name_start(unsigned char c) {
  return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view text) {
  if (text.size() > 2) return false;
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static constexpr std::array<std::string_view, 8> kPrefixes = {
      "r", "u", "f", "b", "fr", "rf", "br", "rb"};
  for (auto p : kPrefixes) {
    if (p == lower) return true;
  }
  return false;
}

constexpr std::array<std::string_view, 4> kOps3 = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 20> kOps2 = {
    "->", ":=", "!=", "==", "<=", ">=", "**", "//", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "<>"};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:.;=";

class Lexer {
 public:
  Lexer(std::string_view src, std::size_t begin, std::size_t end, int line, bool bracketed)
      : src_(src), pos_(begin), end_(end), line_(line), bracketed_(bracketed) {}

  std::vector<Token> run() {
    if (!bracketed_ && pos_ == 0 && src_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    while (true) {
      if (at_line_start_ && brackets_.empty() && !bracketed_) {
        if (!handle_indentation()) break;
      }
      if (pos_ >= end_) break;
      const unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else if (c == '\\') {
        line_continuation();
      } else if (c == '\n' || c == '\r') {
        newline();
      } else if (is_name_start(c)) {
        name_or_string();
      } else if (std::isdigit(c) != 0 ||
                 (c == '.' && pos_ + 1 < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) != 0)) {
        number();
      } else if (c == '"' || c == '\'') {
        string(pos_);
      } else {
        op();
      }
    }
    if (!brackets_.empty()) {
      throw SyntaxError("unexpected EOF: '" + std::string(1, brackets_.back()) + "' was never closed",
                        line_);
    }
    if (!bracketed_) {
      if (!out_.empty() && out_.back().kind != TokenKind::kNewline &&
          out_.back().kind != TokenKind::kDedent && out_.back().kind != TokenKind::kIndent) {
        emit(TokenKind::kNewline, pos_, pos_);
      }
      while (indents_.size() > 1) {
        indents_.pop_back();
        emit(TokenKind::kDedent, pos_, pos_);
      }
    }
    emit(TokenKind::kEnd, pos_, pos_);
    return std::move(out_);
  }

 private:
  void emit(TokenKind kind, std::size_t begin, std::size_t end, int start_line = -1) {
    Token t;
    t.kind = kind;
    t.begin = begin;
    t.end = end;
    t.text = src_.substr(begin, end - begin);
    t.line = start_line < 0 ? line_ : start_line;
    t.end_line = line_;
    out_.push_back(t);
  }

  // Returns false at end of input.
  bool handle_indentation() {
    // Indentation cannot be split with backslashes: the column of the first
    // continuation-only line wins unless it sits at column zero.
    int continuation_col = 0;
    while (true) {
      int col = 0;
      while (pos_ < end_) {
        const char c = src_[pos_];
        if (c == ' ') {
          ++col;
        } else if (c == '\t') {
          col = (col / 8 + 1) * 8;
        } else if (c == '\f') {
          col = 0;
        } else {
          break;
        }
        ++pos_;
      }
      if (pos_ >= end_) return false;
      const char c = src_[pos_];
      if (c == '#') {
        skip_comment();
        continuation_col = 0;
        continue;
      }
      if (c == '\n' || c == '\r') {
        consume_newline_chars();
        continuation_col = 0;
        continue;
      }
      if (c == '\\' && pos_ + 1 < end_ && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        if (continuation_col == 0) continuation_col = col;
        ++pos_;
        consume_newline_chars();
        continue;
      }
      if (continuation_col != 0) col = continuation_col;
      if (col > indents_.back()) {
        indents_.push_back(col);
        emit(TokenKind::kIndent, pos_, pos_);
      } else {
        while (col < indents_.back()) {
          indents_.pop_back();
          emit(TokenKind::kDedent, pos_, pos_);
        }
        if (col != indents_.back()) {
          throw SyntaxError("unindent does not match any outer indentation level", line_);
        }
      }
      at_line_start_ = false;
      return true;
    }
  }

  void consume_newline_chars() {
    if (src_[pos_] == '\r' && pos_ + 1 < end_ && src_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
    ++line_;
  }

  void skip_comment() {
    while (pos_ < end_ && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
  }

  void line_continuation() {
    ++pos_;
    if (pos_ < end_ && (src_[pos_] == '\n' || src_[pos_] == '\r')) {
      consume_newline_chars();
      if (pos_ >= end_ && !bracketed_) throw SyntaxError("unexpected EOF while parsing", line_);
      return;
    }
    throw SyntaxError("unexpected character after line continuation character", line_);
  }

  void newline() {
    if (!brackets_.empty() || bracketed_) {
      consume_newline_chars();
      return;
    }
    const std::size_t at = pos_;
    emit(TokenKind::kNewline, at, at + 1);
    consume_newline_chars();
    at_line_start_ = true;
  }

  void name_or_string() {
    const std::size_t start = pos_;
    while (pos_ < end_ && is_name_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < end_ && (src_[pos_] == '"' || src_[pos_] == '\'') &&
        is_string_prefix(src_.substr(start, pos_ - start))) {
      string(start);
      return;
    }
    emit(TokenKind::kName, start, pos_);
  }

  void number() {
    const std::size_t start = pos_;
    auto digit_run = [&](auto pred) {
      while (pos_ < end_ && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    };
    auto dec = [](unsigned char c) { return std::isdigit(c) != 0; };
    if (src_[pos_] == '0' && pos_ + 1 < end_ &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      const char radix = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ + 1])));
      pos_ += 2;
      const std::size_t digits = pos_;
      digit_run([radix](unsigned char c) {
        if (radix == 'x') return std::isxdigit(c) != 0;
        if (radix == 'o') return c >= '0' && c <= '7';
        return c == '0' || c == '1';
      });
      if (pos_ == digits) throw SyntaxError("invalid numeric literal", line_);
    } else {
      digit_run(dec);
      if (pos_ < end_ && src_[pos_] == '.') {
        ++pos_;
        digit_run(dec);
      }
      if (pos_ < end_ && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t look = pos_ + 1;
        if (look < end_ && (src_[look] == '+' || src_[look] == '-')) ++look;
        if (look < end_ && std::isdigit(static_cast<unsigned char>(src_[look])) != 0) {
          pos_ = look;
          digit_run(dec);
        }
      }
      if (pos_ < end_ && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
    }
    if (pos_ < end_ && is_name_char(static_cast<unsigned char>(src_[pos_])) &&
        !is_keyword_start(pos_)) {
      throw SyntaxError("invalid decimal literal", line_);
    }
    emit(TokenKind::kNumber, start, pos_);
  }

  // `1if x else 2` and `0or 1` are legal; a number glued to a keyword is fine.
  bool is_keyword_start(std::size_t at) const {
    for (std::string_view kw : {"if", "else", "or", "and", "in", "is", "not", "for"}) {
      if (src_.substr(at, kw.size()) == kw) return true;
    }
    return false;
  }

  void string(std::size_t start) {
    const int start_line = line_;
    const char quote = src_[pos_];
    const bool triple = pos_ + 2 < end_ && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote;
    pos_ += triple ? 3 : 1;
    while (true) {
      if (pos_ >= end_) {
        throw SyntaxError(triple ? "unterminated triple-quoted string literal"
                                 : "unterminated string literal",
                          start_line);
      }
      const char c = src_[pos_];
      if (c == '\\') {
        ++pos_;
        if (pos_ < end_) {
          if (src_[pos_] == '\n' || src_[pos_] == '\r') {
            consume_newline_chars();
          } else {
            ++pos_;
          }
        }
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (!triple) throw SyntaxError("unterminated string literal", start_line);
        consume_newline_chars();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < end_ && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    emit(TokenKind::kString, start, pos_, start_line);
  }

  void op() {
    const std::size_t start = pos_;
    auto rest = src_.substr(pos_, end_ - pos_);
    for (auto o : kOps3) {
      if (rest.starts_with(o)) {
        pos_ += 3;
        emit(TokenKind::kOp, start, pos_);
        return;
      }
    }
    if (rest.starts_with("...")) {
      pos_ += 3;
      emit(TokenKind::kOp, start, pos_);
      return;
    }
    for (auto o : kOps2) {
      if (rest.starts_with(o)) {
        if (o == "<>") break;
        pos_ += 2;
        emit(TokenKind::kOp, start, pos_);
        return;
      }
    }
    const char c = src_[pos_];
    if (kOps1.find(c) == std::string_view::npos) {
      throw SyntaxError(std::string("invalid character '") + c + "'", line_);
    }
    if (c == '(' || c == '[' || c == '{') {
      brackets_.push_back(c);
    } else if (c == ')' || c == ']' || c == '}') {
      const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (brackets_.empty()) {
        throw SyntaxError(std::string("unmatched '") + c + "'", line_);
      }
      if (brackets_.back() != open) {
        throw SyntaxError(std::string("closing parenthesis '") + c +
                              "' does not match opening parenthesis '" + brackets_.back() + "'",
                          line_);
      }
      brackets_.pop_back();
    }
    ++pos_;
    emit(TokenKind::kOp, start, pos_);
  }

  std::string_view src_;
  std::size_t pos_;
  std::size_t end_;
  int line_;
  bool bracketed_;
  bool at_line_start_ = true;
  std::vector<int> indents_{0};
  std::vector<char> brackets_;
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source, std::size_t begin, std::size_t end,
                            int first_line, bool bracketed) {
  return Lexer(source, begin, end, first_line, bracketed).run();
}

std::vector<Token> tokenize(std::string_view source) {
  return tokenize(source, 0, source.size(), 1, false);
}

}  // namespace archdelta::python
