#pragma once

// Line-oriented tokenizer shared by the two DSL parsers. Blocks are formed by
// indentation (bodies indented at least two spaces under their header); blank
// lines and '#' comments are skipped.

#include <cctype>
#include <string>
#include <vector>

#include "fclverify/errors.hpp"

namespace fclv::dsl {

struct Token {
  enum class Kind { Ident, Number, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;   // identifier name, punct spelling, or string contents
  bool is_real = false;  // Number only
  std::int64_t int_value = 0;
  double real_value = 0.0;
  int line = 0;
  int col = 0;
};

struct Line {
  int number = 0;
  int indent = 0;
  std::vector<Token> tokens;
};

inline std::vector<Line> tokenize_lines(const std::string& text) {
  std::vector<Line> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string raw = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    Line line;
    line.number = line_no;
    std::size_t i = 0;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
      line.indent += raw[i] == '\t' ? 4 : 1;
      ++i;
    }
    while (i < raw.size()) {
      char c = raw[i];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '#') break;  // comment to end of line
      Token t;
      t.line = line_no;
      t.col = static_cast<int>(i) + 1;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < raw.size() &&
               (std::isalnum(static_cast<unsigned char>(raw[j])) || raw[j] == '_')) {
          ++j;
        }
        t.kind = Token::Kind::Ident;
        t.text = raw.substr(i, j - i);
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        bool real = false;
        while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
        if (j + 1 < raw.size() && raw[j] == '.' &&
            std::isdigit(static_cast<unsigned char>(raw[j + 1]))) {
          real = true;
          ++j;
          while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
        }
        t.kind = Token::Kind::Number;
        t.text = raw.substr(i, j - i);
        t.is_real = real;
        if (real) {
          t.real_value = std::stod(t.text);
        } else {
          t.int_value = std::stoll(t.text);
        }
        i = j;
      } else if (c == '"' || c == '\'') {
        const char quote = c;
        std::size_t j = i + 1;
        std::string value;
        bool closed = false;
        while (j < raw.size()) {
          if (raw[j] == '\\' && j + 1 < raw.size()) {
            value += raw[j + 1];
            j += 2;
            continue;
          }
          if (raw[j] == quote) {
            closed = true;
            ++j;
            break;
          }
          value += raw[j];
          ++j;
        }
        if (!closed) {
          throw ParseError("unterminated string", line_no, static_cast<int>(i) + 1,
                           std::string(1, quote));
        }
        t.kind = Token::Kind::String;
        t.text = std::move(value);
        i = j;
      } else {
        // multi-char operators first
        static const char* two[] = {"==", "!=", "<=", ">="};
        std::string p(1, c);
        if (i + 1 < raw.size()) {
          std::string pair = raw.substr(i, 2);
          for (const char* op : two) {
            if (pair == op) {
              p = pair;
              break;
            }
          }
        }
        t.kind = Token::Kind::Punct;
        t.text = p;
        i += p.size();
      }
      line.tokens.push_back(std::move(t));
    }
    if (!line.tokens.empty()) out.push_back(std::move(line));
    if (eol == text.size()) break;
  }
  return out;
}

/// Cursor over one line's tokens.
class Cursor {
 public:
  explicit Cursor(const Line& line) : line_(&line) {}

  const Token& peek() const {
    static const Token end{};
    return i_ < line_->tokens.size() ? line_->tokens[i_] : end;
  }
  const Token& next() {
    const Token& t = peek();
    if (t.kind != Token::Kind::End) ++i_;
    return t;
  }
  bool at_end() const { return i_ >= line_->tokens.size(); }

  bool accept_punct(const std::string& p) {
    if (peek().kind == Token::Kind::Punct && peek().text == p) {
      ++i_;
      return true;
    }
    return false;
  }
  bool accept_ident(const std::string& name) {
    if (peek().kind == Token::Kind::Ident && peek().text == name) {
      ++i_;
      return true;
    }
    return false;
  }
  Token expect_punct(const std::string& p) {
    if (peek().kind == Token::Kind::Punct && peek().text == p) return line_->tokens[i_++];
    fail("'" + p + "'");
  }
  Token expect_ident() {
    if (peek().kind == Token::Kind::Ident) return line_->tokens[i_++];
    fail("identifier");
  }
  Token expect_string() {
    if (peek().kind == Token::Kind::String) return line_->tokens[i_++];
    fail("quoted string");
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    const int line = t.kind == Token::Kind::End ? line_->number : t.line;
    const int col = t.kind == Token::Kind::End
                        ? (line_->tokens.empty() ? 1
                                                 : line_->tokens.back().col +
                                                       static_cast<int>(line_->tokens.back().text.size()))
                        : t.col;
    const std::string got = t.kind == Token::Kind::End ? "end of line" : "'" + t.text + "'";
    throw ParseError("unexpected " + got, line, col, expected);
  }

 private:
  const Line* line_;
  std::size_t i_ = 0;
};

}  // namespace fclv::dsl
