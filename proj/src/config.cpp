#include "contactdyn/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "contactdyn/io.hpp"

namespace contactdyn::config {

ParseError::ParseError(std::size_t l, std::size_t c, const std::string& message)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + message),
      line(l),
      column(c) {}

namespace {

using json = nlohmann::json;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        assign(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  std::size_t column() const { return pos_ - line_start_ + 1; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, column(), msg); }

  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') advance();
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  // whitespace, comments and newlines inside arrays
  void skip_any() {
    while (!eof()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected character '") + peek() + "'");
    advance();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string key_part() {
    skip_spaces();
    if (peek() == '"') return string_literal();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && bare_char(peek())) {
      k += peek();
      advance();
    }
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_spaces();
    while (peek() == '.') {
      advance();
      parts.push_back(key_part());
      skip_spaces();
    }
    return parts;
  }

  json& descend(json& root, const std::vector<std::string>& path, std::size_t upto) {
    json* cur = &root;
    for (std::size_t i = 0; i < upto; ++i) {
      json& next = (*cur)[path[i]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("key '" + path[i] + "' is already a value, not a table");
      cur = &next;
    }
    return *cur;
  }

  json& open_table(json& root) {
    advance();  // '['
    if (peek() == '[') fail("arrays of tables are not supported");
    const auto path = dotted_key();
    skip_spaces();
    if (peek() != ']') fail("expected ']' to close the table header");
    advance();
    return descend(root, path, path.size());
  }

  void assign(json& table) {
    const std::size_t key_col = column();
    const auto path = dotted_key();
    skip_spaces();
    if (peek() != '=') fail("expected '=' after key");
    advance();
    skip_spaces();
    json v = value();
    json& parent = descend(table, path, path.size() - 1);
    if (parent.contains(path.back())) {
      throw ParseError(line_, key_col, "duplicate key '" + path.back() + "'");
    }
    parent[path.back()] = std::move(v);
  }

  std::string string_literal() {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = peek();
        advance();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  // 'single quoted': no escapes
  std::string literal_string() {
    advance();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = peek();
      advance();
      if (c == '\'') return out;
      out += c;
    }
  }

  json value() {
    const char c = peek();
    if (c == '"') return string_literal();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (s_.compare(pos_, 4, "true") == 0 && !bare_char(pos_ + 4 < s_.size() ? s_[pos_ + 4] : ' ')) {
      for (int i = 0; i < 4; ++i) advance();
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0 && !bare_char(pos_ + 5 < s_.size() ? s_[pos_ + 5] : ' ')) {
      for (int i = 0; i < 5; ++i) advance();
      return false;
    }
    return number();
  }

  json array() {
    advance();  // '['
    json arr = json::array();
    skip_any();
    if (peek() == ']') {
      advance();
      return arr;
    }
    while (true) {
      skip_any();
      if (eof()) fail("unterminated array");
      arr.push_back(value());
      skip_any();
      if (peek() == ',') {
        advance();
        skip_any();
        if (peek() == ']') {
          advance();
          return arr;
        }
        continue;
      }
      if (peek() == ']') {
        advance();
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json number() {
    const std::size_t start = pos_;
    const std::size_t col = column();
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                      peek() == '-' || peek() == '_')) {
      if (peek() != '_') tok += peek();
      advance();
    }
    if (tok.empty()) throw ParseError(line_, col, "expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (*b == '+') ++b;
    if (!is_float) {
      long long v = 0;
      auto r = std::from_chars(b, e, v);
      if (r.ec == std::errc() && r.ptr == e) return v;
    } else {
      double v = 0.0;
      auto r = std::from_chars(b, e, v);
      if (r.ec == std::errc() && r.ptr == e) return v;
    }
    (void)start;
    throw ParseError(line_, col, "invalid value '" + tok + "'");
  }
};

}  // namespace

nlohmann::json parse(const std::string& text) { return Parser(text).run(); }

nlohmann::json parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string canonical(const nlohmann::json& tree) { return tree.dump(); }

std::uint64_t hash(const nlohmann::json& tree) { return io::fnv1a64(canonical(tree)); }

}  // namespace contactdyn::config
