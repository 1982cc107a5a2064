#include "irk/json_locations.hpp"

#include <cctype>

namespace irk {

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::map<std::string, int> run() {
    skip_ws();
    value("", line_);
    return std::move(lines_);
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void advance() {
    if (at_end()) return;
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
      advance();
    }
  }

  // Reads a string literal starting at '"'; returns false on malformed input.
  bool string(std::string* out) {
    if (peek() != '"') return false;
    advance();
    while (!at_end() && peek() != '"') {
      if (peek() == '\\') {
        advance();
        if (at_end()) return false;
        const char esc = peek();
        advance();
        if (!out) continue;
        switch (esc) {
          case 'n': *out += '\n'; break;
          case 't': *out += '\t'; break;
          case 'r': *out += '\r'; break;
          case 'b': *out += '\b'; break;
          case 'f': *out += '\f'; break;
          case 'u': {
            // Keys are only used for lookup; non-ASCII escapes are kept raw.
            std::string hex;
            for (int k = 0; k < 4 && !at_end(); ++k) {
              hex += peek();
              advance();
            }
            const unsigned long code = std::stoul(hex.empty() ? "0" : hex, nullptr, 16);
            if (code < 0x80) {
              *out += static_cast<char>(code);
            } else {
              *out += "\\u" + hex;
            }
            break;
          }
          default: *out += esc; break;
        }
      } else {
        if (out) *out += peek();
        advance();
      }
    }
    if (at_end()) return false;
    advance();
    return true;
  }

  bool value(const std::string& path, int line) {
    lines_.emplace(path, line);
    switch (peek()) {
      case '{': return object(path);
      case '[': return array(path);
      case '"': return string(nullptr);
      default: {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-' ||
                             peek() == '+' || peek() == '.')) {
          advance();
        }
        return pos_ > start;
      }
    }
  }

  bool object(const std::string& path) {
    advance();
    skip_ws();
    if (peek() == '}') {
      advance();
      return true;
    }
    while (true) {
      skip_ws();
      const int key_line = line_;
      std::string key;
      if (!string(&key)) return false;
      skip_ws();
      if (peek() != ':') return false;
      advance();
      skip_ws();
      if (!value(path + "/" + json_pointer_escape(key), key_line)) return false;
      skip_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == '}') {
        advance();
        return true;
      }
      return false;
    }
  }

  bool array(const std::string& path) {
    advance();
    skip_ws();
    if (peek() == ']') {
      advance();
      return true;
    }
    for (std::size_t index = 0;; ++index) {
      skip_ws();
      if (!value(path + "/" + std::to_string(index), line_)) return false;
      skip_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == ']') {
        advance();
        return true;
      }
      return false;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

}  // namespace

std::map<std::string, int> json_value_lines(std::string_view text) {
  return Scanner(text).run();
}

int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  const std::size_t end = offset < text.size() ? offset : text.size();
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

std::string json_pointer_escape(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace irk
