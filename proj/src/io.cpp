#include "owlaudit/io.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace owlaudit::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// --- TOML subset ---------------------------------------------------------------

namespace {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  nlohmann::json run() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (!at_end()) {
      skip_space_and_comments();
      if (at_end()) break;
      if (peek() == '\n') {
        next_line();
        continue;
      }
      if (peek() == '[') {
        get();
        if (peek() == '[') fail("arrays of tables are not supported");
        auto path = key_path(']');
        expect(']');
        table = &root;
        for (const auto& k : path) {
          nlohmann::json& sub = (*table)[k];
          if (sub.is_null()) sub = nlohmann::json::object();
          if (!sub.is_object()) fail("key '" + k + "' is not a table");
          table = &sub;
        }
      } else {
        auto path = key_path('=');
        expect('=');
        skip_space();
        nlohmann::json value = parse_value();
        nlohmann::json* target = table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          nlohmann::json& sub = (*target)[path[i]];
          if (sub.is_null()) sub = nlohmann::json::object();
          target = &sub;
        }
        if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = std::move(value);
      }
      skip_space_and_comments();
      if (!at_end()) {
        if (peek() != '\n') fail("expected end of line");
        next_line();
      }
    }
    return root;
  }

 private:
  [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const { return at_end() ? '\0' : text_[pos_]; }
  char get() { return text_[pos_++]; }
  void next_line() {
    ++pos_;
    ++line_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("TOML line " + std::to_string(line_) + ": " + msg);
  }
  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void skip_space_and_comments() {
    skip_space();
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }
  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::vector<std::string> key_path(char terminator) {
    std::vector<std::string> path;
    while (true) {
      skip_space();
      std::string key;
      if (peek() == '"') {
        key = basic_string();
      } else {
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
          key += get();
        }
      }
      if (key.empty()) fail("expected a key");
      path.push_back(std::move(key));
      skip_space();
      if (peek() == '.') {
        ++pos_;
        continue;
      }
      if (peek() != terminator) fail(std::string("expected '") + terminator + "' after key");
      return path;
    }
  }

  std::string basic_string() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        char e = get();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  nlohmann::json parse_value() {
    char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') {
      ++pos_;
      std::string out;
      while (!at_end() && peek() != '\'') {
        if (peek() == '\n') fail("unterminated string");
        out += get();
      }
      if (at_end()) fail("unterminated string");
      ++pos_;
      return out;
    }
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      while (true) {
        while (!at_end() && (std::isspace(static_cast<unsigned char>(peek())))) {
          if (peek() == '\n') ++line_;
          ++pos_;
        }
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(parse_value());
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) {
          if (peek() == '\n') ++line_;
          ++pos_;
        }
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    std::string token;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '#') {
      token += get();
    }
    if (token == "true") return true;
    if (token == "false") return false;
    std::string digits;
    for (char d : token) {
      if (d != '_') digits += d;
    }
    if (digits.empty()) fail("expected a value");
    try {
      std::size_t used = 0;
      if (digits.find_first_of(".eE") == std::string::npos) {
        long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      } else {
        double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + token + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlReader(text).run(); }

nlohmann::json read_config(const std::filesystem::path& path) {
  std::string text = read_file(path);
  if (path.extension() == ".toml") return parse_toml(text);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace owlaudit::io
