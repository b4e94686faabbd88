#pragma once

#include "semplace/errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace semplace::csv {

struct Row
{
  std::size_t line = 0; // 1-based, header is line 1
  std::vector<std::string> fields;
};

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split(std::string_view text, std::size_t line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError(line, "unterminated quoted field");
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string quote_if_needed(std::string_view field)
{
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

/// Reads a CSV file whose first line must equal the expected header. Blank
/// lines are skipped; every row must have as many fields as the header.
inline std::vector<Row> read(const std::string& path,
                             const std::vector<std::string>& expected_header)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::vector<Row> rows;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') {
      text.pop_back();
    }
    if (line == 1 && text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      text.erase(0, 3);
    }
    if (!have_header) {
      auto header = split(text, line);
      if (header != expected_header) {
        std::string want;
        for (std::size_t i = 0; i < expected_header.size(); ++i) {
          want += (i ? "," : "") + expected_header[i];
        }
        throw ParseError(line, "expected header '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (text.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    auto fields = split(text, line);
    if (fields.size() != expected_header.size()) {
      throw ParseError(line, "expected " + std::to_string(expected_header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({ line, std::move(fields) });
  }
  if (!have_header) {
    throw ParseError(1, "missing header");
  }
  return rows;
}

inline double parse_double(std::string_view s, std::size_t line, std::string_view what)
{
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "invalid number for " + std::string(what) + ": '" +
                             std::string(s) + "'");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view s, std::size_t line, std::string_view what)
{
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "invalid integer for " + std::string(what) + ": '" +
                             std::string(s) + "'");
  }
  return v;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace semplace::csv
