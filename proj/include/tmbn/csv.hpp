#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmbn/errors.hpp"

namespace tmbn::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. CRLF and LF are both accepted; a final
/// line break is optional. Blank lines are skipped.
inline std::vector<Record> parse(std::string_view text) {
  std::vector<Record> out;
  Record cur;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_open = false;
  std::size_t line = 1;
  cur.line = 1;
  std::size_t quote_line = 1;

  auto end_field = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    if (record_open) {
      end_field();
      out.push_back(std::move(cur));
    }
    cur = Record{};
    record_open = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (!record_open && ch != '\n' && ch != '\r') {
      record_open = true;
      cur.line = line;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_quoted) throw ParseError("stray quote inside unquoted field", line);
        in_quotes = true;
        field_quoted = true;
        quote_line = line;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_quoted) throw ParseError("text after closing quote", line);
        field.push_back(ch);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", quote_line);
  end_record();
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Quotes a field only when it needs it.
inline std::string escape(std::string_view v) {
  if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << escape(fields[i]);
  }
  os << '\n';
}

}  // namespace tmbn::csv
