#pragma once

// Sectioned plain-text format shared by instance, reference and experiment
// files:
//
//   # comment
//   [section]
//   key = value            (key/value sections)
//   a, b, c                (table sections: first row is the header)
//
// Blank lines and everything after '#' are ignored.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dietbo::textfmt {

struct Line {
  int number = 0;
  std::string text;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Line> lines;
};

class Document {
 public:
  static Document parse(std::string_view text, std::string source = "<string>");
  static Document load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  const std::vector<Section>& sections() const { return sections_; }
  const Section* find(std::string_view name) const;
  const Section& require(std::string_view name) const;
  /// Throws SchemaError on the first section whose name is not in `allowed`.
  void reject_unknown_sections(std::initializer_list<std::string_view> allowed) const;

 private:
  std::string source_;
  std::vector<Section> sections_;
};

struct Table {
  std::vector<std::string> header;
  int header_line = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;

  /// Column index of `name`, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a table section; every row must have as many cells as the header.
Table as_table(const Section& section, const std::string& source);

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

class KeyValues {
 public:
  KeyValues() = default;
  KeyValues(std::vector<Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  const Entry* find(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  double number(std::string_view key, double fallback) const;
  long integer(std::string_view key, long fallback) const;
  bool boolean(std::string_view key, bool fallback) const;
  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const;
  void reject_unknown(std::initializer_list<std::string_view> allowed) const;
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<Entry> entries_;
  std::string source_;
};

KeyValues as_keyvalues(const Section& section, const std::string& source);

std::vector<std::string> split_csv(std::string_view text);
std::string trim(std::string_view text);

/// Parses a finite or infinite ("inf", "-inf") number; SchemaError otherwise.
double parse_number(std::string_view text, const std::string& source, int line,
                    std::string_view field);
long parse_integer(std::string_view text, const std::string& source, int line,
                   std::string_view field);

}  // namespace dietbo::textfmt
