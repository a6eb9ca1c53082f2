#include "dietbo/textfmt.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dietbo/error.hpp"

namespace dietbo::textfmt {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(std::string_view text) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    cells.push_back(trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

Document Document::parse(std::string_view text, std::string source) {
  Document doc;
  doc.source_ = std::move(source);
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view view(raw);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    std::string line = trim(view);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw SchemaError(doc.source_, number, "malformed section header '" + line + "'");
      Section section;
      section.name = trim(std::string_view(line).substr(1, line.size() - 2));
      section.line = number;
      for (const auto& existing : doc.sections_)
        if (existing.name == section.name)
          throw SchemaError(doc.source_, number, "duplicate section [" + section.name + "]");
      doc.sections_.push_back(std::move(section));
      continue;
    }
    if (doc.sections_.empty())
      throw SchemaError(doc.source_, number, "content before the first [section]");
    doc.sections_.back().lines.push_back({number, std::move(line)});
  }
  return doc;
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

const Section* Document::find(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const Section& Document::require(std::string_view name) const {
  if (const auto* s = find(name)) return *s;
  throw SchemaError(source_, 0, "missing section [" + std::string(name) + "]");
}

void Document::reject_unknown_sections(std::initializer_list<std::string_view> allowed) const {
  for (const auto& s : sections_) {
    bool known = false;
    for (auto a : allowed) known = known || a == s.name;
    if (!known) throw SchemaError(source_, s.line, "unknown section [" + s.name + "]");
  }
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

Table as_table(const Section& section, const std::string& source) {
  if (section.lines.empty())
    throw SchemaError(source, section.line, "section [" + section.name + "] has no header row");
  Table table;
  table.header = split_csv(section.lines.front().text);
  table.header_line = section.lines.front().number;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i].empty())
      throw SchemaError(source, table.header_line, "empty column name");
    for (std::size_t j = 0; j < i; ++j)
      if (table.header[i] == table.header[j])
        throw SchemaError(source, table.header_line, "duplicate column '" + table.header[i] + "'");
  }
  for (std::size_t i = 1; i < section.lines.size(); ++i) {
    auto cells = split_csv(section.lines[i].text);
    if (cells.size() != table.header.size())
      throw SchemaError(source, section.lines[i].number,
                        "expected " + std::to_string(table.header.size()) + " cells, found " +
                            std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
    table.row_lines.push_back(section.lines[i].number);
  }
  return table;
}

KeyValues as_keyvalues(const Section& section, const std::string& source) {
  std::vector<Entry> entries;
  for (const auto& line : section.lines) {
    const auto eq = line.text.find('=');
    if (eq == std::string::npos)
      throw SchemaError(source, line.number, "expected 'key = value' in [" + section.name + "]");
    Entry e{trim(std::string_view(line.text).substr(0, eq)),
            trim(std::string_view(line.text).substr(eq + 1)), line.number};
    if (e.key.empty()) throw SchemaError(source, line.number, "empty key");
    for (const auto& prior : entries)
      if (prior.key == e.key) throw SchemaError(source, line.number, "duplicate key '" + e.key + "'");
    entries.push_back(std::move(e));
  }
  return KeyValues(std::move(entries), source);
}

const Entry* KeyValues::find(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
  if (const auto* e = find(key)) return e->value;
  return std::nullopt;
}

double KeyValues::number(std::string_view key, double fallback) const {
  const auto* e = find(key);
  return e ? parse_number(e->value, source_, e->line, key) : fallback;
}

long KeyValues::integer(std::string_view key, long fallback) const {
  const auto* e = find(key);
  return e ? parse_integer(e->value, source_, e->line, key) : fallback;
}

bool KeyValues::boolean(std::string_view key, bool fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  throw SchemaError(source_, e->line, "expected a boolean for '" + std::string(key) + "'");
}

std::vector<double> KeyValues::numbers(std::string_view key, std::vector<double> fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& cell : split_csv(e->value)) out.push_back(parse_number(cell, source_, e->line, key));
  return out;
}

void KeyValues::reject_unknown(std::initializer_list<std::string_view> allowed) const {
  for (const auto& e : entries_) {
    bool known = false;
    for (auto a : allowed) known = known || a == e.key;
    if (!known) throw SchemaError(source_, e.line, "unknown key '" + e.key + "'");
  }
}

double parse_number(std::string_view text, const std::string& source, int line,
                    std::string_view field) {
  const std::string s = trim(text);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw SchemaError(source, line, "field '" + std::string(field) + "': not a number: '" + s + "'");
  return v;
}

long parse_integer(std::string_view text, const std::string& source, int line,
                   std::string_view field) {
  const std::string s = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw SchemaError(source, line, "field '" + std::string(field) + "': not an integer: '" + s + "'");
  return v;
}

}  // namespace dietbo::textfmt
