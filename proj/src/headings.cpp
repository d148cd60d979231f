#include "sectra/headings.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "sectra/text.hpp"

namespace sectra {

const char* label_name(SectionLabel label) {
  switch (label) {
    case SectionLabel::Background: return "Background";
    case SectionLabel::Method: return "Method";
    case SectionLabel::Result: return "Result";
    case SectionLabel::Conclusion: return "Conclusion";
    case SectionLabel::Unmapped: return "Unmapped";
  }
  return "Unmapped";
}

SectionLabel parse_label(std::string_view name) {
  for (SectionLabel label : kLabelOrder) {
    if (name == label_name(label)) return label;
  }
  throw std::invalid_argument("unknown section label: " + std::string(name));
}

namespace {

bool is_roman_run(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    switch (c) {
      case 'i': case 'v': case 'x': case 'l': case 'c': case 'd': case 'm':
        break;
      default:
        return false;
    }
  }
  return true;
}

bool is_digit_run(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// Enumeration tokens: "3", "iv", "b" -- a digit run, a roman-numeral run,
// or a single letter. Only recognized when immediately followed by one of
// '.', ')' or ':'.
bool is_enumeration_token(std::string_view token) {
  if (is_digit_run(token)) return true;
  if (is_roman_run(token)) return true;
  return token.size() == 1 && std::isalpha(static_cast<unsigned char>(token[0]));
}

}  // namespace

std::string canonicalize_heading(std::string_view raw) {
  std::string s(raw);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  // Strip leading enumeration tokens, one per loop iteration:
  // "iv) 2. results" -> "results".
  std::size_t pos = 0;
  for (;;) {
    std::size_t start = pos;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    std::size_t end = start;
    while (end < s.size() && std::isalnum(static_cast<unsigned char>(s[end]))) ++end;
    if (end == start || end >= s.size()) break;
    char punct = s[end];
    if (punct != '.' && punct != ')' && punct != ':') break;
    if (!is_enumeration_token(std::string_view(s).substr(start, end - start))) break;
    pos = end + 1;
  }

  // Remaining punctuation becomes a word break; whitespace collapses.
  std::string out;
  bool pending_break = false;
  for (std::size_t i = pos; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isalnum(c)) {
      if (pending_break && !out.empty()) out += ' ';
      pending_break = false;
      out += static_cast<char>(c);
    } else {
      pending_break = true;
    }
  }
  return out;
}

SectionLabel map_heading(const std::string& canonical, const HeadingMap& map) {
  auto it = map.entries.find(canonical);
  return it == map.entries.end() ? SectionLabel::Unmapped : it->second;
}

HeadingMap load_heading_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HeadingMapError("heading map: cannot open " + path);

  HeadingMap map;
  map.source = path;

  // canonical heading -> categories seen for it, for conflict reporting.
  std::map<std::string, std::map<SectionLabel, std::vector<std::string>>> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw HeadingMapError("heading map: " + path + ":" + std::to_string(line_no) +
                            ": expected raw_heading<TAB>category");
    }
    std::string raw = trim(line.substr(0, tab));
    std::string category = trim(line.substr(tab + 1));
    if (raw.empty()) {
      throw HeadingMapError("heading map: " + path + ":" + std::to_string(line_no) +
                            ": empty heading");
    }

    SectionLabel label;
    if (category == "Objective") {
      // Objective entries are folded into Background: the scheme keeps four
      // terminal labels.
      label = SectionLabel::Background;
    } else {
      try {
        label = parse_label(category);
      } catch (const std::invalid_argument&) {
        throw HeadingMapError("heading map: " + path + ":" + std::to_string(line_no) +
                              ": unknown category '" + category + "'");
      }
    }

    std::string canonical = canonicalize_heading(raw);
    if (canonical.empty()) {
      throw HeadingMapError("heading map: " + path + ":" + std::to_string(line_no) +
                            ": heading '" + raw + "' canonicalizes to nothing");
    }
    seen[canonical][label].push_back(raw);
  }

  // Duplicate rows agreeing on the category are fine; conflicts fail the
  // whole load, and the ordered `seen` map keeps the report independent of
  // row order.
  std::string conflicts;
  for (const auto& [canonical, by_label] : seen) {
    if (by_label.size() > 1) {
      std::ostringstream os;
      os << "  '" << canonical << "':";
      for (const auto& [label, raws] : by_label) {
        os << " " << label_name(label) << "(";
        for (std::size_t i = 0; i < raws.size(); ++i) os << (i ? ", " : "") << raws[i];
        os << ")";
      }
      os << "\n";
      conflicts += os.str();
    } else {
      map.entries.emplace(canonical, by_label.begin()->first);
    }
  }
  if (!conflicts.empty()) {
    throw HeadingMapError("heading map: " + path + ": conflicting entries:\n" + conflicts);
  }
  return map;
}

}  // namespace sectra
