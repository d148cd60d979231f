#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace sectra {

// Structural function of a chapter. The declaration order of the four
// terminal labels is the canonical order used for tie-breaking, summary
// assembly and confusion-matrix axes. Unmapped is a pre-classification
// state only and never appears as a terminal label.
enum class SectionLabel : int {
  Background = 0,
  Method = 1,
  Result = 2,
  Conclusion = 3,
  Unmapped = 4,
};

inline constexpr int kNumLabels = 4;

inline constexpr std::array<SectionLabel, kNumLabels> kLabelOrder = {
    SectionLabel::Background,
    SectionLabel::Method,
    SectionLabel::Result,
    SectionLabel::Conclusion,
};

const char* label_name(SectionLabel label);

// Parses "Background"/"Method"/"Result"/"Conclusion" (exact case);
// throws std::invalid_argument for anything else.
SectionLabel parse_label(std::string_view name);

struct HeadingMapError : std::runtime_error {
  explicit HeadingMapError(const std::string& what) : std::runtime_error(what) {}
};

// Exact-match lookup table over canonicalized headings.
struct HeadingMap {
  std::unordered_map<std::string, SectionLabel> entries;
  std::string source;  // provenance: where the table was loaded from

  std::size_t size() const { return entries.size(); }
};

// Canonical heading form: lowercase, leading enumeration tokens stripped
// (runs of digits, roman-numeral letters, or a single letter, each followed
// by '.', ')' or ':'), punctuation removed, whitespace collapsed, trimmed.
// Idempotent: canonicalize(canonicalize(x)) == canonicalize(x).
std::string canonicalize_heading(std::string_view raw);

// Exact lookup of an already-canonicalized heading; misses return
// SectionLabel::Unmapped.
SectionLabel map_heading(const std::string& canonical, const HeadingMap& map);

// Loads a TSV of `raw_heading<TAB>category` rows. Categories are
// Background, Objective, Method, Result and Conclusion; Objective rows are
// folded into Background at load time. Lines starting with '#' and blank
// lines are skipped. Rows whose canonical forms collide with conflicting
// categories make the load fail with every conflict listed.
HeadingMap load_heading_map(const std::string& path);

}  // namespace sectra
