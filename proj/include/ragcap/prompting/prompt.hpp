#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ragcap/core/records.hpp"
#include "ragcap/retrieval/retriever.hpp"

namespace ragcap {

inline constexpr std::string_view kCaptionsLead = "Similar images show: ";
inline constexpr std::string_view kConceptsLead = "This image might contain: ";
inline constexpr std::string_view kTargetLead = "Caption in ";

enum class SegmentSeparator { kSpace, kNewline };

SegmentSeparator parse_segment_separator(std::string_view name);

struct PromptSegment {
  std::size_t offset = 0;
  std::size_t length = 0;  // 0 when the segment is omitted

  bool present() const noexcept { return length != 0; }
  bool operator==(const PromptSegment&) const = default;
};

// The assembled prompt plus byte ranges of its three segments: retrieved
// captions, retrieved concepts, and the target-language cue.
struct PromptString {
  std::string text;
  std::array<PromptSegment, 3> segments;
  SegmentSeparator separator = SegmentSeparator::kSpace;

  std::string_view segment(std::size_t i) const { return std::string_view(text).substr(segments[i].offset, segments[i].length); }
  // Joins the present segments with the separator; equals `text` by construction.
  std::string reconstruct() const;
};

// "Similar images show: c1, ..., cn. This image might contain: w1, ..., wm.
// Caption in <Name>:" with empty segments 1-2 omitted. Items are inserted
// verbatim (only surrounding whitespace trimmed); scaffold words are English.
PromptString assemble_prompt(const PromptSpec& spec, SegmentSeparator sep = SegmentSeparator::kSpace);
PromptString assemble_prompt(const AugmentationBundle& bundle, const LanguageCode& lang,
                             SegmentSeparator sep = SegmentSeparator::kSpace);

std::vector<PromptString> assemble_batch(std::span<const AugmentationBundle> bundles, const LanguageCode& lang,
                                         SegmentSeparator sep = SegmentSeparator::kSpace);

}  // namespace ragcap
