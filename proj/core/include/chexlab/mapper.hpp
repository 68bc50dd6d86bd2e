#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chexlab/lexicon.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

// A phrase the LLM (or the rule labeler) extracted, with its status and,
// when known, the byte span in the section text it came from.
struct FindingMention {
    std::string phrase;
    ExtendedStatus status = ExtendedStatus::Positive;
    std::optional<std::pair<std::size_t, std::size_t>> source_span;
};

// Categories whose include patterns match the phrase and whose exclude
// patterns don't. Unknown phrases legally map to the empty set.
std::set<Category> map_phrase(std::string_view phrase, const MappingLexicon& lexicon);

// Binary vector over one (study, section): a category is Positive iff some
// Positive or Uncertain mention maps to it. Hedged findings count as
// positive; negated ones never do.
LabelVector map_mentions(std::span<const FindingMention> mentions, const MappingLexicon& lexicon,
                         std::string study_id, SectionChoice section);

// One lexicon match inside the section text, with negation/uncertainty
// already resolved.
struct LexiconMatch {
    Category category = Category::Atelectasis;
    ExtendedStatus status = ExtendedStatus::Positive;
    std::size_t token_begin = 0;
    std::size_t token_end = 0;
    std::size_t byte_begin = 0;
    std::size_t byte_end = 0;
};

// Core sentence analysis: sentence-scoped matching with forward negation.
// A match is Negative when an active negation trigger precedes it in the
// same sentence; the scope runs to the sentence end, passes through "or"
// coordination, continues through "and" only onto an immediate further
// match, and stops at contrast words ("but", "however", ...). A negation
// trigger directly preceded (within 3 tokens) by another one is a double
// negation and both are dropped. A sentence-level uncertainty trigger makes
// remaining matches Uncertain; uncertainty never suppresses positivity.
// Exclude patterns veto their category within the sentence.
std::vector<LexiconMatch> analyze_text(std::string_view section_text,
                                       const MappingLexicon& lexicon);

// Positive/Uncertain matches as mentions (phrase = matched text span).
std::vector<FindingMention> extract_mentions(std::string_view section_text,
                                             const MappingLexicon& lexicon);

// Offline rule baseline: Positive iff a non-negated match exists.
LabelVector rule_label(std::string_view section_text, const MappingLexicon& lexicon,
                       std::string study_id, SectionChoice section);

// Four-status variant; per category the strongest match wins
// (Positive > Uncertain > Negative > NotMentioned).
LabelVector rule_label_four_status(std::string_view section_text, const MappingLexicon& lexicon,
                                   std::string study_id, SectionChoice section);

}  // namespace chexlab
