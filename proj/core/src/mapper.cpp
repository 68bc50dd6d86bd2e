#include "chexlab/mapper.hpp"

#include <algorithm>

#include "chexlab/text.hpp"

namespace chexlab {

namespace {

// Tokens between a cancelled double negation, e.g. "not complete resolution".
constexpr std::size_t kDoubleNegationGap = 3;

bool is_contrast_word(std::string_view token) {
    return token == "but" || token == "however" || token == "although" || token == "though" ||
           token == "except" || token == "yet";
}

struct TriggerHit {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last token
};

std::vector<TriggerHit> find_triggers(std::span<const TokenPattern> triggers,
                                      std::span<const Token> tokens) {
    std::vector<TriggerHit> hits;
    for (const TokenPattern& trigger : triggers) {
        std::size_t from = 0;
        while (auto at = find_pattern(trigger, tokens, from)) {
            hits.push_back(TriggerHit{*at, *at + trigger.words.size()});
            from = *at + 1;
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const TriggerHit& a, const TriggerHit& b) { return a.begin < b.begin; });
    return hits;
}

bool include_match_starts_at(const MappingLexicon& lexicon, std::span<const Token> tokens,
                             std::size_t at) {
    for (Category c : all_categories()) {
        for (const TokenPattern& p : lexicon.rules(c).include) {
            if (pattern_matches_at(p, tokens, at)) return true;
        }
    }
    return false;
}

struct IncludeHit {
    Category category;
    std::size_t begin;
    std::size_t end;
};

}  // namespace

std::set<Category> map_phrase(std::string_view phrase, const MappingLexicon& lexicon) {
    auto tokens = tokenize(phrase);
    std::set<Category> out;
    for (Category c : all_categories()) {
        const CategoryRules& rules = lexicon.rules(c);
        bool included = std::any_of(rules.include.begin(), rules.include.end(),
                                    [&](const TokenPattern& p) {
                                        return pattern_matches_anywhere(p, tokens);
                                    });
        if (!included) continue;
        bool vetoed = std::any_of(rules.exclude.begin(), rules.exclude.end(),
                                  [&](const TokenPattern& p) {
                                      return pattern_matches_anywhere(p, tokens);
                                  });
        if (!vetoed) out.insert(c);
    }
    return out;
}

LabelVector map_mentions(std::span<const FindingMention> mentions, const MappingLexicon& lexicon,
                         std::string study_id, SectionChoice section) {
    LabelVector v = LabelVector::binary(std::move(study_id), section);
    for (const FindingMention& m : mentions) {
        if (m.status != ExtendedStatus::Positive && m.status != ExtendedStatus::Uncertain)
            continue;
        for (Category c : map_phrase(m.phrase, lexicon)) v.set(c, PresenceLabel::Positive);
    }
    return v;
}

std::vector<LexiconMatch> analyze_text(std::string_view section_text,
                                       const MappingLexicon& lexicon) {
    std::vector<LexiconMatch> out;
    auto all_tokens = tokenize(section_text);

    for (auto [sent_begin, sent_end] : split_sentences(section_text)) {
        // Tokens of this sentence: spans never straddle a boundary char.
        std::size_t first = 0;
        while (first < all_tokens.size() && all_tokens[first].begin < sent_begin) ++first;
        std::size_t last = first;
        while (last < all_tokens.size() && all_tokens[last].begin < sent_end) ++last;
        if (first == last) continue;
        std::span<const Token> tokens(all_tokens.data() + first, last - first);

        // Double negations cancel pairwise: "not complete resolution of X"
        // asserts X.
        auto negations = find_triggers(lexicon.negation_triggers, tokens);
        std::vector<bool> active(negations.size(), true);
        for (std::size_t i = 1; i < negations.size(); ++i) {
            if (!active[i]) continue;
            for (std::size_t j = 0; j < i; ++j) {
                if (!active[j] || negations[j].end > negations[i].begin) continue;
                if (negations[i].begin - negations[j].end <= kDoubleNegationGap) {
                    active[i] = active[j] = false;
                    break;
                }
            }
        }

        std::vector<bool> negated(tokens.size(), false);
        for (std::size_t i = 0; i < negations.size(); ++i) {
            if (!active[i]) continue;
            for (std::size_t k = negations[i].end; k < tokens.size(); ++k) {
                const std::string& word = tokens[k].text;
                if (is_contrast_word(word)) break;
                if (word == "and" && !include_match_starts_at(lexicon, tokens, k + 1)) break;
                negated[k] = true;
            }
        }

        bool uncertain_sentence =
            !find_triggers(lexicon.uncertainty_triggers, tokens).empty();

        // Include matches, deduplicated per (category, start), longest wins.
        std::vector<IncludeHit> hits;
        for (Category c : all_categories()) {
            const CategoryRules& rules = lexicon.rules(c);
            bool vetoed = std::any_of(rules.exclude.begin(), rules.exclude.end(),
                                      [&](const TokenPattern& p) {
                                          return pattern_matches_anywhere(p, tokens);
                                      });
            if (vetoed) continue;
            for (const TokenPattern& p : rules.include) {
                std::size_t from = 0;
                while (auto at = find_pattern(p, tokens, from)) {
                    std::size_t end = *at + p.words.size();
                    auto dup = std::find_if(hits.begin(), hits.end(), [&](const IncludeHit& h) {
                        return h.category == c && h.begin == *at;
                    });
                    if (dup == hits.end()) {
                        hits.push_back(IncludeHit{c, *at, end});
                    } else {
                        dup->end = std::max(dup->end, end);
                    }
                    from = *at + 1;
                }
            }
        }
        std::sort(hits.begin(), hits.end(), [](const IncludeHit& a, const IncludeHit& b) {
            return a.begin != b.begin ? a.begin < b.begin
                                      : static_cast<int>(a.category) < static_cast<int>(b.category);
        });

        for (const IncludeHit& h : hits) {
            ExtendedStatus status = ExtendedStatus::Positive;
            if (negated[h.begin]) {
                status = ExtendedStatus::Negative;
            } else if (uncertain_sentence) {
                status = ExtendedStatus::Uncertain;
            }
            out.push_back(LexiconMatch{h.category, status, first + h.begin, first + h.end,
                                       tokens[h.begin].begin, tokens[h.end - 1].end});
        }
    }
    return out;
}

std::vector<FindingMention> extract_mentions(std::string_view section_text,
                                             const MappingLexicon& lexicon) {
    std::vector<FindingMention> mentions;
    for (const LexiconMatch& m : analyze_text(section_text, lexicon)) {
        if (m.status != ExtendedStatus::Positive && m.status != ExtendedStatus::Uncertain)
            continue;
        mentions.push_back(FindingMention{
            std::string(section_text.substr(m.byte_begin, m.byte_end - m.byte_begin)),
            m.status,
            std::pair{m.byte_begin, m.byte_end}});
    }
    return mentions;
}

LabelVector rule_label(std::string_view section_text, const MappingLexicon& lexicon,
                       std::string study_id, SectionChoice section) {
    LabelVector v = LabelVector::binary(std::move(study_id), section);
    for (const LexiconMatch& m : analyze_text(section_text, lexicon)) {
        if (m.status == ExtendedStatus::Positive || m.status == ExtendedStatus::Uncertain)
            v.set(m.category, PresenceLabel::Positive);
    }
    return v;
}

LabelVector rule_label_four_status(std::string_view section_text, const MappingLexicon& lexicon,
                                   std::string study_id, SectionChoice section) {
    LabelVector v = LabelVector::four_status(std::move(study_id), section);
    auto rank = [](ExtendedStatus s) {
        switch (s) {
            case ExtendedStatus::Positive: return 3;
            case ExtendedStatus::Uncertain: return 2;
            case ExtendedStatus::Negative: return 1;
            case ExtendedStatus::NotMentioned: return 0;
        }
        return 0;
    };
    for (const LexiconMatch& m : analyze_text(section_text, lexicon)) {
        if (rank(m.status) > rank(v.status(m.category))) v.set(m.category, m.status);
    }
    return v;
}

}  // namespace chexlab
