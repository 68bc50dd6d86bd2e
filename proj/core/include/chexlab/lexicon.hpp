#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chexlab/pattern.hpp"
#include "chexlab/taxonomy.hpp"

namespace chexlab {

struct CategoryRules {
    std::vector<TokenPattern> include;
    std::vector<TokenPattern> exclude;

    bool operator==(const CategoryRules&) const = default;
};

// The rule table mapping finding phrases to categories. Include patterns
// assert a category, exclude patterns veto it within the same phrase or
// sentence, and the global trigger lists drive negation and uncertainty
// detection in the rule labeler. Immutable after load.
struct MappingLexicon {
    std::array<CategoryRules, kNumCategories> categories;
    std::vector<TokenPattern> negation_triggers;
    std::vector<TokenPattern> uncertainty_triggers;

    const CategoryRules& rules(Category c) const { return categories[static_cast<int>(c)]; }

    bool operator==(const MappingLexicon&) const = default;
};

// Lexicon file: one JSON document with top-level keys "categories" (map from
// canonical snake_case category name to {"include": [...], "exclude": [...]})
// and "global" ({"negation": [...], "uncertainty": [...]}). Unknown keys are
// rejected. Parse errors carry a line number; duplicate patterns (within a
// list, or an include repeated as an exclude of the same category) raise
// DuplicatePattern.
MappingLexicon parse_lexicon(std::string_view text);
MappingLexicon load_lexicon(const std::filesystem::path& path);
std::string render_lexicon(const MappingLexicon& lexicon);

// The lexicon shipped with the toolkit (same content as data/lexicon.json).
const MappingLexicon& default_lexicon();
std::string_view builtin_lexicon_text();

}  // namespace chexlab
