#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "chexlab/error.hpp"
#include "chexlab/lexicon.hpp"
#include "chexlab/mapper.hpp"
#include "fixtures.hpp"

using namespace chexlab;

namespace {

std::set<Category> positives_of(const LabelVector& v) {
    std::set<Category> out;
    for (Category c : all_categories()) {
        if (v.presence(c) == PresenceLabel::Positive) out.insert(c);
    }
    return out;
}

}  // namespace

TEST_CASE("map_phrase keyword cases") {
    const MappingLexicon& lex = default_lexicon();
    CHECK(map_phrase("calcified granuloma", lex) == std::set<Category>{Category::Nodule});
    CHECK(map_phrase("blunting of the right costophrenic angle", lex) ==
          std::set<Category>{Category::PleuralLesion});
    CHECK(map_phrase("fractured median sternotomy wires", lex).empty());
    CHECK(map_phrase("pneumonia", lex).empty());
    CHECK(map_phrase("stable deformity along the rib cage", lex) ==
          std::set<Category>{Category::Fracture});
    CHECK(map_phrase("pulmonary mass", lex) == std::set<Category>{Category::Nodule});
    CHECK(map_phrase("pleural fluid", lex) == std::set<Category>{Category::Effusion});
    CHECK(map_phrase("pericardial effusion", lex).empty());
    CHECK(map_phrase("bibasilar atelectasis", lex) == std::set<Category>{Category::Atelectasis});
}

TEST_CASE("map_phrase is case-insensitive") {
    const MappingLexicon& lex = default_lexicon();
    for (const char* phrase : {"Calcified GRANULOMA", "PLEURAL EFFUSION", "Rib Deformity"}) {
        std::string lower;
        for (char c : std::string(phrase))
            lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        CHECK(map_phrase(phrase, lex) == map_phrase(lower, lex));
    }
}

TEST_CASE("map_mentions: uncertainty counts as positive, negation never does") {
    const MappingLexicon& lex = default_lexicon();
    std::vector<FindingMention> mentions = {
        {"pleural effusion", ExtendedStatus::Positive, std::nullopt}};
    LabelVector v = map_mentions(mentions, lex, "s1", SectionChoice::Findings);
    CHECK(positives_of(v) == std::set<Category>{Category::Effusion});

    mentions = {{"consolidation", ExtendedStatus::Uncertain, std::nullopt}};
    v = map_mentions(mentions, lex, "s1", SectionChoice::Findings);
    CHECK(positives_of(v) == std::set<Category>{Category::Consolidation});

    mentions = {{"pleural effusion", ExtendedStatus::Negative, std::nullopt}};
    v = map_mentions(mentions, lex, "s1", SectionChoice::Findings);
    CHECK(positives_of(v).empty());
}

TEST_CASE("map_mentions is invariant to mention order") {
    const MappingLexicon& lex = default_lexicon();
    std::vector<FindingMention> a = {
        {"bibasilar atelectasis", ExtendedStatus::Positive, std::nullopt},
        {"small left pleural effusion", ExtendedStatus::Positive, std::nullopt},
        {"granuloma", ExtendedStatus::Uncertain, std::nullopt},
    };
    std::vector<FindingMention> b = {a[2], a[0], a[1]};
    CHECK(map_mentions(a, lex, "s", SectionChoice::Findings) ==
          map_mentions(b, lex, "s", SectionChoice::Findings));
}

TEST_CASE("rule_label reproduces every fixture row") {
    const MappingLexicon& lex = default_lexicon();
    for (const auto& fixture : testfixtures::rule_cases()) {
        CAPTURE(fixture.name);
        LabelVector v = rule_label(fixture.text, lex, "s", SectionChoice::Findings);
        CHECK(v.presence(fixture.category) ==
              (fixture.positive ? PresenceLabel::Positive : PresenceLabel::NotPositive));
    }
    for (const auto& fixture : testfixtures::mapping_cases()) {
        CAPTURE(fixture.name);
        LabelVector v = rule_label(fixture.text, lex, "s", SectionChoice::Findings);
        CHECK(positives_of(v) ==
              std::set<Category>(fixture.positives.begin(), fixture.positives.end()));
    }
}

TEST_CASE("rule_label spec sentences") {
    const MappingLexicon& lex = default_lexicon();
    LabelVector v = rule_label("No reaccumulation of pleural fluid or development of pneumothorax.",
                               lex, "s", SectionChoice::Findings);
    CHECK(v.presence(Category::Pneumothorax) == PresenceLabel::NotPositive);
    CHECK(v.presence(Category::Effusion) == PresenceLabel::NotPositive);

    v = rule_label("Severe emphysema without superimposed consolidation.", lex, "s",
                   SectionChoice::Findings);
    CHECK(v.presence(Category::Consolidation) == PresenceLabel::NotPositive);

    v = rule_label("Retrocardiac opacity, underlying consolidation is difficult to exclude.", lex,
                   "s", SectionChoice::Findings);
    CHECK(v.presence(Category::Consolidation) == PresenceLabel::Positive);
}

TEST_CASE("rule_label four-status statuses") {
    const MappingLexicon& lex = default_lexicon();
    LabelVector v = rule_label_four_status(
        "No pleural effusion. Possible pneumothorax. Granuloma noted.", lex, "s",
        SectionChoice::Findings);
    CHECK(v.status(Category::Effusion) == ExtendedStatus::Negative);
    CHECK(v.status(Category::Pneumothorax) == ExtendedStatus::Uncertain);
    CHECK(v.status(Category::Nodule) == ExtendedStatus::Positive);
    CHECK(v.status(Category::Fracture) == ExtendedStatus::NotMentioned);
}

TEST_CASE("negation scope distributes over coordination onto immediate matches") {
    const MappingLexicon& lex = default_lexicon();
    LabelVector v =
        rule_label("No consolidation and effusion.", lex, "s", SectionChoice::Findings);
    CHECK(v.presence(Category::Consolidation) == PresenceLabel::NotPositive);
    CHECK(v.presence(Category::Effusion) == PresenceLabel::NotPositive);

    // a new modified conjunct starts a fresh assertion
    v = rule_label("No effusion and mild bibasilar atelectasis.", lex, "s", SectionChoice::Findings);
    CHECK(v.presence(Category::Effusion) == PresenceLabel::NotPositive);
    CHECK(v.presence(Category::Atelectasis) == PresenceLabel::Positive);
}

TEST_CASE("negation does not cross sentence boundaries") {
    const MappingLexicon& lex = default_lexicon();
    LabelVector v = rule_label("No effusion. Pneumothorax is present.", lex, "s",
                               SectionChoice::Findings);
    CHECK(v.presence(Category::Effusion) == PresenceLabel::NotPositive);
    CHECK(v.presence(Category::Pneumothorax) == PresenceLabel::Positive);
}

TEST_CASE("rule_label equals map_mentions over extracted mentions without negations") {
    const MappingLexicon& lex = default_lexicon();
    const char* texts[] = {
        "Bibasilar atelectasis and small pleural effusion.",
        "Calcified granuloma. Patchy opacities. Cardiomegaly.",
        "Rib deformity with subcutaneous emphysema.",
    };
    for (const char* text : texts) {
        CAPTURE(text);
        auto mentions = extract_mentions(text, lex);
        LabelVector direct = rule_label(text, lex, "s", SectionChoice::Findings);
        LabelVector mapped = map_mentions(mentions, lex, "s", SectionChoice::Findings);
        CHECK(direct == mapped);
    }
}

TEST_CASE("extract_mentions reports source spans into the section text") {
    const MappingLexicon& lex = default_lexicon();
    std::string text = "There is a calcified granuloma in the left lung.";
    auto mentions = extract_mentions(text, lex);
    REQUIRE(mentions.size() == 1);
    REQUIRE(mentions[0].source_span.has_value());
    auto [b, e] = *mentions[0].source_span;
    CHECK(text.substr(b, e - b) == mentions[0].phrase);
    CHECK(mentions[0].phrase == "granuloma");
}

TEST_CASE("default lexicon loads with all 13 categories populated") {
    const MappingLexicon& lex = default_lexicon();
    for (Category c : all_categories()) {
        CAPTURE(category_key(c));
        CHECK_FALSE(lex.rules(c).include.empty());
    }
    CHECK_FALSE(lex.negation_triggers.empty());
    CHECK_FALSE(lex.uncertainty_triggers.empty());
}

TEST_CASE("shipped lexicon file matches the built-in lexicon") {
    MappingLexicon from_file = load_lexicon(std::string(CHEXLAB_DATA_DIR) + "/lexicon.json");
    CHECK(from_file == default_lexicon());
}

TEST_CASE("lexicon parse errors carry kinds and line numbers") {
    CHECK_THROWS_AS(parse_lexicon("not json"), Error);

    try {
        parse_lexicon(R"({"categories": {"nodule": {"include": [""]}}, "global": {}})");
        FAIL("expected LexiconParse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LexiconParse);
    }

    try {
        parse_lexicon(R"({"categories": {"bogus_category": {"include": ["x"]}}, "global": {}})");
        FAIL("expected LexiconParse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LexiconParse);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }

    try {
        parse_lexicon(R"({"categories": {}, "global": {}, "extra": 1})");
        FAIL("expected LexiconParse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LexiconParse);
    }

    try {
        parse_lexicon(R"({"categories": {"nodule": {"include": ["mass", "mass"]}}, "global": {}})");
        FAIL("expected DuplicatePattern");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicatePattern);
    }

    try {
        parse_lexicon(
            R"({"categories": {"nodule": {"include": ["mass"], "exclude": ["mass"]}}, "global": {}})");
        FAIL("expected DuplicatePattern");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicatePattern);
    }
}

namespace {

MappingLexicon random_lexicon(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_patterns(1, 4);
    std::uniform_int_distribution<int> n_words(1, 2);
    std::uniform_int_distribution<int> word_len(2, 8);
    std::uniform_int_distribution<int> letter(0, 25);
    std::bernoulli_distribution starred(0.3);
    std::bernoulli_distribution with_category(0.7);

    auto make_pattern = [&](std::set<std::string>& used) {
        while (true) {
            std::string p;
            int words = n_words(rng);
            for (int w = 0; w < words; ++w) {
                if (w > 0) p += ' ';
                int len = word_len(rng);
                for (int i = 0; i < len; ++i)
                    p.push_back(static_cast<char>('a' + letter(rng)));
            }
            if (starred(rng)) p += '*';
            if (used.insert(p).second) return p;
        }
    };

    std::ostringstream doc;
    doc << R"({"categories": {)";
    bool first = true;
    for (Category c : all_categories()) {
        if (!with_category(rng)) continue;
        std::set<std::string> used;
        if (!first) doc << ",";
        first = false;
        doc << '"' << category_key(c) << R"(": {"include": [)";
        int n = n_patterns(rng);
        for (int i = 0; i < n; ++i) doc << (i ? "," : "") << '"' << make_pattern(used) << '"';
        doc << R"(], "exclude": [)";
        int m = n_patterns(rng) - 1;
        for (int i = 0; i < m; ++i) doc << (i ? "," : "") << '"' << make_pattern(used) << '"';
        doc << "]}";
    }
    doc << R"(}, "global": {"negation": [)";
    std::set<std::string> used_triggers;
    int n = n_patterns(rng);
    for (int i = 0; i < n; ++i) doc << (i ? "," : "") << '"' << make_pattern(used_triggers) << '"';
    doc << R"(], "uncertainty": [)";
    int m = n_patterns(rng);
    for (int i = 0; i < m; ++i) doc << (i ? "," : "") << '"' << make_pattern(used_triggers) << '"';
    doc << "]}}";
    return parse_lexicon(doc.str());
}

}  // namespace

TEST_CASE("render -> load round-trip identity on 100 randomized lexicons") {
    std::mt19937 rng(1234);
    for (int i = 0; i < 100; ++i) {
        MappingLexicon lex = random_lexicon(rng);
        MappingLexicon back = parse_lexicon(render_lexicon(lex));
        CHECK(back == lex);
    }
}

TEST_CASE("monotonicity: includes only add, excludes only remove") {
    std::mt19937 rng(99);
    const std::vector<std::string> phrases = {
        "calcified granuloma seen", "large pleural effusion",  "rib deformity noted",
        "patchy opacity persists",  "no significant change",   "subcutaneous emphysema",
    };
    for (int trial = 0; trial < 50; ++trial) {
        MappingLexicon base = random_lexicon(rng);
        MappingLexicon grown = base;
        grown.categories[trial % kNumCategories].include.push_back(
            compile_pattern(trial % 2 ? "granuloma" : "effusion"));
        MappingLexicon vetoed = base;
        vetoed.categories[trial % kNumCategories].exclude.push_back(
            compile_pattern(trial % 2 ? "noted" : "large"));
        for (const std::string& phrase : phrases) {
            auto before = map_phrase(phrase, base);
            auto with_include = map_phrase(phrase, grown);
            auto with_exclude = map_phrase(phrase, vetoed);
            for (Category c : before) CHECK(with_include.count(c) == 1);
            for (Category c : with_exclude) CHECK(before.count(c) == 1);
        }
    }
}
