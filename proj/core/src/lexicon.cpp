#include "chexlab/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chexlab/error.hpp"

namespace chexlab {

namespace {

using ordered_json = nlohmann::ordered_json;

// Shipped rule table. data/lexicon.json carries the same document; a test
// keeps them in sync. The load-bearing entries: "deformity" counts as
// fracture unless wires/catheters/hardware are in play, "granuloma" and
// "mass" are nodules, CPA "blunting" is a pleural lesion, "fibrosis" is a
// lung opacity, and "pulmonary vascular congestion" (the full term, not bare
// "vascular congestion") reads as pulmonary edema. "pneumonia" is a
// diagnosis, not one of the 13 findings, and stays unmapped. "emphysema" ->
// hyperinflation is a default, not a paper-verified mapping.
constexpr std::string_view kBuiltinLexicon = R"json({
  "categories": {
    "atelectasis": {
      "include": ["atelecta*"],
      "exclude": []
    },
    "consolidation": {
      "include": ["consolidat*"],
      "exclude": []
    },
    "effusion": {
      "include": ["effusion*", "pleural fluid"],
      "exclude": ["pericardial"]
    },
    "fracture": {
      "include": ["fractur*", "deformit*"],
      "exclude": ["wire*", "catheter*", "hardware"]
    },
    "hyperinflation": {
      "include": ["hyperinflat*", "hyperexpan*", "emphysema"],
      "exclude": ["subcutaneous"]
    },
    "lung_opacity": {
      "include": ["opacit*", "opacificat*", "fibros*", "infiltrat*", "densit*"],
      "exclude": []
    },
    "nodule": {
      "include": ["nodul*", "mass", "masses", "granuloma*"],
      "exclude": []
    },
    "pleural_lesion": {
      "include": ["pleural thickening", "pleural lesion*", "pleural plaque*", "blunting", "pleural scarring"],
      "exclude": []
    },
    "pneumothorax": {
      "include": ["pneumothora*"],
      "exclude": []
    },
    "pulmonary_edema": {
      "include": ["edema*", "pulmonary vascular congestion"],
      "exclude": []
    },
    "subcutaneous_emphysema": {
      "include": ["subcutaneous emphysema", "subcutaneous air", "subcutaneous gas"],
      "exclude": []
    },
    "subdiaphragmatic_gas": {
      "include": ["subdiaphragmatic gas", "subdiaphragmatic air", "subdiaphragmatic free air", "free air under the diaphragm", "free gas under the diaphragm", "free air below the diaphragm", "pneumoperitoneum"],
      "exclude": []
    },
    "widened_mediastinal_silhouette": {
      "include": ["cardiomegaly", "widen*", "enlarged cardiac silhouette", "enlarged cardiomediastinum", "cardiac enlargement", "enlarged heart"],
      "exclude": ["top-normal", "shift of the mediastinum"]
    }
  },
  "global": {
    "negation": ["no", "not", "without", "clear of", "free of", "resolved", "resolution of", "negative for"],
    "uncertainty": ["cannot be excluded", "cannot exclude", "may", "possible", "possibly", "suggest*", "concerning for", "concern for", "versus", "difficult to exclude", "not excluded", "probable", "probably", "question of"]
  }
})json";

std::size_t line_of(std::string_view text, std::size_t byte_pos) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<long>(byte_pos), '\n'));
}

// Best-effort line lookup for semantic errors: first occurrence of the
// quoted literal.
std::string at_line(std::string_view text, const std::string& literal) {
    auto pos = text.find("\"" + literal + "\"");
    if (pos == std::string_view::npos) return "";
    return " (line " + std::to_string(line_of(text, pos)) + ")";
}

void reject_unknown_keys(const ordered_json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where, std::string_view text) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            raise(ErrorKind::LexiconParse, "unknown key '" + key + "' in " + std::string(where) +
                                               at_line(text, key));
        }
    }
}

std::vector<TokenPattern> parse_pattern_list(const ordered_json& arr, std::string_view where,
                                             std::string_view text) {
    if (!arr.is_array())
        raise(ErrorKind::LexiconParse, std::string(where) + " must be an array of strings");
    std::vector<TokenPattern> out;
    for (const auto& item : arr) {
        if (!item.is_string())
            raise(ErrorKind::LexiconParse, std::string(where) + " entries must be strings");
        std::string raw = item.get<std::string>();
        TokenPattern p;
        try {
            p = compile_pattern(raw);
        } catch (const Error&) {
            raise(ErrorKind::LexiconParse,
                  "empty pattern in " + std::string(where) + at_line(text, raw));
        }
        auto dup = std::find_if(out.begin(), out.end(),
                                [&](const TokenPattern& q) { return q.words == p.words; });
        if (dup != out.end())
            raise(ErrorKind::DuplicatePattern,
                  "pattern '" + raw + "' repeated in " + std::string(where) + at_line(text, raw));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

MappingLexicon parse_lexicon(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        raise(ErrorKind::LexiconParse,
              "invalid JSON (line " + std::to_string(line_of(text, std::min(e.byte, text.size()))) +
                  "): " + e.what());
    }
    if (!doc.is_object())
        raise(ErrorKind::LexiconParse, "lexicon document must be a JSON object");
    reject_unknown_keys(doc, {"categories", "global"}, "lexicon", text);
    if (!doc.contains("categories") || !doc.contains("global"))
        raise(ErrorKind::LexiconParse, "lexicon needs top-level 'categories' and 'global' keys");

    MappingLexicon lex;
    const ordered_json& cats = doc["categories"];
    if (!cats.is_object())
        raise(ErrorKind::LexiconParse, "'categories' must be an object");
    for (const auto& [name, rules] : cats.items()) {
        auto cat = category_from_key(name);
        if (!cat)
            raise(ErrorKind::LexiconParse, "unknown category '" + name + "'" + at_line(text, name));
        if (!rules.is_object())
            raise(ErrorKind::LexiconParse, "category '" + name + "' must map to an object");
        reject_unknown_keys(rules, {"include", "exclude"}, "category '" + name + "'", text);
        CategoryRules& dest = lex.categories[static_cast<int>(*cat)];
        if (rules.contains("include"))
            dest.include = parse_pattern_list(rules["include"], name + ".include", text);
        if (rules.contains("exclude"))
            dest.exclude = parse_pattern_list(rules["exclude"], name + ".exclude", text);
        for (const TokenPattern& inc : dest.include) {
            auto hit = std::find_if(dest.exclude.begin(), dest.exclude.end(),
                                    [&](const TokenPattern& exc) { return exc.words == inc.words; });
            if (hit != dest.exclude.end())
                raise(ErrorKind::DuplicatePattern, "pattern '" + inc.source + "' is both include and exclude of '" +
                                                       name + "'" + at_line(text, inc.source));
        }
    }

    const ordered_json& global = doc["global"];
    if (!global.is_object())
        raise(ErrorKind::LexiconParse, "'global' must be an object");
    reject_unknown_keys(global, {"negation", "uncertainty"}, "global", text);
    if (global.contains("negation"))
        lex.negation_triggers = parse_pattern_list(global["negation"], "global.negation", text);
    if (global.contains("uncertainty"))
        lex.uncertainty_triggers =
            parse_pattern_list(global["uncertainty"], "global.uncertainty", text);
    return lex;
}

MappingLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open lexicon file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

std::string render_lexicon(const MappingLexicon& lexicon) {
    ordered_json cats = ordered_json::object();
    for (Category c : all_categories()) {
        const CategoryRules& rules = lexicon.rules(c);
        ordered_json entry;
        entry["include"] = ordered_json::array();
        entry["exclude"] = ordered_json::array();
        for (const TokenPattern& p : rules.include) entry["include"].push_back(p.source);
        for (const TokenPattern& p : rules.exclude) entry["exclude"].push_back(p.source);
        cats[std::string(category_key(c))] = std::move(entry);
    }
    ordered_json global;
    global["negation"] = ordered_json::array();
    global["uncertainty"] = ordered_json::array();
    for (const TokenPattern& p : lexicon.negation_triggers) global["negation"].push_back(p.source);
    for (const TokenPattern& p : lexicon.uncertainty_triggers)
        global["uncertainty"].push_back(p.source);

    ordered_json doc;
    doc["categories"] = std::move(cats);
    doc["global"] = std::move(global);
    return doc.dump(2) + "\n";
}

const MappingLexicon& default_lexicon() {
    static const MappingLexicon lex = parse_lexicon(kBuiltinLexicon);
    return lex;
}

std::string_view builtin_lexicon_text() { return kBuiltinLexicon; }

}  // namespace chexlab
