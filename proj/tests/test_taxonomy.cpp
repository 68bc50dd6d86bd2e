#include <doctest.h>

#include <sstream>

#include "chexlab/error.hpp"
#include "chexlab/taxonomy.hpp"

using namespace chexlab;

TEST_CASE("category order is fixed and round-trips through keys and names") {
    REQUIRE(all_categories().size() == 13);
    CHECK(static_cast<int>(Category::Atelectasis) == 0);
    CHECK(static_cast<int>(Category::WidenedMediastinalSilhouette) == 12);
    for (Category c : all_categories()) {
        CHECK(category_from_key(category_key(c)) == c);
        CHECK(category_from_name(category_name(c)) == c);
    }
    CHECK(category_from_name("lung opacity") == Category::LungOpacity);
    CHECK(category_from_name("Lung_Opacity") == Category::LungOpacity);
    CHECK_FALSE(category_from_name("Pneumonia").has_value());
}

TEST_CASE("comparison subset is the 13 minus the three extra categories") {
    auto ten = comparison_subset_10();
    REQUIRE(ten.size() == 10);
    for (Category c : ten) {
        CHECK(c != Category::Hyperinflation);
        CHECK(c != Category::SubcutaneousEmphysema);
        CHECK(c != Category::SubdiaphragmaticGas);
    }
}

TEST_CASE("merge_uncertain applies the policy per category") {
    LabelVector v = LabelVector::four_status("s1", SectionChoice::Findings);
    v.set(Category::Consolidation, ExtendedStatus::Uncertain);
    v.set(Category::Effusion, ExtendedStatus::Positive);
    v.set(Category::Nodule, ExtendedStatus::Negative);

    LabelVector merged = merge_uncertain(v, UncertainPolicy::MergeUncertainAsPositive);
    CHECK(merged.presence(Category::Consolidation) == PresenceLabel::Positive);
    CHECK(merged.presence(Category::Effusion) == PresenceLabel::Positive);
    CHECK(merged.presence(Category::Nodule) == PresenceLabel::NotPositive);
    CHECK(merged.presence(Category::Fracture) == PresenceLabel::NotPositive);

    LabelVector strict = merge_uncertain(v, UncertainPolicy::PositiveOnly);
    CHECK(strict.presence(Category::Consolidation) == PresenceLabel::NotPositive);
    CHECK(strict.presence(Category::Effusion) == PresenceLabel::Positive);

    CHECK_THROWS_AS(merge_uncertain(merged, UncertainPolicy::PositiveOnly), Error);
}

TEST_CASE("merge policy dominance: merge is elementwise >= positive-only") {
    for (int mask = 0; mask < 4 * 4; ++mask) {
        LabelVector v = LabelVector::four_status("s", SectionChoice::Findings);
        v.set(Category::Atelectasis, static_cast<ExtendedStatus>(mask % 4));
        v.set(Category::Effusion, static_cast<ExtendedStatus>(mask / 4));
        LabelVector merge = merge_uncertain(v, UncertainPolicy::MergeUncertainAsPositive);
        LabelVector strict = merge_uncertain(v, UncertainPolicy::PositiveOnly);
        for (Category c : all_categories()) {
            CHECK(static_cast<int>(merge.presence(c)) >= static_cast<int>(strict.presence(c)));
        }
    }
}

TEST_CASE("no_abnormality is true only for the all-negative vector") {
    LabelVector v = LabelVector::binary("s1", SectionChoice::Impression);
    CHECK(no_abnormality(v));
    v.set(Category::Fracture, PresenceLabel::Positive);
    CHECK_FALSE(no_abnormality(v));
    LabelVector f = LabelVector::four_status("s1", SectionChoice::Impression);
    CHECK_THROWS_AS(no_abnormality(f), Error);
}

TEST_CASE("label csv round-trips in both schemes") {
    LabelTable t;
    t.scheme = LabelScheme::Binary;
    LabelVector v = LabelVector::binary("s1", SectionChoice::Findings);
    v.set(Category::Effusion, PresenceLabel::Positive);
    t.rows.push_back(v);
    LabelVector w = LabelVector::binary("s2", SectionChoice::Impression);
    t.rows.push_back(w);

    std::ostringstream out;
    write_label_csv(out, t);
    std::istringstream in(out.str());
    LabelTable back = read_label_csv(in);
    CHECK(back.scheme == LabelScheme::Binary);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0] == t.rows[0]);
    CHECK(back.rows[1] == t.rows[1]);

    LabelTable f;
    f.scheme = LabelScheme::FourStatus;
    LabelVector fv = LabelVector::four_status("s9", SectionChoice::Findings);
    fv.set(Category::Nodule, ExtendedStatus::Uncertain);
    fv.set(Category::Effusion, ExtendedStatus::Negative);
    f.rows.push_back(fv);
    std::ostringstream fout;
    write_label_csv(fout, f);
    std::istringstream fin(fout.str());
    LabelTable fback = read_label_csv(fin);
    CHECK(fback.scheme == LabelScheme::FourStatus);
    CHECK(fback.rows[0] == f.rows[0]);
}

TEST_CASE("label csv rejects wrong headers and bad cells") {
    std::istringstream bad_header("study,section,whatever\n");
    CHECK_THROWS_AS(read_label_csv(bad_header), Error);

    std::string header =
        "study_id,section,atelectasis,consolidation,effusion,fracture,hyperinflation,lung_opacity,"
        "nodule,pleural_lesion,pneumothorax,pulmonary_edema,subcutaneous_emphysema,"
        "subdiaphragmatic_gas,widened_mediastinal_silhouette";
    std::istringstream bad_cell(header + "\ns1,findings,2,0,0,0,0,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_label_csv(bad_cell), Error);
    std::istringstream bad_section(header + "\ns1,middle,1,0,0,0,0,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_label_csv(bad_section), Error);
}

TEST_CASE("chexpert-scheme ingestion maps the matched pairs") {
    std::string csv =
        "study_id,Atelectasis,Cardiomegaly,Enlarged Cardiomediastinum,Pleural Effusion,"
        "Pleural Other,Lung Lesion,Edema,No Finding,Support Devices\n"
        "s1,1.0,0.0,-1.0,1.0,,1.0,-1.0,,1.0\n"
        "s2,,1.0,,0.0,-1.0,,,1.0,\n";
    std::istringstream in(csv);
    LabelTable t = read_chexpert_csv(in, SectionChoice::Findings);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.scheme == LabelScheme::FourStatus);

    const LabelVector& s1 = t.rows[0];
    CHECK(s1.status(Category::Atelectasis) == ExtendedStatus::Positive);
    // Cardiomegaly negative + Enlarged Cardiomediastinum uncertain -> uncertain wins
    CHECK(s1.status(Category::WidenedMediastinalSilhouette) == ExtendedStatus::Uncertain);
    CHECK(s1.status(Category::Effusion) == ExtendedStatus::Positive);
    CHECK(s1.status(Category::PleuralLesion) == ExtendedStatus::NotMentioned);
    CHECK(s1.status(Category::Nodule) == ExtendedStatus::Positive);
    CHECK(s1.status(Category::PulmonaryEdema) == ExtendedStatus::Uncertain);
    // categories absent from the file stay not-mentioned
    CHECK(s1.status(Category::Fracture) == ExtendedStatus::NotMentioned);

    const LabelVector& s2 = t.rows[1];
    CHECK(s2.status(Category::WidenedMediastinalSilhouette) == ExtendedStatus::Positive);
    CHECK(s2.status(Category::Effusion) == ExtendedStatus::Negative);
    CHECK(s2.status(Category::PleuralLesion) == ExtendedStatus::Uncertain);
}
