#pragma once

#include <vector>

#include "chexlab/taxonomy.hpp"

namespace chexlab::testfixtures {

// Report sentences with the label the rule path must reproduce for one
// category: the hard negation, coordination, hedging and keyword cases the
// shipped lexicon is calibrated against.
struct RuleCase {
    const char* name;
    const char* text;
    Category category;
    bool positive;
};

inline const std::vector<RuleCase>& rule_cases() {
    static const std::vector<RuleCase> cases = {
        {"coordination-new-conjunct",
         "Worsen aeration in the lungs with no effusion and mild bibasilar atelectasis.",
         Category::Atelectasis, true},
        {"double-negation-resolution",
         "There has been mild improvement but not complete resolution of the pre-existing "
         "pulmonary edema, left pleural effusion with atelectasis, and cardiomegaly.",
         Category::Effusion, true},
        {"resolved-prior-sentence",
         "Improved right pneumothorax which is now small. Resolved right pleural effusion.",
         Category::Effusion, false},
        {"clear-of-disjunction-then-fracture",
         "The lungs are clear of consolidation or effusion. All left posterior 7th rib fracture "
         "is identified. Atherosclerotic calcifications noted at the aortic arch.",
         Category::Fracture, true},
        {"top-normal-heart", "There is top-normal heart size with tiny left pleural effusion.",
         Category::WidenedMediastinalSilhouette, false},
        {"mediastinal-shift", "Marked shift of the mediastinum and trachea to the left.",
         Category::WidenedMediastinalSilhouette, false},

        {"fractured-wires",
         "Three fractured median sternotomy wires. The wire located third from the top has a "
         "fracture fragment oriented posteriorly.",
         Category::Fracture, false},
        {"rib-deformity", "Stable deformity along the right lateral rib cage. No acute findings.",
         Category::Fracture, true},
        {"fibrosis-positive", "Persistent biapical fibrosis without superimposed acute consolidation.",
         Category::LungOpacity, true},
        {"fibrosis-without-consolidation", "Persistent biapical fibrosis without superimposed acute consolidation.",
         Category::Consolidation, false},
        {"calcified-granuloma", "A calcified granuloma projects over the right lateral mid lung.",
         Category::Nodule, true},
        {"cpa-blunting", "Blunting of the right costophrenic angle may be due to overlying soft tissue.",
         Category::PleuralLesion, true},
        {"vascular-congestion", "Compared to prior study, there is increased pulmonary vascular congestion.",
         Category::PulmonaryEdema, true},

        {"no-reaccumulation-disjunction", "No reaccumulation of pleural fluid or development of pneumothorax.",
         Category::Pneumothorax, false},
        {"no-reaccumulation-pleural-fluid", "No reaccumulation of pleural fluid or development of pneumothorax.",
         Category::Effusion, false},
        {"no-definite-focal", "Low lung volumes. No definite focal consolidation identified.",
         Category::Consolidation, false},
        {"without-superimposed", "Severe emphysema without superimposed consolidation.", Category::Consolidation,
         false},
        {"mediastinum-not-widened", "No evidence of pneumonia. The mediastinum is not widened.",
         Category::WidenedMediastinalSilhouette, false},
        {"improved-pneumothorax", "Improved right pneumothorax which is now small.", Category::Pneumothorax, true},
        {"edema-versus",
         "Diffusely increased interstitial markings compatible with interstitial edema versus "
         "chronic changes.",
         Category::PulmonaryEdema, true},
        {"persistent-densities",
         "Improvement of multifocal infiltrates but persistent densities in right middle lobe "
         "and peripheral lingula.",
         Category::LungOpacity, true},
    };
    return cases;
}

// Full-text rows where the rule path must produce exactly this positive set.
struct MappingCase {
    const char* name;
    const char* text;
    std::vector<Category> positives;
};

inline const std::vector<MappingCase>& mapping_cases() {
    static const std::vector<MappingCase> cases = {
        {"pneumonia-unmapped", "Right middle lobe and lingular pneumonia.", {}},
        {"opacity-concerning-for-pneumonia",
         "New retrocardiac opacity concerning for pneumonia in the appropriate clinical setting.",
         {Category::LungOpacity}},
        {"congestion-without-edema", "Vascular congestion without overt edema.", {}},
        {"interval-resolution", "Interval resolution of right pleural effusion.", {}},
    };
    return cases;
}

}  // namespace chexlab::testfixtures
