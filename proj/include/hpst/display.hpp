#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hpst/event.hpp"

namespace hpst {

struct DisplaySpec {
    uint64_t event_id = 0;
    bool show_true = true;
    bool show_predicted = false;  // requires predicted classes
    std::vector<std::string> class_colors = {"#1f77b4", "#d62728", "#2ca02c",
                                             "#ff7f0e", "#9467bd", "#7f7f7f"};
    std::vector<std::string> class_names = {"electron", "muon", "proton",
                                            "pion", "photon", "other"};
};

// Two side-by-side panels (XZ, YZ) per label row, hits as squares colored by
// class, plus a legend. Output bytes are deterministic for fixed input.
std::string render_event_display(
    const Event& event,
    const std::optional<std::array<std::vector<int>, 2>>& predicted_classes,
    const DisplaySpec& spec);

}  // namespace hpst
