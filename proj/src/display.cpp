#include "hpst/display.hpp"

#include <sstream>

#include "hpst/errors.hpp"

namespace hpst {

namespace {

constexpr double kCell = 5.0;  // pixels per grid unit (plane axis)
constexpr double kPanelW = 100.0 * kCell;
constexpr double kPanelH = 80.0 * kCell * 0.5;  // transverse squeezed to keep panels wide
constexpr double kMargin = 40.0;
constexpr double kGap = 30.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

void draw_panel(std::ostringstream& svg, const Event& event, int view,
                const std::vector<int>* labels, const DisplaySpec& spec, double ox, double oy,
                const std::string& title) {
    svg << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(kPanelW)
        << "\" height=\"" << fmt(kPanelH) << "\" fill=\"#fcfcfc\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << fmt(ox) << "\" y=\"" << fmt(oy - 6.0)
        << "\" font-family=\"monospace\" font-size=\"14\">" << title << "</text>\n";
    const auto& hits = event.views[view].hits;
    for (size_t k = 0; k < hits.size(); ++k) {
        const int cls = labels ? (*labels)[k] : hits[k].sem_label;
        const double px = ox + hits[k].coord[1] / 100.0 * kPanelW;
        const double py = oy + kPanelH - hits[k].coord[0] / 80.0 * kPanelH;
        svg << "<rect x=\"" << fmt(px - 2.0) << "\" y=\"" << fmt(py - 2.0)
            << "\" width=\"4.00\" height=\"4.00\" fill=\"" << spec.class_colors[cls] << "\"/>\n";
    }
}

}  // namespace

std::string render_event_display(
    const Event& event,
    const std::optional<std::array<std::vector<int>, 2>>& predicted_classes,
    const DisplaySpec& spec) {
    if (spec.show_predicted && !predicted_classes)
        throw ConfigError("predicted classes requested but not provided");
    if (predicted_classes) {
        for (int j = 0; j < 2; ++j)
            if ((*predicted_classes)[j].size() != event.views[j].hits.size())
                throw ShapeMismatch("predicted classes vs hit count");
    }
    const int n_rows = (spec.show_true ? 1 : 0) + (spec.show_predicted ? 1 : 0);
    const double width = 2.0 * kMargin + 2.0 * kPanelW + kGap;
    const double legend_h = 26.0;
    const double height = kMargin + n_rows * (kPanelH + kGap) + legend_h + kMargin;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
        << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
    svg << "<text x=\"" << fmt(kMargin) << "\" y=\"20.00\" font-family=\"monospace\" "
        << "font-size=\"16\">event " << event.event_id << "</text>\n";

    double oy = kMargin + 10.0;
    if (spec.show_true) {
        draw_panel(svg, event, 0, nullptr, spec, kMargin, oy, "XZ (true)");
        draw_panel(svg, event, 1, nullptr, spec, kMargin + kPanelW + kGap, oy, "YZ (true)");
        oy += kPanelH + kGap;
    }
    if (spec.show_predicted) {
        draw_panel(svg, event, 0, &(*predicted_classes)[0], spec, kMargin, oy, "XZ (predicted)");
        draw_panel(svg, event, 1, &(*predicted_classes)[1], spec, kMargin + kPanelW + kGap, oy,
                   "YZ (predicted)");
        oy += kPanelH + kGap;
    }

    double lx = kMargin;
    for (size_t c = 0; c < spec.class_names.size(); ++c) {
        svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(oy) << "\" width=\"12.00\" "
            << "height=\"12.00\" fill=\"" << spec.class_colors[c] << "\"/>\n";
        svg << "<text x=\"" << fmt(lx + 16.0) << "\" y=\"" << fmt(oy + 11.0)
            << "\" font-family=\"monospace\" font-size=\"12\">" << spec.class_names[c]
            << "</text>\n";
        lx += 110.0;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace hpst
