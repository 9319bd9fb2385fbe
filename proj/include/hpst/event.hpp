#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hpst {

// Grid extent shared by both detector views: 80 transverse cells x 100 planes.
inline constexpr double kTransverseCells = 80.0;
inline constexpr double kPlanes = 100.0;
inline constexpr int kDefaultClasses = 6;
inline constexpr int kDefaultInstanceSlots = 8;

// Semantic class ids: 0 electron, 1 muon, 2 proton, 3 pion, 4 photon, 5 other.

struct Hit {
    std::array<double, 2> coord;  // (transverse cell, plane), grid units
    double value = 0.0;           // deposited-energy surrogate, >= 0
    int sem_label = 0;            // class id in [0, C)
    int ins_label = 0;            // prong id in [0, p_max)
};

struct View {
    int view_id = 0;  // 0 = XZ (top), 1 = YZ (side)
    std::vector<Hit> hits;
};

struct Event {
    uint64_t event_id = 0;
    std::array<View, 2> views;

    // 1 + max instance id over both views; 0 for a hitless event.
    int n_instances() const;
    size_t total_hits() const { return views[0].hits.size() + views[1].hits.size(); }
};

struct DatasetHeader {
    uint64_t n_events = 0;
    int n_classes = kDefaultClasses;
    int p_max = kDefaultInstanceSlots;
    std::array<int, 2> grid_shape = {80, 100};
    int format_version = 1;
};

struct Violation {
    std::string kind;      // e.g. "OutOfGrid", "NonContiguousInstances"
    std::string location;  // "view 0 hit 3" etc.
    std::string detail;
};

std::vector<Violation> validate_event(const Event& event,
                                      int n_classes = kDefaultClasses,
                                      int p_max = kDefaultInstanceSlots);

struct Dataset {
    DatasetHeader header;
    std::vector<Event> events;
};

Dataset read_events(const std::string& path);
void write_events(const std::vector<Event>& events, const DatasetHeader& header,
                  const std::string& path);

// Dense (2, 80, 100) array, row-major; values at a cell are summed.
std::vector<double> densify(const Event& event);
inline size_t dense_index(int view, int x, int z) {
    return (static_cast<size_t>(view) * 80 + x) * 100 + z;
}

}  // namespace hpst
