#include "hpst/event.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "hpst/errors.hpp"
#include "json.hpp"

namespace hpst {

using ordered_json = nlohmann::ordered_json;

int Event::n_instances() const {
    int max_id = -1;
    for (const auto& view : views)
        for (const auto& hit : view.hits) max_id = std::max(max_id, hit.ins_label);
    return max_id + 1;
}

std::vector<Violation> validate_event(const Event& event, int n_classes, int p_max) {
    std::vector<Violation> out;
    auto loc = [](int v, size_t k) { return "view " + std::to_string(v) + " hit " + std::to_string(k); };
    for (int v = 0; v < 2; ++v) {
        if (event.views[v].view_id != v)
            out.push_back({"ViewIdMismatch", "view " + std::to_string(v),
                           "view_id is " + std::to_string(event.views[v].view_id)});
        const auto& hits = event.views[v].hits;
        for (size_t k = 0; k < hits.size(); ++k) {
            const Hit& h = hits[k];
            if (!std::isfinite(h.coord[0]) || !std::isfinite(h.coord[1]))
                out.push_back({"NonFiniteCoord", loc(v, k), ""});
            else {
                if (h.coord[0] < 0.0 || h.coord[0] >= kTransverseCells)
                    out.push_back({"OutOfGrid", loc(v, k),
                                   "transverse " + std::to_string(h.coord[0])});
                if (h.coord[1] < 0.0 || h.coord[1] >= kPlanes)
                    out.push_back({"OutOfGrid", loc(v, k), "plane " + std::to_string(h.coord[1])});
            }
            if (!std::isfinite(h.value) || h.value < 0.0)
                out.push_back({"BadValue", loc(v, k), std::to_string(h.value)});
            if (h.sem_label < 0 || h.sem_label >= n_classes)
                out.push_back({"SemLabelOutOfRange", loc(v, k), std::to_string(h.sem_label)});
            if (h.ins_label < 0 || h.ins_label >= p_max)
                out.push_back({"InsLabelOutOfRange", loc(v, k), std::to_string(h.ins_label)});
        }
    }
    std::set<int> ids;
    for (const auto& view : event.views)
        for (const auto& hit : view.hits)
            if (hit.ins_label >= 0) ids.insert(hit.ins_label);
    if (!ids.empty()) {
        int expect = 0;
        for (int id : ids) {
            if (id != expect) {
                out.push_back({"NonContiguousInstances", "event",
                               "missing instance id " + std::to_string(expect)});
                break;
            }
            ++expect;
        }
    }
    return out;
}

static ordered_json event_to_json(const Event& e) {
    ordered_json je;
    je["id"] = e.event_id;
    ordered_json views = ordered_json::array();
    for (const auto& view : e.views) {
        ordered_json jv = ordered_json::array();
        for (const auto& h : view.hits) {
            ordered_json jh;
            jh["c"] = {h.coord[0], h.coord[1]};
            jh["v"] = h.value;
            jh["s"] = h.sem_label;
            jh["p"] = h.ins_label;
            jv.push_back(std::move(jh));
        }
        views.push_back(std::move(jv));
    }
    je["views"] = std::move(views);
    return je;
}

static Event event_from_json(const ordered_json& je, size_t line_no) {
    Event e;
    try {
        e.event_id = je.at("id").get<uint64_t>();
        const auto& views = je.at("views");
        if (!views.is_array() || views.size() != 2)
            throw MalformedRecord(line_no, "expected exactly 2 views");
        for (int v = 0; v < 2; ++v) {
            e.views[v].view_id = v;
            for (const auto& jh : views[v]) {
                Hit h;
                h.coord[0] = jh.at("c").at(0).get<double>();
                h.coord[1] = jh.at("c").at(1).get<double>();
                h.value = jh.at("v").get<double>();
                h.sem_label = jh.at("s").get<int>();
                h.ins_label = jh.at("p").get<int>();
                e.views[v].hits.push_back(h);
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw MalformedRecord(line_no, ex.what());
    }
    return e;
}

Dataset read_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw MalformedRecord(1, "missing header line");
    Dataset ds;
    try {
        ordered_json jh = ordered_json::parse(line);
        ds.header.format_version = jh.at("format_version").get<int>();
        if (ds.header.format_version != 1) throw VersionMismatch(ds.header.format_version);
        ds.header.n_classes = jh.at("n_classes").get<int>();
        ds.header.p_max = jh.at("p_max").get<int>();
        ds.header.grid_shape = {jh.at("grid").at(0).get<int>(), jh.at("grid").at(1).get<int>()};
        ds.header.n_events = jh.at("n_events").get<uint64_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw MalformedRecord(1, ex.what());
    }
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json je;
        try {
            je = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw MalformedRecord(line_no, ex.what());
        }
        Event e = event_from_json(je, line_no);
        auto violations = validate_event(e, ds.header.n_classes, ds.header.p_max);
        if (!violations.empty())
            throw MalformedRecord(line_no, violations.front().kind + " at " + violations.front().location);
        ds.events.push_back(std::move(e));
    }
    return ds;
}

void write_events(const std::vector<Event>& events, const DatasetHeader& header,
                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    ordered_json jh;
    jh["format_version"] = header.format_version;
    jh["n_classes"] = header.n_classes;
    jh["p_max"] = header.p_max;
    jh["grid"] = {header.grid_shape[0], header.grid_shape[1]};
    jh["n_events"] = events.size();
    out << jh.dump() << "\n";
    for (const auto& e : events) out << event_to_json(e).dump() << "\n";
    if (!out) throw IoError("write failed on " + path);
}

std::vector<double> densify(const Event& event) {
    std::vector<double> dense(2 * 80 * 100, 0.0);
    for (int v = 0; v < 2; ++v)
        for (const auto& h : event.views[v].hits) {
            int x = static_cast<int>(std::floor(h.coord[0]));
            int z = static_cast<int>(std::floor(h.coord[1]));
            dense[dense_index(v, x, z)] += h.value;
        }
    return dense;
}

}  // namespace hpst
