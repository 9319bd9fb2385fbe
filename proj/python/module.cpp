#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpst/bench.hpp"
#include "hpst/display.hpp"
#include "hpst/evaluate.hpp"
#include "hpst/event.hpp"
#include "hpst/loss.hpp"
#include "hpst/metrics.hpp"
#include "hpst/synthgen.hpp"
#include "hpst/trainer.hpp"

namespace py = pybind11;
using namespace hpst;

namespace {

py::array_t<double> densify_array(const Event& event) {
    auto dense = densify(event);
    py::array_t<double> out({static_cast<size_t>(2), static_cast<size_t>(80),
                             static_cast<size_t>(100)});
    std::copy(dense.begin(), dense.end(), out.mutable_data());
    return out;
}

py::dict eval_report_dict(const EvalReport& r) {
    py::dict d;
    d["macro_auc"] = r.auc.macro;
    py::dict per_class;
    for (const auto& [c, a] : r.auc.per_class) per_class[py::int_(c)] = a;
    d["per_class_auc"] = per_class;
    d["segmentation_accuracy"] = r.segmentation_acc;
    d["n_events"] = r.n_events;
    d["n_hits"] = r.n_hits;
    py::dict purity, efficiency;
    for (const auto& [c, h] : r.purity_hist) purity[py::int_(c)] = h.bins;
    for (const auto& [c, h] : r.efficiency_hist) efficiency[py::int_(c)] = h.bins;
    d["purity_hist"] = purity;
    d["efficiency_hist"] = efficiency;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Heterogeneous point-set transformer for two-view sparse events";

    py::class_<Hit>(m, "Hit")
        .def(py::init<>())
        .def(py::init([](std::array<double, 2> coord, double value, int sem, int ins) {
                 return Hit{coord, value, sem, ins};
             }),
             py::arg("coord"), py::arg("value"), py::arg("sem_label"), py::arg("ins_label"))
        .def_readwrite("coord", &Hit::coord)
        .def_readwrite("value", &Hit::value)
        .def_readwrite("sem_label", &Hit::sem_label)
        .def_readwrite("ins_label", &Hit::ins_label);

    py::class_<View>(m, "View")
        .def(py::init<>())
        .def_readwrite("view_id", &View::view_id)
        .def_readwrite("hits", &View::hits);

    py::class_<Event>(m, "Event")
        .def(py::init<>())
        .def_readwrite("event_id", &Event::event_id)
        .def_readwrite("views", &Event::views)
        .def("n_instances", &Event::n_instances)
        .def("total_hits", &Event::total_hits)
        .def("densify", &densify_array);

    py::class_<DatasetHeader>(m, "DatasetHeader")
        .def(py::init<>())
        .def_readwrite("n_events", &DatasetHeader::n_events)
        .def_readwrite("n_classes", &DatasetHeader::n_classes)
        .def_readwrite("p_max", &DatasetHeader::p_max)
        .def_readwrite("grid_shape", &DatasetHeader::grid_shape)
        .def_readwrite("format_version", &DatasetHeader::format_version);

    py::class_<GenConfig>(m, "GenConfig")
        .def(py::init<>())
        .def_readwrite("seed", &GenConfig::seed)
        .def_readwrite("n_prongs_range", &GenConfig::n_prongs_range)
        .def_readwrite("hits_per_prong_mean", &GenConfig::hits_per_prong_mean)
        .def_readwrite("noise_hit_rate", &GenConfig::noise_hit_rate)
        .def_readwrite("class_mixture", &GenConfig::class_mixture)
        .def_readwrite("cross_view_ambiguity", &GenConfig::cross_view_ambiguity)
        .def_readwrite("n_classes", &GenConfig::n_classes)
        .def_readwrite("p_max", &GenConfig::p_max);

    py::class_<HyperParams>(m, "HyperParams")
        .def(py::init<>())
        .def_readwrite("n", &HyperParams::n)
        .def_readwrite("m", &HyperParams::m)
        .def_readwrite("base_dim", &HyperParams::base_dim)
        .def_readwrite("k_nn", &HyperParams::k_nn)
        .def_readwrite("base_voxel_size", &HyperParams::base_voxel_size)
        .def_readwrite("n_classes", &HyperParams::n_classes)
        .def_readwrite("instance_slots", &HyperParams::instance_slots)
        .def_readwrite("use_inter", &HyperParams::use_inter);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("hyper", &TrainConfig::hyper);

    m.def("generate_event", &generate_event, py::arg("event_id"), py::arg("config"));
    m.def("generate_dataset", &generate_dataset, py::arg("n_events"), py::arg("config"),
          py::arg("out_path"));
    m.def(
        "read_events",
        [](const std::string& path) {
            Dataset ds = read_events(path);
            return py::make_tuple(ds.header, ds.events);
        },
        py::arg("path"));
    m.def("write_events", &write_events, py::arg("events"), py::arg("header"), py::arg("path"));
    m.def(
        "validate_event",
        [](const Event& e, int n_classes, int p_max) {
            std::vector<py::tuple> out;
            for (const Violation& v : validate_event(e, n_classes, p_max))
                out.push_back(py::make_tuple(v.kind, v.location, v.detail));
            return out;
        },
        py::arg("event"), py::arg("n_classes") = kDefaultClasses,
        py::arg("p_max") = kDefaultInstanceSlots);

    m.def(
        "linear_sum_assignment",
        [](const std::vector<std::vector<double>>& cost) {
            Assignment a = linear_sum_assignment(cost);
            return py::make_tuple(a.col_of_row, a.total_cost);
        },
        py::arg("cost"));

    m.def("ovr_auc",
          [](const std::vector<std::vector<double>>& scores, const std::vector<int>& truth) {
              AucResult r = ovr_auc(scores, truth);
              return py::make_tuple(r.per_class, r.macro);
          },
          py::arg("class_scores"), py::arg("true_classes"));
    m.def("segmentation_accuracy", &segmentation_accuracy, py::arg("ins_pred"),
          py::arg("ins_true"));
    m.def(
        "prong_purity_efficiency",
        [](const std::vector<int>& pred, const std::vector<int>& truth,
           const std::vector<int>& sem, uint64_t event_id) {
            std::vector<py::dict> out;
            for (const ProngScore& s : prong_purity_efficiency(pred, truth, sem, event_id)) {
                py::dict d;
                d["event_id"] = s.event_id;
                d["true_instance"] = s.true_instance;
                d["class_id"] = s.class_id;
                d["efficiency"] = s.efficiency;
                d["purity"] = s.purity;
                d["n_hits"] = s.n_hits;
                out.push_back(d);
            }
            return out;
        },
        py::arg("ins_pred"), py::arg("ins_true"), py::arg("sem_true"), py::arg("event_id") = 0);

    m.def(
        "train",
        [](const std::string& dataset_path, const TrainConfig& config,
           const std::string& checkpoint_path, const std::string& log_path) {
            TrainResult r = train(dataset_path, config, checkpoint_path, log_path);
            py::list log;
            for (const EpochLog& e : r.log) {
                py::dict d;
                d["epoch"] = e.epoch;
                d["train_sem"] = e.train_sem;
                d["train_ins"] = e.train_ins;
                d["train_total"] = e.train_total;
                d["val_total"] = e.val_total;
                d["val_auc"] = e.val_auc;
                d["val_seg_acc"] = e.val_seg_acc;
                log.append(d);
            }
            py::dict out;
            out["log"] = log;
            out["best_epoch"] = r.best_epoch;
            out["best_val_total"] = r.best_val_total;
            return out;
        },
        py::arg("dataset_path"), py::arg("config"), py::arg("checkpoint_path"),
        py::arg("log_path") = "");

    m.def(
        "predict_event",
        [](const std::string& checkpoint_path, const Event& event) {
            auto [weights, hyper] = load_checkpoint(checkpoint_path);
            Predictions p = predict_event(weights, hyper, event);
            return py::make_tuple(p.sem_probs, p.ins_slot);
        },
        py::arg("checkpoint_path"), py::arg("event"));
    m.def(
        "evaluate",
        [](const std::string& checkpoint_path, const std::vector<Event>& events) {
            auto [weights, hyper] = load_checkpoint(checkpoint_path);
            return eval_report_dict(evaluate(weights, hyper, events));
        },
        py::arg("checkpoint_path"), py::arg("events"));
    m.def(
        "checkpoint_hyper",
        [](const std::string& path) { return load_checkpoint(path).second; },
        py::arg("path"));

    m.def("render_event_display",
          [](const Event& e,
             const std::optional<std::array<std::vector<int>, 2>>& predicted, bool show_pred) {
              DisplaySpec spec;
              spec.show_predicted = show_pred;
              return render_event_display(e, predicted, spec);
          },
          py::arg("event"), py::arg("predicted_classes") = std::nullopt,
          py::arg("show_predicted") = false);

    m.def("sparse_bytes_for", &sparse_bytes_for, py::arg("n_hits"));
    m.def("dense_bytes_grid", &dense_bytes_grid);
    m.def("sparse_dense_crossover", &sparse_dense_crossover);
}
