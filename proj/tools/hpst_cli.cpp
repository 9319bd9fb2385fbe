#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hpst/bench.hpp"
#include "hpst/display.hpp"
#include "hpst/errors.hpp"
#include "hpst/evaluate.hpp"
#include "hpst/synthgen.hpp"
#include "hpst/trainer.hpp"
#include "json.hpp"

namespace {

using hpst::ConfigError;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIncompatible = 4;

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hpst::IoError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

double to_double(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + s);
    }
}

int to_int(const std::string& key, const std::string& s) {
    double v = to_double(key, s);
    if (v != static_cast<double>(static_cast<long long>(v)))
        throw ConfigError(key + " must be an integer");
    return static_cast<int>(v);
}

hpst::GenConfig gen_config_from(const std::map<std::string, std::string>& kv) {
    hpst::GenConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "seed") cfg.seed = static_cast<uint64_t>(to_double(key, value));
        else if (key == "n_prongs_min") cfg.n_prongs_range[0] = to_int(key, value);
        else if (key == "n_prongs_max") cfg.n_prongs_range[1] = to_int(key, value);
        else if (key == "hits_per_prong_mean") cfg.hits_per_prong_mean = to_double(key, value);
        else if (key == "noise_hit_rate") cfg.noise_hit_rate = to_double(key, value);
        else if (key == "cross_view_ambiguity") cfg.cross_view_ambiguity = to_double(key, value);
        else if (key == "n_classes") cfg.n_classes = to_int(key, value);
        else if (key == "p_max") cfg.p_max = to_int(key, value);
        else if (key == "class_mixture") {
            cfg.class_mixture.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                cfg.class_mixture.push_back(to_double(key, item));
        } else {
            throw ConfigError("unknown generator config key: " + key);
        }
    }
    return cfg;
}

hpst::TrainConfig train_config_from(const std::map<std::string, std::string>& kv) {
    hpst::TrainConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "epochs") cfg.epochs = to_int(key, value);
        else if (key == "learning_rate") cfg.learning_rate = to_double(key, value);
        else if (key == "lambda") cfg.lambda = to_double(key, value);
        else if (key == "batch_size") cfg.batch_size = to_int(key, value);
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_double(key, value));
        else if (key == "patience") cfg.patience = to_int(key, value);
        else if (key == "n") cfg.hyper.n = to_int(key, value);
        else if (key == "m") cfg.hyper.m = to_int(key, value);
        else if (key == "base_dim") cfg.hyper.base_dim = to_int(key, value);
        else if (key == "k_nn") cfg.hyper.k_nn = to_int(key, value);
        else if (key == "base_voxel_size") cfg.hyper.base_voxel_size = to_double(key, value);
        else if (key == "n_classes") cfg.hyper.n_classes = to_int(key, value);
        else if (key == "instance_slots") cfg.hyper.instance_slots = to_int(key, value);
        else if (key == "use_inter") cfg.hyper.use_inter = to_int(key, value) != 0;
        else throw ConfigError("unknown training config key: " + key);
    }
    return cfg;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw hpst::IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw hpst::IoError("write failed on " + path);
}

ordered_json report_to_json(const hpst::EvalReport& report, const hpst::HyperParams& hyper) {
    ordered_json j;
    j["macro_auc"] = report.auc.macro;
    ordered_json per_class;
    for (const auto& [cls, auc] : report.auc.per_class) per_class[std::to_string(cls)] = auc;
    j["per_class_auc"] = per_class;
    j["segmentation_accuracy"] = report.segmentation_acc;
    j["n_events"] = report.n_events;
    j["n_hits"] = report.n_hits;
    ordered_json cfg;
    cfg["n"] = hyper.n;
    cfg["m"] = hyper.m;
    cfg["base_dim"] = hyper.base_dim;
    cfg["k_nn"] = hyper.k_nn;
    cfg["base_voxel_size"] = hyper.base_voxel_size;
    cfg["n_classes"] = hyper.n_classes;
    cfg["instance_slots"] = hyper.instance_slots;
    cfg["use_inter"] = hyper.use_inter;
    j["config"] = cfg;
    return j;
}

std::string histograms_to_text(const hpst::EvalReport& report) {
    std::ostringstream out;
    out << "# class bin_lo bin_hi purity_count efficiency_count\n";
    for (const auto& [cls, ph] : report.purity_hist) {
        const auto eh = report.efficiency_hist.find(cls);
        for (size_t b = 0; b < 20; ++b) {
            out << cls << " " << static_cast<double>(b) / 20.0 << " "
                << static_cast<double>(b + 1) / 20.0 << " " << ph.bins[b] << " "
                << (eh != report.efficiency_hist.end() ? eh->second.bins[b] : 0) << "\n";
        }
    }
    return out.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Heterogeneous point set transformer for two-view detector events"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a synthetic event dataset");
    uint64_t gen_events = 0, gen_seed = 0;
    std::string gen_config, gen_out;
    gen->add_option("--events", gen_events, "number of events")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--config", gen_config, "generator config file (key=value)");
    gen->add_option("--out", gen_out, "output event file")->required();

    auto* train = app.add_subcommand("train", "train a model");
    std::string train_data, train_config_path, train_out, train_log;
    train->add_option("--data", train_data, "training event file")->required();
    train->add_option("--config", train_config_path, "training config file (key=value)");
    train->add_option("--out", train_out, "output checkpoint")->required();
    train->add_option("--log", train_log, "training log file");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string eval_ckpt, eval_data, eval_out;
    eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--data", eval_data, "event file")->required();
    eval->add_option("--out", eval_out, "report output path")->required();

    auto* bench = app.add_subcommand("bench", "speed/memory benchmark");
    std::string bench_ckpt, bench_data, bench_out;
    size_t bench_samples = 100;
    bench->add_option("--ckpt", bench_ckpt, "checkpoint file")->required();
    bench->add_option("--data", bench_data, "event file")->required();
    bench->add_option("--samples", bench_samples, "number of inference samples");
    bench->add_option("--out", bench_out, "report output path")->required();

    auto* display = app.add_subcommand("display", "render an event as SVG");
    std::string disp_data, disp_ckpt, disp_out;
    uint64_t disp_event = 0;
    display->add_option("--data", disp_data, "event file")->required();
    display->add_option("--ckpt", disp_ckpt, "checkpoint for a predicted-class panel");
    display->add_option("--event", disp_event, "event id")->required();
    display->add_option("--out", disp_out, "output .svg path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    if (gen->parsed()) {
        hpst::GenConfig cfg;
        if (!gen_config.empty()) cfg = gen_config_from(parse_config_file(gen_config));
        if (gen->count("--seed")) cfg.seed = gen_seed;
        hpst::generate_dataset(gen_events, cfg, gen_out);
        std::cout << "wrote " << gen_events << " events to " << gen_out << "\n";
    } else if (train->parsed()) {
        hpst::TrainConfig cfg;
        if (!train_config_path.empty())
            cfg = train_config_from(parse_config_file(train_config_path));
        hpst::TrainResult result = hpst::train(train_data, cfg, train_out, train_log);
        std::cout << "best epoch " << result.best_epoch << " val_total "
                  << result.best_val_total << "; checkpoint: " << train_out << "\n";
    } else if (eval->parsed()) {
        auto [weights, hyper] = hpst::load_checkpoint(eval_ckpt);
        hpst::Dataset ds = hpst::read_events(eval_data);
        if (ds.header.n_classes != hyper.n_classes || ds.header.p_max > hyper.instance_slots)
            throw hpst::ConfigMismatch("dataset does not fit checkpoint");
        hpst::EvalReport report = hpst::evaluate(weights, hyper, ds.events);
        write_text(eval_out, report_to_json(report, hyper).dump(2) + "\n");
        write_text(eval_out + ".hist", histograms_to_text(report));
        std::cout << "macro_auc " << report.auc.macro << " seg_acc "
                  << report.segmentation_acc << "\n";
    } else if (bench->parsed()) {
        auto [weights, hyper] = hpst::load_checkpoint(bench_ckpt);
        hpst::Dataset ds = hpst::read_events(bench_data);
        if (ds.header.n_classes != hyper.n_classes || ds.header.p_max > hyper.instance_slots)
            throw hpst::ConfigMismatch("dataset does not fit checkpoint");
        hpst::BenchReport r = hpst::bench_inference(weights, hyper, ds.events, bench_samples);
        ordered_json j;
        j["n_samples"] = r.n_samples;
        j["mean_time_s"] = r.mean_time_s;
        j["sd_time_s"] = r.sd_time_s;
        j["peak_mem_mib"] = r.peak_mem_mib;
        j["mean_hits"] = r.mean_hits;
        j["sparse_bytes"] = r.sparse_bytes;
        j["dense_bytes"] = r.dense_bytes;
        j["sparse_dense_ratio"] = r.sparse_bytes / r.dense_bytes;
        j["crossover_hits"] = r.crossover_hits;
        write_text(bench_out, j.dump(2) + "\n");
        std::cout << "mean " << r.mean_time_s << " s/sample, peak " << r.peak_mem_mib
                  << " MiB\n";
    } else if (display->parsed()) {
        hpst::Dataset ds = hpst::read_events(disp_data);
        const hpst::Event* event = nullptr;
        for (const auto& e : ds.events)
            if (e.event_id == disp_event) event = &e;
        if (!event) throw hpst::DegenerateInput("event id not found in dataset");
        hpst::DisplaySpec spec;
        spec.event_id = disp_event;
        std::optional<std::array<std::vector<int>, 2>> predicted;
        if (!disp_ckpt.empty()) {
            auto [weights, hyper] = hpst::load_checkpoint(disp_ckpt);
            if (ds.header.n_classes != hyper.n_classes)
                throw hpst::ConfigMismatch("dataset does not fit checkpoint");
            hpst::Predictions pred = hpst::predict_event(weights, hyper, *event);
            std::array<std::vector<int>, 2> cls;
            for (int j = 0; j < 2; ++j)
                for (const auto& probs : pred.sem_probs[j]) {
                    int best = 0;
                    for (size_t c = 1; c < probs.size(); ++c)
                        if (probs[c] > probs[best]) best = static_cast<int>(c);
                    cls[j].push_back(best);
                }
            predicted = std::move(cls);
            spec.show_predicted = true;
        }
        write_text(disp_out, hpst::render_event_display(*event, predicted, spec));
        std::cout << "wrote " << disp_out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const hpst::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const hpst::ConfigMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitIncompatible;
    } catch (const hpst::CorruptCheckpoint& e) {
        std::cerr << e.what() << "\n";
        return kExitIncompatible;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitData;
    }
}
