#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "indoorsq/query_engine.hpp"
#include "indoorsq/sim/experiment.hpp"
#include "indoorsq/sim/io.hpp"

namespace fs = std::filesystem;
using namespace indoorsq;

namespace {

std::vector<double> parse_fields(const std::string& s, size_t expect, const char* what) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.size() != expect)
        throw std::runtime_error(std::string(what) + ": expected " + std::to_string(expect) +
                                 " comma-separated numbers, got '" + s + "'");
    return out;
}

std::vector<std::string> expand_backends(const std::string& b) {
    if (b == "all") return {"pf", "kf", "uniform"};
    return {b};
}

std::unique_ptr<Site> load_site(const std::string& plan, double spacing) {
    return Site::build(load_floorplan(plan), spacing);
}

void run_backend_once(const Site& site, const ReadingStore& store,
                      const std::vector<ObjectId>& candidates, double t,
                      const std::string& backend, uint64_t seed, uint32_t n_particles,
                      ApToObjIndex& index) {
    if (backend == "pf") {
        ParticleConfig pc;
        pc.n_particles = n_particles;
        ParticlePreprocessor(site, pc).process(store, candidates, t, seed, index);
    } else if (backend == "kf") {
        KalmanPreprocessor(site).process(store, candidates, t, index);
    } else {
        uniform_baseline(site, store, candidates, t, index);
    }
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir + "/" + name);
    if (!os) throw std::runtime_error("cannot write " + dir + "/" + name);
    return os;
}

struct ReplayedState {
    std::unique_ptr<Site> site;
    ReadingStore store;
    std::vector<RawReading> readings;
    double t_end = 0.0;
};

ReplayedState replay_readings(const std::string& plan, double spacing,
                              const std::string& readings_path, double t_flag) {
    auto site = load_site(plan, spacing);
    std::ifstream in(readings_path);
    if (!in) throw IoError("cannot open readings file: " + readings_path);
    auto readings = read_readings_csv(in, *site);
    std::sort(readings.begin(), readings.end(), [](const RawReading& a, const RawReading& b) {
        return a.t != b.t ? a.t < b.t : (a.object != b.object ? a.object < b.object
                                                             : a.reader < b.reader);
    });
    double t_end = t_flag;
    if (t_end < 0.0) {
        t_end = 0.0;
        for (const RawReading& r : readings) t_end = std::max(t_end, r.t);
    }
    ReplayedState st{std::move(site), ReadingStore(0), std::move(readings), t_end};
    st.store = ReadingStore(static_cast<uint32_t>(st.site->readers().size()));
    for (const RawReading& r : st.readings)
        if (r.t <= st.t_end) st.store.ingest(r);
    return st;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"indoor RFID stream cleansing and probabilistic querying"};
    app.require_subcommand(1);

    std::string plan, config_path, out_dir = ".", backend = "pf", readings_path;
    uint64_t seed = 1;
    double spacing = 1.0, t_flag = -1.0, p_detect = 0.9;
    uint32_t objects = 50, duration = 300, particles = 64;
    std::vector<std::string> range_specs, knn_specs;
    bool sweep = false;

    auto* sim = app.add_subcommand("simulate", "generate traces and noisy readings");
    sim->add_option("--plan", plan, "floor plan file")->required();
    sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--objects", objects, "number of objects");
    sim->add_option("--duration", duration, "seconds to simulate");
    sim->add_option("--p-detect", p_detect, "per-second detection probability");
    sim->add_option("--spacing", spacing, "anchor spacing in meters");

    auto* rep = app.add_subcommand("replay", "replay readings into an index dump");
    rep->add_option("--plan", plan, "floor plan file")->required();
    rep->add_option("--readings", readings_path, "readings csv")->required();
    rep->add_option("--t", t_flag, "replay up to this second (default: all)");
    rep->add_option("--backend", backend, "pf|kf|uniform|all");
    rep->add_option("--seed", seed, "rng seed");
    rep->add_option("--particles", particles, "particles per object");
    rep->add_option("--out", out_dir, "output directory");
    rep->add_option("--spacing", spacing, "anchor spacing in meters");

    auto* qry = app.add_subcommand("query", "evaluate queries against a replayed state");
    qry->add_option("--plan", plan, "floor plan file")->required();
    qry->add_option("--readings", readings_path, "readings csv")->required();
    qry->add_option("--t", t_flag, "query timestamp (default: last reading)");
    qry->add_option("--backend", backend, "pf|kf|uniform|all");
    qry->add_option("--seed", seed, "rng seed");
    qry->add_option("--particles", particles, "particles per object");
    qry->add_option("--range", range_specs, "range query x0,y0,x1,y1 (repeatable)");
    qry->add_option("--knn", knn_specs, "kNN query x,y,k (repeatable)");
    qry->add_option("--out", out_dir, "output directory");
    qry->add_option("--spacing", spacing, "anchor spacing in meters");

    auto* exp = app.add_subcommand("experiment", "run the accuracy experiment sweep");
    exp->add_option("--config", config_path, "experiment config json")->required();
    exp->add_option("--plan", plan, "override plan path from config");
    exp->add_option("--backend", backend, "override backends: pf|kf|uniform|all");
    exp->add_option("--seed", seed, "override seed list with a single seed");
    exp->add_option("--out", out_dir, "output directory");
    exp->add_flag("--sweep", sweep, "particle-count sweep instead of backend comparison");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            auto site = load_site(plan, spacing);
            TraceConfig tc;
            tc.n_objects = objects;
            tc.duration = duration;
            auto traces = generate_traces(*site, tc, seed);
            auto readings = generate_readings(*site, traces, p_detect, seed);
            auto tf = open_out(out_dir, "traces.csv");
            write_traces_csv(tf, traces);
            auto rf = open_out(out_dir, "readings.csv");
            write_readings_csv(rf, *site, readings);
            std::cout << "wrote " << traces.size() << " traces and " << readings.size()
                      << " readings to " << out_dir << "\n";
        } else if (rep->parsed()) {
            ReplayedState st = replay_readings(plan, spacing, readings_path, t_flag);
            std::vector<ObjectId> candidates = st.store.detected_objects();
            auto backends = expand_backends(backend);
            for (const std::string& b : backends) {
                ApToObjIndex index(static_cast<uint32_t>(st.site->grid().anchors.size()));
                run_backend_once(*st.site, st.store, candidates, st.t_end, b, seed, particles,
                                 index);
                std::string name =
                    backends.size() > 1 ? "index_dump_" + b + ".csv" : "index_dump.csv";
                auto os = open_out(out_dir, name);
                write_index_dump(os, *st.site, index);
            }
            std::cout << "replayed " << candidates.size() << " objects up to t=" << st.t_end
                      << "\n";
        } else if (qry->parsed()) {
            ReplayedState st = replay_readings(plan, spacing, readings_path, t_flag);
            std::vector<Rect> windows;
            for (const std::string& s : range_specs) {
                auto f = parse_fields(s, 4, "--range");
                windows.push_back(Rect::from_corners(f[0], f[1], f[2], f[3]));
            }
            struct KnnSpec {
                GraphLocation loc;
                uint32_t k;
            };
            std::vector<KnnSpec> knns;
            for (const std::string& s : knn_specs) {
                auto f = parse_fields(s, 3, "--knn");
                knns.push_back({st.site->graph().project_to_graph({f[0], f[1]}),
                                static_cast<uint32_t>(f[2])});
            }
            if (windows.empty() && knns.empty())
                throw std::runtime_error("query: need at least one --range or --knn");

            std::set<ObjectId> cset;
            auto rc = prune_range_candidates(*st.site, st.store, windows, st.t_end);
            cset.insert(rc.begin(), rc.end());
            for (const KnnSpec& kq : knns) {
                auto kc = prune_knn_candidates(*st.site, st.store, kq.loc, kq.k, st.t_end);
                cset.insert(kc.begin(), kc.end());
            }
            std::vector<ObjectId> candidates(cset.begin(), cset.end());

            auto backends = expand_backends(backend);
            for (const std::string& b : backends) {
                ApToObjIndex index(static_cast<uint32_t>(st.site->grid().anchors.size()));
                run_backend_once(*st.site, st.store, candidates, st.t_end, b, seed, particles,
                                 index);
                std::vector<ResultSet> owned;
                std::vector<std::tuple<std::string, double, const ResultSet*>> results;
                for (size_t i = 0; i < windows.size(); ++i)
                    owned.push_back(range_query(*st.site, index, windows[i]));
                for (size_t i = 0; i < knns.size(); ++i)
                    owned.push_back(knn_query(*st.site, index, knns[i].loc, knns[i].k).result);
                for (size_t i = 0; i < windows.size(); ++i)
                    results.push_back({"range" + std::to_string(i), st.t_end, &owned[i]});
                for (size_t i = 0; i < knns.size(); ++i)
                    results.push_back(
                        {"knn" + std::to_string(i), st.t_end, &owned[windows.size() + i]});
                std::string name = backends.size() > 1 ? "results_" + b + ".csv" : "results.csv";
                auto os = open_out(out_dir, name);
                write_results_csv(os, results);
            }
            std::cout << "evaluated " << windows.size() << " range and " << knns.size()
                      << " kNN queries at t=" << st.t_end << "\n";
        } else if (exp->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
            if (exp->count("--plan")) cfg.plan_path = plan;
            if (exp->count("--backend")) cfg.backends = expand_backends(backend);
            if (exp->count("--seed")) cfg.seeds = {seed};
            cfg.validate();
            auto site = Site::build(load_floorplan(cfg.plan_path), cfg.anchor_spacing);
            MetricsReport report =
                sweep ? run_particle_sweep(*site, cfg) : run_experiment(*site, cfg);
            auto mf = open_out(out_dir, "metrics.csv");
            write_metrics(mf, report);
            auto tf = open_out(out_dir, "timing.csv");
            write_timing(tf, report);
            auto cf = open_out(out_dir, "config_echo.json");
            cf << cfg.to_json().dump(2) << "\n";
            std::cout << "wrote " << report.rows.size() << " metric rows to " << out_dir
                      << "/metrics.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
