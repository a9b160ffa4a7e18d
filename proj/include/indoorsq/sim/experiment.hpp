#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "indoorsq/kalman_filter.hpp"
#include "indoorsq/particle_filter.hpp"
#include "indoorsq/query_engine.hpp"
#include "indoorsq/sim/baseline.hpp"
#include "indoorsq/sim/metrics.hpp"
#include "indoorsq/sim/trace.hpp"

namespace indoorsq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string plan_path;
    uint32_t n_objects = 50;
    uint32_t duration = 300;
    uint32_t n_particles = 64;
    double window_fraction = 0.02; // of floor area; window sides scale with sqrt
    double p_detect = 0.9;
    double anchor_spacing = 1.0;
    double u_max = kDefaultMaxSpeed;
    uint32_t n_windows = 20;
    uint32_t n_timestamps = 20;
    std::vector<uint32_t> k_list{2, 5, 9};
    std::vector<uint64_t> seeds{1, 2, 3};
    std::vector<std::string> backends{"pf", "kf", "uniform"};
    std::vector<uint32_t> sweep_particles{8, 16, 32, 64, 128};

    void validate() const {
        if (plan_path.empty()) throw ConfigError("plan path required");
        if (n_objects == 0 || duration == 0 || n_particles == 0 || n_windows == 0 ||
            n_timestamps == 0)
            throw ConfigError("counts must be positive");
        if (!(window_fraction > 0.0 && window_fraction < 1.0))
            throw ConfigError("window_fraction must be in (0,1)");
        if (!(p_detect > 0.0 && p_detect <= 1.0)) throw ConfigError("p_detect must be in (0,1]");
        if (!(anchor_spacing > 0.0) || !(u_max > 0.0))
            throw ConfigError("spacing and max speed must be positive");
        if (seeds.empty()) throw ConfigError("at least one seed required");
        if (k_list.empty()) throw ConfigError("at least one k required");
        for (uint32_t k : k_list)
            if (k == 0 || k > n_objects) throw ConfigError("k must be in [1, objects]");
        if (backends.empty()) throw ConfigError("at least one backend required");
        for (const std::string& b : backends)
            if (b != "pf" && b != "kf" && b != "uniform")
                throw ConfigError("unknown backend '" + b + "'");
        for (uint32_t n : sweep_particles)
            if (n == 0) throw ConfigError("sweep particle counts must be positive");
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.plan_path = j.value("plan", c.plan_path);
        c.n_objects = j.value("objects", c.n_objects);
        c.duration = j.value("duration", c.duration);
        c.n_particles = j.value("particles", c.n_particles);
        c.window_fraction = j.value("window_fraction", c.window_fraction);
        c.p_detect = j.value("p_detect", c.p_detect);
        c.anchor_spacing = j.value("anchor_spacing", c.anchor_spacing);
        c.u_max = j.value("max_speed", c.u_max);
        c.n_windows = j.value("windows", c.n_windows);
        c.n_timestamps = j.value("timestamps", c.n_timestamps);
        if (j.contains("k")) c.k_list = j.at("k").get<std::vector<uint32_t>>();
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
        if (j.contains("backends")) c.backends = j.at("backends").get<std::vector<std::string>>();
        if (j.contains("sweep_particles"))
            c.sweep_particles = j.at("sweep_particles").get<std::vector<uint32_t>>();
        // "all" expands to every backend
        std::vector<std::string> expanded;
        for (const std::string& b : c.backends) {
            if (b == "all") {
                expanded.insert(expanded.end(), {"pf", "kf", "uniform"});
            } else {
                expanded.push_back(b);
            }
        }
        c.backends = expanded;
        return c;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        return from_json(j);
    }

    nlohmann::json to_json() const {
        return {{"plan", plan_path},
                {"objects", n_objects},
                {"duration", duration},
                {"particles", n_particles},
                {"window_fraction", window_fraction},
                {"p_detect", p_detect},
                {"anchor_spacing", anchor_spacing},
                {"max_speed", u_max},
                {"windows", n_windows},
                {"timestamps", n_timestamps},
                {"k", k_list},
                {"seeds", seeds},
                {"backends", backends},
                {"sweep_particles", sweep_particles}};
    }
};

struct MetricRow {
    std::string backend;
    std::string param;
    uint64_t value = 0;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    uint64_t n = 0;
};

struct TimingRow {
    std::string backend;
    std::string param;
    uint64_t value = 0;
    std::string metric;
    double seconds = 0.0;
};

struct MetricsReport {
    std::vector<MetricRow> rows;
    std::vector<TimingRow> timing;

    const MetricRow* find(const std::string& backend, const std::string& param, uint64_t value,
                          const std::string& metric) const {
        for (const MetricRow& r : rows)
            if (r.backend == backend && r.param == param && r.value == value && r.metric == metric)
                return &r;
        return nullptr;
    }
    const TimingRow* find_timing(const std::string& backend, const std::string& param,
                                 uint64_t value, const std::string& metric) const {
        for (const TimingRow& r : timing)
            if (r.backend == backend && r.param == param && r.value == value && r.metric == metric)
                return &r;
        return nullptr;
    }
};

inline void write_metrics(std::ostream& os, const MetricsReport& report) {
    os << "backend,param,value,metric,mean,stddev,n\n";
    char buf[192];
    for (const MetricRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%llu,%s,%.6f,%.6f,%llu\n", r.backend.c_str(),
                      r.param.c_str(), static_cast<unsigned long long>(r.value), r.metric.c_str(),
                      r.mean, r.stddev, static_cast<unsigned long long>(r.n));
        os << buf;
    }
}

inline void write_timing(std::ostream& os, const MetricsReport& report) {
    os << "backend,param,value,metric,seconds\n";
    char buf[192];
    for (const TimingRow& r : report.timing) {
        std::snprintf(buf, sizeof buf, "%s,%s,%llu,%s,%.6f\n", r.backend.c_str(), r.param.c_str(),
                      static_cast<unsigned long long>(r.value), r.metric.c_str(), r.seconds);
        os << buf;
    }
}

namespace detail {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
    uint64_t n = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    m.n = xs.size();
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

// Everything measured across one full pass of (seeds x timestamps x queries).
struct RunAccum {
    // backend -> seed -> samples
    std::map<std::string, std::map<uint64_t, std::vector<double>>> divergence;
    // backend -> seed -> k -> samples
    std::map<std::string, std::map<uint64_t, std::map<uint32_t, std::vector<double>>>> hit;
    std::map<std::string, double> filter_seconds;
};

inline RunAccum run_core(const Site& site, const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    RunAccum acc;
    uint32_t k_max = *std::max_element(cfg.k_list.begin(), cfg.k_list.end());
    Rect bbox = site.plan().bounding_box();

    KalmanPreprocessor kf(site);
    ParticleConfig pf_cfg;
    pf_cfg.n_particles = cfg.n_particles;
    ParticlePreprocessor pf(site, pf_cfg);

    for (uint64_t seed : cfg.seeds) {
        TraceConfig tc;
        tc.n_objects = cfg.n_objects;
        tc.duration = cfg.duration;
        auto traces = generate_traces(site, tc, seed);
        auto readings = generate_readings(site, traces, cfg.p_detect, seed);

        Rng wrng = Rng::stream(seed, "win", 0);
        double wx = std::sqrt(cfg.window_fraction) * bbox.width();
        double wy = std::sqrt(cfg.window_fraction) * bbox.height();
        std::vector<Rect> windows;
        for (uint32_t i = 0; i < cfg.n_windows; ++i) {
            double x0 = bbox.x0 + wrng.uniform() * (bbox.width() - wx);
            double y0 = bbox.y0 + wrng.uniform() * (bbox.height() - wy);
            windows.push_back(Rect::from_xywh(x0, y0, wx, wy));
        }
        Rng prng = Rng::stream(seed, "knnq", 0);
        std::vector<GraphLocation> points;
        for (uint32_t i = 0; i < cfg.n_windows; ++i) {
            Vec2 p{bbox.x0 + prng.uniform() * bbox.width(),
                   bbox.y0 + prng.uniform() * bbox.height()};
            points.push_back(site.graph().project_to_graph(p));
        }
        Rng trng = Rng::stream(seed, "ts", 0);
        uint32_t t_lo = cfg.duration / 3;
        std::vector<uint32_t> stamps;
        for (uint32_t i = 0; i < cfg.n_timestamps; ++i)
            stamps.push_back(t_lo + trng.uniform_int(cfg.duration - t_lo + 1));
        std::sort(stamps.begin(), stamps.end());

        ReadingStore store(static_cast<uint32_t>(site.readers().size()));
        size_t next_reading = 0;
        for (size_t si = 0; si < stamps.size(); ++si) {
            uint32_t T = stamps[si];
            while (next_reading < readings.size() && readings[next_reading].t <= T)
                store.ingest(readings[next_reading++]);

            std::set<ObjectId> cset;
            auto rc = prune_range_candidates(site, store, windows, T, cfg.u_max);
            cset.insert(rc.begin(), rc.end());
            for (const GraphLocation& q : points) {
                auto kc = prune_knn_candidates(site, store, q, k_max, T, cfg.u_max, nullptr);
                cset.insert(kc.begin(), kc.end());
            }
            std::vector<ObjectId> C(cset.begin(), cset.end());

            std::vector<std::set<ObjectId>> truth_range;
            for (const Rect& w : windows) truth_range.push_back(ground_truth_range(traces, w, T));
            // one distance ordering per point serves every k
            std::vector<std::vector<ObjectId>> knn_order;
            for (const GraphLocation& q : points) {
                std::vector<std::pair<double, ObjectId>> order;
                for (const Trajectory& tr : traces)
                    order.push_back(
                        {site.graph().shortest_network_distance(q, tr.points.at(T).loc),
                         tr.object});
                std::sort(order.begin(), order.end());
                std::vector<ObjectId> ids;
                for (auto& [d, o] : order) ids.push_back(o);
                knn_order.push_back(std::move(ids));
            }

            for (const std::string& backend : cfg.backends) {
                ApToObjIndex index(static_cast<uint32_t>(site.grid().anchors.size()));
                auto t0 = clock::now();
                if (backend == "pf")
                    pf.process(store, C, T, seed, index, static_cast<uint32_t>(si));
                else if (backend == "kf")
                    kf.process(store, C, T, index);
                else
                    uniform_baseline(site, store, C, T, index, cfg.u_max);
                acc.filter_seconds[backend] +=
                    std::chrono::duration<double>(clock::now() - t0).count();

                auto& div = acc.divergence[backend][seed];
                for (size_t wi = 0; wi < windows.size(); ++wi) {
                    ResultSet rs = range_query(site, index, windows[wi]);
                    div.push_back(cover_divergence(truth_range[wi], rs));
                }
                auto& hits = acc.hit[backend][seed];
                for (size_t qi = 0; qi < points.size(); ++qi) {
                    for (uint32_t k : cfg.k_list) {
                        KnnResult kr = knn_query(site, index, points[qi], k);
                        ResultSet pred = backend == "uniform"
                                             ? top_n_by_probability(kr.result, k)
                                             : kr.result;
                        std::set<ObjectId> truth(knn_order[qi].begin(),
                                                 knn_order[qi].begin() +
                                                     std::min<size_t>(k, knn_order[qi].size()));
                        hits[k].push_back(hit_rate(truth, pred));
                    }
                }
            }
        }
    }
    return acc;
}

} // namespace detail

// Full accuracy run: traces, readings, replay through pruner and each filter
// backend, snapshot queries at sampled timestamps, scored against ground truth.
inline MetricsReport run_experiment(const Site& site, const ExperimentConfig& cfg) {
    cfg.validate();
    detail::RunAccum acc = detail::run_core(site, cfg);
    MetricsReport report;
    for (const std::string& backend : cfg.backends) {
        if (report.find(backend, "all", 0, "cover_divergence")) continue; // dedup repeats
        std::vector<double> all_div;
        std::map<uint32_t, std::vector<double>> all_hit;
        for (uint64_t seed : cfg.seeds) {
            const auto& div = acc.divergence[backend][seed];
            detail::MeanStd m = detail::mean_std(div);
            report.rows.push_back({backend, "seed", seed, "cover_divergence", m.mean, m.stddev, m.n});
            all_div.insert(all_div.end(), div.begin(), div.end());
            std::vector<double> seed_hits;
            for (uint32_t k : cfg.k_list) {
                const auto& h = acc.hit[backend][seed][k];
                seed_hits.insert(seed_hits.end(), h.begin(), h.end());
                all_hit[k].insert(all_hit[k].end(), h.begin(), h.end());
            }
            detail::MeanStd hm = detail::mean_std(seed_hits);
            report.rows.push_back({backend, "seed", seed, "hit_rate", hm.mean, hm.stddev, hm.n});
        }
        detail::MeanStd dm = detail::mean_std(all_div);
        report.rows.push_back({backend, "all", 0, "cover_divergence", dm.mean, dm.stddev, dm.n});
        for (uint32_t k : cfg.k_list) {
            detail::MeanStd hm = detail::mean_std(all_hit[k]);
            report.rows.push_back({backend, "k", k, "hit_rate", hm.mean, hm.stddev, hm.n});
        }
        report.timing.push_back(
            {backend, "all", 0, "filter_seconds", acc.filter_seconds[backend]});
    }
    return report;
}

inline MetricsReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    auto site = Site::build(load_floorplan(cfg.plan_path), cfg.anchor_spacing);
    return run_experiment(*site, cfg);
}

// Particle-count sweep: PF only, hit rate pooled across seeds and k, plus
// filter wall clock per count.
inline MetricsReport run_particle_sweep(const Site& site, const ExperimentConfig& cfg) {
    cfg.validate();
    MetricsReport report;
    for (uint32_t ns : cfg.sweep_particles) {
        ExperimentConfig c = cfg;
        c.n_particles = ns;
        c.backends = {"pf"};
        detail::RunAccum acc = detail::run_core(site, c);
        std::vector<double> hits;
        std::vector<double> divs;
        for (uint64_t seed : c.seeds) {
            for (uint32_t k : c.k_list) {
                const auto& h = acc.hit["pf"][seed][k];
                hits.insert(hits.end(), h.begin(), h.end());
            }
            const auto& d = acc.divergence["pf"][seed];
            divs.insert(divs.end(), d.begin(), d.end());
        }
        detail::MeanStd hm = detail::mean_std(hits);
        detail::MeanStd dm = detail::mean_std(divs);
        report.rows.push_back({"pf", "n_particles", ns, "hit_rate", hm.mean, hm.stddev, hm.n});
        report.rows.push_back(
            {"pf", "n_particles", ns, "cover_divergence", dm.mean, dm.stddev, dm.n});
        report.timing.push_back(
            {"pf", "n_particles", ns, "filter_seconds", acc.filter_seconds["pf"]});
    }
    return report;
}

} // namespace indoorsq
