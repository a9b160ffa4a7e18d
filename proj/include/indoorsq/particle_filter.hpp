#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "indoorsq/anchor_index.hpp"
#include "indoorsq/reading_store.hpp"
#include "indoorsq/rng.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

struct ParticleConfig {
    uint32_t n_particles = 64;
    double p_hit = 0.9; // weight factor for particles consistent with a reading
    double eps = 0.01;  // weight factor for the rest
    double p_room_entry = 0.3;
    double p_room_stay = 0.9;
    double speed_mean = 1.0;
    double speed_std = 0.1;
    double speed_min = 0.1;
    double speed_max = 1.5;
    double horizon = 60.0;           // extrapolation cap past the last reading, s
    double ess_floor_frac = 1.0 / 16; // degeneracy floor for resampling, fraction of N_s
    double roughen_std = 1.85;         // post-resample position jitter, m
    double roughen_speed_std = 0.08;  // post-resample speed jitter, m/s
};

struct Particle {
    GraphLocation loc;
    int8_t dir = 1; // +1 toward the edge's v endpoint, -1 toward u
    double speed = 1.0;
    double weight = 0.0;
    uint32_t entry_door = UINT32_MAX; // door node used to enter, when in a room
};

struct ParticleSet {
    ObjectId object = 0;
    std::vector<Particle> particles;
    uint32_t n() const { return static_cast<uint32_t>(particles.size()); }
};

namespace detail {

inline double draw_speed(Rng& rng, const ParticleConfig& cfg) {
    for (;;) {
        double v = rng.normal(cfg.speed_mean, cfg.speed_std);
        if (v >= cfg.speed_min && v <= cfg.speed_max) return v;
    }
}

// uniform position over the arc length a reader covers
inline GraphLocation sample_covered_arc(const ReaderPlacement& rp, Rng& rng) {
    double u = rng.uniform() * rp.covered_length;
    for (const ReaderPlacement::Interval& iv : rp.covered) {
        double len = iv.hi - iv.lo;
        if (u <= len || &iv == &rp.covered.back())
            return GraphLocation::on_edge(iv.edge, iv.lo + std::min(u, len));
        u -= len;
    }
    return rp.loc;
}

inline bool edge_in_range(const ReaderPlacement& rp, uint32_t edge, double offset) {
    for (const ReaderPlacement::Interval& iv : rp.covered)
        if (iv.edge == edge && offset >= iv.lo - 1e-9 && offset <= iv.hi + 1e-9) return true;
    return false;
}

} // namespace detail

inline bool particle_in_range(const ReaderPlacement& rp, const Particle& p) {
    return p.loc.on_graph() && detail::edge_in_range(rp, p.loc.edge, p.loc.offset);
}

inline ParticleSet init_particles(const Site& site, uint32_t reader, uint32_t n_particles,
                                  const ParticleConfig& cfg, Rng& rng, ObjectId object = 0) {
    const ReaderPlacement& rp = site.reader(reader);
    ParticleSet set;
    set.object = object;
    set.particles.resize(n_particles);
    for (Particle& p : set.particles) {
        p.loc = detail::sample_covered_arc(rp, rng);
        p.dir = rng.uniform() < 0.5 ? int8_t{1} : int8_t{-1};
        p.speed = detail::draw_speed(rng, cfg);
        p.weight = 1.0 / n_particles;
    }
    return set;
}

// One second of graph-constrained motion. Edge particles advance along their
// direction; passing a node they may enter an adjacent room, otherwise they
// keep going: straight through degree-2 nodes, a uniform incident edge at real
// intersections (reversal included), forced turnaround at dead ends. Room
// particles stay put with p_room_stay, otherwise step out to the door node.
inline void step_particle(const Site& site, Particle& p, const ParticleConfig& cfg, Rng& rng,
                          double dt = 1.0) {
    const WalkingGraph& g = site.graph();
    if (!p.loc.on_graph()) {
        if (rng.uniform() < cfg.p_room_stay) return;
        uint32_t node = p.entry_door;
        const std::vector<uint32_t>& doors = g.room_doors[p.loc.room];
        if (doors.size() > 1) node = doors[rng.uniform_int(doors.size())];
        const auto& adj = g.adjacency[node];
        auto [eid, peer] = adj.size() == 1 ? adj[0] : adj[rng.uniform_int(adj.size())];
        (void)peer;
        const GraphEdge& e = g.edges[eid];
        p.loc = GraphLocation::on_edge(eid, node == e.u ? 0.0 : e.length);
        p.dir = node == e.u ? 1 : -1;
        p.entry_door = UINT32_MAX;
        return; // exiting consumes the step
    }
    double remaining = p.speed * dt;
    for (int hops = 0; hops < 256 && remaining > 1e-12; ++hops) {
        const GraphEdge& e = g.edges[p.loc.edge];
        double to_node = p.dir > 0 ? e.length - p.loc.offset : p.loc.offset;
        if (remaining < to_node) {
            p.loc.offset += p.dir * remaining;
            return;
        }
        remaining -= to_node;
        uint32_t node = p.dir > 0 ? e.v : e.u;
        const std::vector<uint32_t>& rooms = g.rooms_at_node[node];
        if (!rooms.empty() && rng.uniform() < cfg.p_room_entry) {
            uint32_t room = rooms.size() == 1 ? rooms[0] : rooms[rng.uniform_int(rooms.size())];
            p.loc = GraphLocation::in_room(room);
            p.entry_door = node;
            return; // entering consumes the step
        }
        const auto& adj = g.adjacency[node];
        uint32_t eid;
        if (adj.size() == 1) {
            eid = adj[0].first; // dead end, turn around
        } else if (adj.size() == 2) {
            eid = adj[0].first == p.loc.edge ? adj[1].first : adj[0].first;
        } else {
            eid = adj[rng.uniform_int(adj.size())].first;
        }
        const GraphEdge& ne = g.edges[eid];
        p.loc = GraphLocation::on_edge(eid, node == ne.u ? 0.0 : ne.length);
        p.dir = node == ne.u ? 1 : -1;
    }
}

inline void step_motion(const Site& site, ParticleSet& set, const ParticleConfig& cfg, Rng& rng,
                        double dt = 1.0) {
    for (Particle& p : set.particles) step_particle(site, p, cfg, rng, dt);
}

// Sensing model: with a reading from device d, particles inside d's covered
// arc factor by p_hit, all others by eps. Without a reading, particles inside
// any device's range factor by 1 - p_hit (they should have been seen), the
// rest are untouched.
inline void update_weights(const Site& site, ParticleSet& set,
                           const std::optional<uint32_t>& reading_device,
                           const ParticleConfig& cfg) {
    if (reading_device) {
        const ReaderPlacement& rp = site.reader(*reading_device);
        for (Particle& p : set.particles)
            p.weight *= particle_in_range(rp, p) ? cfg.p_hit : cfg.eps;
    } else {
        for (Particle& p : set.particles) {
            bool covered = false;
            for (const ReaderPlacement& rp : site.readers()) {
                if (particle_in_range(rp, p)) {
                    covered = true;
                    break;
                }
            }
            if (covered) p.weight *= 1.0 - cfg.p_hit;
        }
    }
}

// returns the pre-normalization total; 0 signals a degenerate set
inline double normalize_weights(ParticleSet& set) {
    double total = 0.0;
    for (const Particle& p : set.particles) total += p.weight;
    if (total > 0.0 && std::isfinite(total))
        for (Particle& p : set.particles) p.weight /= total;
    return total;
}

// 1 / sum(w^2) over normalized weights; N_s when uniform, 1 when collapsed
inline double effective_sample_size(const ParticleSet& set) {
    double sq = 0.0;
    for (const Particle& p : set.particles) sq += p.weight * p.weight;
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

// Systematic resampling: N_s evenly spaced points with one random offset pick
// survivors proportionally to weight; every copy count lands within one of
// N_s * weight.
inline void resample_systematic(ParticleSet& set, Rng& rng) {
    uint32_t n = set.n();
    if (n == 0) return;
    double u0 = rng.uniform() / n;
    std::vector<Particle> out;
    out.reserve(n);
    double cum = 0.0;
    uint32_t i = 0;
    for (const Particle& p : set.particles) {
        cum += p.weight;
        while (i < n && (u0 + static_cast<double>(i) / n) < cum) {
            out.push_back(p);
            out.back().weight = 1.0 / n;
            ++i;
        }
    }
    while (out.size() < n) { // numerical slack on the last particle
        out.push_back(set.particles.back());
        out.back().weight = 1.0 / n;
    }
    set.particles = std::move(out);
}

// Post-resample roughening: a clone-breaking jitter on each particle's edge
// offset and speed. Without it consecutive readings trim the cloud below the
// anchor scale and the survivors' duplicates march as a delta function.
inline void roughen_positions(const Site& site, ParticleSet& set, const ParticleConfig& cfg,
                              Rng& rng) {
    for (Particle& p : set.particles) {
        if (!p.loc.on_graph()) continue;
        double len = site.graph().edges[p.loc.edge].length;
        if (cfg.roughen_std > 0.0)
            p.loc.offset = std::clamp(p.loc.offset + rng.normal(0.0, cfg.roughen_std), 0.0, len);
        if (cfg.roughen_speed_std > 0.0)
            p.speed = std::clamp(p.speed + rng.normal(0.0, cfg.roughen_speed_std),
                                 cfg.speed_min, cfg.speed_max);
    }
}

// degenerate rescue: fresh positions, directions and speeds inside the reading
// device's range, weights reset
inline void reinit_positions(const Site& site, ParticleSet& set, uint32_t reader,
                             const ParticleConfig& cfg, Rng& rng) {
    const ReaderPlacement& rp = site.reader(reader);
    for (Particle& p : set.particles) {
        p.loc = detail::sample_covered_arc(rp, rng);
        p.dir = rng.uniform() < 0.5 ? int8_t{1} : int8_t{-1};
        p.speed = detail::draw_speed(rng, cfg);
        p.weight = 1.0 / set.n();
        p.entry_door = UINT32_MAX;
    }
}

// Each particle snaps to the nearest anchor on its own edge; room particles
// snap to their room's anchor at the entry door. Probability is the particle
// count fraction, so per-object mass is exactly 1.
inline std::map<uint32_t, double> snap_to_anchors(const Site& site, const ParticleSet& set) {
    std::map<uint32_t, double> out;
    if (set.particles.empty()) return out;
    double unit = 1.0 / set.n();
    for (const Particle& p : set.particles) {
        uint32_t anchor;
        if (p.loc.on_graph()) {
            anchor = site.grid().nearest_on_edge(p.loc.edge, p.loc.offset);
        } else {
            uint32_t door = p.entry_door;
            if (door == UINT32_MAX) door = site.graph().room_doors[p.loc.room].front();
            anchor = site.grid().room_anchor_for_door(p.loc.room, door);
        }
        out[anchor] += unit;
    }
    return out;
}

// Algorithm: init particles in the most recent device's range, replay second
// by second to t_min = min(t2 + horizon, t_current) with motion, weighting on
// reading seconds, and systematic resampling, then discretize onto anchors.
// A reading no particle can explain (none inside the device's range), or that
// only a sliver of the cloud explains (effective sample size under the floor,
// so resampling would clone one or two strays), is a degenerate state: the
// cloud reseeds from that device's covered arc.
class ParticlePreprocessor {
public:
    explicit ParticlePreprocessor(const Site& site, ParticleConfig cfg = {})
        : site_(site), cfg_(cfg) {}

    std::map<uint32_t, double> object_distribution(const ReadingStore& store, ObjectId obj,
                                                   double t_current, uint64_t seed,
                                                   uint64_t salt = 0) const {
        auto win = store.aggregated_window(obj);
        if (!win) return {};
        Rng rng = Rng::stream(seed, "pf", obj, salt);
        ParticleSet set = init_particles(site_, win->d2, cfg_.n_particles, cfg_, rng, obj);
        int64_t t_min = std::min(win->t2 + static_cast<int64_t>(cfg_.horizon),
                                 static_cast<int64_t>(std::floor(t_current)));
        std::map<int64_t, uint32_t> reading_at;
        for (const AggregatedReading& r : win->entries) reading_at[r.second] = r.reader;
        for (int64_t t = win->t1 + 1; t <= t_min; ++t) {
            step_motion(site_, set, cfg_, rng);
            auto it = reading_at.find(t);
            if (it == reading_at.end()) continue;
            const ReaderPlacement& rp = site_.reader(it->second);
            bool any_in = false;
            for (const Particle& p : set.particles)
                if (particle_in_range(rp, p)) {
                    any_in = true;
                    break;
                }
            if (!any_in) {
                reinit_positions(site_, set, it->second, cfg_, rng);
                continue;
            }
            update_weights(site_, set, it->second, cfg_);
            double total = normalize_weights(set);
            if (total <= 0.0 || !std::isfinite(total) ||
                effective_sample_size(set) < cfg_.ess_floor_frac * set.n()) {
                reinit_positions(site_, set, it->second, cfg_, rng);
            } else {
                resample_systematic(set, rng);
                roughen_positions(site_, set, cfg_, rng);
            }
        }
        return snap_to_anchors(site_, set);
    }

    void process(const ReadingStore& store, const std::vector<ObjectId>& candidates,
                 double t_current, uint64_t seed, ApToObjIndex& index, uint64_t salt = 0) const {
        for (ObjectId obj : candidates) {
            std::map<uint32_t, double> dist = object_distribution(store, obj, t_current, seed, salt);
            if (dist.empty()) continue;
            index.commit_object(obj, {dist.begin(), dist.end()});
        }
    }

    const ParticleConfig& config() const { return cfg_; }

private:
    const Site& site_;
    ParticleConfig cfg_;
};

} // namespace indoorsq
