#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "indoorsq/anchor_index.hpp"
#include "indoorsq/reading_store.hpp"
#include "indoorsq/site.hpp"
#include "indoorsq/stats.hpp"

namespace indoorsq {

struct KalmanConfig {
    double mu_v = 1.0;       // speed prior mean, m/s
    double sigma_v = 0.1;    // speed prior std
    double mu_t_room = 10.0; // mean room-stay time, s
    double tau = 0.05;       // hypothesis pruning threshold
    double horizon = 60.0;   // extrapolation cap past the last reading, s
};

// 1-D belief over arc length measured from the route origin (the previous
// detecting device), in meters.
struct GaussianBelief {
    double mean = 0.0;
    double variance = 1.0;
};

struct RouteLeg {
    uint32_t edge = 0;
    double from = 0.0, to = 0.0; // offsets on the edge, travel goes from -> to
    double length() const { return std::abs(to - from); }
    int dir() const { return to >= from ? 1 : -1; }
};

// One concrete shortest route between two device locations.
struct Route {
    std::vector<RouteLeg> legs;
    std::vector<uint32_t> nodes; // graph nodes visited, in travel order
    double length = 0.0;
    uint32_t rooms = 0; // door-bearing rooms reachable along the way (m)
    // where the route ends and which way travel was heading there
    uint32_t end_edge = 0;
    double end_off = 0.0;
    int end_dir = 0; // 0 when the route has no direction (d1 == d2)
};

struct PathHypothesis {
    uint32_t route = 0;         // index into the route list
    uint32_t rooms_entered = 0; // j
    GaussianBelief belief;
    double weight = 0.0;
    bool feasible = true;
};

namespace detail {

inline uint32_t count_route_rooms(const WalkingGraph& g, const std::vector<uint32_t>& nodes) {
    std::set<uint32_t> rooms;
    for (uint32_t n : nodes)
        for (uint32_t r : g.rooms_at_node[n]) rooms.insert(r);
    return static_cast<uint32_t>(rooms.size());
}

// all node paths a -> b whose length matches the shortest distance within tol
inline void tied_node_paths(const WalkingGraph& g, uint32_t a, uint32_t b, size_t max_paths,
                            std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>>& out) {
    const std::vector<double>& to_b = g.node_distances(b);
    double target = to_b[a];
    std::vector<uint32_t> nodes{a};
    std::vector<uint32_t> edges;
    auto dfs = [&](auto&& self, uint32_t n, double len) -> void {
        if (out.size() >= max_paths) return;
        if (n == b && std::abs(len - target) <= 1e-6) {
            out.push_back({nodes, edges});
            return;
        }
        for (auto [eid, peer] : g.adjacency[n]) {
            if (len + g.edges[eid].length + to_b[peer] <= target + 1e-6) {
                nodes.push_back(peer);
                edges.push_back(eid);
                self(self, peer, len + g.edges[eid].length);
                nodes.pop_back();
                edges.pop_back();
            }
        }
    };
    dfs(dfs, a, 0.0);
}

} // namespace detail

// All minimal-length routes between two readers' graph locations, each with its
// count of adjacent door-bearing rooms. d1 == d2 yields a single empty route
// whose room count covers the rooms along d1's covered arc.
inline std::vector<Route> enumerate_paths(const Site& site, uint32_t d1, uint32_t d2,
                                          size_t max_routes = 32) {
    const WalkingGraph& g = site.graph();
    std::vector<Route> routes;

    if (d1 == d2) {
        const ReaderPlacement& rp = site.reader(d1);
        Route r;
        r.end_edge = rp.loc.edge;
        r.end_off = rp.loc.offset;
        r.end_dir = 0;
        std::set<uint32_t> rooms;
        for (const auto& iv : rp.covered) {
            const GraphEdge& e = g.edges[iv.edge];
            if (iv.lo <= 1e-9)
                for (uint32_t rm : g.rooms_at_node[e.u]) rooms.insert(rm);
            if (iv.hi >= e.length - 1e-9)
                for (uint32_t rm : g.rooms_at_node[e.v]) rooms.insert(rm);
        }
        r.rooms = static_cast<uint32_t>(rooms.size());
        routes.push_back(std::move(r));
        return routes;
    }

    const GraphLocation& l1 = site.reader(d1).loc;
    const GraphLocation& l2 = site.reader(d2).loc;
    const GraphEdge& e1 = g.edges[l1.edge];
    const GraphEdge& e2 = g.edges[l2.edge];
    double best = g.shortest_network_distance(l1, l2);

    auto same_legs = [](const Route& a, const Route& b) {
        if (a.legs.size() != b.legs.size()) return false;
        for (size_t i = 0; i < a.legs.size(); ++i)
            if (a.legs[i].edge != b.legs[i].edge || std::abs(a.legs[i].from - b.legs[i].from) > 1e-9 ||
                std::abs(a.legs[i].to - b.legs[i].to) > 1e-9)
                return false;
        return true;
    };
    auto finalize = [&](Route& r) {
        for (const Route& prev : routes)
            if (same_legs(prev, r)) return;
        r.length = 0.0;
        for (const RouteLeg& leg : r.legs) r.length += leg.length();
        if (!r.legs.empty()) {
            const RouteLeg& last = r.legs.back();
            r.end_edge = last.edge;
            r.end_off = last.to;
            r.end_dir = last.dir();
        } else {
            r.end_edge = l2.edge;
            r.end_off = l2.offset;
            r.end_dir = 0;
        }
        r.rooms = detail::count_route_rooms(g, r.nodes);
        routes.push_back(std::move(r));
    };

    if (l1.edge == l2.edge && std::abs(l1.offset - l2.offset) <= best + 1e-6) {
        Route r;
        if (std::abs(l2.offset - l1.offset) > 1e-12)
            r.legs.push_back({l1.edge, l1.offset, l2.offset});
        finalize(r);
    }

    for (uint32_t a : {e1.u, e1.v}) {
        double head = a == e1.u ? l1.offset : e1.length - l1.offset;
        for (uint32_t b : {e2.u, e2.v}) {
            double tail = b == e2.u ? l2.offset : e2.length - l2.offset;
            if (head + g.node_to_node(a, b) + tail > best + 1e-6) continue;
            std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> paths;
            detail::tied_node_paths(g, a, b, max_routes, paths);
            for (auto& [nodes, edges] : paths) {
                if (routes.size() >= max_routes) break;
                Route r;
                if (head > 1e-12)
                    r.legs.push_back({l1.edge, l1.offset, a == e1.u ? 0.0 : e1.length});
                for (size_t i = 0; i < edges.size(); ++i) {
                    const GraphEdge& e = g.edges[edges[i]];
                    double from = nodes[i] == e.u ? 0.0 : e.length;
                    double to = nodes[i] == e.u ? e.length : 0.0;
                    r.legs.push_back({edges[i], from, to});
                }
                if (tail > 1e-12)
                    r.legs.push_back({l2.edge, b == e2.u ? 0.0 : e2.length, l2.offset});
                r.nodes = nodes;
                finalize(r);
            }
        }
    }
    return routes;
}

struct PredictResult {
    GaussianBelief belief;
    bool feasible = true;
};

// Gaussian prediction along a route with j room stays charged at their mean.
inline PredictResult predict(double x1_mean, double sigma1_sq, double t1, double t2,
                             uint32_t rooms_entered, const KalmanConfig& cfg) {
    PredictResult out;
    double travel = (t2 - t1) - rooms_entered * cfg.mu_t_room;
    out.feasible = travel >= 0.0;
    out.belief.mean = x1_mean + cfg.mu_v * std::max(travel, 0.0);
    out.belief.variance = sigma1_sq + cfg.sigma_v * cfg.sigma_v * (t2 - t1);
    return out;
}

// Keep hypotheses whose mass over the destination device's range [L-r2, L+r2]
// reaches tau; survivors share weight uniformly. Falls back to the single
// best-overlap hypothesis when nothing survives.
inline void prune_hypotheses(std::vector<PathHypothesis>& hyps, double L, double r2, double tau) {
    std::vector<PathHypothesis> kept;
    double best_overlap = -1.0;
    size_t best_idx = hyps.size();
    for (size_t i = 0; i < hyps.size(); ++i) {
        if (!hyps[i].feasible) continue;
        double sd = std::sqrt(std::max(hyps[i].belief.variance, 1e-18));
        double overlap = normal_mass(L - r2, L + r2, hyps[i].belief.mean, sd);
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best_idx = i;
        }
        if (overlap >= tau) kept.push_back(hyps[i]);
    }
    if (kept.empty() && best_idx < hyps.size()) kept.push_back(hyps[best_idx]);
    for (PathHypothesis& h : kept) h.weight = 1.0 / static_cast<double>(kept.size());
    hyps = std::move(kept);
}

struct KalmanUpdateResult {
    GaussianBelief posterior;
    double gain = 0.0;
};

inline KalmanUpdateResult kalman_update(const GaussianBelief& prior, double z, double sigma_z_sq) {
    KalmanUpdateResult out;
    out.gain = prior.variance / (prior.variance + sigma_z_sq);
    out.posterior.mean = prior.mean + out.gain * (z - prior.mean);
    out.posterior.variance = prior.variance - out.gain * prior.variance;
    return out;
}

namespace detail {

inline void edge_stations(const AnchorGrid& grid, uint32_t edge, double from, double to,
                          bool include_start, std::vector<std::pair<uint32_t, double>>& out) {
    out.clear();
    double lo = std::min(from, to) - 1e-9, hi = std::max(from, to) + 1e-9;
    for (const AnchorPoint& a : grid.on_edge(edge))
        if (a.loc.offset >= lo && a.loc.offset <= hi) out.push_back({a.id, a.loc.offset});
    if (from > to) std::reverse(out.begin(), out.end());
    if (!include_start)
        while (!out.empty() && std::abs(out.front().second - from) <= 1e-9)
            out.erase(out.begin());
}

// Spreads one hypothesis's belief over anchor points. Walks the fixed route
// first, then continues past its end, branching uniformly at each node over
// the continuing edges and adjacent rooms. Every interval of the distribution
// is emitted exactly once (to the anchor on its near side), and any truncated
// or cut-off tail is dumped on the last visited anchor, so emitted mass per
// hypothesis equals its weight to rounding error.
class ForwardWalker {
public:
    ForwardWalker(const Site& site, double mean, double sd, double arc_stop,
                  std::map<uint32_t, double>& out)
        : site_(site), mean_(mean), sd_(sd), arc_stop_(arc_stop), out_(&out) {}

    void run(const Route& route, double weight) {
        Cursor c{weight};
        double s = 0.0;
        std::vector<std::pair<uint32_t, double>> st;
        for (const RouteLeg& leg : route.legs) {
            edge_stations(site_.grid(), leg.edge, leg.from, leg.to, true, st);
            for (auto [a, off] : st) station(c, a, s + std::abs(off - leg.from));
            s += leg.length();
        }
        if (route.end_dir == 0) {
            // no travel direction: stand at the end point and split both ways
            if (!c.has_prev)
                station(c, site_.grid().nearest_on_edge(route.end_edge, route.end_off), s);
            const GraphEdge& e = site_.graph().edges[route.end_edge];
            Cursor fwd = c, bwd = c;
            fwd.w = c.w / 2;
            bwd.w = c.w / 2;
            walk_span(fwd, route.end_edge, route.end_off, e.length, s, false, 0);
            walk_span(bwd, route.end_edge, route.end_off, 0.0, s, false, 0);
            return;
        }
        const GraphEdge& e = site_.graph().edges[route.end_edge];
        double to = route.end_dir > 0 ? e.length : 0.0;
        walk_span(c, route.end_edge, route.end_off, to, s, false, 0);
    }

private:
    struct Cursor {
        double w = 0.0;
        bool has_prev = false;
        uint32_t prev_a = 0;
        double prev_s = 0.0;
    };

    static constexpr double kTailCutoff = 1e-9;
    static constexpr int kMaxBranches = 10000;
    static constexpr int kMaxDepth = 64;

    const Site& site_;
    double mean_, sd_, arc_stop_;
    std::map<uint32_t, double>* out_;
    int branches_ = 0;

    double cdf(double s) const { return normal_cdf(s, mean_, sd_); }

    void emit(uint32_t anchor, double mass) {
        if (mass > 0.0) (*out_)[anchor] += mass;
    }

    void station(Cursor& c, uint32_t a, double s) {
        if (!c.has_prev)
            emit(a, c.w * cdf(s)); // everything behind the first station
        else
            emit(c.prev_a, c.w * (cdf(s) - cdf(c.prev_s)));
        c.has_prev = true;
        c.prev_a = a;
        c.prev_s = s;
    }

    void finish(const Cursor& c) {
        if (c.has_prev) emit(c.prev_a, c.w * (1.0 - cdf(c.prev_s)));
    }

    void walk_span(Cursor c, uint32_t edge, double from, double to, double s_base,
                   bool include_start, int depth) {
        std::vector<std::pair<uint32_t, double>> st;
        edge_stations(site_.grid(), edge, from, to, include_start, st);
        for (auto [a, off] : st) {
            double s = s_base + std::abs(off - from);
            if (s > arc_stop_) {
                finish(c);
                return;
            }
            station(c, a, s);
        }
        const GraphEdge& e = site_.graph().edges[edge];
        uint32_t node = to <= 1e-9 ? e.u : e.v;
        branch(c, node, edge, s_base + std::abs(to - from), depth);
    }

    void branch(Cursor c, uint32_t node, uint32_t in_edge, double s_node, int depth) {
        const WalkingGraph& g = site_.graph();
        double tail = c.w * (1.0 - cdf(s_node));
        std::vector<std::pair<uint32_t, uint32_t>> opts;
        for (auto [eid, peer] : g.adjacency[node])
            if (eid != in_edge) opts.push_back({eid, peer});
        const std::vector<uint32_t>& rooms = g.rooms_at_node[node];
        size_t nb = opts.size() + rooms.size();
        if (tail < kTailCutoff || s_node >= arc_stop_ || depth >= kMaxDepth ||
            branches_ >= kMaxBranches || nb == 0) {
            finish(c);
            return;
        }
        ++branches_;
        double share = c.w / static_cast<double>(nb);
        for (uint32_t room : rooms)
            emit(site_.grid().room_anchor_for_door(room, node), share * (1.0 - cdf(s_node)));
        for (auto [eid, peer] : opts) {
            (void)peer;
            const GraphEdge& e = g.edges[eid];
            Cursor c2 = c;
            c2.w = share;
            double from = node == e.u ? 0.0 : e.length;
            double to = node == e.u ? e.length : 0.0;
            walk_span(c2, eid, from, to, s_node, true, depth + 1);
        }
    }
};

} // namespace detail

// Algorithm: per candidate with a two-device window, enumerate shortest routes
// d1 -> d2, predict per (route, rooms-entered) pair, prune against d2's range,
// run the measurement update with z = network distance d1 -> d2, extrapolate
// forward to t_min = min(t2 + horizon, t_current), and integrate the belief
// over anchor intervals.
class KalmanPreprocessor {
public:
    explicit KalmanPreprocessor(const Site& site, KalmanConfig cfg = {})
        : site_(site), cfg_(cfg) {}

    // Anchor masses for one object; empty when the object lacks a two-device
    // window and is skipped.
    std::map<uint32_t, double> object_distribution(const ReadingStore& store, ObjectId obj,
                                                   double t_current) const {
        std::map<uint32_t, double> out;
        auto win = store.aggregated_window(obj);
        if (!win || win->d1 == win->d2) return out;

        const ReaderPlacement& rp1 = site_.reader(win->d1);
        const ReaderPlacement& rp2 = site_.reader(win->d2);
        std::vector<Route> routes = enumerate_paths(site_, win->d1, win->d2);
        if (routes.empty()) return out;
        double L = site_.graph().shortest_network_distance(rp1.loc, rp2.loc);
        double sigma1_sq = rp1.range * rp1.range;
        double sigma_z_sq = rp2.range * rp2.range;

        std::vector<PathHypothesis> hyps;
        for (uint32_t ri = 0; ri < routes.size(); ++ri) {
            for (uint32_t j = 0; j <= routes[ri].rooms; ++j) {
                PathHypothesis h;
                h.route = ri;
                h.rooms_entered = j;
                PredictResult pr = predict(0.0, sigma1_sq, static_cast<double>(win->t1),
                                           static_cast<double>(win->t2), j, cfg_);
                h.belief = pr.belief;
                h.feasible = pr.feasible;
                hyps.push_back(h);
            }
        }
        prune_hypotheses(hyps, L, rp2.range, cfg_.tau);
        if (hyps.empty()) return out;

        double t_min = std::max(static_cast<double>(win->t2),
                                std::min(static_cast<double>(win->t2) + cfg_.horizon, t_current));
        double fwd_dt = t_min - static_cast<double>(win->t2);
        for (const PathHypothesis& h : hyps) {
            GaussianBelief post = kalman_update(h.belief, L, sigma_z_sq).posterior;
            // The fallback path can feed a prior so far from z that the updated
            // mean still lands outside the device arc that just produced t2.
            // Such a posterior contradicts its own measurement; snap it back.
            double sd_post = std::sqrt(std::max(post.variance, 1e-18));
            if (normal_mass(L - rp2.range, L + rp2.range, post.mean, sd_post) < cfg_.tau)
                post.mean = L;
            GaussianBelief fwd;
            fwd.mean = post.mean + cfg_.mu_v * fwd_dt;
            fwd.variance = post.variance + cfg_.sigma_v * cfg_.sigma_v * fwd_dt;
            double sd = std::sqrt(std::max(fwd.variance, 1e-18));
            const Route& route = routes[h.route];
            double arc_stop = std::max(route.length + (cfg_.mu_v + 3.0 * cfg_.sigma_v) * fwd_dt,
                                       fwd.mean) + 3.0 * sd;
            detail::ForwardWalker walker(site_, fwd.mean, sd, arc_stop, out);
            walker.run(route, h.weight);
        }
        return out;
    }

    void process(const ReadingStore& store, const std::vector<ObjectId>& candidates,
                 double t_current, ApToObjIndex& index) const {
        for (ObjectId obj : candidates) {
            std::map<uint32_t, double> dist = object_distribution(store, obj, t_current);
            if (dist.empty()) continue;
            index.commit_object(obj, {dist.begin(), dist.end()});
        }
    }

    const KalmanConfig& config() const { return cfg_; }

private:
    const Site& site_;
    KalmanConfig cfg_;
};

} // namespace indoorsq
