#pragma once

#include <memory>

#include "indoorsq/anchor_grid.hpp"
#include "indoorsq/floorplan.hpp"
#include "indoorsq/walking_graph.hpp"

namespace indoorsq {

// Everything static about one deployment: plan, graph, anchor grid, reader
// placements. Built once, then shared read-only by filters and queries.
class Site {
public:
    static std::unique_ptr<Site> build(FloorPlan plan, double anchor_spacing = 1.0) {
        auto site = std::unique_ptr<Site>(new Site(std::move(plan)));
        site->graph_ = build_walking_graph(site->plan_);
        site->grid_ = generate_anchor_points(site->plan_, site->graph_, anchor_spacing);
        site->readers_ = compute_reader_placements(site->plan_, site->graph_);
        return site;
    }

    const FloorPlan& plan() const { return plan_; }
    const WalkingGraph& graph() const { return graph_; }
    const AnchorGrid& grid() const { return grid_; }
    const std::vector<ReaderPlacement>& readers() const { return readers_; }
    const ReaderPlacement& reader(uint32_t idx) const { return readers_.at(idx); }

    Site(const Site&) = delete;
    Site& operator=(const Site&) = delete;

private:
    explicit Site(FloorPlan plan) : plan_(std::move(plan)) {}

    FloorPlan plan_;
    WalkingGraph graph_;
    AnchorGrid grid_;
    std::vector<ReaderPlacement> readers_;
};

} // namespace indoorsq
