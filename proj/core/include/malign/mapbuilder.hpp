#pragma once

#include "malign/environment.hpp"
#include "malign/localizer.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace malign {

/// Per-grid-position buffers of localized RSS readings. Buffers stop
/// accepting readings once they hold `capacity` entries (first-n policy).
class ObservationDirectory {
public:
    ObservationDirectory(const GridSpec& grid, std::size_t num_aps, std::size_t capacity);

    /// Returns false when the buffer was already full and the reading was dropped.
    bool record(std::size_t position_index, const RssVector& rss);
    /// Throws StructuralError if `position` is not exactly a grid position.
    bool record(const Point2& position, const RssVector& rss);

    std::size_t count(std::size_t position_index) const { return buffers_.at(position_index).size(); }
    const std::vector<RssVector>& readings(std::size_t position_index) const { return buffers_.at(position_index); }
    std::size_t capacity() const { return capacity_; }
    std::size_t num_aps() const { return num_aps_; }
    std::size_t size() const { return buffers_.size(); }
    std::size_t full_count() const;
    const GridSpec& grid() const { return grid_; }

private:
    GridSpec grid_;
    std::size_t num_aps_;
    std::size_t capacity_;
    std::vector<std::vector<RssVector>> buffers_;
};

enum class Provenance { calibrated, estimated, unfilled };

const char* to_string(Provenance p);

struct EstimatedRadioMap {
    RadioMap map;  // rows of unfilled positions are zero
    std::vector<Provenance> provenance;
    std::vector<std::size_t> counts;  // readings averaged; 0 for calibrated/unfilled

    std::size_t size() const { return map.size(); }
};

/// Calibration fingerprints are copied verbatim; positions whose buffer holds
/// `n_acc` readings get the per-AP mean; everything else is unfilled.
EstimatedRadioMap finalize_map(const ObservationDirectory& dir, std::span<const Fingerprint> calibration,
                               std::size_t n_acc);

struct MapMetrics {
    double rms_estimated = 0.0;  // over estimated positions only; 0 when there are none
    double rms_overall = 0.0;    // over the completed map, unfilled -> baseline
    double rms_baseline = 0.0;   // baseline vs truth
    double improvement_pct = 0.0;
    std::size_t estimated_count = 0;
    std::size_t calibrated_count = 0;
};

MapMetrics map_metrics(const EstimatedRadioMap& estimated, const RadioMap& truth, const RadioMap& baseline);

/// Radio map CSV plus `provenance,count` columns.
void write_estimated_map_csv(std::ostream& os, const EstimatedRadioMap& map);

}  // namespace malign
