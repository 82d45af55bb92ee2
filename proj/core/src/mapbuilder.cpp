#include "malign/mapbuilder.hpp"

#include "malign/csv.hpp"
#include "malign/errors.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

namespace malign {

ObservationDirectory::ObservationDirectory(const GridSpec& grid, std::size_t num_aps, std::size_t capacity)
    : grid_(grid), num_aps_(num_aps), capacity_(capacity), buffers_(grid.size()) {
    if (capacity < 1) throw ConfigError("observation directory: n_acc must be at least 1");
    if (num_aps < 1) throw ConfigError("observation directory: need at least one AP");
}

bool ObservationDirectory::record(std::size_t position_index, const RssVector& rss) {
    if (position_index >= buffers_.size()) {
        throw StructuralError("record_observation: position index " + std::to_string(position_index) +
                              " is off the grid");
    }
    if (static_cast<std::size_t>(rss.size()) != num_aps_) {
        throw StructuralError("record_observation: reading has " + std::to_string(rss.size()) +
                              " values, expected " + std::to_string(num_aps_));
    }
    auto& buf = buffers_[position_index];
    if (buf.size() >= capacity_) return false;
    buf.push_back(rss);
    return true;
}

bool ObservationDirectory::record(const Point2& position, const RssVector& rss) {
    const auto idx = grid_.index_of(position);
    if (!idx) {
        std::ostringstream msg;
        msg << "record_observation: (" << position.x << ", " << position.y << ") is not a grid position";
        throw StructuralError(msg.str());
    }
    return record(*idx, rss);
}

std::size_t ObservationDirectory::full_count() const {
    std::size_t n = 0;
    for (const auto& b : buffers_) n += b.size() >= capacity_ ? 1 : 0;
    return n;
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::calibrated: return "calibrated";
        case Provenance::estimated: return "estimated";
        case Provenance::unfilled: return "unfilled";
    }
    return "unknown";
}

EstimatedRadioMap finalize_map(const ObservationDirectory& dir, std::span<const Fingerprint> calibration,
                               std::size_t n_acc) {
    const std::size_t S = dir.size();
    const auto K = static_cast<Eigen::Index>(dir.num_aps());
    EstimatedRadioMap out;
    out.map.positions = dir.grid().positions();
    out.map.rss = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S), K);
    out.provenance.assign(S, Provenance::unfilled);
    out.counts.assign(S, 0);

    for (std::size_t i = 0; i < S; ++i) {
        const auto& buf = dir.readings(i);
        if (n_acc == 0 || buf.size() < n_acc) continue;
        RssVector sum = RssVector::Zero(K);
        for (std::size_t m = 0; m < n_acc; ++m) sum += buf[m];
        out.map.rss.row(static_cast<Eigen::Index>(i)) = (sum / static_cast<double>(n_acc)).transpose();
        out.provenance[i] = Provenance::estimated;
        out.counts[i] = n_acc;
    }
    for (const auto& fp : calibration) {
        const auto idx = dir.grid().index_of(fp.position);
        if (!idx) {
            std::ostringstream msg;
            msg << "finalize_map: calibration point (" << fp.position.x << ", " << fp.position.y
                << ") is not a grid position";
            throw StructuralError(msg.str());
        }
        if (fp.rss.size() != K) throw StructuralError("finalize_map: calibration fingerprint has wrong length");
        out.map.rss.row(static_cast<Eigen::Index>(*idx)) = fp.rss.transpose();
        out.provenance[*idx] = Provenance::calibrated;
        out.counts[*idx] = 0;
    }
    return out;
}

MapMetrics map_metrics(const EstimatedRadioMap& estimated, const RadioMap& truth, const RadioMap& baseline) {
    const std::size_t S = truth.size();
    if (estimated.size() != S || baseline.size() != S || estimated.map.num_aps() != truth.num_aps() ||
        baseline.num_aps() != truth.num_aps() || estimated.provenance.size() != S) {
        throw StructuralError("map_metrics: maps do not share grid and AP count");
    }
    for (std::size_t i = 0; i < S; ++i) {
        if (!(estimated.map.positions[i] == truth.positions[i]) || !(baseline.positions[i] == truth.positions[i])) {
            throw StructuralError("map_metrics: grid position " + std::to_string(i) + " differs between maps");
        }
    }
    const auto K = static_cast<double>(truth.num_aps());

    MapMetrics m;
    double sum_est = 0.0;
    double sum_overall = 0.0;
    double sum_base = 0.0;
    for (std::size_t i = 0; i < S; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double base_err = (baseline.rss.row(r) - truth.rss.row(r)).squaredNorm();
        sum_base += base_err;
        switch (estimated.provenance[i]) {
            case Provenance::estimated: {
                const double e = (estimated.map.rss.row(r) - truth.rss.row(r)).squaredNorm();
                sum_est += e;
                sum_overall += e;
                ++m.estimated_count;
                break;
            }
            case Provenance::calibrated:
                sum_overall += (estimated.map.rss.row(r) - truth.rss.row(r)).squaredNorm();
                ++m.calibrated_count;
                break;
            case Provenance::unfilled:
                sum_overall += base_err;
                break;
        }
    }
    m.rms_estimated = m.estimated_count > 0 ? std::sqrt(sum_est / (static_cast<double>(m.estimated_count) * K)) : 0.0;
    m.rms_overall = std::sqrt(sum_overall / (static_cast<double>(S) * K));
    m.rms_baseline = std::sqrt(sum_base / (static_cast<double>(S) * K));
    m.improvement_pct = m.rms_baseline > 0.0 ? 100.0 * (m.rms_baseline - m.rms_overall) / m.rms_baseline : 0.0;
    return m;
}

void write_estimated_map_csv(std::ostream& os, const EstimatedRadioMap& map) {
    os << "idx,x,y";
    for (std::size_t k = 1; k <= map.map.num_aps(); ++k) os << ",rss_" << k;
    os << ",provenance,count\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        os << i << ',' << csv::format_number(map.map.positions[i].x) << ','
           << csv::format_number(map.map.positions[i].y);
        for (std::size_t k = 0; k < map.map.num_aps(); ++k) {
            os << ',' << csv::format_number(map.map.rss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        os << ',' << to_string(map.provenance[i]) << ',' << map.counts[i] << '\n';
    }
}

}  // namespace malign
