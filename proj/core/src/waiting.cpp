#include <cmath>
#include <stdexcept>

#include "gcoerce/frontier.hpp"

namespace gcoerce {

WaitingTimeRecord waiting_time(const VelocityField& field, const Vec3& source, double c,
                               double horizon, const WaitingTimeSetup& setup) {
    setup.grid.validate();
    if (!(c > 0.0) || c >= setup.speed)
        throw std::invalid_argument("waiting_time: need 0 < c < speed");
    if (horizon <= setup.t0) throw std::invalid_argument("waiting_time: horizon before t0");

    const double h = setup.grid.h;
    const double delta = setup.delta > 0.0 ? setup.delta : 2.0 * h;
    const double sample_dt =
        setup.sample_dt > 0.0 ? setup.sample_dt : (horizon - setup.t0) / 128.0;

    std::vector<double> sample_times;
    for (int k = 0;; ++k) {
        const double t = setup.t0 + k * sample_dt;
        if (t >= horizon - 1e-12) break;
        sample_times.push_back(t);
    }
    sample_times.push_back(horizon);

    WaitingTimeRecord record;
    record.t0 = setup.t0;
    record.source = source;
    record.coercivity_c = c;
    record.horizon = horizon;
    record.grid_h = h;
    record.speed = setup.speed;
    record.delta = delta;
    for (double side : setup.diagnostic_box_sides)
        record.box_volumes.push_back({side, {}});

    LevelSetState state = init_point_source(setup.grid, source, delta, setup.t0, setup.speed);
    EvolveDiagnostics diag;
    auto visitor = [&](const LevelSetState& s) {
        const ReachableSet set = reachable_indicator(s, setup.threshold);
        record.times.push_back(s.time);
        record.total_volume.push_back(volume(set));
        record.inscribed_radius.push_back(inscribed_ball_radius(set));
        record.max_radius_curve.push_back(max_radius(set));
        for (auto& curve : record.box_volumes)
            curve.volume.push_back(volume_in_box(set, source, curve.side));
    };
    evolve(state, field, horizon, sample_times, visitor, setup.cfl_safety, &diag);
    record.perimeter_time_integral = diag.perimeter_time_integral;
    record.time_variation = diag.time_variation;

    // Smallest sampled t* whose whole suffix keeps the inscribed ball at pace
    // c (t - t0) - 2h; scan backward so one late dip censors everything before it.
    std::size_t first_good = record.times.size();
    for (std::size_t j = record.times.size(); j-- > 0;) {
        const double need = c * (record.times[j] - setup.t0) - 2.0 * h;
        if (record.inscribed_radius[j] < need - 1e-12) break;
        first_good = j;
    }
    if (first_good < record.times.size()) {
        record.measured_T = record.times[first_good];
        record.censored = false;
    } else {
        record.measured_T = horizon;
        record.censored = true;
    }
    return record;
}

}  // namespace gcoerce
