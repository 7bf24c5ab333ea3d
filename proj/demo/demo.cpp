// Library walk-through: simulate the reference parameters, fit the built-in
// dataset, and rank parameter influence on the negative stable cumulative.

#include <cstdio>

#include "esfi/esfi.hpp"

int main() {
    using namespace esfi;

    const auto ref = reference_params();
    const auto traj = integrate(ref, make_initial_state(ref, 68, 40, 265), TimeGrid::uniform(0, 60, 0.5));
    for (Emotion e : kEmotions) {
        const auto pk = peak_instantaneous(traj, e);
        std::printf("F_%s peaks at %.1f (t=%.1f); C_%s settles at %.1f\n", emotion_name(e).data(), pk.value,
                    pk.time, emotion_name(e).data(), stable_cumulative(traj, e));
    }

    const auto ds = builtin_negative_event();
    const auto fitted = fit(ds);
    std::printf("\nfit objective %.1f, RMSE %.1f / %.1f / %.1f\n", fitted.objective, fitted.per_series_rmse[0],
                fitted.per_series_rmse[1], fitted.per_series_rmse[2]);
    for (Param p : kParams) std::printf("  %-9s %.6g\n", param_name(p).data(), fitted.params.get(p));

    const auto rep = sensitivity_run(fitted.params, ranges_around(fitted.params), 1000, 42);
    std::printf("\nPRCC on C_neg_s:\n");
    for (Param p : kParams) {
        const auto& cell = rep.at(p, IndexId::CNegStable);
        std::printf("  %-9s %+.3f  %s\n", param_name(p).data(), cell.value.value_or(0.0),
                    cell.strength ? strength_name(*cell.strength).data() : "undefined");
    }
}
