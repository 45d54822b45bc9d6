#include "landscape/assumptions.hpp"

#include <algorithm>

#include "landscape/errors.hpp"
#include "landscape/linear_baseline.hpp"

namespace landscape {

AssumptionReport check_assumptions(const Dataset& data, const std::vector<Eigen::Index>& dims,
                                   const PiecewiseLinearActivation& act, LossKind loss) {
    AssumptionReport report;

    try {
        LinearFit fit = fit_linear(data, loss);
        report.linear_residual = fit.V.norm();
        report.not_linearly_fittable = report.linear_residual > kResidualThreshold;
    } catch (const LandscapeError& e) {
        if (e.code() != ErrorCode::NonConvergence) throw;
        // no finite minimiser found; the baseline cannot be certified either way
        report.linear_residual = 0;
        report.not_linearly_fittable = false;
    }

    report.distinct_samples = data.has_distinct_columns();

    const Eigen::Index d_y = data.d_y();
    if (dims.size() >= 3) {
        auto hidden_begin = dims.begin() + 1;
        auto hidden_end = dims.end() - 1;
        Eigen::Index min_hidden = *std::min_element(hidden_begin, hidden_end);
        report.hidden_wider_than_output = min_hidden > d_y;
        report.corollary_widths =
            dims[1] >= d_y + 2 && std::all_of(hidden_begin, hidden_end, [&](Eigen::Index d) { return d >= d_y + 1; });
    }

    try {
        find_turning_point(act);
        report.admissible_turning_point = true;
    } catch (const LandscapeError&) {
        report.admissible_turning_point = false;
    }
    return report;
}

}  // namespace landscape
