#pragma once

#include <vector>

#include "landscape/activation.hpp"
#include "landscape/loss.hpp"
#include "landscape/network.hpp"

namespace landscape {

struct AssumptionReport {
    bool not_linearly_fittable = false;  // (1) linear baseline leaves a nonzero residual
    bool distinct_samples = false;       // (2)
    bool hidden_wider_than_output = false;  // (3)
    bool admissible_turning_point = false;  // (4) some kink with s- + s+ != 0
    bool corollary_widths = false;          // (5) d_1 >= d_Y + 2, d_i >= d_Y + 1
    double linear_residual = 0;             // ||V||_F at the fitted baseline

    /// Conditions of the main construction: (1) to (4).
    bool main_route() const {
        return not_linearly_fittable && distinct_samples && hidden_wider_than_output &&
               admissible_turning_point;
    }
    /// Conditions of the equal-slope route: (1), (2), (5).
    bool corollary_route() const { return not_linearly_fittable && distinct_samples && corollary_widths; }
};

/// `dims` is (d_0, ..., d_L); d_0 and d_L must match the data.
AssumptionReport check_assumptions(const Dataset& data, const std::vector<Eigen::Index>& dims,
                                   const PiecewiseLinearActivation& act, LossKind loss);

}  // namespace landscape
