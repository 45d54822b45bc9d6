#include "landscape/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "landscape/errors.hpp"

namespace landscape {

namespace {

using Index = Eigen::Index;

double group_tolerance(double v) { return kTieTolerance * (1.0 + std::abs(v)); }

}  // namespace

std::vector<Index> SeparationResult::I() const {
    return {order.begin(), order.begin() + l_prime};
}

std::vector<Index> SeparationResult::J() const {
    return {order.begin() + l_prime, order.end()};
}

SeparationResult separate(const RowVector& u, const RowVector& v, const Matrix& xs) {
    const Index n = u.size();
    if (v.size() != n || xs.cols() != n) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "u, v and xs must describe the same samples");
    }
    const double u_l1 = u.cwiseAbs().sum();
    if (n == 0 || u_l1 == 0.0) throw LandscapeError(ErrorCode::PreconditionViolated, "u is zero");
    const double zero_tol = 1e-10 * u_l1;
    if (std::abs(u.sum()) > zero_tol) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "entries of u do not sum to zero");
    }
    if (!Dataset(xs, Matrix::Zero(1, n)).has_distinct_columns()) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "samples are not pairwise distinct");
    }

    SeparationResult res;
    res.order.resize(static_cast<std::size_t>(n));
    std::iota(res.order.begin(), res.order.end(), Index{0});
    std::stable_sort(res.order.begin(), res.order.end(), [&](Index a, Index b) { return v[a] < v[b]; });

    Index start = 0;
    for (Index p = 1; p <= n; ++p) {
        if (p == n || v[res.order[p]] - v[res.order[start]] > group_tolerance(v[res.order[start]])) {
            res.group_bounds.push_back(p);
            start = p;
        }
    }

    // A group boundary with nonzero prefix sum separates with beta = 0.
    double prefix = 0;
    Index pos = 0;
    for (std::size_t g = 0; g + 1 < res.group_bounds.size(); ++g) {
        for (; pos < res.group_bounds[g]; ++pos) prefix += u[res.order[pos]];
        if (std::abs(prefix) > zero_tol) {
            res.trivial_branch = true;
            res.l_prime = res.group_bounds[g];
            res.t_group = g;
            res.beta = Vector::Zero(xs.rows());
            return res;
        }
    }

    std::size_t g = 0;
    Index begin = 0;
    for (;; ++g) {
        bool any = false;
        for (Index p = begin; p < res.group_bounds[g]; ++p) any = any || std::abs(u[res.order[p]]) > zero_tol;
        if (any) break;
        begin = res.group_bounds[g];
    }
    const Index end = res.group_bounds[g];

    Index pivot = -1;
    double best = -1;
    for (Index p = begin; p < end; ++p) {
        Index i = res.order[p];
        if (std::abs(u[i]) <= zero_tol) continue;
        double norm = xs.col(i).norm();
        if (norm > best || (norm == best && i < pivot)) {
            best = norm;
            pivot = i;
        }
    }
    res.beta = xs.col(pivot);
    const double beta_sq = res.beta.squaredNorm();

    std::vector<Index> front, back;
    for (Index p = begin; p < end; ++p) {
        Index i = res.order[p];
        if (i == pivot) continue;
        (res.beta.dot(xs.col(i)) >= beta_sq ? front : back).push_back(i);
    }
    auto it = std::copy(front.begin(), front.end(), res.order.begin() + begin);
    *it++ = pivot;
    std::copy(back.begin(), back.end(), it);

    res.l_prime = begin + static_cast<Index>(front.size()) + 1;
    res.t_group = g;
    if (res.l_prime == n) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "separation left J empty");
    }
    return res;
}

RowVector shifted_values(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha) {
    return v - alpha * (res.beta.transpose() * xs);
}

double separation_gap(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha) {
    RowVector q = shifted_values(res, v, xs, alpha);
    double max_i = -std::numeric_limits<double>::infinity();
    double min_j = std::numeric_limits<double>::infinity();
    for (Index p = 0; p < static_cast<Index>(res.order.size()); ++p) {
        double value = q[res.order[static_cast<std::size_t>(p)]];
        if (p < res.l_prime) max_i = std::max(max_i, value);
        else min_j = std::min(min_j, value);
    }
    return min_j - max_i;
}

bool separation_holds(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha) {
    return separation_gap(res, v, xs, alpha) > 0;
}

double separation_gap_formula(const SeparationResult& res, const RowVector& v, const Matrix& xs,
                              double alpha) {
    const Index pivot = res.pivot();
    const Vector& x_l = xs.col(pivot);
    double best = std::numeric_limits<double>::infinity();
    if (res.trivial_branch || res.pivot_closes_group()) {
        for (Index j : res.J()) {
            best = std::min(best, v[j] - v[pivot] + alpha * res.beta.dot(x_l - xs.col(j)));
        }
    } else {
        for (Index p = res.l_prime; p < res.group_bounds[res.t_group]; ++p) {
            Index i = res.order[static_cast<std::size_t>(p)];
            best = std::min(best, alpha * res.beta.dot(x_l - xs.col(i)));
        }
    }
    return best;
}

double gamma_magnitude(const SeparationResult& res, const Matrix& xs, double alpha) {
    if (res.trivial_branch || res.pivot_closes_group()) return alpha;
    const Vector& x_l = xs.col(res.pivot());
    double best = std::numeric_limits<double>::infinity();
    for (Index p = res.l_prime; p < res.group_bounds[res.t_group]; ++p) {
        Index i = res.order[static_cast<std::size_t>(p)];
        best = std::min(best, alpha * res.beta.dot(x_l - xs.col(i)));
    }
    return 0.25 * best;
}

DescentConstants size_constants(const SeparationResult& res, const RowVector& u, const RowVector& v,
                                const Matrix& xs, double slope_ratio, double alpha_start) {
    double sum_i = 0;
    for (Index i : res.I()) sum_i += u[i];
    const double direction = slope_ratio * sum_i;
    if (direction == 0.0 || !std::isfinite(direction)) {
        throw LandscapeError(ErrorCode::SizingFailed, "the sign of gamma is undetermined");
    }

    // merged near-ties leave the closed form off by at most the spread of group t
    double spread = 0;
    {
        Index lo = res.t_group == 0 ? 0 : res.group_bounds[res.t_group - 1];
        Index hi = res.group_bounds[res.t_group];
        double first = v[res.order[static_cast<std::size_t>(lo)]];
        for (Index p = lo; p < hi; ++p) spread = std::max(spread, std::abs(v[res.order[static_cast<std::size_t>(p)]] - first));
    }

    double alpha = alpha_start;
    for (int halving = 0; halving <= 200; ++halving, alpha *= 0.5) {
        double gap = separation_gap(res, v, xs, alpha);
        if (!(gap > 0)) continue;
        double formula = separation_gap_formula(res, v, xs, alpha);
        if (std::abs(gap - formula) > 1e-12 * (1.0 + std::abs(gap)) + spread) continue;
        double magnitude = gamma_magnitude(res, xs, alpha);
        double margin = 0.5 * gap - magnitude;
        if (!(margin > 0) || !(magnitude > 0)) continue;

        RowVector q = shifted_values(res, v, xs, alpha);
        double max_i = -std::numeric_limits<double>::infinity();
        for (Index i : res.I()) max_i = std::max(max_i, q[i]);

        DescentConstants c;
        c.alpha = alpha;
        c.gamma = direction > 0 ? magnitude : -magnitude;
        c.eta1 = max_i + 0.5 * gap;
        c.gap = gap;
        c.margin = margin;
        return c;
    }
    throw LandscapeError(ErrorCode::SizingFailed, "no alpha in 200 halvings satisfies the separation margin");
}

}  // namespace landscape
