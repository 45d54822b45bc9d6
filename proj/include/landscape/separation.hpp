#pragma once

#include <vector>

#include "landscape/network.hpp"

namespace landscape {

/// Split of the samples into I (first l_prime entries of `order`) and J (the
/// rest) together with a direction beta such that, for every small enough
/// alpha > 0,
///   (1.1)  v_i - alpha beta^T x_i < v_j - alpha beta^T x_j   for i in I, j in J
///   (1.2)  sum_{i in I} u_i != 0.
struct SeparationResult {
    std::vector<Eigen::Index> order;  // sample indices, ascending v, group t reordered
    Eigen::Index l_prime = 0;         // |I|
    Vector beta;                      // zero in the trivial branch
    std::vector<Eigen::Index> group_bounds;  // cumulative end positions s_1 < ... < s_k = n
    std::size_t t_group = 0;                 // group containing the last member of I
    bool trivial_branch = false;

    std::vector<Eigen::Index> I() const;
    std::vector<Eigen::Index> J() const;
    /// Sample index of the last member of I.
    Eigen::Index pivot() const { return order[static_cast<std::size_t>(l_prime - 1)]; }
    /// True when I ends exactly at a group boundary (l' = s_{t+1}).
    bool pivot_closes_group() const { return l_prime == group_bounds[t_group]; }
};

struct DescentConstants {
    double alpha = 0;
    double gamma = 0;   // signed
    double eta1 = 0;    // threshold between the shifted I and J values
    double gap = 0;     // min_J q - max_I q, with q = v - alpha beta^T x
    double margin = 0;  // gap / 2 - |gamma|, positive by construction
};

/// Values are tied when they differ by at most this much relative to 1 + |v|.
inline constexpr double kTieTolerance = 1e-9;

/// Preconditions: sum(u) = 0 within 1e-10 ||u||_1, u != 0, columns of xs
/// pairwise distinct. Throws PreconditionViolated otherwise.
SeparationResult separate(const RowVector& u, const RowVector& v, const Matrix& xs);

/// v - alpha beta^T xs.
RowVector shifted_values(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha);

/// Strict check of (1.1) at the given alpha.
bool separation_holds(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha);

/// min_{j in J} q_j - max_{i in I} q_i at the given alpha.
double separation_gap(const SeparationResult& res, const RowVector& v, const Matrix& xs, double alpha);

/// The closed-form value of the same gap for small alpha:
///   l' < s_{t+1}:  min over the rest of group t of alpha beta^T (x_{l'} - x_i)
///   l' = s_{t+1}:  min over J of v_j - v_{l'} + alpha beta^T (x_{l'} - x_j)
double separation_gap_formula(const SeparationResult& res, const RowVector& v, const Matrix& xs,
                              double alpha);

/// |gamma| at the given alpha: alpha when I closes its group (or in the
/// trivial branch), otherwise a quarter of the within-group gap.
double gamma_magnitude(const SeparationResult& res, const Matrix& xs, double alpha);

/// Halves alpha from `alpha_start` until (1.1) holds strictly, the gap agrees
/// with separation_gap_formula and gap / 2 - |gamma| > 0. The sign of gamma is sgn(slope_ratio * sum_I u), which
/// makes the first-order risk change -(2/n) slope_ratio gamma sum_I u negative.
/// Throws SizingFailed after 200 halvings.
DescentConstants size_constants(const SeparationResult& res, const RowVector& u, const RowVector& v,
                                const Matrix& xs, double slope_ratio, double alpha_start = 1.0);

}  // namespace landscape
