#include "landscape/cell_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "landscape/errors.hpp"
#include "landscape/linear_baseline.hpp"

namespace landscape {

using Index = Eigen::Index;

bool CellSignature::operator==(const CellSignature& other) const {
    if (patterns.size() != other.patterns.size() || boundary != other.boundary) return false;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
        if (patterns[k].rows() != other.patterns[k].rows() || patterns[k].cols() != other.patterns[k].cols() ||
            patterns[k] != other.patterns[k]) {
            return false;
        }
    }
    return true;
}

CellSignature activation_pattern(const Mlp& net, const Matrix& X) {
    ForwardTrace trace = forward(net, X);
    const auto& act = net.activation();
    CellSignature sig;
    for (std::size_t k = 0; k + 1 < trace.pre.size(); ++k) {
        const Matrix& Z = trace.pre[k];
        Matrix A(Z.rows(), Z.cols());
        for (Index i = 0; i < Z.cols(); ++i) {
            for (Index r = 0; r < Z.rows(); ++r) {
                A(r, i) = act.slope_at(Z(r, i)).slope;
                for (double bp : act.breakpoints()) {
                    if (std::abs(Z(r, i) - bp) < kBoundaryTolerance) {
                        sig.boundary.push_back({k, r, i});
                        break;
                    }
                }
            }
        }
        sig.patterns.push_back(std::move(A));
    }
    return sig;
}

void require_quotient_setting(const Mlp& net) {
    if (net.num_layers() != 2 || net.weight(1).rows() != 1) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "quotient maps need one hidden layer and one output");
    }
    const auto& act = net.activation();
    bool through_origin = act.is_two_piece() || (act.breakpoints().empty() && act.anchor() == 0.0);
    if (!through_origin) {
        throw LandscapeError(ErrorCode::InvalidActivation, "every linear piece of h must pass through the origin");
    }
}

QuotientPoint quotient_map(const Matrix& W1, const RowVector& W2) {
    if (W2.size() != W1.rows()) throw LandscapeError(ErrorCode::ShapeMismatch, "W2 must have one entry per unit");
    Matrix scaled = W2.transpose().asDiagonal() * W1;
    QuotientPoint q;
    q.w_hat.resize(scaled.size());
    for (Index r = 0; r < scaled.rows(); ++r) q.w_hat.segment(r * scaled.cols(), scaled.cols()) = scaled.row(r);
    return q;
}

QuotientPoint quotient_map(const Mlp& net) {
    require_quotient_setting(net);
    Matrix augmented(net.weight(0).rows(), net.weight(0).cols() + 1);
    augmented << net.weight(0), net.bias(0);
    QuotientPoint inner = quotient_map(augmented, net.weight(1).row(0));
    QuotientPoint q;
    q.affine = true;
    q.w_hat.resize(inner.w_hat.size() + 1);
    q.w_hat << inner.w_hat, net.bias(1)[0];
    return q;
}

LiftedData lift_data(const CellSignature& sig, const Matrix& X, bool affine) {
    if (sig.patterns.size() != 1) throw LandscapeError(ErrorCode::ShapeMismatch, "lifting needs one hidden layer");
    if (!sig.interior()) throw LandscapeError(ErrorCode::BoundaryCell, "a pre-activation sits on a breakpoint");
    const Matrix& A = sig.patterns[0];
    if (A.cols() != X.cols()) throw LandscapeError(ErrorCode::ShapeMismatch, "pattern and data disagree on n");
    const Index width = X.rows() + (affine ? 1 : 0);
    LiftedData lifted;
    lifted.affine = affine;
    lifted.x_hat = Matrix::Zero(A.rows() * width + (affine ? 1 : 0), X.cols());
    for (Index i = 0; i < X.cols(); ++i) {
        Vector x(width);
        if (affine) x << X.col(i), 1.0;
        else x = X.col(i);
        for (Index k = 0; k < A.rows(); ++k) lifted.x_hat.col(i).segment(k * width, width) = A(k, i) * x;
        if (affine) lifted.x_hat(lifted.x_hat.rows() - 1, i) = 1.0;
    }
    return lifted;
}

namespace {

Matrix lifted_predictions(const QuotientPoint& q, const LiftedData& lifted) {
    if (q.w_hat.size() != lifted.x_hat.rows() || q.affine != lifted.affine) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "quotient point and lifted data disagree");
    }
    return q.w_hat * lifted.x_hat;
}

}  // namespace

double reformulated_risk(const QuotientPoint& q, const LiftedData& lifted, const Matrix& Y, LossKind loss) {
    return risk_of_predictions(loss, Y, lifted_predictions(q, lifted));
}

double quotient_gradient_residual(const QuotientPoint& q, const LiftedData& lifted, const Matrix& Y,
                                  LossKind loss) {
    Matrix g = per_sample_gradients(loss, Y, lifted_predictions(q, lifted));
    return (lifted.x_hat * g.transpose()).norm();
}

CellOptimum solve_cell_optimum(const LiftedData& lifted, const Matrix& Y) {
    if (Y.rows() != 1) throw LandscapeError(ErrorCode::ShapeMismatch, "cell optimum needs one output");
    CellOptimum opt;
    opt.q_star.affine = lifted.affine;
    opt.q_star.w_hat = Y * pseudo_inverse(lifted.x_hat);
    opt.risk_star = reformulated_risk(opt.q_star, lifted, Y, LossKind::Squared);
    return opt;
}

bool equivalence_check(const Mlp& a, const Mlp& b) {
    require_quotient_setting(a);
    require_quotient_setting(b);
    if (a.dims() != b.dims()) return false;
    RowVector qa = quotient_map(a).w_hat;
    RowVector qb = quotient_map(b).w_hat;
    double scale = std::max({1.0, qa.cwiseAbs().maxCoeff(), qb.cwiseAbs().maxCoeff()});
    if ((qa - qb).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
    const RowVector& wa = a.weight(1).row(0);
    const RowVector& wb = b.weight(1).row(0);
    for (Index k = 0; k < wa.size(); ++k) {
        if ((wa[k] > 0) != (wb[k] > 0) || (wa[k] < 0) != (wb[k] < 0)) return false;
    }
    return true;
}

namespace {

struct Unit {
    RowVector row;  // [W1 row, b1 entry]
    double out;     // W2 entry
};

Unit unit_of(const Mlp& net, Index k) {
    RowVector row(net.weight(0).cols() + 1);
    row << net.weight(0).row(k), net.bias(0)[k];
    return {row, net.weight(1)(0, k)};
}

Mlp with_unit(const Mlp& net, Index k, const Unit& unit) {
    std::vector<Matrix> W = net.weights();
    std::vector<Vector> b = net.biases();
    W[0].row(k) = unit.row.head(unit.row.size() - 1);
    b[0][k] = unit.row[unit.row.size() - 1];
    W[1](0, k) = unit.out;
    return Mlp(std::move(W), std::move(b), net.activation());
}

}  // namespace

Mlp rescale_units(const Mlp& net, const Vector& c) {
    require_quotient_setting(net);
    std::vector<Matrix> W = net.weights();
    std::vector<Vector> b = net.biases();
    if (c.size() != W[0].rows()) throw LandscapeError(ErrorCode::ShapeMismatch, "one factor per hidden unit");
    W[0] = c.asDiagonal() * W[0];
    b[0] = c.cwiseProduct(b[0]);
    W[1] = W[1] * c.cwiseInverse().asDiagonal();
    return Mlp(std::move(W), std::move(b), net.activation());
}

std::vector<Mlp> build_valley_path(const Mlp& a, const Mlp& b, int steps_per_move) {
    if (!equivalence_check(a, b)) throw LandscapeError(ErrorCode::NotEquivalent, "endpoints are not equivalent");
    if (steps_per_move < 1) throw LandscapeError(ErrorCode::PreconditionViolated, "steps_per_move must be positive");

    std::vector<Mlp> path{a};
    Mlp current = a;
    const Index width = a.weight(0).rows();
    for (Index k = 0; k < width; ++k) {
        Unit from = unit_of(a, k);
        Unit to = unit_of(b, k);
        if (from.row == to.row && from.out == to.out) continue;

        // c > 0 carries the unit from `from` to `to`; without an output weight
        // the row itself is scaled, or blended when it is not a multiple.
        double c = 0;
        bool geometric = true;
        if (from.out != 0.0) {
            c = to.out / from.out;
        } else if (from.row.norm() > 0 && to.row.norm() > 0) {
            c = from.row.norm() / to.row.norm();
            geometric = (from.row / c - to.row).norm() <= 1e-12 * to.row.norm() && from.row.dot(to.row) > 0;
        } else {
            geometric = false;
        }

        for (int s = 1; s <= steps_per_move; ++s) {
            double tau = static_cast<double>(s) / steps_per_move;
            Unit u;
            if (geometric) {
                double f = std::pow(c, tau);
                u = {from.row / f, from.out * f};
            } else {
                u = {(1 - tau) * from.row + tau * to.row, from.out};
            }
            if (s == steps_per_move) u = to;
            current = with_unit(current, k, u);
            path.push_back(current);
        }
    }
    if (path.size() > 1) path.back() = b;
    return path;
}

bool linear_collapse_check(const PiecewiseLinearActivation& act, const Matrix& X, Index hidden, int trials,
                           std::uint64_t seed) {
    std::vector<Index> dims{X.rows(), hidden, 1};
    std::optional<CellSignature> first;
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(trial));
        std::normal_distribution<double> normal;
        Mlp zero = Mlp::zeros(dims, act);
        Vector theta(zero.parameter_count());
        for (Index p = 0; p < theta.size(); ++p) theta[p] = normal(rng);
        CellSignature sig = activation_pattern(zero.with_parameters(theta), X);
        if (!first) first = std::move(sig);
        else if (!(sig == *first)) return false;
    }
    return true;
}

}  // namespace landscape
