#include "kaczmarz/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

namespace {

// Dykstra's corrections stay parallel to their row, so one scalar per row
// carries the whole dual state; gamma(i) is the accumulated multiplier.
struct DualState {
    Vector gamma;
};

// KKT-style acceptance: the iterate must be feasible and every engaged
// inequality must be (near) tight. Per-sweep movement alone is not a safe
// stop: while an engaged-but-satisfied half-space drains its multiplier the
// iterate can sit numerically still at an infeasible point for thousands of
// sweeps.
bool certificate_holds(const MixedSystem& sys, const Vector& z, const Vector& gamma,
                       double cert_tol) {
    const Vector raw = sys.a() * z - sys.b();
    for (Index i = 0; i < sys.rows(); ++i) {
        if (sys.is_equality(i)) {
            if (std::abs(raw(i)) > cert_tol) return false;
        } else {
            if (raw(i) > cert_tol) return false;
            if (gamma(i) * std::abs(raw(i)) > cert_tol * (1.0 + gamma(i))) return false;
        }
    }
    return true;
}

// Exact finisher: take the engagement pattern as an active-set guess, project
// onto the active hyperplanes in closed form, and certify the result against
// the full KKT conditions, exchanging constraints a few times if needed.
// Returns false when no certified point was found (the sweeps then continue).
bool active_set_polish(const MixedSystem& sys, const Vector& x0, const Vector& gamma,
                       double cert_tol, Vector& out) {
    const Index n = sys.rows();
    std::vector<char> active(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
        active[static_cast<std::size_t>(i)] = sys.is_equality(i) || gamma(i) > 1e-12;
    }

    const Index max_exchanges = 3 * n + 10;
    for (Index round = 0; round < max_exchanges; ++round) {
        std::vector<Index> act;
        for (Index i = 0; i < n; ++i) {
            if (active[static_cast<std::size_t>(i)]) act.push_back(i);
        }

        Vector z = x0;
        Vector multipliers;
        if (!act.empty()) {
            const Matrix a_act = gather_rows(sys.a(), act);
            const Vector b_act = gather_entries(sys.b(), act);
            z = x0 + lsq_min_norm(a_act, b_act - a_act * x0);
            if ((a_act * z - b_act).cwiseAbs().maxCoeff() > cert_tol) {
                return false;  // inconsistent active guess (rank defect)
            }
            multipliers = lsq_min_norm(Matrix(a_act.transpose()), x0 - z);
            if ((a_act.transpose() * multipliers - (x0 - z)).norm() >
                cert_tol * (1.0 + (x0 - z).norm())) {
                return false;
            }
        }

        // Drop the most negative inequality multiplier, if any.
        Index drop = -1;
        double most_negative = -1e-10;
        for (std::size_t k = 0; k < act.size(); ++k) {
            const Index row = act[k];
            if (!sys.is_equality(row) && multipliers(static_cast<Index>(k)) < most_negative) {
                most_negative = multipliers(static_cast<Index>(k));
                drop = row;
            }
        }
        if (drop >= 0) {
            active[static_cast<std::size_t>(drop)] = 0;
            continue;
        }

        // Add the most violated inactive inequality, if any.
        Index add = -1;
        double worst = cert_tol;
        for (Index i = sys.num_equalities(); i < n; ++i) {
            if (active[static_cast<std::size_t>(i)]) continue;
            const double overshoot = sys.a().row(i).dot(z) - sys.b()(i);
            if (overshoot > worst) {
                worst = overshoot;
                add = i;
            }
        }
        if (add >= 0) {
            active[static_cast<std::size_t>(add)] = 1;
            continue;
        }

        out = z;  // feasible, tight actives, nonnegative multipliers: the projection
        return true;
    }
    return false;
}

}  // namespace

ProjectionResult project_onto_S(const MixedSystem& sys, const Vector& x, double tol,
                                Index max_sweeps) {
    const Index n = sys.rows();
    const Matrix& a = sys.a();
    const Vector& b = sys.b();
    const double cert_tol = std::max(100.0 * tol, 1e-10);

    Vector z = x;
    Vector gamma = Vector::Zero(n);

    ProjectionResult result;
    for (Index sweep = 1; sweep <= max_sweeps; ++sweep) {
        const Vector before = z;
        for (Index i = 0; i < n; ++i) {
            const Vector y = z + gamma(i) * a.row(i).transpose();
            const double overshoot = a.row(i).dot(y) - b(i);
            double step = overshoot;
            if (!sys.is_equality(i)) {
                step = std::max(overshoot, 0.0);  // half-space: only outward points move
            }
            z = y - step * a.row(i).transpose();
            gamma(i) = step;
        }
        result.sweeps_used = sweep;

        const bool settled = (z - before).norm() < tol;
        if (settled || sweep == max_sweeps) {
            if (certificate_holds(sys, z, gamma, cert_tol)) {
                result.converged = true;
                break;
            }
            Vector polished;
            if (active_set_polish(sys, x, gamma, cert_tol, polished)) {
                z = polished;
                result.converged = true;
                break;
            }
            // Not actually done (typically a draining multiplier); keep sweeping.
        }
    }
    result.point = z;
    result.distance = (x - z).norm();
    return result;
}

double distance_to_S(const MixedSystem& sys, const Vector& x, double tol, Index max_sweeps) {
    const ProjectionResult result = project_onto_S(sys, x, tol, max_sweeps);
    if (!result.converged) {
        throw OracleNotConvergedError("distance_to_S: projection not certified within budget");
    }
    return result.distance;
}

double hoffman_lower_bound(const MixedSystem& sys, Index samples, Seed seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0.0;
    for (Index s = 0; s < samples; ++s) {
        Vector x(sys.cols());
        for (Index j = 0; j < x.size(); ++j) {
            x(j) = gauss(engine);
        }
        const double res = residual_norm(sys, x);
        if (res < 1e-8) {
            continue;  // avoid 0/0 on near-feasible samples
        }
        best = std::max(best, distance_to_S(sys, x) / res);
    }
    return best;
}

}  // namespace kaczmarz
