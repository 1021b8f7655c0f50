#pragma once

#include "kaczmarz/system.hpp"
#include "kaczmarz/types.hpp"

namespace kaczmarz {

inline constexpr double kOracleTol = 1e-10;
inline constexpr Index kOracleMaxSweeps = 10000;

struct ProjectionResult {
    Vector point;        // approximately P_S x
    double distance = 0.0;
    Index sweeps_used = 0;
    bool converged = false;
};

/// Euclidean projection onto the feasible set via Dykstra's alternating
/// projections over the row hyperplanes and half-spaces. Plain cyclic
/// projection would only find some feasible point; the correction terms make
/// the limit the nearest one. A sweep whose movement falls below `tol` only
/// stops the iteration once the accumulated multipliers pass a feasibility
/// and complementarity certificate (small movement alone can mask a slowly
/// draining multiplier); an exact active-set solve finishes off such stalls.
/// Check `converged` before trusting the result.
ProjectionResult project_onto_S(const MixedSystem& sys, const Vector& x,
                                double tol = kOracleTol, Index max_sweeps = kOracleMaxSweeps);

/// ||x - P_S x||. Throws OracleNotConvergedError when the sweep budget runs out.
double distance_to_S(const MixedSystem& sys, const Vector& x, double tol = kOracleTol,
                     Index max_sweeps = kOracleMaxSweeps);

/// Empirical lower bound on the Hoffman constant: the largest observed ratio
/// distance_to_S(x) / residual_norm(x) over `samples` standard normal points.
/// Near-feasible samples (residual below 1e-8) are skipped; returns 0 when
/// nothing contributes.
double hoffman_lower_bound(const MixedSystem& sys, Index samples, Seed seed);

}  // namespace kaczmarz
