#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kaczmarz {

using Index = Eigen::Index;

// Dense row-major storage throughout; every scalar is a double.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Seed = std::uint64_t;

struct KaczmarzError : std::runtime_error {
    explicit KaczmarzError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A row with Euclidean norm below the standardization cutoff (1e-14).
struct ZeroRowError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

/// Requested partition size is zero or exceeds the number of rows.
struct BadBlockCountError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

/// Sign-flip sweeps hit the pass cap with positively correlated pairs left.
struct ObtusifyFailedError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

/// Rate parameters that put a contraction factor outside [0, 1).
struct InvalidParamsError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

/// Matrix lacks the full column rank required for 1/sigma_min.
struct RankDeficientError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

/// The projection oracle exhausted its sweep budget.
struct OracleNotConvergedError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

struct ParseError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

struct IoError : KaczmarzError {
    using KaczmarzError::KaczmarzError;
};

}  // namespace kaczmarz
