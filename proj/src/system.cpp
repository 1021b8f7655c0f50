#include "kaczmarz/system.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

using nlohmann::json;

namespace kaczmarz {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw KaczmarzError(msg);
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::pair<Matrix, Vector> standardize(const Matrix& a, const Vector& b) {
    Matrix as = a;
    Vector bs = b;
    for (Index i = 0; i < a.rows(); ++i) {
        const double norm = a.row(i).norm();
        if (norm < kZeroRowCutoff) {
            throw ZeroRowError("standardize: row " + std::to_string(i) + " has near-zero norm");
        }
        as.row(i) /= norm;
        bs(i) /= norm;
    }
    return {std::move(as), std::move(bs)};
}

MixedSystem::MixedSystem(Matrix a, Vector b, Index num_equalities)
    : a_(std::move(a)), b_(std::move(b)), n_e_(num_equalities) {
    require(a_.rows() >= 1 && a_.cols() >= 1, "MixedSystem: empty matrix");
    require(b_.size() == a_.rows(), "MixedSystem: b length != row count");
    require(n_e_ >= 0 && n_e_ <= a_.rows(), "MixedSystem: n_e out of range");
    require(a_.allFinite() && b_.allFinite(), "MixedSystem: non-finite entries");
    for (Index i = 0; i < a_.rows(); ++i) {
        require(std::abs(a_.row(i).norm() - 1.0) <= kStandardizedTol,
                "MixedSystem: row " + std::to_string(i) + " is not unit norm");
    }
}

MixedSystem MixedSystem::from_unordered(const Matrix& a, const Vector& b,
                                        const std::vector<Index>& equality_rows,
                                        std::vector<Index>* perm_out) {
    std::vector<bool> is_eq(static_cast<std::size_t>(a.rows()), false);
    for (Index i : equality_rows) {
        require(i >= 0 && i < a.rows(), "from_unordered: equality index out of range");
        is_eq[static_cast<std::size_t>(i)] = true;
    }
    std::vector<Index> perm;
    perm.reserve(static_cast<std::size_t>(a.rows()));
    for (Index i = 0; i < a.rows(); ++i) {
        if (is_eq[static_cast<std::size_t>(i)]) perm.push_back(i);
    }
    const Index n_e = static_cast<Index>(perm.size());
    for (Index i = 0; i < a.rows(); ++i) {
        if (!is_eq[static_cast<std::size_t>(i)]) perm.push_back(i);
    }
    Matrix ar(a.rows(), a.cols());
    Vector br(b.size());
    for (Index i = 0; i < a.rows(); ++i) {
        ar.row(i) = a.row(perm[static_cast<std::size_t>(i)]);
        br(i) = b(perm[static_cast<std::size_t>(i)]);
    }
    if (perm_out) *perm_out = std::move(perm);
    return MixedSystem(std::move(ar), std::move(br), n_e);
}

Vector residual(const MixedSystem& sys, const Vector& x) {
    Vector r = sys.a() * x - sys.b();
    const Index n_i = sys.num_inequalities();
    if (n_i > 0) {
        r.tail(n_i) = r.tail(n_i).cwiseMax(0.0);
    }
    return r;
}

double residual_norm(const MixedSystem& sys, const Vector& x) {
    return residual(sys, x).norm();
}

bool is_feasible(const MixedSystem& sys, const Vector& x, double tol) {
    const Vector r = sys.a() * x - sys.b();
    for (Index i = 0; i < sys.rows(); ++i) {
        const double bound = sys.is_equality(i) ? std::abs(r(i)) : r(i);
        if (bound > tol) return false;
    }
    return true;
}

GeneratedSystem gen_gaussian_system(Index n, Index d, Index n_e, Seed seed, double slack) {
    require(n >= 1 && d >= 1 && n_e >= 0 && n_e <= n, "gen_gaussian_system: bad shape");
    require(slack >= 0.0, "gen_gaussian_system: negative slack");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix a(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            a(i, j) = gauss(engine);
        }
    }
    Vector planted(d);
    for (Index j = 0; j < d; ++j) {
        planted(j) = gauss(engine);
    }

    for (Index i = 0; i < n; ++i) {
        a.row(i) /= a.row(i).norm();
    }
    Vector b = a * planted;
    for (Index i = n_e; i < n; ++i) {
        b(i) += slack;
    }
    return {MixedSystem(std::move(a), std::move(b), n_e), std::move(planted)};
}

void save_system_json(const MixedSystem& sys, const std::string& path) {
    json doc;
    doc["n"] = sys.rows();
    doc["d"] = sys.cols();
    doc["n_e"] = sys.num_equalities();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(sys.rows() * sys.cols()));
    for (Index i = 0; i < sys.rows(); ++i) {
        for (Index j = 0; j < sys.cols(); ++j) {
            flat.push_back(sys.a()(i, j));
        }
    }
    doc["A"] = flat;
    doc["b"] = std::vector<double>(sys.b().data(), sys.b().data() + sys.b().size());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

MixedSystem load_system_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        const Index n = doc.at("n").get<Index>();
        const Index d = doc.at("d").get<Index>();
        const Index n_e = doc.at("n_e").get<Index>();
        const auto flat = doc.at("A").get<std::vector<double>>();
        const auto bvec = doc.at("b").get<std::vector<double>>();
        if (static_cast<Index>(flat.size()) != n * d || static_cast<Index>(bvec.size()) != n) {
            throw ParseError(path + ": A or b has the wrong length");
        }
        Matrix a(n, d);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < d; ++j) {
                a(i, j) = flat[static_cast<std::size_t>(i * d + j)];
            }
        }
        Vector b = Eigen::Map<const Vector>(bvec.data(), n);
        // Non-standardized inputs are standardized on load, which preserves
        // the solution set. Already-standardized files pass through bit-exact.
        double max_dev = 0.0;
        for (Index i = 0; i < n; ++i) {
            max_dev = std::max(max_dev, std::abs(a.row(i).norm() - 1.0));
        }
        if (max_dev > kStandardizedTol) {
            auto [as, bs] = standardize(a, b);
            return MixedSystem(std::move(as), std::move(bs), n_e);
        }
        return MixedSystem(std::move(a), std::move(b), n_e);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_matrix_market(const Matrix& a, const std::string& path, Index n_e,
                        const std::vector<Index>& perm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "%%MatrixMarket matrix array real general\n";
    if (n_e >= 0) {
        out << "%kaczmarz-system n_e=" << n_e << " perm=";
        if (perm.empty()) {
            for (Index i = 0; i < a.rows(); ++i) {
                out << (i ? "," : "") << i;
            }
        } else {
            for (std::size_t i = 0; i < perm.size(); ++i) {
                out << (i ? "," : "") << perm[i];
            }
        }
        out << "\n";
    }
    out << a.rows() << " " << a.cols() << "\n";
    // Array format lists entries column by column.
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            out << format_double(a(i, j)) << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

MatrixMarketData load_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (line.rfind("%%MatrixMarket", 0) != 0 || line.find("array") == std::string::npos ||
        line.find("real") == std::string::npos) {
        throw ParseError(path + ": expected a real array MatrixMarket header");
    }

    MatrixMarketData data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] != '%') break;
        if (line.rfind("%kaczmarz-system", 0) == 0) {
            const auto ne_pos = line.find("n_e=");
            const auto perm_pos = line.find("perm=");
            if (ne_pos != std::string::npos) {
                data.n_e = std::stoll(line.substr(ne_pos + 4));
            }
            if (perm_pos != std::string::npos) {
                std::stringstream ss(line.substr(perm_pos + 5));
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    if (!tok.empty()) data.perm.push_back(std::stoll(tok));
                }
            }
        }
    }
    Index rows = 0, cols = 0;
    {
        std::stringstream ss(line);
        if (!(ss >> rows >> cols) || rows < 1 || cols < 1) {
            throw ParseError(path + ": bad size line");
        }
    }
    data.a.resize(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            double v = 0.0;
            if (!(in >> v)) throw ParseError(path + ": truncated entry list");
            data.a(i, j) = v;
        }
    }
    if (data.n_e >= 0 && !data.perm.empty() &&
        static_cast<Index>(data.perm.size()) != rows) {
        throw ParseError(path + ": permutation length != row count");
    }
    return data;
}

}  // namespace kaczmarz
