#include "kaczmarz/paving.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "kaczmarz/linalg.hpp"

using nlohmann::json;

namespace kaczmarz {

bool RowPaving::is_partition_of(Index lo, Index hi) const {
    std::vector<char> seen(static_cast<std::size_t>(hi - lo), 0);
    for (const auto& block : blocks) {
        if (block.empty()) return false;
        for (Index i : block) {
            if (i < lo || i >= hi) return false;
            auto& flag = seen[static_cast<std::size_t>(i - lo)];
            if (flag) return false;
            flag = 1;
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

RowPaving random_partition(Index n_rows, Index m, Seed seed, Index first_index) {
    if (m < 1 || m > n_rows) {
        throw BadBlockCountError("random_partition: m=" + std::to_string(m) + " for " +
                                 std::to_string(n_rows) + " rows");
    }
    std::vector<Index> idx(static_cast<std::size_t>(n_rows));
    std::iota(idx.begin(), idx.end(), first_index);
    std::mt19937_64 engine(seed);
    std::shuffle(idx.begin(), idx.end(), engine);

    RowPaving paving;
    paving.blocks.resize(static_cast<std::size_t>(m));
    const Index base = n_rows / m;
    const Index extra = n_rows % m;
    std::size_t pos = 0;
    for (Index k = 0; k < m; ++k) {
        const Index size = base + (k < extra ? 1 : 0);
        auto& block = paving.blocks[static_cast<std::size_t>(k)];
        block.assign(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                     idx.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(size)));
        std::sort(block.begin(), block.end());
        pos += static_cast<std::size_t>(size);
    }
    return paving;
}

RowPaving singleton_paving(Index n_rows, Index first_index) {
    RowPaving paving;
    paving.blocks.resize(static_cast<std::size_t>(n_rows));
    for (Index i = 0; i < n_rows; ++i) {
        paving.blocks[static_cast<std::size_t>(i)] = {first_index + i};
    }
    return paving;
}

double measure_beta(const Matrix& a, RowPaving& paving) {
    double beta = 0.0;
    for (const auto& block : paving.blocks) {
        beta = std::max(beta, gram_max_eigenvalue(gather_rows(a, block)));
    }
    paving.beta = beta;
    return beta;
}

Prop1Report check_prop1_regime(const Matrix& a, const RowPaving& paving, double delta,
                               double c) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidParamsError("check_prop1_regime: delta must lie in (0,1)");
    }
    if (!paving.has_beta()) {
        throw InvalidParamsError("check_prop1_regime: paving has no measured beta");
    }
    std::vector<Index> covered;
    for (const auto& block : paving.blocks) {
        covered.insert(covered.end(), block.begin(), block.end());
    }
    std::sort(covered.begin(), covered.end());
    const Matrix sub = gather_rows(a, covered);

    Prop1Report report;
    report.delta = delta;
    report.beta = paving.beta;
    report.beta_upper_ok = paving.beta <= 1.0 + delta;
    report.beta_lower_ok = paving.beta >= 1.0 - delta;
    report.m = paving.size();
    const double norm = spectral_norm(sub);
    report.spec_norm_sq = norm * norm;
    report.m_bound =
        c * report.spec_norm_sq * std::log1p(static_cast<double>(sub.rows())) / (delta * delta);
    report.m_ok = static_cast<double>(report.m) <= report.m_bound;
    return report;
}

std::vector<bool> is_pairwise_obtuse(const Matrix& a, const RowPaving& paving) {
    std::vector<bool> flags;
    flags.reserve(paving.blocks.size());
    for (const auto& block : paving.blocks) {
        bool obtuse = true;
        for (std::size_t p = 0; p < block.size() && obtuse; ++p) {
            for (std::size_t q = p + 1; q < block.size(); ++q) {
                if (a.row(block[p]).dot(a.row(block[q])) > 0.0) {
                    obtuse = false;
                    break;
                }
            }
        }
        flags.push_back(obtuse);
    }
    return flags;
}

bool all_pairwise_obtuse(const Matrix& a, const RowPaving& paving) {
    const auto flags = is_pairwise_obtuse(a, paving);
    return std::all_of(flags.begin(), flags.end(), [](bool f) { return f; });
}

MixedSystem obtusify(const MixedSystem& sys, const RowPaving& t_ineq, double slack,
                     int max_passes, bool strict) {
    const Index n = sys.rows();
    const Index n_e = sys.num_equalities();
    if (!t_ineq.is_partition_of(n_e, n)) {
        throw KaczmarzError("obtusify: paving does not partition the inequality rows");
    }
    if (slack < 0.0) {
        throw KaczmarzError("obtusify: negative slack");
    }

    Matrix a = sys.a();
    Vector b = sys.b();
    bool all_clean = true;
    for (const auto& block : t_ineq.blocks) {
        bool clean = false;
        for (int pass = 0; pass < max_passes; ++pass) {
            bool flipped = false;
            for (std::size_t p = 0; p < block.size(); ++p) {
                for (std::size_t q = p + 1; q < block.size(); ++q) {
                    const Index i = block[p];
                    const Index k = block[q];
                    if (a.row(i).dot(a.row(k)) > 0.0) {
                        a.row(k) = -a.row(k);
                        b(k) = -b(k);
                        flipped = true;
                    }
                }
            }
            if (!flipped) {
                clean = true;
                break;
            }
        }
        all_clean = all_clean && clean;
    }
    if (!all_clean && strict) {
        throw ObtusifyFailedError(
            "obtusify: sweep cap reached with positively correlated pairs remaining");
    }
    for (Index i = n_e; i < n; ++i) {
        b(i) += slack;
    }
    return MixedSystem(std::move(a), std::move(b), n_e);
}

void save_paving_json(const RowPaving& paving, const std::string& path) {
    json doc;
    doc["m"] = paving.size();
    if (paving.has_beta()) {
        doc["beta"] = paving.beta;
    } else {
        doc["beta"] = nullptr;
    }
    doc["blocks"] = paving.blocks;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

RowPaving load_paving_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        RowPaving paving;
        paving.blocks = doc.at("blocks").get<std::vector<std::vector<Index>>>();
        if (!doc.at("beta").is_null()) {
            paving.beta = doc.at("beta").get<double>();
        }
        if (doc.at("m").get<Index>() != paving.size()) {
            throw ParseError(path + ": m does not match the block count");
        }
        return paving;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace kaczmarz
