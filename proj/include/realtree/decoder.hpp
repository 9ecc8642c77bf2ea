#pragma once

// Decoding a real representation (L, x, R) with labeling matrix C into a
// labeled binary tree, plus the structural checks that predict its shape.
//
// The root carries embedding x. A position with embedding v is a bud when
// ||v|| <= bud_tolerance * (1 + ||x||); otherwise it becomes a node labeled
// C v whose children carry L v and R v. Expansion is breadth first, left
// before right, so a depth budget cuts the tree at a uniform level.

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "realtree/error.hpp"
#include "realtree/linalg.hpp"
#include "realtree/path.hpp"
#include "realtree/tree.hpp"

namespace realtree {

/// Default relative bud threshold.
inline constexpr double kBudTolerance = 1e-9;
/// Default tolerance for the balanced-tree hypotheses.
inline constexpr double kBalancedTolerance = 1e-9;

struct Representation {
    Matrix L;
    Matrix R;
    Matrix C;
    Vector x;

    Eigen::Index n() const { return x.size(); }
    Eigen::Index p() const { return C.rows(); }

    /// Throws DimensionError or NonFiniteError on a malformed triple.
    void validate() const {
        const auto dim = n();
        if (dim < 1) {
            throw DimensionError("representation: embedding dimension must be at least 1");
        }
        if (L.rows() != dim || L.cols() != dim || R.rows() != dim || R.cols() != dim) {
            throw DimensionError("representation: L and R must be " + std::to_string(dim) + " x " +
                                 std::to_string(dim));
        }
        if (C.rows() < 1 || C.cols() != dim) {
            throw DimensionError("representation: C must have at least one row and " +
                                 std::to_string(dim) + " columns");
        }
        require_finite(L, "L");
        require_finite(R, "R");
        require_finite(C, "C");
        require_finite(x, "x");
    }
};

struct DecodeConfig {
    double bud_tolerance = kBudTolerance;
    int max_depth = 64;
    std::size_t max_nodes = std::size_t{1} << 20;

    void validate() const {
        if (!(bud_tolerance >= 0.0) || !std::isfinite(bud_tolerance)) {
            throw DomainError("decode: bud tolerance must be a finite non-negative number");
        }
        if (max_depth < 1 || max_nodes < 1) {
            throw DomainError("decode: budgets must be positive");
        }
    }
};

enum class DecodeStatus { Complete, BudgetExhausted };

inline const char* to_string(DecodeStatus s) {
    return s == DecodeStatus::Complete ? "complete" : "budget_exhausted";
}

struct DecodeOutcome {
    Tree tree;
    DecodeStatus status = DecodeStatus::Complete;
    /// Non-bud positions left unexpanded because a budget tripped, in BFS order.
    std::vector<Path> frontier;
    /// Column k is the embedding of preorder node k.
    Matrix embeddings;
};

/// Absolute bud threshold for a representation.
inline double bud_threshold(const Representation& rep, const DecodeConfig& cfg) {
    return cfg.bud_tolerance * (1.0 + rep.x.norm());
}

inline DecodeOutcome decode(const Representation& rep, const DecodeConfig& cfg = {}) {
    rep.validate();
    cfg.validate();
    const double threshold = bud_threshold(rep, cfg);
    const auto p = static_cast<std::size_t>(rep.p());

    DecodeOutcome out;
    if (rep.x.norm() <= threshold) {
        out.embeddings = Matrix(rep.n(), 0);
        return out;
    }

    struct Pending {
        Path path;
        Vector embedding;
        Tree::Index parent;
        Move move;
    };
    TreeBuilder builder(p);
    std::vector<Vector> embeddings;
    std::deque<Pending> queue;
    queue.push_back({Path(), rep.x, Tree::kNone, Move::Left});

    while (!queue.empty()) {
        Pending cur = std::move(queue.front());
        queue.pop_front();
        if (!cur.embedding.allFinite()) {
            throw NonFiniteError("decode: non-finite embedding at path \"" + cur.path.moves_string() + "\"");
        }
        if (cur.embedding.norm() <= threshold) {
            continue;
        }
        if (static_cast<int>(cur.path.size()) > cfg.max_depth || builder.size() >= cfg.max_nodes) {
            out.frontier.push_back(std::move(cur.path));
            continue;
        }
        const Vector label = rep.C * cur.embedding;
        if (!label.allFinite()) {
            throw NonFiniteError("decode: non-finite label at path \"" + cur.path.moves_string() + "\"");
        }
        const Tree::Index id = builder.add(std::span<const double>(label.data(), p));
        if (cur.parent != Tree::kNone) {
            builder.link(cur.parent, cur.move, id);
        }
        queue.push_back({cur.path.child(Move::Left), rep.L * cur.embedding, id, Move::Left});
        queue.push_back({cur.path.child(Move::Right), rep.R * cur.embedding, id, Move::Right});
        embeddings.push_back(std::move(cur.embedding));
    }

    std::vector<Tree::Index> order;
    out.tree = builder.build(0, &order);
    out.embeddings = Matrix(rep.n(), static_cast<Eigen::Index>(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.embeddings.col(static_cast<Eigen::Index>(k)) = embeddings[static_cast<std::size_t>(order[k])];
    }
    out.status = out.frontier.empty() ? DecodeStatus::Complete : DecodeStatus::BudgetExhausted;
    return out;
}

/// The representation of the left-right mirrored tree: L and R exchanged.
inline Representation mirror_representation(const Representation& rep) {
#ifdef REALTREE_FAULT_INJECT_MIRROR
    // Mutation canary for the self-test: leaves L and R in place.
    return rep;
#else
    return Representation{rep.R, rep.L, rep.C, rep.x};
#endif
}

struct AnalysisReport {
    double norm_L = 0.0;
    double norm_R = 0.0;
    double theta = 0.0;
    double commutator_norm = 0.0;  // Frobenius norm of LR - RL
    std::optional<int> nilpotency_L;
    std::optional<int> nilpotency_R;
    /// Depth beyond which every embedding is a bud; present iff theta < 1.
    std::optional<int> vanish_depth;
    /// Decoded nodes whose label C v is below the bud threshold although v is not.
    std::vector<Path> null_label_nodes;
    DecodeStatus scan_status = DecodeStatus::Complete;
};

/// Smallest d >= 0 with ||x|| theta^d <= threshold, for theta < 1.
inline int vanishing_depth(double x_norm, double theta, double threshold) {
    if (x_norm <= threshold) {
        return 0;
    }
    if (theta <= 0.0) {
        return 1;
    }
    const double estimate = std::log(threshold / x_norm) / std::log(theta);
    int d = std::max(0, static_cast<int>(std::floor(estimate)) - 2);
    while (x_norm * std::pow(theta, d) > threshold) {
        ++d;
    }
    return d;
}

inline AnalysisReport analyze(const Representation& rep, const DecodeConfig& cfg = {}) {
    rep.validate();
    cfg.validate();
    AnalysisReport a;
    a.norm_L = spectral_norm(rep.L);
    a.norm_R = spectral_norm(rep.R);
    a.theta = std::max(a.norm_L, a.norm_R);
    a.commutator_norm = commutator(rep.L, rep.R).norm();
    a.nilpotency_L = nilpotency_index(rep.L);
    a.nilpotency_R = nilpotency_index(rep.R);
    const double threshold = bud_threshold(rep, cfg);
    if (a.theta < 1.0) {
        a.vanish_depth = vanishing_depth(rep.x.norm(), a.theta, threshold);
    }

    const DecodeOutcome dec = decode(rep, cfg);
    a.scan_status = dec.status;
    if (!dec.tree.empty()) {
        const PathEnumeration paths = enumerate_paths(dec.tree);
        for (const NodeEntry& e : paths.nodes) {
            const Eigen::Map<const Vector> label(e.label.data(), static_cast<Eigen::Index>(e.label.size()));
            if (label.norm() <= threshold) {
                a.null_label_nodes.push_back(e.path);
            }
        }
    }
    return a;
}

/// Height h of the balanced tree predicted when R = alpha L, h is the
/// nilpotency index of L and x lies outside Ker L^(h-1); nullopt when any
/// hypothesis fails. alpha is the least-squares fit argmin ||R - alpha L||_F,
/// accepted when the residual is at most tol * (1 + ||R||_F). A vanishing
/// alpha is accepted only for L = 0: with R = 0 and L != 0 the decode is a
/// left spine, not a balanced tree.
inline std::optional<int> check_balanced_condition(const Representation& rep, double tol = kBalancedTolerance) {
    rep.validate();
    const double l_fro = rep.L.norm();
    const double r_fro = rep.R.norm();
    const double r_scale = tol * (1.0 + r_fro);
    if (l_fro == 0.0) {
        if (r_fro > r_scale) {
            return std::nullopt;
        }
        return in_kernel(Matrix::Identity(rep.n(), rep.n()), rep.x, tol) ? std::nullopt : std::optional<int>(1);
    }
    const double alpha = rep.L.cwiseProduct(rep.R).sum() / (l_fro * l_fro);
    if ((rep.R - alpha * rep.L).norm() > r_scale) {
        return std::nullopt;
    }
    const std::optional<int> h = nilpotency_index(rep.L);
    if (!h) {
        return std::nullopt;
    }
    if (*h > 1 && r_fro <= r_scale) {
        return std::nullopt;
    }
    const Matrix deepest = matrix_power(rep.L, static_cast<unsigned>(*h - 1));
    if (in_kernel(deepest, rep.x, tol)) {
        return std::nullopt;
    }
    return h;
}

}  // namespace realtree
