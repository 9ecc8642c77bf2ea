#pragma once

// Encoding a labeled tree into the real field.
//
// For fixed (L, R, C) every node and bud of the target tree contributes one
// p-row block C * monomial to a stacked linear system M x = y: node blocks
// ask for the node label, bud blocks ask for zero. Nodes come first, then
// buds, each in preorder.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "realtree/decoder.hpp"
#include "realtree/error.hpp"
#include "realtree/linalg.hpp"
#include "realtree/path.hpp"
#include "realtree/random.hpp"
#include "realtree/tree.hpp"

namespace realtree {

enum class BlockKind { Node, Bud };

struct RowBlock {
    Path path;
    BlockKind kind;
};

struct DecodingSystem {
    Matrix M;
    Vector y;
    std::vector<RowBlock> row_map;  // block k spans rows [k p, (k + 1) p)
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::size_t m = 0;  // node count of the target tree
};

namespace detail {

inline void check_encoding_operands(const Tree& tree, const Matrix& l, const Matrix& r, const Matrix& c) {
    if (tree.empty()) {
        throw DomainError("encode: the target tree is empty");
    }
    const auto n = l.rows();
    if (n < 1 || l.cols() != n || r.rows() != n || r.cols() != n || c.cols() != n) {
        throw DimensionError("encode: L and R must be n x n and C must have n columns");
    }
    if (static_cast<std::size_t>(c.rows()) != tree.label_dim()) {
        throw DimensionError("encode: C has " + std::to_string(c.rows()) + " rows but labels have " +
                             std::to_string(tree.label_dim()) + " components");
    }
}

}  // namespace detail

inline DecodingSystem build_decoding_system(const Tree& tree, const Matrix& l, const Matrix& r, const Matrix& c) {
    detail::check_encoding_operands(tree, l, r, c);
    require_finite(l, "L");
    require_finite(r, "R");
    require_finite(c, "C");

    const auto n = l.rows();
    const auto p = c.rows();
    const std::size_t m = tree.size();
    const auto blocks = static_cast<Eigen::Index>(2 * m + 1);

    DecodingSystem sys;
    sys.n = n;
    sys.p = p;
    sys.m = m;
    sys.M = Matrix::Zero(blocks * p, n);
    sys.y = Vector::Zero(blocks * p);
    sys.row_map.resize(static_cast<std::size_t>(blocks));

    // Preorder walk carrying each position's monomial matrix. Node k goes to
    // block k; the j-th bud discovered goes to block m + j.
    struct Item {
        Tree::Index node;  // kNone for a bud
        Path path;
        Matrix monomial;
    };
    std::vector<Item> stack;
    stack.push_back({0, Path(), Matrix::Identity(n, n)});
    Eigen::Index next_node = 0;
    auto next_bud = static_cast<Eigen::Index>(m);
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        const Eigen::Index block = it.node == Tree::kNone ? next_bud++ : next_node++;
        sys.M.middleRows(block * p, p).noalias() = c * it.monomial;
        if (it.node == Tree::kNone) {
            sys.row_map[static_cast<std::size_t>(block)] = {std::move(it.path), BlockKind::Bud};
            continue;
        }
        const auto lab = tree.label(it.node);
        for (Eigen::Index k = 0; k < p; ++k) {
            sys.y(block * p + k) = lab[static_cast<std::size_t>(k)];
        }
        stack.push_back({tree.right(it.node), it.path.child(Move::Right), r * it.monomial});
        stack.push_back({tree.left(it.node), it.path.child(Move::Left), l * it.monomial});
        sys.row_map[static_cast<std::size_t>(block)] = {std::move(it.path), BlockKind::Node};
    }
    return sys;
}

struct ReachabilityReport {
    int rank = 0;
    int bound = 0;  // min{n, p (2m + 1)}
    bool completely_reachable = false;
    Vector singular_values;
};

inline ReachabilityReport reachability(const DecodingSystem& sys) {
    ReachabilityReport rep;
    rep.singular_values = singular_values(sys.M);
    rep.rank = numerical_rank(sys.M);
    rep.bound = static_cast<int>(std::min<Eigen::Index>(sys.n, sys.M.rows()));
    rep.completely_reachable = rep.rank == rep.bound;
    return rep;
}

struct EmbeddingSolution {
    Vector x;
    double residual_norm = 0.0;
};

/// x = M^+ y, the minimum-norm least-squares embedding.
inline EmbeddingSolution solve_embedding(const DecodingSystem& sys) {
    const LstsqResult ls = lstsq_min_norm(sys.M, sys.y);
    return {ls.solution, ls.residual_norm};
}

/// The exact representation with one basis vector per node: n = m, preorder
/// node k embeds as e_k, L and R are the 0/1 child maps and C's column k is
/// node k's label.
inline Representation canonical_encode(const Tree& tree) {
    if (tree.empty()) {
        throw DomainError("canonical_encode: the target tree is empty");
    }
    const auto m = static_cast<Eigen::Index>(tree.size());
    const auto p = static_cast<Eigen::Index>(tree.label_dim());
    Representation rep{Matrix::Zero(m, m), Matrix::Zero(m, m), Matrix::Zero(p, m), Vector::Zero(m)};
    rep.x(0) = 1.0;
    for (Tree::Index k = 0; k < static_cast<Tree::Index>(m); ++k) {
        if (tree.left(k) != Tree::kNone) {
            rep.L(tree.left(k), k) = 1.0;
        }
        if (tree.right(k) != Tree::kNone) {
            rep.R(tree.right(k), k) = 1.0;
        }
        const auto lab = tree.label(k);
        for (Eigen::Index i = 0; i < p; ++i) {
            rep.C(i, k) = lab[static_cast<std::size_t>(i)];
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Numerical search over (L, R, x)

struct SearchOptions {
    int max_iters = 200;
    int restarts = 20;
    std::uint64_t seed = 42;
    double step_tolerance = 1e-12;
    /// Stop restarting once a residual at or below this is found.
    double target_residual = 1e-12;

    void validate() const {
        if (max_iters < 1 || restarts < 1) {
            throw DomainError("search: max_iters and restarts must be positive");
        }
        if (!(step_tolerance >= 0.0) || !(target_residual >= 0.0)) {
            throw DomainError("search: tolerances must be non-negative");
        }
    }
};

struct SearchResult {
    Representation rep;
    double residual = 0.0;
    int restart = 0;  // index of the restart that produced `rep`
};

namespace detail {

/// Residuals and Jacobian of every node and bud equation of the decoding
/// problem, as functions of theta = [vec(L); vec(R); x] (column-major vec).
class DecodingResiduals {
public:
    DecodingResiduals(const Tree& tree, Eigen::Index n, const Matrix& c) : n_(n), c_(c) {
        const PathEnumeration paths = enumerate_paths(tree);
        const auto p = c.rows();
        for (const NodeEntry& e : paths.nodes) {
            Vector target(p);
            for (Eigen::Index k = 0; k < p; ++k) {
                target(k) = e.label[static_cast<std::size_t>(k)];
            }
            equations_.push_back({e.path, std::move(target)});
        }
        for (const Path& b : paths.buds) {
            equations_.push_back({b, Vector::Zero(p)});
        }
    }

    Eigen::Index parameter_count() const { return 2 * n_ * n_ + n_; }
    Eigen::Index residual_count() const { return static_cast<Eigen::Index>(equations_.size()) * c_.rows(); }

    double target_norm() const {
        double s = 0.0;
        for (const auto& eq : equations_) {
            s += eq.target.squaredNorm();
        }
        return std::sqrt(s);
    }

    Vector residuals(const Vector& theta) const {
        const auto [l, r, x] = unpack(theta);
        const auto p = c_.rows();
        Vector out(residual_count());
        for (std::size_t k = 0; k < equations_.size(); ++k) {
            Vector v = x;
            for (Move mv : equations_[k].path.moves()) {
                v = (mv == Move::Left ? l : r) * v;
            }
            out.segment(static_cast<Eigen::Index>(k) * p, p) = c_ * v - equations_[k].target;
        }
        return out;
    }

    Matrix jacobian(const Vector& theta) const {
        const auto [l, r, x] = unpack(theta);
        const auto p = c_.rows();
        const Eigen::Index nn = n_ * n_;
        Matrix jac = Matrix::Zero(residual_count(), parameter_count());
        std::vector<Vector> forward;
        for (std::size_t k = 0; k < equations_.size(); ++k) {
            const auto& moves = equations_[k].path.moves();
            const Eigen::Index row = static_cast<Eigen::Index>(k) * p;
            forward.assign(1, x);
            for (Move mv : moves) {
                forward.push_back((mv == Move::Left ? l : r) * forward.back());
            }
            // back = C A_d ... A_{s+1}; the factor at step s contributes
            // d/dA(i, j) = back(:, i) * forward[s - 1](j).
            Matrix back = c_;
            for (std::size_t s = moves.size(); s-- > 0;) {
                const Eigen::Index offset = moves[s] == Move::Left ? 0 : nn;
                const Vector& in = forward[s];
                for (Eigen::Index j = 0; j < n_; ++j) {
                    jac.block(row, offset + j * n_, p, n_) += in(j) * back;
                }
                back = back * (moves[s] == Move::Left ? l : r);
            }
            jac.block(row, 2 * nn, p, n_) = back;
        }
        return jac;
    }

    Representation to_representation(const Vector& theta) const {
        auto [l, r, x] = unpack(theta);
        return Representation{std::move(l), std::move(r), c_, std::move(x)};
    }

private:
    struct Equation {
        Path path;
        Vector target;
    };

    struct Unpacked {
        Matrix l;
        Matrix r;
        Vector x;
    };

    Unpacked unpack(const Vector& theta) const {
        const Eigen::Index nn = n_ * n_;
        return {Eigen::Map<const Matrix>(theta.data(), n_, n_),
                Eigen::Map<const Matrix>(theta.data() + nn, n_, n_), theta.segment(2 * nn, n_)};
    }

    Eigen::Index n_;
    Matrix c_;
    std::vector<Equation> equations_;
};

struct LmOutcome {
    Vector theta;
    double residual;
};

/// Levenberg-Marquardt: (J'J + lambda I) step = -J'r, lambda starting at 1e-3
/// and moved by factors of 10.
inline LmOutcome levenberg_marquardt(const DecodingResiduals& f, Vector theta, const SearchOptions& opts) {
    Vector res = f.residuals(theta);
    double cost = res.squaredNorm();
    double lambda = 1e-3;
    const auto dim = theta.size();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (std::sqrt(cost) <= opts.target_residual) {
            break;
        }
        const Matrix jac = f.jacobian(theta);
        const Matrix jtj = jac.transpose() * jac;
        const Vector grad = jac.transpose() * res;
        bool accepted = false;
        Vector step;
        while (lambda <= 1e12) {
            const Matrix damped = jtj + lambda * Matrix::Identity(dim, dim);
            step = damped.ldlt().solve(-grad);
            const Vector trial = theta + step;
            const Vector trial_res = f.residuals(trial);
            const double trial_cost = trial_res.squaredNorm();
            if (step.allFinite() && trial_cost < cost) {
                theta = trial;
                res = trial_res;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || step.norm() <= opts.step_tolerance * (1.0 + theta.norm())) {
            break;
        }
    }
    return {theta, std::sqrt(cost)};
}

}  // namespace detail

/// Best representation of `tree` in dimension n with fixed labeling C found by
/// damped Gauss-Newton from random starts. The result is returned whatever
/// its residual; a large residual is not a proof that no exact solution exists.
inline SearchResult search_representation(const Tree& tree, Eigen::Index n, const Matrix& c,
                                          const SearchOptions& opts = {}) {
    opts.validate();
    if (n < 1) {
        throw DomainError("search: dimension must be at least 1");
    }
    detail::check_encoding_operands(tree, Matrix::Zero(n, n), Matrix::Zero(n, n), c);
    require_finite(c, "C");

    const detail::DecodingResiduals f(tree, n, c);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    SearchResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < opts.restarts; ++restart) {
        Rng rng(opts.seed, static_cast<std::uint64_t>(restart));
        const Vector start = random_vector(rng, f.parameter_count(), -scale, scale);
        const detail::LmOutcome lm = detail::levenberg_marquardt(f, start, opts);
        if (lm.residual < best.residual) {
            best.rep = f.to_representation(lm.theta);
            best.residual = lm.residual;
            best.restart = restart;
        }
        if (best.residual <= opts.target_residual) {
            break;
        }
    }
    return best;
}

}  // namespace realtree
