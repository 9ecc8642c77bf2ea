#pragma once

// Seeded generators for randomized checks. Draws are derived from the raw
// mt19937_64 stream so a seed reproduces the same instances everywhere.

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "realtree/linalg.hpp"
#include "realtree/tree.hpp"

namespace realtree {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    /// Uniform on [0, 1).
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    /// Uniform integer on [lo, hi].
    long uniform_int(long lo, long hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(gen_() % span);
    }
    bool coin() { return (gen_() >> 63) != 0; }

private:
    std::mt19937_64 gen_;
};

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            a(i, j) = rng.uniform(lo, hi);
        }
    }
    return a;
}

inline Vector random_vector(Rng& rng, Eigen::Index size, double lo = -1.0, double hi = 1.0) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = rng.uniform(lo, hi);
    }
    return v;
}

/// `a` rescaled to spectral norm `target`; the zero matrix is returned unchanged.
inline Matrix with_spectral_norm(const Matrix& a, double target) {
    const double s = spectral_norm(a);
    return s == 0.0 ? a : Matrix(a * (target / s));
}

/// A uniformly split random shape with exactly `nodes` nodes and labels in [-1, 1]^p.
inline Tree random_tree(Rng& rng, std::size_t nodes, std::size_t p) {
    if (nodes == 0) {
        return Tree();
    }
    TreeBuilder b(p);
    std::vector<double> label(p);
    auto fresh = [&] {
        for (double& v : label) {
            v = rng.uniform(-1.0, 1.0);
        }
        return b.add(label);
    };
    struct Job {
        Tree::Index node;
        std::size_t size;  // nodes in this subtree, including `node`
    };
    std::vector<Job> jobs{{fresh(), nodes}};
    while (!jobs.empty()) {
        const Job job = jobs.back();
        jobs.pop_back();
        const std::size_t rest = job.size - 1;
        const auto left = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(rest)));
        const std::size_t right = rest - left;
        if (left > 0) {
            const Tree::Index c = fresh();
            b.link(job.node, Move::Left, c);
            jobs.push_back({c, left});
        }
        if (right > 0) {
            const Tree::Index c = fresh();
            b.link(job.node, Move::Right, c);
            jobs.push_back({c, right});
        }
    }
    return b.build(0);
}

}  // namespace realtree
