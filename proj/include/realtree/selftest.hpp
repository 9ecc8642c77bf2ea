#pragma once

// Random instance families with known decode behaviour, and the property
// suites run by `realtree selftest`.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "realtree/decoder.hpp"
#include "realtree/encoder.hpp"
#include "realtree/random.hpp"
#include "realtree/tree.hpp"

namespace realtree {

/// Bud tolerance used with contracting families. With ||L|| + ||R|| <= s < 1
/// the embeddings at depth d sum to at most s^d ||x||, so a decode has at
/// most 1 / (tol (1 - s)) nodes.
inline constexpr double kContractingBudTolerance = 1e-6;

/// Decode settings for contracting families. Every embedding at depth d is
/// at most s^d ||x||, so with s <= 0.9 nothing survives past depth 132.
inline DecodeConfig contracting_config() {
    DecodeConfig cfg;
    cfg.bud_tolerance = kContractingBudTolerance;
    cfg.max_depth = 160;
    return cfg;
}

/// n in [2, 6], p in [1, 4], ||L|| + ||R|| = norm_sum split at random.
inline Representation random_contracting_representation(Rng& rng, double norm_sum = 0.9) {
    const auto n = rng.uniform_int(2, 6);
    const auto p = rng.uniform_int(1, 4);
    const double a = rng.uniform(0.05, norm_sum - 0.05);
    Representation rep;
    rep.L = with_spectral_norm(random_matrix(rng, n, n), a);
    rep.R = with_spectral_norm(random_matrix(rng, n, n), norm_sum - a);
    rep.C = random_matrix(rng, p, n);
    rep.x = random_vector(rng, n);
    return rep;
}

/// n in [2, 8]; one of L, R (chosen at random) has spectral norm theta, the
/// other a norm drawn from [0.05, other_max].
inline Representation random_vanishing_representation(Rng& rng, double theta = 0.5, double other_max = 0.4) {
    const auto n = rng.uniform_int(2, 8);
    const auto p = rng.uniform_int(1, 4);
    const double other = rng.uniform(0.05, other_max);
    const bool left_is_max = rng.coin();
    Representation rep;
    rep.L = with_spectral_norm(random_matrix(rng, n, n), left_is_max ? theta : other);
    rep.R = with_spectral_norm(random_matrix(rng, n, n), left_is_max ? other : theta);
    rep.C = random_matrix(rng, p, n);
    rep.x = random_vector(rng, n);
    return rep;
}

/// R = alpha L with L strictly lower triangular (n <= 8, random sparsity) and
/// alpha uniform in [-2, 2] without 0. x is redrawn until every ||L^d x|| for d < h stays
/// above 1e-3 ||x||, so no balanced node sits near the bud threshold.
inline Representation random_balanced_representation(Rng& rng, double* alpha_out = nullptr) {
    const auto n = rng.uniform_int(1, 8);
    const auto p = rng.uniform_int(1, 4);
    const double density = rng.uniform(0.3, 1.0);
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (rng.unit() < density) {
                l(i, j) = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
            }
        }
    }
    double alpha = 0.0;
    while (alpha == 0.0) {
        alpha = rng.uniform(-2.0, 2.0);
    }
    if (alpha_out != nullptr) {
        *alpha_out = alpha;
    }
    const int h = nilpotency_index(l).value_or(static_cast<int>(n));

    Representation rep{l, alpha * l, random_matrix(rng, p, n), Vector()};
    for (;;) {
        rep.x = random_vector(rng, n);
        bool ok = rep.x.norm() > 0.1;
        Vector v = rep.x;
        for (int d = 1; ok && d < h; ++d) {
            v = l * v;
            ok = v.norm() >= 1e-3 * rep.x.norm();
        }
        if (ok) {
            return rep;
        }
    }
}

/// Decode settings for the balanced family. Products of strictly lower
/// triangular matrices vanish exactly in floating point, so buds are exact
/// zeros; a relative threshold would drop nodes scaled by alpha^k when alpha
/// is small.
inline DecodeConfig balanced_config() {
    DecodeConfig cfg;
    cfg.bud_tolerance = 0.0;
    return cfg;
}

struct SuiteResult {
    std::string name;
    int cases = 0;
    int failures = 0;
    int first_failure = -1;
    bool passed() const { return failures == 0; }
};

namespace detail {

template <typename Check>
SuiteResult run_suite(const char* name, std::uint64_t suite_id, std::uint64_t seed, int cases, Check check) {
    SuiteResult r{name, cases, 0, -1};
    for (int k = 0; k < cases; ++k) {
        Rng rng(seed, (suite_id << 32) | static_cast<std::uint64_t>(k));
        bool ok = false;
        try {
            ok = check(rng);
        } catch (const Error&) {
            ok = false;
        }
        if (!ok) {
            if (r.failures == 0) {
                r.first_failure = k;
            }
            ++r.failures;
        }
    }
    return r;
}

inline bool leaves_at_depth(const Tree& t, std::size_t depth) {
    const PathEnumeration paths = enumerate_paths(t);
    for (const NodeEntry& e : paths.nodes) {
        const bool leaf = t.left(e.index) == Tree::kNone && t.right(e.index) == Tree::kNone;
        if (leaf && e.path.size() != depth) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

inline SuiteResult selftest_roundtrip(std::uint64_t seed, int cases) {
    return detail::run_suite("roundtrip", 1, seed, cases, [](Rng& rng) {
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 60));
        const auto p = static_cast<std::size_t>(rng.uniform_int(1, 4));
        const Tree t = random_tree(rng, m, p);
        if (parse_tree(to_sexpr(t)) != t) {
            return false;
        }
        const DecodeOutcome dec = decode(canonical_encode(t));
        return dec.status == DecodeStatus::Complete && dec.tree == t;
    });
}

inline SuiteResult selftest_mirror(std::uint64_t seed, int cases) {
    return detail::run_suite("mirror", 2, seed, cases, [](Rng& rng) {
        const Tree t = random_tree(rng, static_cast<std::size_t>(rng.uniform_int(1, 40)), 2);
        if (mirror(mirror(t)) != t) {
            return false;
        }
        const Representation rep = random_contracting_representation(rng);
        const DecodeConfig cfg = contracting_config();
        const DecodeOutcome direct = decode(rep, cfg);
        const DecodeOutcome swapped = decode(mirror_representation(rep), cfg);
        return direct.status == DecodeStatus::Complete && swapped.status == DecodeStatus::Complete &&
               approx_equal(swapped.tree, mirror(direct.tree), 1e-9);
    });
}

inline SuiteResult selftest_balanced(std::uint64_t seed, int cases) {
    return detail::run_suite("balanced", 3, seed, cases, [](Rng& rng) {
        const Representation rep = random_balanced_representation(rng);
        const std::optional<int> h = check_balanced_condition(rep);
        if (!h || h != nilpotency_index(rep.L)) {
            return false;
        }
        const DecodeOutcome dec = decode(rep, balanced_config());
        const TreeStats st = tree_stats(dec.tree);
        return dec.status == DecodeStatus::Complete && st.nodes == (std::size_t{1} << *h) - 1 &&
               st.height == static_cast<std::size_t>(*h) &&
               detail::leaves_at_depth(dec.tree, static_cast<std::size_t>(*h - 1));
    });
}

inline SuiteResult selftest_vanishing(std::uint64_t seed, int cases) {
    return detail::run_suite("vanishing", 4, seed, cases, [](Rng& rng) {
        const Representation rep = random_vanishing_representation(rng);
        const DecodeConfig cfg = contracting_config();
        const AnalysisReport a = analyze(rep, cfg);
        const DecodeOutcome dec = decode(rep, cfg);
        if (dec.status != DecodeStatus::Complete || !a.vanish_depth) {
            return false;
        }
        const PathEnumeration paths = enumerate_paths(dec.tree);
        for (const NodeEntry& e : paths.nodes) {
            const double bound = std::pow(a.theta, static_cast<double>(e.path.size())) * rep.x.norm();
            if (dec.embeddings.col(e.index).norm() > bound * (1.0 + 1e-9)) {
                return false;
            }
        }
        return tree_stats(dec.tree).height <= static_cast<std::size_t>(*a.vanish_depth);
    });
}

/// Runs every suite, writing one line per suite to `log`. True iff all pass.
inline bool run_selftest(std::uint64_t seed, int cases, std::ostream& log) {
    const std::vector<SuiteResult> results{selftest_roundtrip(seed, cases), selftest_mirror(seed, cases),
                                           selftest_balanced(seed, cases), selftest_vanishing(seed, cases)};
    bool all = true;
    for (const SuiteResult& r : results) {
        log << r.name << ": " << (r.passed() ? "pass" : "FAIL") << " (" << r.cases << " cases";
        if (!r.passed()) {
            log << ", " << r.failures << " failed, first at case " << r.first_failure;
        }
        log << ")\n";
        all = all && r.passed();
    }
    return all;
}

}  // namespace realtree
