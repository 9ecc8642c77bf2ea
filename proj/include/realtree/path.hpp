#pragma once

// Root-to-node paths and their matrix monomials.
//
// A path is stored as the sequence of moves taken from the root. Its monomial
// string is that sequence reversed: the rightmost factor acts on x first, so
// the right child of the left child of the root is "RL" (the vector R L x).
// The monomial string factors into alternating runs
//
//     L^ell[0] R^r[0] L^ell[1] R^r[1] ... L^ell[k-1] R^r[k-1]
//
// with ell[0] >= 0, r[k-1] >= 0 and every interior run >= 1.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "realtree/error.hpp"
#include "realtree/linalg.hpp"

namespace realtree {

enum class Move : std::uint8_t { Left, Right };

inline char move_letter(Move m) { return m == Move::Left ? 'L' : 'R'; }

struct RunLength {
    std::vector<int> ell;
    std::vector<int> r;

    friend bool operator==(const RunLength&, const RunLength&) = default;
};

class Path {
public:
    Path() = default;
    explicit Path(std::vector<Move> moves) : moves_(std::move(moves)) {}

    /// Parses a monomial string over {L, R}.
    static Path from_monomial_string(std::string_view s) {
        std::vector<Move> moves;
        moves.reserve(s.size());
        for (std::size_t i = s.size(); i-- > 0;) {
            moves.push_back(parse_letter(s[i], i));
        }
        return Path(std::move(moves));
    }

    /// Parses a root-to-node move string over {L, R} (the DOT node id form).
    static Path from_moves_string(std::string_view s) {
        std::vector<Move> moves;
        moves.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            moves.push_back(parse_letter(s[i], i));
        }
        return Path(std::move(moves));
    }

    /// Rebuilds a path from run-length exponents; rejects vectors that break
    /// the interior-run invariant.
    static Path from_run_length(const RunLength& rle) {
        const std::size_t k = rle.ell.size();
        if (rle.r.size() != k) {
            throw DomainError("run length: ell and r differ in length");
        }
        std::string s;
        for (std::size_t i = 0; i < k; ++i) {
            const int lo_ell = i == 0 ? 0 : 1;
            const int lo_r = i + 1 == k ? 0 : 1;
            if (rle.ell[i] < lo_ell || rle.r[i] < lo_r) {
                throw DomainError("run length: run " + std::to_string(i) + " is out of range");
            }
            s.append(static_cast<std::size_t>(rle.ell[i]), 'L');
            s.append(static_cast<std::size_t>(rle.r[i]), 'R');
        }
        return from_monomial_string(s);
    }

    const std::vector<Move>& moves() const noexcept { return moves_; }
    std::size_t size() const noexcept { return moves_.size(); }
    bool empty() const noexcept { return moves_.empty(); }

    Path child(Move m) const {
        Path out = *this;
        out.moves_.push_back(m);
        return out;
    }

    std::string monomial_string() const {
        std::string s;
        s.reserve(moves_.size());
        for (auto it = moves_.rbegin(); it != moves_.rend(); ++it) {
            s.push_back(move_letter(*it));
        }
        return s;
    }

    std::string moves_string() const {
        std::string s;
        s.reserve(moves_.size());
        for (Move m : moves_) {
            s.push_back(move_letter(m));
        }
        return s;
    }

    RunLength run_length() const {
        RunLength out;
        const std::string s = monomial_string();
        std::size_t i = 0;
        while (i < s.size()) {
            int ls = 0;
            int rs = 0;
            while (i < s.size() && s[i] == 'L') {
                ++ls;
                ++i;
            }
            while (i < s.size() && s[i] == 'R') {
                ++rs;
                ++i;
            }
            out.ell.push_back(ls);
            out.r.push_back(rs);
        }
        return out;
    }

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;

private:
    static Move parse_letter(char c, std::size_t pos) {
        if (c == 'L') {
            return Move::Left;
        }
        if (c == 'R') {
            return Move::Right;
        }
        throw ParseError(std::string("path: expected 'L' or 'R', got '") + c + "'", pos);
    }

    std::vector<Move> moves_;
};

namespace detail {

inline void check_monomial_operands(const Matrix& l, const Matrix& r, Eigen::Index x_size) {
    const auto n = l.rows();
    if (l.cols() != n || r.rows() != n || r.cols() != n || x_size != n) {
        throw DimensionError("monomial: L and R must be n x n and x of length n (n = " +
                             std::to_string(n) + ")");
    }
}

}  // namespace detail

/// L^ell R^r x evaluated block by block: each run is raised by repeated
/// squaring and applied to the running vector, rightmost run first.
inline Vector evaluate_monomial(const Matrix& l, const Matrix& r, const Path& path, const Vector& x) {
    detail::check_monomial_operands(l, r, x.size());
    const RunLength rle = path.run_length();
    Vector v = x;
    for (std::size_t i = rle.ell.size(); i-- > 0;) {
        if (rle.r[i] > 0) {
            v = matrix_power(r, static_cast<unsigned>(rle.r[i])) * v;
        }
        if (rle.ell[i] > 0) {
            v = matrix_power(l, static_cast<unsigned>(rle.ell[i])) * v;
        }
    }
    return v;
}

/// The n x n monomial matrix of a path; the empty path gives the identity.
inline Matrix monomial_matrix(const Matrix& l, const Matrix& r, const Path& path) {
    detail::check_monomial_operands(l, r, l.rows());
    Matrix acc = Matrix::Identity(l.rows(), l.cols());
    for (Move m : path.moves()) {
        acc = (m == Move::Left ? l : r) * acc;
    }
    return acc;
}

}  // namespace realtree
