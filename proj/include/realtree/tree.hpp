#pragma once

// Labeled binary trees with real-vector labels.
//
// Trees are immutable values stored flat in preorder: node 0 is the root and
// every node's left subtree immediately follows it. Two trees are equal iff
// they have the same shape and bitwise-equal labels.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "realtree/error.hpp"
#include "realtree/path.hpp"

namespace realtree {

using Label = std::vector<double>;

class TreeBuilder;

class Tree {
public:
    using Index = std::int32_t;
    static constexpr Index kNone = -1;

    /// The empty tree.
    Tree() = default;

    static Tree leaf(Label label) { return node(std::move(label), Tree(), Tree()); }

    /// A root labeled `label` over the given subtrees.
    static Tree node(Label label, const Tree& left, const Tree& right) {
        if (label.empty()) {
            throw DimensionError("tree: labels must have at least one component");
        }
        for (const Tree* sub : {&left, &right}) {
            if (!sub->empty() && sub->p_ != label.size()) {
                throw DimensionError("tree: subtree label dimension " + std::to_string(sub->p_) +
                                     " differs from root dimension " + std::to_string(label.size()));
            }
        }
        Tree t;
        t.p_ = label.size();
        t.labels_ = std::move(label);
        t.left_.push_back(left.empty() ? kNone : 1);
        t.right_.push_back(right.empty() ? kNone : static_cast<Index>(1 + left.size()));
        t.append(left, 1);
        t.append(right, static_cast<Index>(1 + left.size()));
        return t;
    }

    bool empty() const noexcept { return left_.empty(); }
    std::size_t size() const noexcept { return left_.size(); }
    /// Label dimension p; 0 for the empty tree.
    std::size_t label_dim() const noexcept { return p_; }

    std::span<const double> label(Index i) const {
        return {labels_.data() + static_cast<std::size_t>(i) * p_, p_};
    }
    Index left(Index i) const { return left_[static_cast<std::size_t>(i)]; }
    Index right(Index i) const { return right_[static_cast<std::size_t>(i)]; }
    Index child(Index i, Move m) const { return m == Move::Left ? left(i) : right(i); }

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    friend class TreeBuilder;

    void append(const Tree& sub, Index offset) {
        labels_.insert(labels_.end(), sub.labels_.begin(), sub.labels_.end());
        for (std::size_t i = 0; i < sub.size(); ++i) {
            left_.push_back(sub.left_[i] == kNone ? kNone : sub.left_[i] + offset);
            right_.push_back(sub.right_[i] == kNone ? kNone : sub.right_[i] + offset);
        }
    }

    std::size_t p_ = 0;
    std::vector<double> labels_;
    std::vector<Index> left_;
    std::vector<Index> right_;
};

/// Incremental construction in any node order; build() renumbers to preorder.
class TreeBuilder {
public:
    using Index = Tree::Index;

    explicit TreeBuilder(std::size_t label_dim) : p_(label_dim) {}

    std::size_t label_dim() const noexcept { return p_; }
    std::size_t size() const noexcept { return left_.size(); }

    Index add(std::span<const double> label) {
        if (label.size() != p_) {
            throw DimensionError("tree: label has " + std::to_string(label.size()) +
                                 " components, expected " + std::to_string(p_));
        }
        labels_.insert(labels_.end(), label.begin(), label.end());
        left_.push_back(Tree::kNone);
        right_.push_back(Tree::kNone);
        return static_cast<Index>(left_.size() - 1);
    }

    void link(Index parent, Move m, Index child) {
        auto& slot = (m == Move::Left ? left_ : right_)[static_cast<std::size_t>(parent)];
        slot = child;
    }

    /// The tree rooted at `root`; kNone yields the empty tree. Nodes not
    /// reachable from `root` are dropped. When `order_out` is given it receives,
    /// for each preorder position, the builder index of that node.
    Tree build(Index root, std::vector<Index>* order_out = nullptr) const {
        Tree t;
        if (root == Tree::kNone) {
            return t;
        }
        t.p_ = p_;
        std::vector<Index> order;
        std::vector<Index> stack{root};
        while (!stack.empty()) {
            const Index i = stack.back();
            stack.pop_back();
            order.push_back(i);
            const auto u = static_cast<std::size_t>(i);
            if (right_[u] != Tree::kNone) {
                stack.push_back(right_[u]);
            }
            if (left_[u] != Tree::kNone) {
                stack.push_back(left_[u]);
            }
        }
        std::vector<Index> renumber(left_.size(), Tree::kNone);
        for (std::size_t k = 0; k < order.size(); ++k) {
            renumber[static_cast<std::size_t>(order[k])] = static_cast<Index>(k);
        }
        t.labels_.reserve(order.size() * p_);
        t.left_.reserve(order.size());
        t.right_.reserve(order.size());
        if (order_out != nullptr) {
            *order_out = order;
        }
        for (Index i : order) {
            const auto u = static_cast<std::size_t>(i);
            t.labels_.insert(t.labels_.end(), labels_.begin() + static_cast<std::ptrdiff_t>(u * p_),
                             labels_.begin() + static_cast<std::ptrdiff_t>((u + 1) * p_));
            t.left_.push_back(left_[u] == Tree::kNone ? Tree::kNone
                                                      : renumber[static_cast<std::size_t>(left_[u])]);
            t.right_.push_back(right_[u] == Tree::kNone ? Tree::kNone
                                                        : renumber[static_cast<std::size_t>(right_[u])]);
        }
        return t;
    }

private:
    std::size_t p_;
    std::vector<double> labels_;
    std::vector<Index> left_;
    std::vector<Index> right_;
};

/// Same shape, every label component within `tol` in absolute value.
inline bool approx_equal(const Tree& a, const Tree& b, double tol) {
    if (a.size() != b.size()) {
        return false;
    }
    if (a.empty()) {
        return true;
    }
    if (a.label_dim() != b.label_dim()) {
        return false;
    }
    for (Tree::Index i = 0; i < static_cast<Tree::Index>(a.size()); ++i) {
        if (a.left(i) != b.left(i) || a.right(i) != b.right(i)) {
            return false;
        }
        const auto la = a.label(i);
        const auto lb = b.label(i);
        for (std::size_t k = 0; k < la.size(); ++k) {
            if (!(std::abs(la[k] - lb[k]) <= tol)) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Text forms

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_label(std::span<const double> label) {
    std::string s;
    for (std::size_t k = 0; k < label.size(); ++k) {
        if (k > 0) {
            s.push_back(',');
        }
        s += format_real(label[k]);
    }
    return s;
}

namespace detail {

class SexprParser {
public:
    explicit SexprParser(std::string_view text) : text_(text) {}

    Tree parse() {
        struct Frame {
            Tree::Index node;
            bool have_left;
        };
        std::vector<Frame> stack;
        std::size_t p = 0;
        TreeBuilder builder(0);
        bool builder_ready = false;
        Tree::Index root = Tree::kNone;

        skip_ws();
        for (;;) {
            // Parse one subtree head; `done` holds a finished subtree, if any.
            Tree::Index done = Tree::kNone;
            bool finished = false;
            if (at_end()) {
                throw ParseError("tree: unexpected end of input", pos_);
            }
            if (text_[pos_] == '.') {
                ++pos_;
                finished = true;
            } else if (text_[pos_] == '(') {
                ++pos_;
                const std::size_t label_pos = pos_;
                Label label = parse_label();
                if (!builder_ready) {
                    p = label.size();
                    builder = TreeBuilder(p);
                    builder_ready = true;
                } else if (label.size() != p) {
                    throw ParseError("tree: label has " + std::to_string(label.size()) +
                                         " components, expected " + std::to_string(p),
                                     label_pos);
                }
                if (at_end() || !is_ws(text_[pos_])) {
                    throw ParseError("tree: expected whitespace after label", pos_);
                }
                skip_ws();
                stack.push_back({builder.add(label), false});
                continue;
            } else {
                throw ParseError(std::string("tree: expected '.' or '(', got '") + text_[pos_] + "'", pos_);
            }

            // Attach finished subtrees upward, closing parents whose right child is done.
            while (finished) {
                if (stack.empty()) {
                    root = done;
                    skip_ws();
                    if (!at_end()) {
                        throw ParseError("tree: trailing characters", pos_);
                    }
                    return builder_ready ? builder.build(root) : Tree();
                }
                Frame& top = stack.back();
                if (!top.have_left) {
                    if (done != Tree::kNone) {
                        builder.link(top.node, Move::Left, done);
                    }
                    top.have_left = true;
                    skip_ws();
                    finished = false;
                } else {
                    if (done != Tree::kNone) {
                        builder.link(top.node, Move::Right, done);
                    }
                    skip_ws();
                    if (at_end() || text_[pos_] != ')') {
                        throw ParseError("tree: expected ')'", pos_);
                    }
                    ++pos_;
                    done = top.node;
                    stack.pop_back();
                }
            }
        }
    }

private:
    static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
    bool at_end() const { return pos_ >= text_.size(); }
    void skip_ws() {
        while (!at_end() && is_ws(text_[pos_])) {
            ++pos_;
        }
    }

    Label parse_label() {
        Label label;
        for (;;) {
            const char* first = text_.data() + pos_;
            const char* last = text_.data() + text_.size();
            double v = 0.0;
            const auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc() || !std::isfinite(v)) {
                throw ParseError("tree: expected a finite real number", pos_);
            }
            label.push_back(v);
            pos_ += static_cast<std::size_t>(res.ptr - first);
            if (!at_end() && text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            return label;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the S-expression form: tree := "." | "(" label WS tree WS tree ")",
/// label := real ("," real)*.
inline Tree parse_tree(std::string_view text) { return detail::SexprParser(text).parse(); }

inline std::string to_sexpr(const Tree& t) {
    if (t.empty()) {
        return ".";
    }
    struct Item {
        Tree::Index node;
        const char* text;  // non-null for literal output
    };
    std::string out;
    std::vector<Item> stack{{0, nullptr}};
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        if (it.text != nullptr) {
            out += it.text;
            continue;
        }
        if (it.node == Tree::kNone) {
            out.push_back('.');
            continue;
        }
        out.push_back('(');
        out += format_label(t.label(it.node));
        out.push_back(' ');
        stack.push_back({Tree::kNone, ")"});
        stack.push_back({t.right(it.node), nullptr});
        stack.push_back({Tree::kNone, " "});
        stack.push_back({t.left(it.node), nullptr});
    }
    return out;
}

/// Nested objects {"label": [...], "left": ..., "right": ...}; null is the empty tree.
inline nlohmann::json to_json(const Tree& t) {
    if (t.empty()) {
        return nullptr;
    }
    std::vector<nlohmann::json> built(t.size());
    for (auto i = static_cast<Tree::Index>(t.size()); i-- > 0;) {
        const auto lab = t.label(i);
        nlohmann::json obj;
        obj["label"] = std::vector<double>(lab.begin(), lab.end());
        obj["left"] = t.left(i) == Tree::kNone ? nlohmann::json(nullptr)
                                                : std::move(built[static_cast<std::size_t>(t.left(i))]);
        obj["right"] = t.right(i) == Tree::kNone ? nlohmann::json(nullptr)
                                                  : std::move(built[static_cast<std::size_t>(t.right(i))]);
        built[static_cast<std::size_t>(i)] = std::move(obj);
    }
    return std::move(built[0]);
}

// ---------------------------------------------------------------------------
// Structure

inline Tree mirror(const Tree& t) {
    if (t.empty()) {
        return t;
    }
    TreeBuilder b(t.label_dim());
    for (Tree::Index i = 0; i < static_cast<Tree::Index>(t.size()); ++i) {
        b.add(t.label(i));
    }
    for (Tree::Index i = 0; i < static_cast<Tree::Index>(t.size()); ++i) {
        if (t.left(i) != Tree::kNone) {
            b.link(i, Move::Right, t.left(i));
        }
        if (t.right(i) != Tree::kNone) {
            b.link(i, Move::Left, t.right(i));
        }
    }
    return b.build(0);
}

struct NodeEntry {
    Path path;
    Label label;
    Tree::Index index;
};

struct PathEnumeration {
    std::vector<NodeEntry> nodes;  // preorder
    std::vector<Path> buds;        // preorder discovery order
};

/// All node paths and bud paths of a nonempty tree.
inline PathEnumeration enumerate_paths(const Tree& t) {
    if (t.empty()) {
        throw DomainError("enumerate_paths: the empty tree has no root");
    }
    PathEnumeration out;
    out.nodes.reserve(t.size());
    out.buds.reserve(t.size() + 1);
    struct Item {
        Tree::Index node;  // kNone marks a bud
        Path path;
    };
    std::vector<Item> stack;
    stack.push_back({0, Path()});
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        if (it.node == Tree::kNone) {
            out.buds.push_back(std::move(it.path));
            continue;
        }
        const auto lab = t.label(it.node);
        stack.push_back({t.right(it.node), it.path.child(Move::Right)});
        stack.push_back({t.left(it.node), it.path.child(Move::Left)});
        out.nodes.push_back({std::move(it.path), Label(lab.begin(), lab.end()), it.node});
    }
    return out;
}

struct TreeStats {
    std::size_t nodes = 0;
    std::size_t buds = 0;
    std::size_t height = 0;  // levels; a root-only tree has height 1

    friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

inline TreeStats tree_stats(const Tree& t) {
    TreeStats s;
    if (t.empty()) {
        return s;
    }
    s.nodes = t.size();
    s.buds = t.size() + 1;
    // Preorder places every parent before its children.
    std::vector<std::size_t> depth(t.size(), 0);
    for (Tree::Index i = 0; i < static_cast<Tree::Index>(t.size()); ++i) {
        const std::size_t d = depth[static_cast<std::size_t>(i)];
        s.height = std::max(s.height, d + 1);
        for (Tree::Index c : {t.left(i), t.right(i)}) {
            if (c != Tree::kNone) {
                depth[static_cast<std::size_t>(c)] = d + 1;
            }
        }
    }
    return s;
}

struct DotOptions {
    bool show_buds = false;
};

/// Graphviz text. Node ids are root-to-node move strings ("" is the root).
inline std::string to_dot(const Tree& t, const DotOptions& opts = {}) {
    std::string out = "digraph tree {\n  node [shape=ellipse];\n";
    if (t.empty()) {
        return out + "}\n";
    }
    const PathEnumeration paths = enumerate_paths(t);
    auto quoted = [](const std::string& s) { return "\"" + s + "\""; };
    auto edge = [&](const Path& p) {
        const std::string id = p.moves_string();
        out += "  " + quoted(id.substr(0, id.size() - 1)) + " -> " + quoted(id) + ";\n";
    };
    for (const NodeEntry& e : paths.nodes) {
        out += "  " + quoted(e.path.moves_string()) + " [label=\"" + format_label(e.label) + "\"];\n";
        if (!e.path.empty()) {
            edge(e.path);
        }
    }
    if (opts.show_buds) {
        for (const Path& b : paths.buds) {
            out += "  " + quoted(b.moves_string()) +
                   " [shape=square, label=\"\", width=0.12, height=0.12];\n";
            edge(b);
        }
    }
    return out + "}\n";
}

enum class TreeFormat { Sexpr, Json, Dot };

inline std::string serialize_tree(const Tree& t, TreeFormat format, const DotOptions& dot = {}) {
    switch (format) {
        case TreeFormat::Sexpr:
            return to_sexpr(t);
        case TreeFormat::Json:
            return to_json(t).dump();
        case TreeFormat::Dot:
            return to_dot(t, dot);
    }
    return {};
}

}  // namespace realtree
