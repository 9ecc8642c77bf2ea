// realtree: decode, encode, analyze and mirror real tree representations.
//
// Exit status: 0 ok, 1 malformed input or usage, 2 decode budget exhausted,
// 3 encoding infeasible at tolerance, 4 self-test failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "realtree/realtree.hpp"

namespace {

using namespace realtree;

enum ExitCode : int {
    kOk = 0,
    kMalformed = 1,
    kBudgetExhausted = 2,
    kInfeasible = 3,
    kSelftestFailed = 4,
};

/// Relative residual above which an encoding is reported infeasible.
constexpr double kFeasibilityTolerance = 1e-6;

std::string read_input(const std::string& path) {
    if (path == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), {});
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TreeFormat parse_format(const std::string& name) {
    if (name == "json") {
        return TreeFormat::Json;
    }
    if (name == "dot") {
        return TreeFormat::Dot;
    }
    return TreeFormat::Sexpr;
}

std::string optional_text(const std::optional<int>& v) { return v ? std::to_string(*v) : "none"; }

void write_tree(const Tree& t, const std::string& format, bool show_buds) {
    std::cout << serialize_tree(t, parse_format(format), DotOptions{show_buds});
    if (parse_format(format) != TreeFormat::Dot) {
        std::cout << '\n';
    }
}

struct DecodeArgs {
    std::string file;
    DecodeConfig cfg;
    std::string format = "sexpr";
    bool show_buds = false;
};

int cmd_decode(const DecodeArgs& args) {
    const Representation rep = parse_representation(read_input(args.file));
    const DecodeOutcome out = decode(rep, args.cfg);
    write_tree(out.tree, args.format, args.show_buds);
    if (out.status == DecodeStatus::BudgetExhausted) {
        std::cerr << "budget exhausted: " << out.frontier.size() << " unexpanded positions\n";
        for (const Path& p : out.frontier) {
            std::cerr << "frontier " << p.monomial_string() << '\n';
        }
        return kBudgetExhausted;
    }
    return kOk;
}

struct EncodeArgs {
    std::string file;
    std::string mode = "canonical";
    std::string matrices;
    int dim = 0;
    bool report = false;
    std::string export_prefix;
    SearchOptions search;
};

void export_system(const DecodingSystem& sys, const std::string& prefix) {
    std::ofstream m(prefix + ".mtx");
    m << "%%MatrixMarket matrix array real general\n" << sys.M.rows() << ' ' << sys.M.cols() << '\n';
    for (Eigen::Index j = 0; j < sys.M.cols(); ++j) {
        for (Eigen::Index i = 0; i < sys.M.rows(); ++i) {
            m << format_real(sys.M(i, j)) << '\n';
        }
    }
    std::ofstream y(prefix + ".y.txt");
    for (Eigen::Index i = 0; i < sys.y.size(); ++i) {
        y << format_real(sys.y(i)) << '\n';
    }
    if (!m || !y) {
        throw Error("cannot write system files with prefix " + prefix);
    }
}

void print_block_map(const DecodingSystem& sys) {
    for (std::size_t k = 0; k < sys.row_map.size(); ++k) {
        const RowBlock& b = sys.row_map[k];
        std::cerr << "block " << k << ' ' << (b.kind == BlockKind::Node ? "node" : "bud") << ' '
                  << (b.path.empty() ? "e" : b.path.monomial_string()) << '\n';
    }
}

int cmd_encode(const EncodeArgs& args) {
    const Tree tree = parse_tree(read_input(args.file));
    if (tree.empty()) {
        throw DomainError("encode: the target tree is empty");
    }
    const double label_norm = [&] {
        double s = 0.0;
        for (Tree::Index i = 0; i < static_cast<Tree::Index>(tree.size()); ++i) {
            for (double v : tree.label(i)) {
                s += v * v;
            }
        }
        return std::sqrt(s);
    }();
    const double feasible_below = kFeasibilityTolerance * (1.0 + label_norm);

    if (args.mode == "canonical") {
        const Representation rep = canonical_encode(tree);
        std::cout << format_representation(rep);
        if (args.report) {
            const DecodingSystem sys = build_decoding_system(tree, rep.L, rep.R, rep.C);
            const ReachabilityReport r = reachability(sys);
            std::cerr << "rank=" << r.rank << "\nbound=" << r.bound
                      << "\ncompletely_reachable=" << (r.completely_reachable ? "true" : "false") << '\n';
        }
        return kOk;
    }

    if (args.mode == "solve-x") {
        if (args.matrices.empty()) {
            throw DomainError("encode: --mode solve-x requires --matrices");
        }
        Representation rep = parse_representation(read_input(args.matrices));
        const DecodingSystem sys = build_decoding_system(tree, rep.L, rep.R, rep.C);
        const ReachabilityReport r = reachability(sys);
        const EmbeddingSolution sol = solve_embedding(sys);
        rep.x = sol.x;
        std::cerr << "rank=" << r.rank << "\nbound=" << r.bound
                  << "\ncompletely_reachable=" << (r.completely_reachable ? "true" : "false")
                  << "\nresidual=" << format_real(sol.residual_norm) << '\n';
        if (args.report) {
            std::cerr << "singular_values=";
            for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
                std::cerr << (i > 0 ? "," : "") << format_real(r.singular_values(i));
            }
            std::cerr << '\n';
            print_block_map(sys);
        }
        if (!args.export_prefix.empty()) {
            export_system(sys, args.export_prefix);
        }
        std::cout << format_representation(rep);
        if (sol.residual_norm > feasible_below) {
            std::cerr << "infeasible at tolerance " << format_real(feasible_below) << '\n';
            return kInfeasible;
        }
        return kOk;
    }

    if (args.mode == "search") {
        if (args.dim < 1) {
            throw DomainError("encode: --mode search requires --dim");
        }
        const auto p = static_cast<Eigen::Index>(tree.label_dim());
        Matrix c;
        if (!args.matrices.empty()) {
            c = parse_representation(read_input(args.matrices)).C;
        } else if (p == args.dim) {
            c = Matrix::Identity(p, p);
        } else {
            throw DomainError("encode: search needs --matrices for C when label dimension differs from --dim");
        }
        const SearchResult res = search_representation(tree, args.dim, c, args.search);
        std::cerr << "residual=" << format_real(res.residual) << "\nrestart=" << res.restart << '\n';
        std::cout << format_representation(res.rep);
        if (res.residual > feasible_below) {
            std::cerr << "infeasible at tolerance " << format_real(feasible_below) << '\n';
            return kInfeasible;
        }
        return kOk;
    }

    throw DomainError("encode: unknown mode " + args.mode);
}

int cmd_analyze(const std::string& file, const DecodeConfig& cfg) {
    const Representation rep = parse_representation(read_input(file));
    const AnalysisReport a = analyze(rep, cfg);
    std::cout << "norm_L=" << format_real(a.norm_L) << '\n'
              << "norm_R=" << format_real(a.norm_R) << '\n'
              << "theta=" << format_real(a.theta) << '\n'
              << "commutator_norm=" << format_real(a.commutator_norm) << '\n'
              << "nilpotency_L=" << optional_text(a.nilpotency_L) << '\n'
              << "nilpotency_R=" << optional_text(a.nilpotency_R) << '\n'
              << "vanish_depth=" << optional_text(a.vanish_depth) << '\n'
              << "balanced_h=" << optional_text(check_balanced_condition(rep)) << '\n'
              << "decode_status=" << to_string(a.scan_status) << '\n'
              << "null_label_nodes=" << a.null_label_nodes.size() << '\n';
    for (const Path& p : a.null_label_nodes) {
        std::cout << "null_label_node=" << (p.empty() ? "e" : p.monomial_string()) << '\n';
    }
    return kOk;
}

int cmd_mirror(const std::string& file, bool representation, const std::string& format, bool show_buds) {
    const std::string text = read_input(file);
    if (representation) {
        std::cout << format_representation(mirror_representation(parse_representation(text)));
    } else {
        write_tree(mirror(parse_tree(text)), format, show_buds);
    }
    return kOk;
}

void add_decode_budget_flags(CLI::App* cmd, DecodeConfig& cfg) {
    cmd->add_option("--tolerance", cfg.bud_tolerance, "Relative bud tolerance (bud iff |v| <= tol (1 + |x|))")
        ->capture_default_str();
    cmd->add_option("--max-depth", cfg.max_depth, "Deepest node depth expanded (root is depth 0)")
        ->capture_default_str();
    cmd->add_option("--max-nodes", cfg.max_nodes, "Node budget")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-valued binary tree representations: (L, x, R) with labeling C."};
    app.require_subcommand(1);
    app.footer(
        "Paths are written as monomial strings: \"RL\" is R L x, the right child of the left child of\n"
        "the root. DOT node ids use the reverse, root-to-node order (\"LR\" for the same node).\n"
        "Exit status: 0 ok, 1 malformed input, 2 budget exhausted, 3 infeasible at tolerance,\n"
        "4 self-test failure.");

    DecodeArgs dec;
    auto* decode_cmd = app.add_subcommand("decode", "Expand a representation document into a tree");
    decode_cmd->add_option("file", dec.file, "Representation JSON ('-' for stdin)")->required();
    add_decode_budget_flags(decode_cmd, dec.cfg);
    decode_cmd->add_option("--format", dec.format, "Output format")
        ->check(CLI::IsMember({"sexpr", "json", "dot"}))
        ->capture_default_str();
    decode_cmd->add_flag("--show-buds", dec.show_buds, "Render buds as small squares in DOT output");

    EncodeArgs enc;
    auto* encode_cmd = app.add_subcommand("encode", "Represent a tree in the real field");
    encode_cmd->add_option("file", enc.file, "Tree in S-expression form ('-' for stdin)")->required();
    encode_cmd->add_option("--mode", enc.mode, "canonical, solve-x (needs --matrices) or search (needs --dim)")
        ->check(CLI::IsMember({"canonical", "solve-x", "search"}))
        ->capture_default_str();
    encode_cmd->add_option("--matrices", enc.matrices, "Representation JSON supplying L, R and C");
    encode_cmd->add_option("--dim", enc.dim, "Embedding dimension for search");
    encode_cmd->add_flag("--report", enc.report, "Print singular values and the row-block map");
    encode_cmd->add_option("--export-system", enc.export_prefix,
                           "Write M to PREFIX.mtx and y to PREFIX.y.txt (solve-x)");
    encode_cmd->add_option("--restarts", enc.search.restarts, "Search restarts")->capture_default_str();
    encode_cmd->add_option("--max-iters", enc.search.max_iters, "Iterations per restart")->capture_default_str();
    encode_cmd->add_option("--seed", enc.search.seed, "Search seed")->capture_default_str();

    std::string analyze_file;
    DecodeConfig analyze_cfg;
    auto* analyze_cmd = app.add_subcommand("analyze", "Report norms, nilpotency and finiteness predictors");
    analyze_cmd->add_option("file", analyze_file, "Representation JSON ('-' for stdin)")->required();
    add_decode_budget_flags(analyze_cmd, analyze_cfg);

    std::string mirror_file;
    bool mirror_rep = false;
    std::string mirror_format = "sexpr";
    bool mirror_buds = false;
    auto* mirror_cmd = app.add_subcommand("mirror", "Exchange left and right subtrees recursively");
    mirror_cmd->add_option("file", mirror_file, "Tree file, or representation with --representation")->required();
    mirror_cmd->add_flag("--representation", mirror_rep, "Input is a representation; swap L and R");
    mirror_cmd->add_option("--format", mirror_format, "Tree output format")
        ->check(CLI::IsMember({"sexpr", "json", "dot"}))
        ->capture_default_str();
    mirror_cmd->add_flag("--show-buds", mirror_buds, "Render buds in DOT output");

    std::uint64_t seed = 42;
    int cases = 100;
    auto* selftest_cmd = app.add_subcommand("selftest", "Run randomized property suites");
    selftest_cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    selftest_cmd->add_option("--cases", cases, "Cases per suite")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kMalformed;
    }

    try {
        if (*decode_cmd) {
            return cmd_decode(dec);
        }
        if (*encode_cmd) {
            return cmd_encode(enc);
        }
        if (*analyze_cmd) {
            return cmd_analyze(analyze_file, analyze_cfg);
        }
        if (*mirror_cmd) {
            return cmd_mirror(mirror_file, mirror_rep, mirror_format, mirror_buds);
        }
        if (*selftest_cmd) {
            return run_selftest(seed, cases, std::cout) ? kOk : kSelftestFailed;
        }
    } catch (const realtree::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMalformed;
    }
    return kMalformed;
}
