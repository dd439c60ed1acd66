#pragma once

#include <paramforge/graphforge.hh>

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paramforge
{
    enum class Side
    {
        left,
        right
    };

    auto other_side(Side s) -> Side;

    struct Node
    {
        Side side = Side::left;
        std::vector<std::uint32_t> digits;

        auto level() const -> std::size_t { return digits.size(); }
        auto child(std::uint32_t t) const -> Node;
        auto parent() const -> Node;
        auto restrict(std::size_t k) const -> Node;
        auto extends(const Node & prefix) const -> bool;
        auto to_string() const -> std::string;

        auto operator==(const Node &) const -> bool = default;
        auto operator<=>(const Node &) const = default;
    };

    auto left_node(std::vector<std::uint32_t> digits) -> Node;
    auto right_node(std::vector<std::uint32_t> digits) -> Node;
    auto node_to_json(const Node & n) -> nlohmann::json;
    auto node_from_json(const nlohmann::json & j) -> Node;

    // A 0/1 window xi(0..N-1). Level k is active when xi(k) = 1 and lazy otherwise.
    class LevelFunction
    {
        public:
            LevelFunction() = default;
            LevelFunction(std::vector<bool> bits, std::size_t i_star);

            // zeros below i_star, ones from i_star to the end of the window
            static auto lazy_below(std::size_t i_star, std::size_t window) -> LevelFunction;
            static auto from_string(const std::string & bits, std::size_t i_star) -> LevelFunction;

            auto window() const -> std::size_t { return _bits.size(); }
            auto i_star() const -> std::size_t { return _i_star; }
            auto operator()(std::size_t k) const -> bool;

            // The two conventions in use: xi(0) = 1, and xi(i) = 0 for i < i_star.
            auto active_at_zero() const -> bool;
            auto lazy_below_i_star() const -> bool;

            auto to_string() const -> std::string;
            auto to_json() const -> nlohmann::json;
            static auto from_json(const nlohmann::json & j) -> LevelFunction;

            auto operator==(const LevelFunction &) const -> bool = default;

        private:
            std::vector<bool> _bits;
            std::size_t _i_star = 0;
    };

    // Two finitely branching trees of a common finite height with a relation
    // R_k between their level-k nodes. Left nodes come first in `related`.
    class TreeSystem
    {
        public:
            virtual ~TreeSystem() = default;

            virtual auto depth() const -> std::size_t = 0;
            virtual auto contains(const Node & n) const -> bool = 0;

            // immediate successors in increasing digit order
            virtual auto successors(const Node & n) const -> std::vector<Node> = 0;
            virtual auto related(const Node & left, const Node & right) const -> bool = 0;

            // True when level k is known to add no constraints.
            virtual auto is_lazy(std::size_t) const -> bool { return false; }

            auto level_nodes(Side side, std::size_t k, std::uint64_t budget = 1'000'000) const -> std::vector<Node>;
    };

    class EdgeCache;

    // The parameter built from a good sequence and a level function: both trees
    // are {eta : eta(i) < m_i}, and (eta, nu) is in R_{k+1} iff the parents are in
    // R_k and (eta(k), nu(k)) is an edge of E_k (active k) or k is lazy.
    class Parameter : public TreeSystem
    {
        public:
            // Memoized R_k decisions per level; least recently used entries are evicted.
            static constexpr std::size_t default_cache_entries = 1u << 18;

            Parameter(GoodSequence graphs, LevelFunction xi, std::size_t cache_entries = default_cache_entries);

            auto profile() const -> const FastProfile &;
            auto sequence() const -> const GoodSequence &;
            auto xi() const -> const LevelFunction &;
            auto transposed() const -> bool { return _transposed; }

            auto depth() const -> std::size_t override;
            auto contains(const Node & n) const -> bool override;
            auto successors(const Node & n) const -> std::vector<Node> override;
            auto related(const Node & left, const Node & right) const -> bool override;
            auto is_lazy(std::size_t k) const -> bool override;

            auto width(std::size_t k) const -> std::size_t;
            auto level_size(std::size_t k) const -> std::uint64_t;

            // (a, b) in E^{xi(k)}_k for a left digit a and a right digit b
            auto child_edge(std::size_t k, std::uint32_t a, std::uint32_t b) const -> bool;

            auto r_edge(std::size_t k, const Node & left, const Node & right) const -> bool;

            auto dual() const -> Parameter;
            auto is_self_dual() const -> bool;

            auto cache_hits() const -> std::uint64_t;
            auto cache_misses() const -> std::uint64_t;

            auto operator==(const Parameter & other) const -> bool;

        private:
            struct Data;

            auto check_node(const Node & n, Side side) const -> void;
            auto base_edge(std::size_t k, std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) const -> bool;

            std::shared_ptr<const Data> _data;
            std::shared_ptr<EdgeCache> _cache;
            bool _transposed = false;
    };

    auto parameter_to_json(const Parameter & p) -> nlohmann::json;
    auto parameter_from_json(const nlohmann::json & j) -> Parameter;

    // Enumerates both trees to `depth` and compares the system with its transpose.
    auto is_self_dual(const TreeSystem & sys, std::uint64_t budget = 1'000'000) -> bool;

    // Smallest successor of the left node nu related to every target.
    auto find_successor_witness(const TreeSystem & sys, const Node & nu, const std::vector<Node> & targets) -> std::optional<Node>;

    struct ReducedGraph
    {
        std::size_t level = 0;
        std::vector<Node> left, right;
        std::vector<std::pair<std::size_t, std::size_t>> edges;

        auto is_complete() const -> bool { return edges.size() == left.size() * right.size(); }
        auto is_empty() const -> bool { return edges.empty(); }
    };

    auto reduced_graph(const TreeSystem & sys, std::size_t k, const std::vector<Node> & left, const std::vector<Node> & right) -> ReducedGraph;
    auto reduced_graph_to_json(const ReducedGraph & h) -> nlohmann::json;

    struct AxiomCheck
    {
        std::string check;
        bool pass = true;
        bool exhaustive = true;
        std::uint64_t instances = 0;
        nlohmann::json counterexample;
    };

    struct AxiomOptions
    {
        std::uint64_t budget = 50'000'000;
        std::uint64_t samples_per_node = 2000;
        std::uint64_t seed = 0;
        unsigned threads = 1;
    };

    struct AxiomReport
    {
        std::size_t depth = 0;
        std::vector<AxiomCheck> checks;

        auto pass() const -> bool;
        auto first_failure() const -> const AxiomCheck *;
    };

    // Coherence, two-successor, lazy-completeness and both extension axioms for
    // every level k < depth.
    auto check_axioms(const TreeSystem & sys, std::size_t depth, const AxiomOptions & options = { }) -> AxiomReport;
    auto axiom_report_to_json(const AxiomReport & r) -> nlohmann::json;

    // The finite two-level example with asymmetric trees.
    class WarmupFixture : public TreeSystem
    {
        public:
            WarmupFixture();

            auto depth() const -> std::size_t override { return 2; }
            auto contains(const Node & n) const -> bool override;
            auto successors(const Node & n) const -> std::vector<Node> override;
            auto related(const Node & left, const Node & right) const -> bool override;

            auto relation(std::size_t k) const -> const std::vector<std::pair<Node, Node>> &;

        private:
            std::vector<Node> _left, _right;
            std::vector<std::vector<std::pair<Node, Node>>> _relations;
    };

    auto load_warmup() -> const WarmupFixture &;
    auto warmup_to_json(const WarmupFixture & w) -> nlohmann::json;
}
