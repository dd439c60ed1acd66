#pragma once

#include <paramforge/parameter.hh>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paramforge
{
    // The positive type {Q_base(x)} together with R(x, a) for each a in params,
    // cut off at the common level of the params. Negative literals R(x, b) are
    // carried along but only discharged when the base prefix already rules them out.
    struct TypeQuery
    {
        Node base;
        std::vector<Node> params;
        std::vector<Node> negated;
        std::size_t depth = 0;
    };

    enum class TypeMode
    {
        greedy,
        exhaustive
    };

    enum class TypeStatus
    {
        consistent,
        inconsistent,
        // greedy search failed on a system where an earlier choice might matter
        undecided
    };

    struct NegatedStatus
    {
        Node param;
        // true: the base is already unrelated at its own level; false: left to the model
        bool implied = false;
    };

    struct TypeVerdict
    {
        TypeStatus status = TypeStatus::consistent;
        std::optional<Node> witness;
        std::optional<std::size_t> level;
        std::string reason;
        std::vector<NegatedStatus> negated;
        std::uint64_t nodes_visited = 0;

        auto consistent() const -> bool { return status == TypeStatus::consistent; }
    };

    // For k = 0..depth, the right nodes at level k related to prefix restricted to k.
    // Level k+1 is searched among successors of level k, which is complete for
    // systems whose relation is closed under restriction.
    auto s_rho(const TreeSystem & sys, const Node & prefix, std::size_t depth) -> std::vector<std::vector<Node>>;

    auto make_query(const Node & base, std::vector<Node> params, std::vector<Node> negated = { }) -> TypeQuery;

    auto decide_type(const TreeSystem & sys, const TypeQuery & q, TypeMode mode, std::uint64_t budget = 10'000'000) -> TypeVerdict;

    // Base: the first left node at level n related to nu. Params: every successor of nu.
    auto obstruction_instance(const TreeSystem & sys, std::size_t n, const Node & nu) -> TypeQuery;

    auto query_to_json(const TypeQuery & q) -> nlohmann::json;
    auto query_from_json(const nlohmann::json & j) -> TypeQuery;
    auto verdict_to_json(const TypeVerdict & v) -> nlohmann::json;
    auto status_name(TypeStatus s) -> std::string;
}
