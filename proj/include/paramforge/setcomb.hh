#pragma once

#include <paramforge/parameter.hh>

#include <cstdint>
#include <optional>
#include <vector>

namespace paramforge
{
    using FiniteSet = std::vector<std::uint64_t>;

    struct SunflowerResult
    {
        FiniteSet core;
        std::vector<std::size_t> member_indices;
    };

    struct SunflowerOptions
    {
        // nodes of the exhaustive packing search, summed over candidate cores
        std::uint64_t budget = 10'000'000;
    };

    // A subfamily of at least `petals` members whose pairwise intersections all
    // equal the core. A greedy pass (disjoint petals, else branch on the most
    // frequent element) runs first; then every pairwise intersection is tried
    // as a core with an exact packing search. Nullopt means none was found
    // within the budget.
    auto sunflower(const std::vector<FiniteSet> & family, std::size_t petals, const SunflowerOptions & options = { })
        -> std::optional<SunflowerResult>;

    auto is_sunflower(const std::vector<FiniteSet> & family, const SunflowerResult & r) -> bool;

    // k level functions on the window [0, i_star + t 2^k). Position i_star + j
    // carries the subset pattern j mod 2^k: xi_alpha is 1 there iff bit alpha of
    // j is set. Everything below i_star is 0.
    struct LevelFunctionFamily
    {
        std::size_t k = 0, i_star = 0, t = 0;
        std::vector<std::vector<bool>> bits;
        // reserved: no pairwise almost-disjoint variant is built
        bool almost_disjoint = false;

        auto window() const -> std::size_t { return i_star + (t << k); }
        auto function(std::size_t alpha) const -> LevelFunction;
        auto ones(std::size_t alpha) const -> FiniteSet;

        // positions n with xi_beta(n) = 1 and xi_alpha(n) = 0 for every alpha in u
        auto witness_count(std::size_t beta, const std::vector<std::size_t> & u) const -> std::size_t;
    };

    inline constexpr std::size_t max_family_size = 16;

    auto independent_family(std::size_t k, std::size_t i_star, std::size_t t) -> LevelFunctionFamily;

    auto family_to_json(const LevelFunctionFamily & f) -> nlohmann::json;
    auto family_from_json(const nlohmann::json & j) -> LevelFunctionFamily;

    // v is almost contained in the union of the generators: at most
    // `exceptions` elements of v lie outside it. Zero is the strict reading.
    struct IdealQuery
    {
        FiniteSet target;
        std::vector<FiniteSet> generators;
        std::size_t exceptions = 0;
    };

    auto ideal_contains(const IdealQuery & q) -> bool;
    auto ideal_excess(const IdealQuery & q) -> FiniteSet;
}
