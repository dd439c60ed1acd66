#pragma once

#include <paramforge/numerics.hh>

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace paramforge
{
    using Bits = boost::dynamic_bitset<std::uint64_t>;

    // A symmetric graph on [n] that may have loops. A loop puts the vertex in
    // its own neighbourhood, so it counts once towards the degree.
    struct GraphLevel
    {
        std::size_t level = 0;
        std::size_t n = 0;
        std::uint64_t seed = 0;
        Rational p = 0;
        std::vector<Bits> rows;

        static auto empty(std::size_t level, std::size_t n) -> GraphLevel;

        auto adjacent(std::size_t a, std::size_t b) const -> bool { return rows[a][b]; }
        auto add_edge(std::size_t a, std::size_t b) -> void;
        auto degree(std::size_t v) const -> std::size_t { return rows[v].count(); }
        auto is_symmetric() const -> bool;
        auto edges() const -> std::vector<std::pair<std::size_t, std::size_t>>;

        auto operator==(const GraphLevel & other) const -> bool;
    };

    auto complete_level(std::size_t level, std::size_t n) -> GraphLevel;

    auto graph_to_json(const GraphLevel & g) -> nlohmann::json;
    auto graph_from_json(const nlohmann::json & j) -> GraphLevel;

    struct EdgeProbability
    {
        Rational value;
        bool exact = true;
        unsigned precision_bits = 64;
    };

    // Literal mode: m_i^{-1/g(i)}, exact when it is representable, otherwise
    // rounded down to a multiple of 2^-precision_bits. Scaled mode: the profile's p_i.
    auto edge_probability(const FastProfile & profile, std::size_t i, unsigned precision_bits = 64) -> EdgeProbability;

    // Largest graph sample_graph will allocate.
    inline constexpr std::size_t max_sample_vertices = 8192;

    // Each unordered pair {a, b} with a <= b, in lexicographic order, draws one
    // 64-bit word from mt19937_64(seed) and is an edge iff the word is below
    // floor(p * 2^64). The result is a pure function of (level, n, p, seed).
    auto sample_graph(std::size_t level, std::size_t n, const Rational & p, std::uint64_t seed) -> GraphLevel;
    auto sample_level(const FastProfile & profile, std::size_t i, std::uint64_t seed) -> GraphLevel;

    struct CoverOptions
    {
        std::uint64_t budget = 100'000'000;
        unsigned threads = 1;
    };

    struct CoverReport
    {
        bool pass = false;
        bool inconclusive = false;
        bool exhaustive = true;
        std::size_t s = 0;
        std::uint64_t sets_checked = 0;
        std::optional<std::vector<std::size_t>> witness;
    };

    struct DegreeReport
    {
        bool pass = false;
        std::size_t threshold = 0;
        std::size_t max_degree = 0;
        std::size_t vertex = 0;
    };

    // Number of subsets of [n] of size 1..s.
    auto count_subsets(std::size_t n, std::size_t s) -> BigInt;

    // Every u with |u| <= s has a common neighbour. On failure the witness is
    // the lexicographically first uncovered set of least size.
    auto verify_small_covered(const GraphLevel & g, std::size_t s, const CoverOptions & options = { }) -> CoverReport;

    // Random s-sets only: reports a failure with witness, or inconclusive.
    auto verify_small_covered_sampled(const GraphLevel & g, std::size_t s, std::uint64_t samples, std::uint64_t seed) -> CoverReport;

    // Max degree < L, which is the same as no set of size >= L having a common neighbour.
    auto verify_large_uncovered(const GraphLevel & g, std::size_t large) -> DegreeReport;

    struct LevelReport
    {
        std::size_t level = 0;
        bool demanded = true;
        std::size_t attempts = 0;
        std::uint64_t seed = 0;
        std::optional<CoverReport> small;
        std::optional<DegreeReport> large;

        auto pass() const -> bool;
    };

    auto derive_seed(std::uint64_t base_seed, std::size_t level, std::size_t attempt) -> std::uint64_t;

    struct ForgedLevel
    {
        GraphLevel graph;
        LevelReport report;
    };

    auto forge_level(const FastProfile & profile, std::size_t i, std::uint64_t base_seed, std::size_t max_retries,
            const CoverOptions & options = { }) -> ForgedLevel;

    struct GoodSequence
    {
        FastProfile profile;
        std::uint64_t base_seed = 0;
        std::vector<GraphLevel> levels;
        std::size_t verified_to = 0;
        std::vector<LevelReport> reports;
    };

    // Level 0 is the complete graph; levels below i_* are sampled once without
    // verification; the rest are forged. `depth` defaults to the profile depth.
    auto forge_sequence(const FastProfile & profile, std::uint64_t base_seed, std::size_t max_retries,
            const CoverOptions & options = { }, std::optional<std::size_t> depth = std::nullopt) -> GoodSequence;

    auto verify_sequence(const GoodSequence & seq, const CoverOptions & options = { }) -> std::vector<LevelReport>;

    auto cover_report_to_json(const CoverReport & r) -> nlohmann::json;
    auto degree_report_to_json(const DegreeReport & r) -> nlohmann::json;
    auto level_report_to_json(const LevelReport & r) -> nlohmann::json;
    auto sequence_to_json(const GoodSequence & seq) -> nlohmann::json;
    auto sequence_from_json(const nlohmann::json & j) -> GoodSequence;
}
