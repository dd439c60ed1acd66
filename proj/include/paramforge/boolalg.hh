#pragma once

#include <paramforge/parameter.hh>
#include <paramforge/setcomb.hh>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace paramforge
{
    inline constexpr std::size_t max_atoms = std::size_t(1) << 20;

    struct Universe
    {
        std::size_t atoms = 0;
        // With partition structure, atom i is the total function p -> (i / strides[p]) % radices[p].
        std::vector<std::size_t> radices, strides;
    };

    class FiniteBA;

    // A set of atoms of one particular algebra.
    struct Element
    {
        std::shared_ptr<const Universe> universe;
        Bits bits;

        auto is_zero() const -> bool { return bits.none(); }
        auto count() const -> std::size_t { return bits.count(); }
        auto contains(std::size_t atom) const -> bool { return bits.test(atom); }

        auto operator==(const Element & other) const -> bool;
    };

    auto meet(const Element & a, const Element & b) -> Element;
    auto join(const Element & a, const Element & b) -> Element;
    auto complement(const Element & a) -> Element;
    auto difference(const Element & a, const Element & b) -> Element;
    auto leq(const Element & a, const Element & b) -> bool;
    auto disjoint(const Element & a, const Element & b) -> bool;

    // partition index -> block
    using PartialFunction = std::map<std::size_t, std::size_t>;

    // Finite algebras are complete, so no completion step is ever needed.
    class FiniteBA
    {
        public:
            // An algebra with n unstructured atoms.
            static auto with_atoms(std::size_t n) -> FiniteBA;

            // One independent partition per radix; atoms are the total functions.
            static auto partitioned(const std::vector<std::size_t> & radices) -> FiniteBA;

            auto atoms() const -> std::size_t { return _u->atoms; }
            auto partitions() const -> std::size_t { return _u->radices.size(); }
            auto radix(std::size_t p) const -> std::size_t { return _u->radices.at(p); }
            auto coordinate(std::size_t atom, std::size_t p) const -> std::size_t;
            auto universe() const -> const std::shared_ptr<const Universe> & { return _u; }

            auto zero() const -> Element;
            auto one() const -> Element;
            auto atom(std::size_t i) const -> Element;
            auto element(const std::vector<std::size_t> & atoms) const -> Element;
            auto from_bits(Bits bits) const -> Element;

            // block b of partition p
            auto block(std::size_t p, std::size_t b) const -> Element;

            // x_f: the atoms agreeing with f
            auto generator(const PartialFunction & f) const -> Element;

            auto atoms_of(const Element & e) const -> std::vector<std::size_t>;
            auto owns(const Element & e) const -> bool { return e.universe == _u; }

            // Nonzero, pairwise disjoint, and joining to 1.
            auto maximal_antichain_check(const std::vector<Element> & elements) const -> bool;

            auto operator==(const FiniteBA & other) const -> bool { return _u == other._u; }

        private:
            explicit FiniteBA(std::shared_ptr<const Universe> u) : _u(std::move(u)) { }
            auto check(const Element & e) const -> void;

            std::shared_ptr<const Universe> _u;
    };

    auto element_to_json(const Element & e) -> nlohmann::json;
    auto element_from_json(const FiniteBA & ba, const nlohmann::json & j) -> Element;

    // Where a pattern came from: index alpha picks its level-k digit with
    // partition alpha * depth + k, so every atom names a right node rho_alpha
    // at level `depth` for each alpha.
    struct PatternLayout
    {
        std::optional<Parameter> source;
        std::size_t depth = 0, theta = 0;
        std::vector<std::size_t> widths;

        auto partition(std::size_t alpha, std::size_t k) const -> std::size_t { return alpha * depth + k; }
        auto radices() const -> std::vector<std::size_t>;
    };

    // u -> b_u for u a subset of theta, stored by bitmask. A layout-only pattern
    // (no materialized b) is described by its provenance alone.
    struct PossibilityPattern
    {
        FiniteBA algebra = FiniteBA::with_atoms(1);
        std::size_t theta = 0;
        std::vector<Element> b;
        std::optional<PatternLayout> layout;

        auto materialized() const -> bool { return ! b.empty(); }
        auto at(std::uint32_t u) const -> const Element &;
    };

    inline constexpr std::size_t max_theta = 16;

    struct PatternCheck
    {
        bool pass = true;
        std::string reason;
        std::optional<std::pair<std::uint32_t, std::uint32_t>> witness;
    };

    // b_empty = 1 and u subset of v implies b_v <= b_u.
    auto check_pattern(const PossibilityPattern & p) -> PatternCheck;

    auto make_pattern(const FiniteBA & ba, std::size_t theta, std::vector<Element> b) -> PossibilityPattern;

    auto pattern_layout(const Parameter & param, std::size_t depth, std::size_t theta) -> PatternLayout;

    // b_u: atoms where some left node at level `depth` is related to rho_alpha(atom) for every alpha in u.
    auto pattern_from_parameter(const Parameter & param, std::size_t depth, std::size_t theta, std::size_t atom_budget = max_atoms)
        -> PossibilityPattern;

    // The right node that index alpha selects at an atom.
    auto selected_node(const FiniteBA & ba, const PatternLayout & layout, std::size_t atom, std::size_t alpha) -> Node;

    auto pattern_to_json(const PossibilityPattern & p) -> nlohmann::json;
    auto pattern_from_json(const nlohmann::json & j) -> PossibilityPattern;

    struct Embedding
    {
        FiniteBA source, target;
        // image of each source atom
        std::vector<Element> images;

        auto apply(const Element & e) const -> Element;
    };

    struct Solution
    {
        FiniteBA algebra;
        std::vector<Element> b1;

        // b1_u, the meet over u (1 for u empty), and b2_u, the join
        auto b1_meet(std::uint32_t u) const -> Element;
        auto b2_join(std::uint32_t u) const -> Element;
    };

    struct FreeExtension
    {
        FiniteBA algebra;
        Embedding embedding;
        Solution solution;
        // atom i of the extension is the pair (old atom, subset s)
        std::vector<std::pair<std::size_t, std::uint32_t>> pairs;
    };

    // Atoms (a, s) with a in b_s; x embeds as {(a, s) : a in x}; b1_alpha = {(a, s) : alpha in s}.
    auto free_extension(const PossibilityPattern & pattern, std::size_t atom_budget = max_atoms) -> FreeExtension;

    struct Ext1Options
    {
        // B_a's maximal antichains are enumerated while there are at most this many
        std::uint64_t antichain_budget = 5000;
        std::vector<std::vector<Element>> antichains;
    };

    struct Ext1Report
    {
        bool homomorphism = true, solution = true, antichains = true, fip = true;
        std::uint64_t antichains_checked = 0;
        bool antichains_exhaustive = false;
        nlohmann::json witness;

        auto pass() const -> bool { return homomorphism && solution && antichains && fip; }
    };

    auto check_ext1(const PossibilityPattern & pattern, const Embedding & embedding, const Solution & solution,
            const std::vector<Element> & filter_seed, const Ext1Options & options = { }) -> Ext1Report;
    auto ext1_report_to_json(const Ext1Report & r) -> nlohmann::json;

    // Every partition of a small atom set, i.e. every maximal antichain. Throws past the budget.
    auto enumerate_maximal_antichains(const FiniteBA & ba, std::uint64_t budget) -> std::vector<std::vector<Element>>;

    // x in B_a, u, and singleton exclusions v with 0 < x . b1_u . -b1_v <= element and x <= b_u.
    // The form with the fewest indices (then the smallest masks) is chosen, and x is the
    // largest element of B_a that works for it.
    struct NormalForm
    {
        Element x;
        std::uint32_t u = 0;
        std::vector<std::uint32_t> exclusions;
    };

    auto normal_form(const PossibilityPattern & pattern, const FreeExtension & ext, const Element & element) -> NormalForm;
    auto normal_form_region(const FreeExtension & ext, const NormalForm & nf) -> Element;

    // Every nonzero c <= a in the source algebra has image meeting b.
    auto below_projection(const Embedding & embedding, const Element & a, const Element & b) -> bool;

    struct RefinementOptions
    {
        std::size_t max_theta = 5;
        std::size_t max_atoms = 4096;
    };

    // A solution b1 within the pattern's own algebra such that b1_u <= b_u for every u
    // and filter_seed together with every b1_alpha has the finite intersection property.
    auto find_refinement(const PossibilityPattern & pattern, const std::vector<Element> & filter_seed,
            const RefinementOptions & options = { }) -> std::optional<Solution>;

    struct ObstructionReport
    {
        bool identity_holds = false;
        bool materialized = false;
        std::size_t pinned = 0;
        BigInt box_atoms = 0, meet_atoms = 0;
        Node base;
    };

    // Pins index l to the l-th successor of nu (l < count) and computes
    // b_w . (pins) for w = {0..count-1}. The identity holds when that is 0.
    auto obstruction_identity(const Parameter & param, const PossibilityPattern & pattern, const Node & nu,
            std::optional<std::size_t> count = std::nullopt) -> ObstructionReport;
    auto obstruction_report_to_json(const ObstructionReport & r) -> nlohmann::json;

    struct CcResult
    {
        std::vector<std::size_t> indices;
        FiniteSet heart;
        std::size_t sunflower_size = 0;
    };

    // Sunflower on the domains, then the largest class agreeing on the heart.
    auto cc_extract(const FiniteBA & ba, const std::vector<PartialFunction> & family) -> CcResult;
    auto compatible(const std::vector<PartialFunction> & family) -> bool;

    struct CollapsePiece
    {
        Element a;
        std::size_t beta = 0, xi = 0;
    };

    struct CollapseSystem
    {
        std::size_t theta = 0;
        std::vector<int> trv;
        std::vector<std::vector<CollapsePiece>> pieces;

        auto mu(std::size_t alpha) const -> std::size_t { return pieces.at(alpha).size(); }
    };

    struct RgExtension
    {
        CollapseSystem collapse;
        PossibilityPattern pattern;
        FiniteBA algebra;
        Embedding embedding;
        Solution solution;
        // c_{alpha, epsilon} in the extension
        std::vector<std::vector<Element>> c;
    };

    // equality[alpha][beta] is the truth value of y_alpha = y_beta in B_a.
    auto rg_extension(const FiniteBA & ba, const std::vector<std::vector<Element>> & equality, const std::vector<int> & trv,
            std::size_t atom_budget = max_atoms) -> RgExtension;

    auto collapse_to_json(const CollapseSystem & c) -> nlohmann::json;
}
