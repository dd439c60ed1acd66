#include <paramforge/boolalg.hh>

#include <algorithm>
#include <bit>
#include <stdexcept>

using std::optional;
using std::pair;
using std::size_t;
using std::string;
using std::uint32_t;
using std::uint64_t;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    namespace
    {
        auto same_universe(const Element & a, const Element & b) -> void
        {
            if (a.universe != b.universe)
                throw UniverseMismatch("elements of different algebras");
        }

        auto mask_members(uint32_t u) -> vector<size_t>
        {
            vector<size_t> r;
            for (size_t a = 0 ; u >> a ; ++a)
                if ((u >> a) & 1)
                    r.push_back(a);
            return r;
        }

        auto mask_key(uint32_t u) -> string
        {
            string s = "[";
            bool first = true;
            for (auto a : mask_members(u)) {
                if (! first)
                    s += ",";
                s += std::to_string(a);
                first = false;
            }
            return s + "]";
        }

        auto mask_from_key(const string & key) -> uint32_t
        {
            auto indices = json::parse(key).get<vector<size_t>>();
            uint32_t u = 0;
            for (auto a : indices) {
                if (a >= max_theta)
                    throw InvalidQuery("pattern index out of range");
                u |= uint32_t(1) << a;
            }
            return u;
        }
    }

    auto Element::operator==(const Element & other) const -> bool
    {
        return universe == other.universe && bits == other.bits;
    }

    auto meet(const Element & a, const Element & b) -> Element
    {
        same_universe(a, b);
        return Element{ a.universe, a.bits & b.bits };
    }

    auto join(const Element & a, const Element & b) -> Element
    {
        same_universe(a, b);
        return Element{ a.universe, a.bits | b.bits };
    }

    auto complement(const Element & a) -> Element
    {
        return Element{ a.universe, ~a.bits };
    }

    auto difference(const Element & a, const Element & b) -> Element
    {
        same_universe(a, b);
        return Element{ a.universe, a.bits - b.bits };
    }

    auto leq(const Element & a, const Element & b) -> bool
    {
        same_universe(a, b);
        return a.bits.is_subset_of(b.bits);
    }

    auto disjoint(const Element & a, const Element & b) -> bool
    {
        same_universe(a, b);
        return ! a.bits.intersects(b.bits);
    }

    auto FiniteBA::with_atoms(size_t n) -> FiniteBA
    {
        if (n == 0)
            throw InvalidQuery("an algebra needs at least one atom");
        if (n > max_atoms)
            throw CapacityError("algebra exceeds the atom budget");
        auto u = std::make_shared<Universe>();
        u->atoms = n;
        return FiniteBA(u);
    }

    auto FiniteBA::partitioned(const vector<size_t> & radices) -> FiniteBA
    {
        auto u = std::make_shared<Universe>();
        u->atoms = 1;
        for (auto r : radices) {
            if (r == 0)
                throw InvalidQuery("a partition needs at least one block");
            u->strides.push_back(u->atoms);
            if (u->atoms > max_atoms / r)
                throw CapacityError("partition structure exceeds the atom budget");
            u->atoms *= r;
        }
        u->radices = radices;
        return FiniteBA(u);
    }

    auto FiniteBA::coordinate(size_t atom, size_t p) const -> size_t
    {
        return (atom / _u->strides.at(p)) % _u->radices[p];
    }

    auto FiniteBA::check(const Element & e) const -> void
    {
        if (e.universe != _u)
            throw UniverseMismatch("element belongs to a different algebra");
    }

    auto FiniteBA::zero() const -> Element
    {
        return Element{ _u, Bits(_u->atoms) };
    }

    auto FiniteBA::one() const -> Element
    {
        auto e = zero();
        e.bits.set();
        return e;
    }

    auto FiniteBA::atom(size_t i) const -> Element
    {
        auto e = zero();
        e.bits.set(i);
        return e;
    }

    auto FiniteBA::element(const vector<size_t> & atoms) const -> Element
    {
        auto e = zero();
        for (auto a : atoms) {
            if (a >= _u->atoms)
                throw InvalidQuery("atom index out of range");
            e.bits.set(a);
        }
        return e;
    }

    auto FiniteBA::from_bits(Bits bits) const -> Element
    {
        if (bits.size() != _u->atoms)
            throw UniverseMismatch("bit vector has the wrong length");
        return Element{ _u, std::move(bits) };
    }

    auto FiniteBA::block(size_t p, size_t b) const -> Element
    {
        if (p >= partitions() || b >= radix(p))
            throw InvalidQuery("no such partition block");
        return generator({ { p, b } });
    }

    auto FiniteBA::generator(const PartialFunction & f) const -> Element
    {
        for (auto & [p, b] : f)
            if (p >= partitions() || b >= radix(p))
                throw InvalidQuery("generator outside the partition structure");
        auto e = zero();
        for (size_t a = 0 ; a < _u->atoms ; ++a) {
            bool agrees = true;
            for (auto & [p, b] : f)
                if (coordinate(a, p) != b) {
                    agrees = false;
                    break;
                }
            if (agrees)
                e.bits.set(a);
        }
        return e;
    }

    auto FiniteBA::atoms_of(const Element & e) const -> vector<size_t>
    {
        check(e);
        vector<size_t> r;
        for (auto i = e.bits.find_first() ; i != Bits::npos ; i = e.bits.find_next(i))
            r.push_back(i);
        return r;
    }

    auto FiniteBA::maximal_antichain_check(const vector<Element> & elements) const -> bool
    {
        auto seen = zero();
        for (auto & e : elements) {
            check(e);
            if (e.is_zero() || e.bits.intersects(seen.bits))
                return false;
            seen.bits |= e.bits;
        }
        return seen.bits.all();
    }

    auto element_to_json(const Element & e) -> json
    {
        json atoms = json::array();
        for (auto i = e.bits.find_first() ; i != Bits::npos ; i = e.bits.find_next(i))
            atoms.push_back(i);
        return atoms;
    }

    auto element_from_json(const FiniteBA & ba, const json & j) -> Element
    {
        try {
            return ba.element(j.get<vector<size_t>>());
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed element: ") + e.what());
        }
    }

    auto PatternLayout::radices() const -> vector<size_t>
    {
        vector<size_t> r;
        for (size_t alpha = 0 ; alpha < theta ; ++alpha)
            for (size_t k = 0 ; k < depth ; ++k)
                r.push_back(widths[k]);
        return r;
    }

    auto PossibilityPattern::at(uint32_t u) const -> const Element &
    {
        if (! materialized())
            throw InvalidQuery("pattern is described by its layout only");
        return b.at(u);
    }

    auto check_pattern(const PossibilityPattern & p) -> PatternCheck
    {
        if (p.b.size() != (size_t(1) << p.theta))
            return { false, "pattern needs one element per subset", std::nullopt };
        for (auto & e : p.b)
            if (! p.algebra.owns(e))
                return { false, "pattern element from another algebra", std::nullopt };
        if (! p.b[0].bits.all())
            return { false, "b of the empty set must be 1", std::pair<uint32_t, uint32_t>{ 0, 0 } };
        for (uint32_t v = 1 ; v < p.b.size() ; ++v)
            for (auto a : mask_members(v)) {
                uint32_t u = v & ~(uint32_t(1) << a);
                if (! leq(p.b[v], p.b[u]))
                    return { false, "pattern is not monotone", std::pair<uint32_t, uint32_t>{ u, v } };
            }
        return { };
    }

    auto make_pattern(const FiniteBA & ba, size_t theta, vector<Element> b) -> PossibilityPattern
    {
        if (theta > max_theta)
            throw CapacityError("pattern index set too large");
        PossibilityPattern p{ ba, theta, std::move(b), std::nullopt };
        auto c = check_pattern(p);
        if (! c.pass)
            throw InvalidQuery("invalid possibility pattern: " + c.reason);
        return p;
    }

    auto pattern_layout(const Parameter & param, size_t depth, size_t theta) -> PatternLayout
    {
        if (depth > param.depth())
            throw CapacityError("pattern depth is beyond the forged range");
        PatternLayout layout{ param, depth, theta, { } };
        for (size_t k = 0 ; k < depth ; ++k)
            layout.widths.push_back(param.width(k));
        return layout;
    }

    auto selected_node(const FiniteBA & ba, const PatternLayout & layout, size_t atom, size_t alpha) -> Node
    {
        Node n{ Side::right, { } };
        for (size_t k = 0 ; k < layout.depth ; ++k)
            n.digits.push_back(static_cast<uint32_t>(ba.coordinate(atom, layout.partition(alpha, k))));
        return n;
    }

    auto pattern_from_parameter(const Parameter & param, size_t depth, size_t theta, size_t atom_budget) -> PossibilityPattern
    {
        if (theta > max_theta)
            throw CapacityError("pattern index set too large");
        auto layout = pattern_layout(param, depth, theta);
        auto radices = layout.radices();
        size_t atoms = 1;
        for (auto r : radices) {
            if (atoms > atom_budget / r)
                throw CapacityError("pattern algebra exceeds the atom budget");
            atoms *= r;
        }
        auto ba = FiniteBA::partitioned(radices);

        auto left = param.level_nodes(Side::left, depth, atom_budget), right = param.level_nodes(Side::right, depth, atom_budget);
        // neighbours[r]: the left nodes related to right node r
        vector<Bits> neighbours(right.size(), Bits(left.size()));
        for (size_t r = 0 ; r < right.size() ; ++r)
            for (size_t l = 0 ; l < left.size() ; ++l)
                if (param.related(left[l], right[r]))
                    neighbours[r].set(l);

        vector<Element> b(size_t(1) << theta, ba.zero());
        b[0] = ba.one();
        vector<Bits> acc(b.size(), Bits(left.size()));
        acc[0].set();
        vector<size_t> chosen(theta);
        for (size_t atom = 0 ; atom < atoms ; ++atom) {
            for (size_t alpha = 0 ; alpha < theta ; ++alpha) {
                // right nodes are listed in lexicographic order
                size_t r = 0;
                for (size_t k = 0 ; k < depth ; ++k)
                    r = r * layout.widths[k] + ba.coordinate(atom, layout.partition(alpha, k));
                chosen[alpha] = r;
            }
            for (uint32_t u = 1 ; u < b.size() ; ++u) {
                acc[u] = acc[u & (u - 1)];
                acc[u] &= neighbours[chosen[std::countr_zero(u)]];
                if (acc[u].any())
                    b[u].bits.set(atom);
            }
        }

        PossibilityPattern p{ ba, theta, std::move(b), layout };
        return p;
    }

    auto pattern_to_json(const PossibilityPattern & p) -> json
    {
        json j{ { "theta", p.theta }, { "atoms", p.algebra.atoms() } };
        if (p.algebra.partitions() > 0) {
            json radices = json::array();
            for (size_t i = 0 ; i < p.algebra.partitions() ; ++i)
                radices.push_back(p.algebra.radix(i));
            j["radices"] = radices;
        }
        if (p.materialized()) {
            json b = json::object();
            for (uint32_t u = 0 ; u < p.b.size() ; ++u)
                b[mask_key(u)] = element_to_json(p.b[u]);
            j["b"] = b;
        }
        if (p.layout) {
            json layout{ { "depth", p.layout->depth }, { "theta", p.layout->theta }, { "widths", p.layout->widths } };
            if (p.layout->source)
                layout["parameter"] = parameter_to_json(*p.layout->source);
            j["layout"] = layout;
        }
        return j;
    }

    auto pattern_from_json(const json & j) -> PossibilityPattern
    {
        try {
            auto theta = j.at("theta").get<size_t>();
            if (theta > max_theta)
                throw CapacityError("pattern index set too large");
            auto ba = j.contains("radices") ? FiniteBA::partitioned(j.at("radices").get<vector<size_t>>())
                : FiniteBA::with_atoms(j.at("atoms").get<size_t>());
            if (ba.atoms() != j.at("atoms").get<size_t>())
                throw InvalidQuery("atom count does not match the radices");

            PossibilityPattern p{ ba, theta, { }, std::nullopt };
            if (j.contains("b")) {
                p.b.assign(size_t(1) << theta, ba.zero());
                vector<bool> seen(p.b.size(), false);
                for (auto & [key, value] : j.at("b").items()) {
                    auto u = mask_from_key(key);
                    if (u >= p.b.size())
                        throw InvalidQuery("pattern key outside theta");
                    p.b[u] = element_from_json(ba, value);
                    seen[u] = true;
                }
                if (std::find(seen.begin(), seen.end(), false) != seen.end())
                    throw InvalidQuery("pattern is missing some subsets");
                auto c = check_pattern(p);
                if (! c.pass)
                    throw InvalidQuery("invalid possibility pattern: " + c.reason);
            }
            if (j.contains("layout")) {
                auto & l = j.at("layout");
                PatternLayout layout{ std::nullopt, l.at("depth").get<size_t>(), l.at("theta").get<size_t>(),
                    l.at("widths").get<vector<size_t>>() };
                if (l.contains("parameter"))
                    layout.source = parameter_from_json(l.at("parameter"));
                p.layout = layout;
            }
            return p;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed pattern: ") + e.what());
        }
    }

    auto Embedding::apply(const Element & e) const -> Element
    {
        if (! source.owns(e))
            throw UniverseMismatch("element is not in the embedded algebra");
        auto r = target.zero();
        for (auto i = e.bits.find_first() ; i != Bits::npos ; i = e.bits.find_next(i))
            r.bits |= images[i].bits;
        return r;
    }

    auto Solution::b1_meet(uint32_t u) const -> Element
    {
        auto r = algebra.one();
        for (auto a : mask_members(u))
            r.bits &= b1.at(a).bits;
        return r;
    }

    auto Solution::b2_join(uint32_t u) const -> Element
    {
        auto r = algebra.zero();
        for (auto a : mask_members(u))
            r.bits |= b1.at(a).bits;
        return r;
    }

    auto free_extension(const PossibilityPattern & pattern, size_t atom_budget) -> FreeExtension
    {
        if (! pattern.materialized())
            throw InvalidQuery("free extension needs a materialized pattern");
        auto & ba = pattern.algebra;
        uint64_t total = 0;
        for (auto & e : pattern.b)
            total += e.count();
        if (total > atom_budget)
            throw CapacityError("free extension exceeds the atom budget");

        vector<pair<size_t, uint32_t>> pairs;
        pairs.reserve(total);
        for (size_t a = 0 ; a < ba.atoms() ; ++a)
            for (uint32_t s = 0 ; s < pattern.b.size() ; ++s)
                if (pattern.b[s].contains(a))
                    pairs.emplace_back(a, s);

        auto bb = FiniteBA::with_atoms(pairs.size());
        Embedding embedding{ ba, bb, vector<Element>(ba.atoms(), bb.zero()) };
        Solution solution{ bb, vector<Element>(pattern.theta, bb.zero()) };
        for (size_t i = 0 ; i < pairs.size() ; ++i) {
            auto [a, s] = pairs[i];
            embedding.images[a].bits.set(i);
            for (auto alpha : mask_members(s))
                solution.b1[alpha].bits.set(i);
        }
        return FreeExtension{ bb, embedding, solution, pairs };
    }

    auto enumerate_maximal_antichains(const FiniteBA & ba, uint64_t budget) -> vector<vector<Element>>
    {
        // Bell numbers, to refuse before doing any work
        size_t n = ba.atoms();
        vector<BigInt> row{ 1 };
        for (size_t i = 1 ; i <= n ; ++i) {
            vector<BigInt> next{ row.back() };
            for (auto & x : row)
                next.push_back(next.back() + x);
            row = next;
            if (row.front() > budget)
                throw CapacityError("too many maximal antichains to enumerate");
        }

        vector<vector<Element>> result;
        vector<size_t> label(n, 0);
        auto rec = [&] (auto & self, size_t i, size_t blocks) -> void {
            if (i == n) {
                vector<Element> parts(blocks, ba.zero());
                for (size_t a = 0 ; a < n ; ++a)
                    parts[label[a]].bits.set(a);
                result.push_back(parts);
                return;
            }
            for (size_t b = 0 ; b <= blocks ; ++b) {
                label[i] = b;
                self(self, i + 1, std::max(blocks, b + 1));
            }
        };
        rec(rec, 0, 0);
        return result;
    }

    auto check_ext1(const PossibilityPattern & pattern, const Embedding & embedding, const Solution & solution,
            const vector<Element> & filter_seed, const Ext1Options & options) -> Ext1Report
    {
        Ext1Report r;
        auto & ba = pattern.algebra, & bb = embedding.target;
        if (! (embedding.source == ba) || ! (solution.algebra == bb))
            throw UniverseMismatch("pattern, embedding and solution do not fit together");

        // (a) images of the atoms are a partition of unity into nonzero pieces
        r.homomorphism = embedding.images.size() == ba.atoms() && bb.maximal_antichain_check(embedding.images);
        if (! r.homomorphism)
            r.witness["homomorphism"] = "atom images are not a partition of unity";

        if (solution.b1.size() != pattern.theta)
            throw InvalidQuery("solution has the wrong number of elements");
        for (size_t alpha = 0 ; alpha < pattern.theta && r.solution ; ++alpha)
            if (solution.b1[alpha].is_zero()) {
                r.solution = false;
                r.witness["solution"] = json{ { "zero", alpha } };
            }
        for (uint32_t u = 1 ; u < pattern.b.size() && r.solution ; ++u)
            if (! leq(solution.b1_meet(u), embedding.apply(pattern.b[u]))) {
                r.solution = false;
                r.witness["solution"] = json{ { "u", mask_members(u) } };
            }

        // (b) maximal antichains stay maximal
        vector<vector<Element>> antichains = options.antichains;
        try {
            auto all = enumerate_maximal_antichains(ba, options.antichain_budget);
            antichains.insert(antichains.end(), all.begin(), all.end());
            r.antichains_exhaustive = true;
        }
        catch (const CapacityError &) {
        }
        for (auto & chain : antichains) {
            if (! ba.maximal_antichain_check(chain))
                throw InvalidQuery("a supplied antichain is not maximal in the base algebra");
            vector<Element> images;
            for (auto & e : chain)
                images.push_back(embedding.apply(e));
            ++r.antichains_checked;
            if (! bb.maximal_antichain_check(images)) {
                r.antichains = false;
                json elements = json::array();
                for (auto & e : chain)
                    elements.push_back(element_to_json(e));
                r.witness["antichain"] = elements;
                break;
            }
        }

        // (c) the finite intersection property, which for finitely many
        // elements is the same as the whole meet being nonzero
        auto seed = ba.one();
        for (auto & s : filter_seed)
            seed = meet(seed, s);
        auto embedded = embedding.apply(seed);
        uint32_t full = (uint32_t(1) << pattern.theta) - 1;
        if (meet(embedded, solution.b1_meet(full)).is_zero()) {
            r.fip = false;
            // smallest failing u, fewest indices first
            for (size_t size = 0 ; size <= pattern.theta ; ++size) {
                bool found = false;
                for (uint32_t u = 0 ; u <= full ; ++u)
                    if (size_t(std::popcount(u)) == size && meet(embedded, solution.b1_meet(u)).is_zero()) {
                        r.witness["fip"] = json{ { "u", mask_members(u) } };
                        found = true;
                        break;
                    }
                if (found)
                    break;
            }
        }
        return r;
    }

    auto ext1_report_to_json(const Ext1Report & r) -> json
    {
        return json{ { "pass", r.pass() }, { "homomorphism", r.homomorphism }, { "solution", r.solution },
            { "antichains", r.antichains }, { "fip", r.fip }, { "antichains_checked", r.antichains_checked },
            { "antichains_mode", r.antichains_exhaustive ? "exhaustive" : "supplied" }, { "witness", r.witness } };
    }

    auto normal_form_region(const FreeExtension & ext, const NormalForm & nf) -> Element
    {
        auto region = meet(ext.embedding.apply(nf.x), ext.solution.b1_meet(nf.u));
        for (auto v : nf.exclusions)
            region = difference(region, ext.solution.b1_meet(v));
        return region;
    }

    auto normal_form(const PossibilityPattern & pattern, const FreeExtension & ext, const Element & element) -> NormalForm
    {
        if (! ext.algebra.owns(element))
            throw UniverseMismatch("element is not in the extension");
        if (element.is_zero())
            throw InvalidQuery("the zero element has no normal form");
        if (pattern.theta > 10)
            throw CapacityError("normal form search is limited to ten indices");

        auto & ba = pattern.algebra;
        uint32_t full = (uint32_t(1) << pattern.theta) - 1;
        for (size_t c = 0 ; c <= pattern.theta ; ++c)
            for (uint32_t u = 0 ; u <= full ; ++u) {
                auto cu = size_t(std::popcount(u));
                if (cu > c)
                    continue;
                uint32_t rest = full & ~u;
                // v ranges over subsets of rest of size c - |u|
                for (uint32_t v = rest ; ; v = (v - 1) & rest) {
                    if (size_t(std::popcount(v)) == c - cu) {
                        Bits bad(ba.atoms());
                        for (size_t i = 0 ; i < ext.pairs.size() ; ++i) {
                            auto [a, s] = ext.pairs[i];
                            if ((s & u) == u && (s & v) == 0 && ! element.contains(i))
                                bad.set(a);
                        }
                        auto x = difference(pattern.b[u], ba.from_bits(bad));
                        if (! x.is_zero()) {
                            NormalForm nf{ x, u, { } };
                            for (auto b : mask_members(v))
                                nf.exclusions.push_back(uint32_t(1) << b);
                            return nf;
                        }
                    }
                    if (v == 0)
                        break;
                }
            }
        throw std::logic_error("normal form search exhausted");
    }

    auto below_projection(const Embedding & embedding, const Element & a, const Element & b) -> bool
    {
        if (! embedding.source.owns(a) || ! embedding.target.owns(b))
            throw UniverseMismatch("below_projection operands are in the wrong algebras");
        for (auto c = a.bits.find_first() ; c != Bits::npos ; c = a.bits.find_next(c))
            if (! embedding.images[c].bits.intersects(b.bits))
                return false;
        return true;
    }

    auto find_refinement(const PossibilityPattern & pattern, const vector<Element> & filter_seed, const RefinementOptions & options)
        -> optional<Solution>
    {
        if (pattern.theta > options.max_theta || pattern.algebra.atoms() > options.max_atoms)
            throw CapacityError("refinement search is limited to small patterns");
        if (! pattern.materialized())
            throw InvalidQuery("refinement search needs a materialized pattern");

        auto & ba = pattern.algebra;
        auto seed = ba.one();
        for (auto & s : filter_seed)
            seed = meet(seed, s);

        // A solution is the same as a choice, for every atom z, of a set S(z)
        // with z in b_T for every T inside S(z): then b1_alpha = {z : alpha in S(z)}.
        // Each atom takes the largest such set, which is unique when it is the
        // whole index set; the filter then only needs one seed atom with S(z) = theta.
        uint32_t full = (uint32_t(1) << pattern.theta) - 1;
        Solution sol{ ba, vector<Element>(pattern.theta, ba.zero()) };
        vector<bool> good(full + 1);
        bool fip = false;
        for (size_t z = 0 ; z < ba.atoms() ; ++z) {
            uint32_t best = 0;
            for (uint32_t u = 0 ; u <= full ; ++u) {
                good[u] = pattern.b[u].contains(z);
                for (auto a : mask_members(u))
                    good[u] = good[u] && good[u & ~(uint32_t(1) << a)];
                if (good[u] && std::popcount(u) > std::popcount(best))
                    best = u;
            }
            for (auto a : mask_members(best))
                sol.b1[a].bits.set(z);
            if (best == full && seed.contains(z))
                fip = true;
        }
        if (! fip)
            return std::nullopt;
        return sol;
    }

    auto obstruction_identity(const Parameter & param, const PossibilityPattern & pattern, const Node & nu, optional<size_t> count)
        -> ObstructionReport
    {
        if (! pattern.layout || ! pattern.layout->source)
            throw InvalidQuery("the pattern carries no branch-selection layout");
        auto & layout = *pattern.layout;
        if (! (*layout.source == param))
            throw InvalidQuery("the pattern was built from a different parameter");
        if (nu.side != Side::right || ! param.contains(nu))
            throw InvalidQuery("the obstruction node must be a right node of the parameter");
        size_t n = nu.level();
        if (layout.depth != n + 1)
            throw InvalidQuery("the pattern depth must be one more than the node level");

        size_t pinned = count.value_or(param.width(n));
        if (pinned > param.width(n) || pinned > layout.theta)
            throw InvalidQuery("cannot pin more indices than there are successors or pattern indices");

        vector<Node> targets;
        for (size_t l = 0 ; l < pinned ; ++l)
            targets.push_back(nu.child(static_cast<uint32_t>(l)));

        ObstructionReport r;
        r.pinned = pinned;
        // b_w is constant on the pinned box, so one witness search decides it.
        // Below a related pair, x^a relates to nu^l iff a, l are joined at level n
        // (or n is lazy), whichever x it is, so the first related x will do.
        bool witness = false;
        for (auto & x : param.level_nodes(Side::left, n))
            if (param.related(x, nu)) {
                if (auto w = find_successor_witness(param, x, targets)) {
                    witness = true;
                    r.base = *w;
                }
                break;
            }

        BigInt box = 1;
        for (size_t alpha = pinned ; alpha < layout.theta ; ++alpha)
            for (size_t k = 0 ; k < layout.depth ; ++k)
                box *= layout.widths[k];
        r.box_atoms = box;
        r.meet_atoms = witness ? box : BigInt(0);

        if (pattern.materialized()) {
            auto & ba = pattern.algebra;
            uint32_t w = (uint32_t(1) << pinned) - 1;
            auto x = pattern.b.at(w);
            for (size_t alpha = 0 ; alpha < pinned ; ++alpha)
                for (size_t k = 0 ; k < layout.depth ; ++k)
                    x = meet(x, ba.block(layout.partition(alpha, k), targets[alpha].digits[k]));
            if (BigInt(x.count()) != r.meet_atoms)
                throw std::logic_error("materialized pattern disagrees with its layout");
            r.materialized = true;
        }
        r.identity_holds = r.meet_atoms == 0;
        return r;
    }

    auto obstruction_report_to_json(const ObstructionReport & r) -> json
    {
        return json{ { "identity_holds", r.identity_holds }, { "pinned", r.pinned },
            { "box_atoms", r.box_atoms.str() }, { "meet_atoms", r.meet_atoms.str() },
            { "mode", r.materialized ? "atom-scan" : "layout" },
            { "witness", r.identity_holds ? json(nullptr) : json(r.base.digits) } };
    }

    auto compatible(const vector<PartialFunction> & family) -> bool
    {
        PartialFunction all;
        for (auto & f : family)
            for (auto & [p, b] : f) {
                auto [it, inserted] = all.emplace(p, b);
                if (! inserted && it->second != b)
                    return false;
            }
        return true;
    }

    auto cc_extract(const FiniteBA & ba, const vector<PartialFunction> & family) -> CcResult
    {
        for (auto & f : family)
            for (auto & [p, b] : f)
                if (p >= ba.partitions() || b >= ba.radix(p))
                    throw InvalidQuery("generator outside the partition structure");
        CcResult r;
        if (family.empty())
            return r;

        vector<FiniteSet> domains;
        for (auto & f : family) {
            FiniteSet d;
            for (auto & [p, b] : f)
                d.push_back(p);
            domains.push_back(d);
        }
        optional<SunflowerResult> best;
        for (size_t petals = family.size() ; petals >= 1 && ! best ; --petals)
            best = sunflower(domains, petals);

        r.heart = best->core;
        r.sunflower_size = best->member_indices.size();
        std::map<vector<size_t>, vector<size_t>> classes;
        for (auto i : best->member_indices) {
            vector<size_t> values;
            for (auto p : r.heart)
                values.push_back(family[i].at(p));
            classes[values].push_back(i);
        }
        for (auto & [values, members] : classes)
            if (members.size() > r.indices.size() || (members.size() == r.indices.size() && members.front() < r.indices.front()))
                r.indices = members;
        std::sort(r.indices.begin(), r.indices.end());
        return r;
    }

    auto rg_extension(const FiniteBA & ba, const vector<vector<Element>> & equality, const vector<int> & trv, size_t atom_budget)
        -> RgExtension
    {
        size_t theta = trv.size();
        if (theta > 3)
            throw CapacityError("the collapse construction is limited to three indices");
        if (equality.size() != theta)
            throw InvalidQuery("equality table has the wrong size");
        for (size_t a = 0 ; a < theta ; ++a) {
            if (trv[a] != 0 && trv[a] != 1)
                throw InvalidQuery("truth values must be 0 or 1");
            if (equality[a].size() != theta)
                throw InvalidQuery("equality table has the wrong size");
            for (auto & e : equality[a])
                if (! ba.owns(e))
                    throw UniverseMismatch("equality element from another algebra");
            if (! equality[a][a].bits.all())
                throw InvalidQuery("y_alpha = y_alpha must be 1");
        }
        for (size_t a = 0 ; a < theta ; ++a)
            for (size_t b = 0 ; b < theta ; ++b) {
                if (! (equality[a][b] == equality[b][a]))
                    throw InvalidQuery("equality table is not symmetric");
                for (size_t c = 0 ; c < theta ; ++c)
                    if (! leq(meet(equality[a][b], equality[b][c]), equality[a][c]))
                        throw InvalidQuery("equality table is not transitive");
            }

        RgExtension ext{ { theta, trv, { } }, { }, ba, { ba, ba, { } }, { ba, { } }, { } };
        auto & cs = ext.collapse;
        cs.pieces.resize(theta);
        // On each atom, alpha collapses to the least beta <= alpha it equals; the
        // pieces of alpha are the nonempty classes, in increasing beta.
        for (size_t a = 0 ; a < theta ; ++a)
            for (size_t beta = 0 ; beta <= a ; ++beta) {
                auto piece = equality[a][beta];
                for (size_t gamma = 0 ; gamma < beta ; ++gamma)
                    piece = difference(piece, equality[a][gamma]);
                if (! piece.is_zero())
                    cs.pieces[a].push_back({ piece, beta, 0 });
            }
        for (size_t a = 0 ; a < theta ; ++a)
            for (auto & piece : cs.pieces[a]) {
                auto & target = cs.pieces[piece.beta];
                auto it = std::find_if(target.begin(), target.end(), [&] (auto & q) { return q.beta == piece.beta; });
                if (it == target.end() || ! leq(piece.a, it->a))
                    throw std::logic_error("collapse piece has no home");
                piece.xi = static_cast<size_t>(it - target.begin());
            }

        vector<Element> b(size_t(1) << theta, ba.one());
        for (uint32_t u = 1 ; u < b.size() ; ++u)
            for (auto a : mask_members(u))
                for (auto c : mask_members(u))
                    if (a < c && trv[a] != trv[c])
                        b[u] = difference(b[u], equality[a][c]);
        ext.pattern = PossibilityPattern{ ba, theta, b, std::nullopt };

        // S: a partial function alpha -> epsilon, written with mu_alpha for undefined
        vector<vector<size_t>> choices;
        vector<size_t> current(theta, 0);
        auto forbidden = [&] (const vector<size_t> & s) {
            for (size_t a = 0 ; a < theta ; ++a)
                for (size_t c = a + 1 ; c < theta ; ++c) {
                    if (s[a] == cs.mu(a) || s[c] == cs.mu(c) || trv[a] == trv[c])
                        continue;
                    auto & p = cs.pieces[a][s[a]], & q = cs.pieces[c][s[c]];
                    if (p.beta == q.beta && p.xi == q.xi)
                        return true;
                }
            return false;
        };
        auto rec = [&] (auto & self, size_t a) -> void {
            if (a == theta) {
                if (! forbidden(current))
                    choices.push_back(current);
                return;
            }
            for (size_t e = 0 ; e <= cs.mu(a) ; ++e) {
                current[a] = e;
                self(self, a + 1);
            }
        };
        rec(rec, 0);

        if (ba.atoms() > atom_budget / choices.size())
            throw CapacityError("collapse extension exceeds the atom budget");
        auto bb = FiniteBA::with_atoms(ba.atoms() * choices.size());
        ext.algebra = bb;
        ext.embedding = Embedding{ ba, bb, vector<Element>(ba.atoms(), bb.zero()) };
        ext.c.assign(theta, { });
        for (size_t a = 0 ; a < theta ; ++a)
            ext.c[a].assign(cs.mu(a), bb.zero());
        for (size_t x = 0 ; x < ba.atoms() ; ++x)
            for (size_t j = 0 ; j < choices.size() ; ++j) {
                size_t i = x * choices.size() + j;
                ext.embedding.images[x].bits.set(i);
                for (size_t a = 0 ; a < theta ; ++a)
                    if (choices[j][a] < cs.mu(a))
                        ext.c[a][choices[j][a]].bits.set(i);
            }

        ext.solution = Solution{ bb, vector<Element>(theta, bb.zero()) };
        for (size_t a = 0 ; a < theta ; ++a)
            for (size_t e = 0 ; e < cs.mu(a) ; ++e)
                ext.solution.b1[a] = join(ext.solution.b1[a], meet(ext.embedding.apply(cs.pieces[a][e].a), ext.c[a][e]));

        for (uint32_t u = 1 ; u < b.size() ; ++u)
            if (! leq(ext.solution.b1_meet(u), ext.embedding.apply(b[u])))
                throw std::logic_error("collapse solution is not below the pattern");
        return ext;
    }

    auto collapse_to_json(const CollapseSystem & c) -> json
    {
        json pieces = json::array();
        for (auto & row : c.pieces) {
            json r = json::array();
            for (auto & p : row)
                r.push_back(json{ { "a", element_to_json(p.a) }, { "beta", p.beta }, { "xi", p.xi } });
            pieces.push_back(r);
        }
        return json{ { "theta", c.theta }, { "trv", c.trv }, { "pieces", pieces } };
    }
}
