#include <paramforge/setcomb.hh>

#include <algorithm>
#include <map>
#include <set>

using std::optional;
using std::size_t;
using std::uint64_t;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    namespace
    {
        auto normalised(FiniteSet s) -> FiniteSet
        {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            return s;
        }

        auto intersect(const FiniteSet & a, const FiniteSet & b) -> FiniteSet
        {
            FiniteSet r;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
            return r;
        }

        auto subtract(const FiniteSet & a, const FiniteSet & b) -> FiniteSet
        {
            FiniteSet r;
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
            return r;
        }

        auto contains_all(const FiniteSet & a, const FiniteSet & b) -> bool
        {
            return std::includes(a.begin(), a.end(), b.begin(), b.end());
        }

        auto greedy(const vector<FiniteSet> & sets, const vector<size_t> & members, FiniteSet core, size_t petals)
            -> optional<SunflowerResult>
        {
            if (members.size() < petals)
                return std::nullopt;

            vector<size_t> chosen;
            std::set<uint64_t> used;
            std::map<uint64_t, size_t> frequency;
            for (auto i : members) {
                auto petal = subtract(sets[i], core);
                bool disjoint = std::none_of(petal.begin(), petal.end(), [&] (uint64_t x) { return used.count(x); });
                if (disjoint) {
                    chosen.push_back(i);
                    used.insert(petal.begin(), petal.end());
                }
                for (auto x : petal)
                    ++frequency[x];
            }
            if (chosen.size() >= petals)
                return SunflowerResult{ core, chosen };

            uint64_t best = 0;
            size_t best_count = 0;
            for (auto & [x, c] : frequency)
                if (c > best_count) {
                    best = x;
                    best_count = c;
                }
            if (best_count < petals)
                return std::nullopt;

            vector<size_t> next;
            for (auto i : members)
                if (std::binary_search(sets[i].begin(), sets[i].end(), best))
                    next.push_back(i);
            core.insert(std::upper_bound(core.begin(), core.end(), best), best);
            return greedy(sets, next, core, petals);
        }

        // Packs `need` pairwise disjoint petals out of the candidates.
        struct Packer
        {
            const vector<FiniteSet> & petals;
            size_t need;
            uint64_t & nodes;
            uint64_t budget;
            vector<size_t> chosen;
            bool exhausted = false;

            auto run(size_t from, std::set<uint64_t> & used) -> bool
            {
                if (chosen.size() >= need)
                    return true;
                if (chosen.size() + (petals.size() - from) < need)
                    return false;
                for (size_t i = from ; i < petals.size() ; ++i) {
                    if (++nodes > budget) {
                        exhausted = true;
                        return false;
                    }
                    auto & p = petals[i];
                    if (std::any_of(p.begin(), p.end(), [&] (uint64_t x) { return used.count(x); }))
                        continue;
                    chosen.push_back(i);
                    used.insert(p.begin(), p.end());
                    if (run(i + 1, used))
                        return true;
                    for (auto x : p)
                        used.erase(x);
                    chosen.pop_back();
                    if (exhausted || chosen.size() + (petals.size() - i - 1) < need)
                        return false;
                }
                return false;
            }
        };
    }

    auto sunflower(const vector<FiniteSet> & family, size_t petals, const SunflowerOptions & options) -> optional<SunflowerResult>
    {
        vector<FiniteSet> sets;
        for (auto & s : family)
            sets.push_back(normalised(s));

        if (petals == 0)
            return SunflowerResult{ };
        if (sets.size() < petals)
            return std::nullopt;
        if (petals == 1)
            return SunflowerResult{ sets[0], { 0 } };

        vector<size_t> all(sets.size());
        for (size_t i = 0 ; i < sets.size() ; ++i)
            all[i] = i;
        if (auto r = greedy(sets, all, { }, petals))
            return r;

        // Any two petals meet exactly in the core, so the core is a pairwise intersection.
        std::set<FiniteSet> cores;
        for (size_t i = 0 ; i < sets.size() ; ++i)
            for (size_t j = i + 1 ; j < sets.size() ; ++j)
                cores.insert(intersect(sets[i], sets[j]));

        uint64_t nodes = 0;
        for (auto & core : cores) {
            vector<size_t> empty_members;
            std::map<FiniteSet, size_t> first_with_petal;
            for (size_t i = 0 ; i < sets.size() ; ++i) {
                if (! contains_all(sets[i], core))
                    continue;
                auto petal = subtract(sets[i], core);
                if (petal.empty())
                    empty_members.push_back(i);
                else
                    first_with_petal.emplace(petal, i);
            }
            if (empty_members.size() + first_with_petal.size() < petals)
                continue;

            SunflowerResult r{ core, { } };
            for (size_t i = 0 ; i < empty_members.size() && r.member_indices.size() < petals ; ++i)
                r.member_indices.push_back(empty_members[i]);
            size_t need = petals - r.member_indices.size();

            // larger petals first tends to fail faster
            vector<FiniteSet> candidates;
            for (auto & [petal, i] : first_with_petal)
                candidates.push_back(petal);
            std::stable_sort(candidates.begin(), candidates.end(), [] (auto & a, auto & b) { return a.size() < b.size(); });

            Packer packer{ candidates, need, nodes, options.budget, { } };
            std::set<uint64_t> used;
            if (packer.run(0, used)) {
                for (auto c : packer.chosen)
                    r.member_indices.push_back(first_with_petal.at(candidates[c]));
                std::sort(r.member_indices.begin(), r.member_indices.end());
                return r;
            }
            if (packer.exhausted)
                return std::nullopt;
        }
        return std::nullopt;
    }

    auto is_sunflower(const vector<FiniteSet> & family, const SunflowerResult & r) -> bool
    {
        auto core = normalised(r.core);
        std::set<size_t> distinct(r.member_indices.begin(), r.member_indices.end());
        if (distinct.size() != r.member_indices.size())
            return false;
        for (size_t a = 0 ; a < r.member_indices.size() ; ++a) {
            if (r.member_indices[a] >= family.size())
                return false;
            for (size_t b = a + 1 ; b < r.member_indices.size() ; ++b)
                if (intersect(normalised(family[r.member_indices[a]]), normalised(family[r.member_indices[b]])) != core)
                    return false;
        }
        return true;
    }

    auto LevelFunctionFamily::function(size_t alpha) const -> LevelFunction
    {
        return LevelFunction(bits.at(alpha), i_star);
    }

    auto LevelFunctionFamily::ones(size_t alpha) const -> FiniteSet
    {
        FiniteSet r;
        for (size_t n = 0 ; n < bits.at(alpha).size() ; ++n)
            if (bits[alpha][n])
                r.push_back(n);
        return r;
    }

    auto LevelFunctionFamily::witness_count(size_t beta, const vector<size_t> & u) const -> size_t
    {
        size_t count = 0;
        for (size_t n = 0 ; n < window() ; ++n)
            if (bits.at(beta)[n] && std::none_of(u.begin(), u.end(), [&] (size_t a) { return bits.at(a)[n]; }))
                ++count;
        return count;
    }

    auto independent_family(size_t k, size_t i_star, size_t t) -> LevelFunctionFamily
    {
        if (k > max_family_size)
            throw CapacityError("independent families are limited to " + std::to_string(max_family_size) + " functions");
        if (t == 0)
            throw InvalidQuery("the repetition count must be positive");
        LevelFunctionFamily f{ k, i_star, t, { }, false };
        f.bits.assign(k, vector<bool>(f.window(), false));
        for (size_t j = 0 ; j < (t << k) ; ++j)
            for (size_t alpha = 0 ; alpha < k ; ++alpha)
                if ((j >> alpha) & 1)
                    f.bits[alpha][i_star + j] = true;
        return f;
    }

    auto family_to_json(const LevelFunctionFamily & f) -> json
    {
        json rows = json::array();
        for (size_t alpha = 0 ; alpha < f.k ; ++alpha) {
            std::string s;
            for (bool b : f.bits[alpha])
                s += b ? '1' : '0';
            rows.push_back(s);
        }
        return json{ { "k", f.k }, { "i_star", f.i_star }, { "t", f.t }, { "window", f.window() },
            { "almost_disjoint", f.almost_disjoint }, { "bits", rows } };
    }

    auto family_from_json(const json & j) -> LevelFunctionFamily
    {
        try {
            LevelFunctionFamily f{ j.at("k").get<size_t>(), j.at("i_star").get<size_t>(), j.at("t").get<size_t>(), { },
                j.value("almost_disjoint", false) };
            if (f.k > max_family_size)
                throw CapacityError("family too large");
            for (auto & row : j.at("bits")) {
                auto s = row.get<std::string>();
                if (s.size() != f.window())
                    throw InvalidQuery("family row length does not match the window");
                vector<bool> b;
                for (char c : s) {
                    if (c != '0' && c != '1')
                        throw InvalidQuery("family bits must be 0 or 1");
                    b.push_back(c == '1');
                }
                f.bits.push_back(b);
            }
            if (f.bits.size() != f.k)
                throw InvalidQuery("family has the wrong number of rows");
            return f;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(std::string("malformed family: ") + e.what());
        }
    }

    auto ideal_excess(const IdealQuery & q) -> FiniteSet
    {
        FiniteSet rest = normalised(q.target);
        for (auto & g : q.generators)
            rest = subtract(rest, normalised(g));
        return rest;
    }

    auto ideal_contains(const IdealQuery & q) -> bool
    {
        return ideal_excess(q).size() <= q.exceptions;
    }
}
