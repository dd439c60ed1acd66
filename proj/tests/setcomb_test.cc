#include <paramforge/setcomb.hh>

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace paramforge;
using std::size_t;
using std::vector;

namespace
{
    // Largest sunflower in a family over a universe of at most 12 elements: for
    // each core mask, sets equal to the core count once each, and the other
    // petals are packed by a subset dynamic programme.
    auto max_sunflower(const vector<FiniteSet> & family, unsigned universe) -> size_t
    {
        vector<unsigned> masks;
        for (auto & s : family) {
            unsigned m = 0;
            for (auto x : s)
                m |= 1u << x;
            masks.push_back(m);
        }
        unsigned full = (1u << universe) - 1;
        size_t best = family.empty() ? 0 : 1;
        for (unsigned core = 0 ; core <= full ; ++core) {
            size_t empties = 0;
            vector<unsigned> petals;
            for (auto m : masks)
                if ((m & core) == core) {
                    if (m == core)
                        ++empties;
                    else
                        petals.push_back(m & ~core);
                }
            vector<size_t> g(full + 1, 0);
            for (unsigned m = 1 ; m <= full ; ++m) {
                unsigned low = m & -m;
                g[m] = g[m & ~low];
                for (auto p : petals)
                    if ((p & low) && (p & m) == p)
                        g[m] = std::max(g[m], 1 + g[m & ~p]);
            }
            best = std::max(best, empties + g[full & ~core]);
        }
        return best;
    }

    auto random_family(std::mt19937_64 & rng, size_t count, size_t size, unsigned universe) -> vector<FiniteSet>
    {
        vector<FiniteSet> family;
        for (size_t i = 0 ; i < count ; ++i) {
            FiniteSet s;
            while (s.size() < size) {
                auto x = rng() % universe;
                if (std::find(s.begin(), s.end(), x) == s.end())
                    s.push_back(x);
            }
            family.push_back(s);
        }
        return family;
    }
}

TEST_CASE("sunflower examples")
{
    auto r = sunflower({ { 1 }, { 2 }, { 3 } }, 3);
    REQUIRE(r);
    CHECK(r->core.empty());
    CHECK(r->member_indices.size() == 3);

    vector<FiniteSet> f{ { 1, 2 }, { 1, 3 }, { 1, 4 } };
    r = sunflower(f, 3);
    REQUIRE(r);
    CHECK(r->core == FiniteSet{ 1 });
    CHECK(is_sunflower(f, *r));

    CHECK(! sunflower({ { 1, 2 }, { 2, 3 }, { 1, 3 } }, 3));
    CHECK(sunflower({ { 1, 2 } }, 1)->core == FiniteSet{ 1, 2 });
    CHECK(! sunflower({ { 1 } }, 2));

    // identical sets form a sunflower whose core is the set itself
    vector<FiniteSet> same{ { 4, 5 }, { 5, 4 }, { 4, 5 } };
    r = sunflower(same, 3);
    REQUIRE(r);
    CHECK(r->core == FiniteSet{ 4, 5 });
}

TEST_CASE("sunflower matches the exhaustive oracle")
{
    std::mt19937_64 rng(16);
    for (int trial = 0 ; trial < 12 ; ++trial) {
        auto family = random_family(rng, 200, 3, 10);
        auto best = max_sunflower(family, 10);
        for (size_t p = 2 ; p <= best + 1 ; ++p) {
            auto r = sunflower(family, p);
            CHECK(r.has_value() == (p <= best));
            if (r) {
                CHECK(is_sunflower(family, *r));
                CHECK(r->member_indices.size() >= p);
            }
        }
    }

    // sparse families, where the greedy pass fails more often
    for (int trial = 0 ; trial < 200 ; ++trial) {
        auto family = random_family(rng, 3 + rng() % 10, 1 + rng() % 4, 8);
        auto best = max_sunflower(family, 8);
        for (size_t p = 2 ; p <= best + 1 ; ++p) {
            auto r = sunflower(family, p);
            CHECK(r.has_value() == (p <= best));
            if (r)
                CHECK(is_sunflower(family, *r));
        }
    }
}

TEST_CASE("independent family examples")
{
    auto f = independent_family(1, 0, 1);
    CHECK(f.window() == 2);
    CHECK(f.bits[0] == vector<bool>{ false, true });

    f = independent_family(2, 1, 1);
    CHECK(f.window() == 5);
    CHECK(f.bits[0] == vector<bool>{ false, false, true, false, true });
    CHECK(f.bits[1] == vector<bool>{ false, false, false, true, true });
    CHECK(f.witness_count(1, { 0 }) == 1);

    CHECK_THROWS_AS(independent_family(17, 0, 1), CapacityError);
    CHECK_THROWS_AS(independent_family(3, 0, 0), InvalidQuery);
}

TEST_CASE("independent family witness counts")
{
    for (size_t k = 1 ; k <= 5 ; ++k)
        for (size_t t : { 1, 3 }) {
            auto f = independent_family(k, 2, t);
            for (size_t beta = 0 ; beta < k ; ++beta) {
                auto xi = f.function(beta);
                CHECK(xi.lazy_below_i_star());
                CHECK(xi(2 + (size_t(1) << beta)));
                // every u inside k minus beta, as a bitmask
                for (unsigned mask = 0 ; mask < (1u << k) ; ++mask) {
                    if ((mask >> beta) & 1)
                        continue;
                    vector<size_t> u;
                    for (size_t a = 0 ; a < k ; ++a)
                        if ((mask >> a) & 1)
                            u.push_back(a);
                    CHECK(f.witness_count(beta, u) == t << (k - 1 - u.size()));
                }
            }
        }
}

TEST_CASE("ideal membership")
{
    CHECK(ideal_contains({ { 1, 2 }, { { 1 }, { 2, 3 } }, 0 }));
    CHECK(! ideal_contains({ { 1, 2, 5 }, { { 1 }, { 2, 3 } }, 0 }));
    CHECK(ideal_contains({ { 1, 2, 5 }, { { 1 }, { 2, 3 } }, 1 }));
    CHECK(ideal_contains({ { 7, 8 }, { }, 2 }));
    CHECK(ideal_excess({ { 9, 1, 5 }, { { 1 } }, 0 }) == FiniteSet{ 5, 9 });

    size_t t = 3;
    auto f = independent_family(4, 1, t);
    for (size_t beta = 0 ; beta < 4 ; ++beta) {
        vector<FiniteSet> generators;
        for (size_t a = 0 ; a < 4 ; ++a)
            if (a != beta)
                generators.push_back(f.ones(a));
        for (size_t budget = 0 ; budget < t ; ++budget)
            CHECK(! ideal_contains({ f.ones(beta), generators, budget }));
        // adding generators never turns membership off
        IdealQuery q{ f.ones(beta), generators, t };
        bool before = ideal_contains(q);
        q.generators.push_back(f.ones(beta));
        CHECK(ideal_contains(q));
        CHECK((! before || ideal_contains(q)));
    }
}

TEST_CASE("family json")
{
    auto f = independent_family(3, 2, 2);
    auto g = family_from_json(nlohmann::json::parse(family_to_json(f).dump()));
    CHECK(g.bits == f.bits);
    CHECK(g.window() == f.window());
    auto j = family_to_json(f);
    j["bits"][0] = "01";
    CHECK_THROWS_AS(family_from_json(j), InvalidQuery);
}
