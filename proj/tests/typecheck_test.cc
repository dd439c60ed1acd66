#include <paramforge/typecheck.hh>

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace paramforge;
using std::size_t;
using std::string;
using std::uint32_t;
using std::vector;

namespace
{
    auto node(Side side, const string & s) -> Node
    {
        Node n{ side, { } };
        for (char c : s)
            n.digits.push_back(static_cast<uint32_t>(c - '0'));
        return n;
    }

    auto L(const string & s) -> Node { return node(Side::left, s); }
    auto R(const string & s) -> Node { return node(Side::right, s); }

    auto desk_parameter(std::uint64_t seed) -> Parameter
    {
        auto profile = load_profile(PARAMFORGE_PROFILE_DIR "/desk.json");
        auto seq = forge_sequence(profile, seed, 64);
        return Parameter(seq, LevelFunction::lazy_below(profile.i_star, seq.levels.size()));
    }

    // Every left node at level K extending the base, tested against every
    // parameter at every level; the first hit in digit order.
    auto brute_force(const Parameter & p, const TypeQuery & q) -> std::optional<Node>
    {
        for (auto & x : p.level_nodes(Side::left, q.depth, 100'000)) {
            if (! x.extends(q.base))
                continue;
            bool ok = true;
            for (size_t k = 0 ; k <= q.depth && ok ; ++k)
                for (auto & a : q.params)
                    if (! p.r_edge(k, x.restrict(k), a.restrict(k))) {
                        ok = false;
                        break;
                    }
            if (ok)
                return x;
        }
        return std::nullopt;
    }

    auto random_node(std::mt19937_64 & rng, const Parameter & p, Side side, size_t k) -> Node
    {
        Node n{ side, { } };
        for (size_t j = 0 ; j < k ; ++j)
            n.digits.push_back(rng() % p.width(j));
        return n;
    }
}

TEST_CASE("s_rho on the warm-up fixture")
{
    auto & w = load_warmup();
    auto s = s_rho(w, L("01"), 2);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == vector<Node>{ R("") });
    CHECK(s[2] == vector<Node>{ R("01"), R("02"), R("12"), R("13") });
    CHECK(s_rho(w, L("10"), 2)[2] == vector<Node>{ R("20") });
    CHECK(s_rho(w, L(""), 0) == vector<vector<Node>>{ { R("") } });
    CHECK_THROWS_AS(s_rho(w, L("0"), 2), InvalidQuery);
}

TEST_CASE("warm-up type queries")
{
    auto & w = load_warmup();
    for (auto mode : { TypeMode::greedy, TypeMode::exhaustive }) {
        auto v = decide_type(w, make_query(L("0"), { R("12") }), mode);
        CHECK(v.consistent());
        CHECK(*v.witness == L("01"));

        v = decide_type(w, make_query(L("1"), { R("00") }), mode);
        CHECK(v.status == TypeStatus::inconsistent);
        CHECK(*v.level == 1);

        v = decide_type(w, make_query(L("0"), { }), mode);
        CHECK(v.consistent());
        CHECK(*v.witness == L("0"));

        auto q = make_query(L(""), { });
        q.depth = 2;
        v = decide_type(w, q, mode);
        CHECK(*v.witness == L("00"));
    }

    auto v = decide_type(w, make_query(L(""), { R("20") }), TypeMode::greedy);
    CHECK(*v.witness == L("10"));
}

namespace
{
    // Left 0 and 1 both relate to right 0, but only 10 relates to 00.
    class Trap : public TreeSystem
    {
        public:
            auto depth() const -> size_t override { return 2; }
            auto contains(const Node & n) const -> bool override
            {
                auto nodes = n.side == Side::left ? vector<string>{ "", "0", "1", "00", "10" } : vector<string>{ "", "0", "00" };
                return std::find(nodes.begin(), nodes.end(), n.to_string() == "<>" ? "" : n.to_string()) != nodes.end();
            }
            auto successors(const Node & n) const -> vector<Node> override
            {
                vector<Node> r;
                for (uint32_t t = 0 ; t < 2 ; ++t)
                    if (contains(n.child(t)))
                        r.push_back(n.child(t));
                return r;
            }
            auto related(const Node & a, const Node & b) const -> bool override
            {
                return a.level() < 2 || (a == L("10") && b == R("00"));
            }
    };
}

TEST_CASE("greedy reports undecided when an earlier choice matters")
{
    Trap t;
    auto q = make_query(L(""), { R("00") });
    auto g = decide_type(t, q, TypeMode::greedy);
    CHECK(g.status == TypeStatus::undecided);
    CHECK(*g.level == 2);
    auto e = decide_type(t, q, TypeMode::exhaustive);
    CHECK(e.consistent());
    CHECK(*e.witness == L("10"));
}

TEST_CASE("exhaustive mode matches brute force")
{
    std::mt19937_64 rng(8);
    for (std::uint64_t seed : { 1, 2, 3 }) {
        auto p = desk_parameter(seed);
        for (int trial = 0 ; trial < 150 ; ++trial) {
            size_t K = 1 + rng() % 3, n = rng() % (K + 1);
            vector<Node> params;
            for (size_t i = 0, c = rng() % 6 ; i < c ; ++i)
                params.push_back(random_node(rng, p, Side::right, K));
            auto q = make_query(random_node(rng, p, Side::left, n), params);
            q.depth = K;
            auto v = decide_type(p, q, TypeMode::exhaustive);
            auto oracle = brute_force(p, q);
            CHECK(v.consistent() == oracle.has_value());
            if (oracle && v.witness)
                CHECK(*v.witness == *oracle);
            // greedy is exact on parameters
            auto g = decide_type(p, q, TypeMode::greedy);
            CHECK(g.status == v.status);
            if (g.witness && v.witness)
                CHECK(*g.witness == *v.witness);
        }
    }
}

TEST_CASE("greedy guarantee band")
{
    std::mt19937_64 rng(21);
    auto p = desk_parameter(1);
    size_t failures = 0;
    for (int trial = 0 ; trial < 1000 ; ++trial) {
        size_t K = 1 + rng() % 3, n = rng() % K;
        size_t small = SIZE_MAX;
        for (size_t k = n ; k < K ; ++k)
            small = std::min(small, p.profile().small_at(k));
        auto base = random_node(rng, p, Side::left, n);
        auto partners = s_rho(p, base, n)[n];
        vector<Node> params;
        for (size_t i = 0, c = 1 + rng() % small ; i < c ; ++i) {
            auto a = partners[rng() % partners.size()];
            while (a.level() < K)
                a = a.child(rng() % p.width(a.level()));
            params.push_back(a);
        }
        auto v = decide_type(p, make_query(base, params), TypeMode::greedy);
        failures += ! v.consistent();
    }
    CHECK(failures == 0);
}

TEST_CASE("obstruction instances")
{
    auto p = desk_parameter(2);
    for (size_t n = 1 ; n <= 3 ; ++n) {
        size_t count = 0;
        for (auto & nu : p.level_nodes(Side::right, n)) {
            auto q = obstruction_instance(p, n, nu);
            CHECK(q.params.size() == p.width(n));
            CHECK(p.related(q.base, nu));
            auto v = decide_type(p, q, TypeMode::greedy);
            CHECK(v.status == TypeStatus::inconsistent);
            CHECK(*v.level == n + 1);
            if (n < 3)
                CHECK(decide_type(p, q, TypeMode::exhaustive).status == TypeStatus::inconsistent);

            // cutting the params down to small_n restores consistency
            q.params.resize(p.profile().small_at(n));
            CHECK(decide_type(p, q, TypeMode::greedy).consistent());
            if (++count == 40)
                break;
        }
    }

    // level 0 is lazy: all successors of the root are met at once
    auto q = obstruction_instance(p, 0, right_node({ }));
    CHECK(decide_type(p, q, TypeMode::greedy).consistent());
}

TEST_CASE("dropping parameters keeps consistency")
{
    std::mt19937_64 rng(4);
    auto p = desk_parameter(3);
    size_t consistent = 0;
    for (int trial = 0 ; trial < 300 ; ++trial) {
        vector<Node> params;
        for (size_t i = 0, c = 1 + rng() % 5 ; i < c ; ++i)
            params.push_back(random_node(rng, p, Side::right, 3));
        auto q = make_query(random_node(rng, p, Side::left, 1), params);
        if (! decide_type(p, q, TypeMode::exhaustive).consistent())
            continue;
        ++consistent;
        for (size_t drop = 0 ; drop < params.size() ; ++drop) {
            auto fewer = q;
            fewer.params.erase(fewer.params.begin() + drop);
            CHECK(decide_type(p, fewer, TypeMode::exhaustive).consistent());
        }
    }
    CHECK(consistent > 0);
}

TEST_CASE("negated literals and errors")
{
    auto & w = load_warmup();
    auto v = decide_type(w, make_query(L("0"), { R("12") }, { R("20"), R("01") }), TypeMode::greedy);
    REQUIRE(v.negated.size() == 2);
    CHECK(v.negated[0].implied);
    CHECK(! v.negated[1].implied);
    auto j = verdict_to_json(v);
    CHECK(j["negated"][1]["status"] == "model-level, not decided");
    CHECK(j["witness"] == vector<uint32_t>{ 0, 1 });

    CHECK_THROWS_AS(decide_type(w, make_query(L("0"), { R("1") , R("12") }), TypeMode::greedy), InvalidQuery);
    CHECK_THROWS_AS(decide_type(w, make_query(R("0"), { R("12") }), TypeMode::greedy), InvalidQuery);

    auto p = desk_parameter(1);
    auto deep = make_query(left_node({ 0 }), { right_node({ 0, 0, 0, 0, 0 }) });
    CHECK_THROWS_AS(decide_type(p, deep, TypeMode::greedy), CapacityError);
    auto big = make_query(left_node({ }), p.successors(right_node({ 0, 0, 0 })));
    CHECK_THROWS_AS(decide_type(p, big, TypeMode::exhaustive, 10), CapacityError);
}

TEST_CASE("query json")
{
    auto q = make_query(L("0"), { R("12"), R("13") }, { R("20") });
    auto back = query_from_json(nlohmann::json::parse(query_to_json(q).dump()));
    CHECK(back.base == q.base);
    CHECK(back.params == q.params);
    CHECK(back.negated == q.negated);
    CHECK(back.depth == 2);
    CHECK_THROWS_AS(query_from_json(nlohmann::json{ { "params", 1 } }), InvalidQuery);
}
