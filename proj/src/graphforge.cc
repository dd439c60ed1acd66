#include <paramforge/graphforge.hh>
#include <paramforge/parallel.hh>

#include <algorithm>
#include <random>

using std::optional;
using std::pair;
using std::size_t;
using std::string;
using std::uint64_t;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    namespace
    {
        auto splitmix64(uint64_t x) -> uint64_t
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }

        // floor(p * 2^64) for 0 < p < 1
        auto threshold_word(const Rational & p) -> uint64_t
        {
            BigInt scaled = (boost::multiprecision::numerator(p) << 64) / boost::multiprecision::denominator(p);
            return scaled.convert_to<uint64_t>();
        }

        // The lexicographically first j-set whose least element is v0 and which
        // has no common neighbour. Assumes all smaller sets are covered.
        auto first_uncovered(const GraphLevel & g, size_t j, size_t v0, uint64_t & checked) -> optional<vector<size_t>>
        {
            vector<Bits> acc(j);
            vector<size_t> chosen(j);
            acc[0] = g.rows[v0];
            chosen[0] = v0;
            if (j == 1) {
                ++checked;
                if (acc[0].none())
                    return chosen;
                return std::nullopt;
            }

            auto search = [&] (auto & self, size_t d) -> bool {
                for (size_t v = chosen[d - 1] + 1 ; v + (j - d) <= g.n ; ++v) {
                    chosen[d] = v;
                    acc[d] = acc[d - 1];
                    acc[d] &= g.rows[v];
                    if (d + 1 == j) {
                        ++checked;
                        if (acc[d].none())
                            return true;
                    }
                    else if (self(self, d + 1))
                        return true;
                }
                return false;
            };
            if (search(search, 1))
                return chosen;
            return std::nullopt;
        }

        auto binomial(size_t n, size_t k) -> BigInt
        {
            if (k > n)
                return 0;
            BigInt r = 1;
            for (size_t i = 0 ; i < k ; ++i)
                r = r * (n - i) / (i + 1);
            return r;
        }
    }

    auto GraphLevel::empty(size_t level, size_t n) -> GraphLevel
    {
        GraphLevel g;
        g.level = level;
        g.n = n;
        g.rows.assign(n, Bits(n));
        return g;
    }

    auto GraphLevel::add_edge(size_t a, size_t b) -> void
    {
        rows[a].set(b);
        rows[b].set(a);
    }

    auto GraphLevel::is_symmetric() const -> bool
    {
        for (size_t a = 0 ; a < n ; ++a)
            for (size_t b = a + 1 ; b < n ; ++b)
                if (rows[a][b] != rows[b][a])
                    return false;
        return true;
    }

    auto GraphLevel::edges() const -> vector<pair<size_t, size_t>>
    {
        vector<pair<size_t, size_t>> result;
        for (size_t a = 0 ; a < n ; ++a)
            for (size_t b = rows[a].test(a) ? a : rows[a].find_next(a) ; b != Bits::npos ; b = rows[a].find_next(b))
                result.emplace_back(a, b);
        return result;
    }

    auto GraphLevel::operator==(const GraphLevel & other) const -> bool
    {
        return level == other.level && n == other.n && seed == other.seed && p == other.p && rows == other.rows;
    }

    auto complete_level(size_t level, size_t n) -> GraphLevel
    {
        auto g = GraphLevel::empty(level, n);
        for (auto & r : g.rows)
            r.set();
        g.p = 1;
        return g;
    }

    auto graph_to_json(const GraphLevel & g) -> json
    {
        json edges = json::array();
        for (auto & [a, b] : g.edges())
            edges.push_back(json::array({ a, b }));
        return json{ { "version", 1 }, { "level", g.level }, { "n", g.n }, { "seed", g.seed },
            { "p", rational_to_json(g.p) }, { "edges", edges } };
    }

    auto graph_from_json(const json & j) -> GraphLevel
    {
        try {
            if (j.at("version").get<int>() != 1)
                throw InvalidQuery("unsupported graph version");
            auto g = GraphLevel::empty(j.at("level").get<size_t>(), j.at("n").get<size_t>());
            g.seed = j.at("seed").get<uint64_t>();
            g.p = rational_from_json(j.at("p"));
            for (auto & e : j.at("edges")) {
                auto a = e.at(0).get<size_t>(), b = e.at(1).get<size_t>();
                if (a >= g.n || b >= g.n)
                    throw InvalidQuery("edge endpoint out of range");
                g.add_edge(a, b);
            }
            return g;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed graph: ") + e.what());
        }
    }

    auto edge_probability(const FastProfile & profile, size_t i, unsigned precision_bits) -> EdgeProbability
    {
        auto & level = profile.levels.at(i);
        if (i == 0)
            return EdgeProbability{ 1, true, precision_bits };
        if (profile.mode == ProfileMode::scaled) {
            if (! level.p)
                throw InvalidQuery("scaled level " + std::to_string(i) + " has no edge probability");
            return EdgeProbability{ *level.p, true, precision_bits };
        }

        auto gi = g(profile, i);
        auto e = level.m.log2_exact();
        auto f = gi.log2_exact();
        if (e && f && f->is_plain()) {
            // m = 2^e, g = 2^f, so p = 2^{-e / 2^f} when the division is exact
            const BigInt & fp = f->plain();
            optional<Exponent> q;
            if (e->is_plain()) {
                if (fp <= 64 * 1024 && (e->plain() & ((BigInt(1) << fp.convert_to<unsigned>()) - 1)) == 0)
                    q = Exponent(BigInt(e->plain() >> fp.convert_to<unsigned>()));
            }
            else if (e->shift() >= fp && e->offset() == 0)
                q = Exponent(0, e->coeff(), e->shift() - fp);
            if (q) {
                if (q->is_plain() && q->plain() <= materialize_bits)
                    return EdgeProbability{ Rational(BigInt(1), BigInt(1) << q->plain().convert_to<unsigned>()), true, precision_bits };
                // p < 2^-materialize_bits, which rounds to zero at any supported precision
                return EdgeProbability{ 0, false, precision_bits };
            }
        }

        if (! level.m.is_materialized() || ! gi.to_u64() || *gi.to_u64() > 4096)
            throw CapacityError("edge probability at level " + std::to_string(i) + " is not computable");

        // y = floor(2^prec m^{-1/g}) is the largest y with y^g m <= 2^{prec g}
        auto gg = static_cast<unsigned>(*gi.to_u64());
        const BigInt & m = level.m.value();
        BigInt target = BigInt(1) << (precision_bits * gg);
        BigInt lo = 0, hi = BigInt(1) << precision_bits;
        while (lo < hi) {
            BigInt mid = (lo + hi + 1) / 2;
            if (boost::multiprecision::pow(mid, gg) * m <= target)
                lo = mid;
            else
                hi = mid - 1;
        }
        bool exact = boost::multiprecision::pow(lo, gg) * m == target;
        return EdgeProbability{ Rational(lo, BigInt(1) << precision_bits), exact, precision_bits };
    }

    auto sample_graph(size_t level, size_t n, const Rational & p, uint64_t seed) -> GraphLevel
    {
        if (n > max_sample_vertices)
            throw CapacityError("level " + std::to_string(level) + " has too many vertices to sample");
        if (p < 0 || p > 1)
            throw InvalidQuery("edge probability outside [0,1]");
        auto g = GraphLevel::empty(level, n);
        g.seed = seed;
        g.p = p;
        std::mt19937_64 rng(seed);
        bool always = p == 1, never = p == 0;
        uint64_t threshold = always || never ? 0 : threshold_word(p);
        for (size_t a = 0 ; a < n ; ++a)
            for (size_t b = a ; b < n ; ++b) {
                uint64_t word = rng();
                if (always || (! never && word < threshold))
                    g.add_edge(a, b);
            }
        return g;
    }

    auto sample_level(const FastProfile & profile, size_t i, uint64_t seed) -> GraphLevel
    {
        auto n = profile.width(i);
        if (i == 0) {
            auto g = complete_level(0, n);
            g.seed = seed;
            return g;
        }
        return sample_graph(i, n, edge_probability(profile, i).value, seed);
    }

    auto count_subsets(size_t n, size_t s) -> BigInt
    {
        BigInt total = 0;
        for (size_t j = 1 ; j <= std::min(n, s) ; ++j)
            total += binomial(n, j);
        return total;
    }

    auto verify_small_covered(const GraphLevel & g, size_t s, const CoverOptions & options) -> CoverReport
    {
        CoverReport report;
        report.s = s;
        if (g.n == 0) {
            report.witness = vector<size_t>{ };
            return report;
        }
        if (count_subsets(g.n, s) > options.budget)
            throw CapacityError("exhaustive cover check exceeds the subset budget");

        for (size_t j = 1 ; j <= std::min(g.n, s) ; ++j) {
            vector<optional<vector<size_t>>> found(g.n);
            vector<uint64_t> checked(g.n, 0);
            parallel_for(g.n - j + 1, options.threads, [&] (size_t v0) {
                found[v0] = first_uncovered(g, j, v0, checked[v0]);
            });
            for (size_t v0 = 0 ; v0 < g.n ; ++v0) {
                report.sets_checked += checked[v0];
                if (found[v0]) {
                    report.witness = found[v0];
                    return report;
                }
            }
        }
        report.pass = true;
        return report;
    }

    auto verify_small_covered_sampled(const GraphLevel & g, size_t s, uint64_t samples, uint64_t seed) -> CoverReport
    {
        CoverReport report;
        report.s = s;
        report.exhaustive = false;
        size_t k = std::min(s, g.n);
        if (g.n == 0) {
            report.witness = vector<size_t>{ };
            return report;
        }
        std::mt19937_64 rng(seed);
        vector<size_t> all(g.n);
        for (size_t v = 0 ; v < g.n ; ++v)
            all[v] = v;
        for (uint64_t t = 0 ; t < samples ; ++t) {
            // partial Fisher-Yates on raw words keeps this platform independent
            for (size_t a = 0 ; a < k ; ++a)
                std::swap(all[a], all[a + rng() % (g.n - a)]);
            Bits acc = g.rows[all[0]];
            for (size_t a = 1 ; a < k ; ++a)
                acc &= g.rows[all[a]];
            ++report.sets_checked;
            if (acc.none()) {
                vector<size_t> u(all.begin(), all.begin() + k);
                std::sort(u.begin(), u.end());
                report.witness = u;
                return report;
            }
        }
        report.inconclusive = true;
        return report;
    }

    auto verify_large_uncovered(const GraphLevel & g, size_t large) -> DegreeReport
    {
        DegreeReport report;
        report.threshold = large;
        for (size_t v = 0 ; v < g.n ; ++v) {
            auto d = g.degree(v);
            if (d > report.max_degree || v == 0) {
                report.max_degree = d;
                report.vertex = v;
            }
        }
        report.pass = report.max_degree < large;
        return report;
    }

    auto LevelReport::pass() const -> bool
    {
        return (! small || small->pass) && (! large || large->pass);
    }

    auto derive_seed(uint64_t base_seed, size_t level, size_t attempt) -> uint64_t
    {
        uint64_t x = splitmix64(base_seed);
        x = splitmix64(x ^ splitmix64(0x6c6576656cULL + level));
        return splitmix64(x ^ splitmix64(0x617474656d7074ULL + attempt));
    }

    auto forge_level(const FastProfile & profile, size_t i, uint64_t base_seed, size_t max_retries,
            const CoverOptions & options) -> ForgedLevel
    {
        if (i < profile.i_star)
            throw InvalidQuery("forge_level needs i >= i_star");
        auto small = profile.small_at(i), large = profile.large_at(i);
        if (small >= large)
            throw InvalidThresholds("level " + std::to_string(i) + " has small >= large");

        size_t small_failures = 0, large_failures = 0;
        size_t retries = i == 0 ? 1 : max_retries;
        for (size_t attempt = 0 ; attempt < retries ; ++attempt) {
            auto seed = derive_seed(base_seed, i, attempt);
            auto graph = sample_level(profile, i, seed);
            LevelReport report;
            report.level = i;
            report.attempts = attempt + 1;
            report.seed = seed;
            report.large = verify_large_uncovered(graph, large);
            if (! report.large->pass) {
                ++large_failures;
                continue;
            }
            report.small = verify_small_covered(graph, small, options);
            if (! report.small->pass) {
                ++small_failures;
                continue;
            }
            return ForgedLevel{ std::move(graph), std::move(report) };
        }
        throw ForgeExhausted("level " + std::to_string(i) + " not forged within " + std::to_string(retries) + " attempts",
                i, retries, small_failures, large_failures);
    }

    auto forge_sequence(const FastProfile & profile, uint64_t base_seed, size_t max_retries,
            const CoverOptions & options, optional<size_t> depth) -> GoodSequence
    {
        GoodSequence seq;
        seq.profile = profile;
        seq.base_seed = base_seed;
        size_t d = depth.value_or(profile.depth());
        if (d > profile.depth())
            throw InvalidQuery("requested depth exceeds the profile");
        for (size_t i = 0 ; i < d ; ++i) {
            if (i < profile.i_star) {
                auto seed = i == 0 ? 0 : derive_seed(base_seed, i, 0);
                LevelReport report;
                report.level = i;
                report.demanded = false;
                report.attempts = 1;
                report.seed = seed;
                seq.levels.push_back(sample_level(profile, i, seed));
                seq.reports.push_back(report);
            }
            else {
                auto forged = forge_level(profile, i, base_seed, max_retries, options);
                seq.levels.push_back(std::move(forged.graph));
                seq.reports.push_back(std::move(forged.report));
            }
        }
        seq.verified_to = d;
        return seq;
    }

    auto verify_sequence(const GoodSequence & seq, const CoverOptions & options) -> vector<LevelReport>
    {
        vector<LevelReport> reports;
        for (auto & g : seq.levels) {
            LevelReport report;
            report.level = g.level;
            report.seed = g.seed;
            report.demanded = g.level >= seq.profile.i_star;
            if (report.demanded) {
                report.large = verify_large_uncovered(g, seq.profile.large_at(g.level));
                report.small = verify_small_covered(g, seq.profile.small_at(g.level), options);
            }
            reports.push_back(report);
        }
        return reports;
    }

    auto cover_report_to_json(const CoverReport & r) -> json
    {
        return json{ { "check", "small-covered" }, { "mode", r.exhaustive ? "exhaustive" : "sampled" },
            { "s", r.s }, { "pass", r.pass }, { "inconclusive", r.inconclusive },
            { "sets_checked", r.sets_checked }, { "witness", r.witness ? json(*r.witness) : json(nullptr) } };
    }

    auto degree_report_to_json(const DegreeReport & r) -> json
    {
        return json{ { "check", "large-uncovered" }, { "threshold", r.threshold }, { "pass", r.pass },
            { "max_degree", r.max_degree }, { "vertex", r.vertex } };
    }

    auto level_report_to_json(const LevelReport & r) -> json
    {
        json j{ { "level", r.level }, { "demanded", r.demanded }, { "attempts", r.attempts }, { "seed", r.seed },
            { "pass", r.pass() } };
        if (r.small)
            j["small_covered"] = cover_report_to_json(*r.small);
        if (r.large)
            j["large_uncovered"] = degree_report_to_json(*r.large);
        return j;
    }

    auto sequence_to_json(const GoodSequence & seq) -> json
    {
        json levels = json::array(), reports = json::array();
        for (auto & g : seq.levels)
            levels.push_back(graph_to_json(g));
        for (auto & r : seq.reports)
            reports.push_back(level_report_to_json(r));
        return json{ { "version", 1 }, { "profile", profile_to_json(seq.profile) }, { "base_seed", seq.base_seed },
            { "levels", levels }, { "verified_to", seq.verified_to }, { "reports", reports } };
    }

    auto sequence_from_json(const json & j) -> GoodSequence
    {
        try {
            if (j.at("version").get<int>() != 1)
                throw InvalidQuery("unsupported sequence version");
            GoodSequence seq;
            seq.profile = profile_from_json(j.at("profile"));
            seq.base_seed = j.at("base_seed").get<uint64_t>();
            for (auto & g : j.at("levels"))
                seq.levels.push_back(graph_from_json(g));
            seq.verified_to = j.at("verified_to").get<size_t>();
            return seq;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed sequence: ") + e.what());
        }
    }
}
