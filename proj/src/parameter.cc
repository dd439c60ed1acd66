#include <paramforge/parameter.hh>
#include <paramforge/parallel.hh>

#include <algorithm>
#include <atomic>
#include <list>
#include <map>
#include <mutex>
#include <random>
#include <unordered_map>

using std::optional;
using std::pair;
using std::size_t;
using std::span;
using std::string;
using std::uint32_t;
using std::uint64_t;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    auto other_side(Side s) -> Side
    {
        return s == Side::left ? Side::right : Side::left;
    }

    auto Node::child(uint32_t t) const -> Node
    {
        Node c = *this;
        c.digits.push_back(t);
        return c;
    }

    auto Node::parent() const -> Node
    {
        if (digits.empty())
            throw InvalidQuery("the root has no parent");
        return restrict(level() - 1);
    }

    auto Node::restrict(size_t k) const -> Node
    {
        if (k > level())
            throw InvalidQuery("cannot restrict a node to a deeper level");
        return Node{ side, vector<uint32_t>(digits.begin(), digits.begin() + k) };
    }

    auto Node::extends(const Node & prefix) const -> bool
    {
        return side == prefix.side && prefix.level() <= level()
            && std::equal(prefix.digits.begin(), prefix.digits.end(), digits.begin());
    }

    auto Node::to_string() const -> string
    {
        bool short_digits = std::all_of(digits.begin(), digits.end(), [] (uint32_t d) { return d < 10; });
        string s;
        for (size_t i = 0 ; i < digits.size() ; ++i) {
            if (i > 0 && ! short_digits)
                s += '.';
            s += std::to_string(digits[i]);
        }
        return s.empty() ? "<>" : s;
    }

    auto left_node(vector<uint32_t> digits) -> Node
    {
        return Node{ Side::left, std::move(digits) };
    }

    auto right_node(vector<uint32_t> digits) -> Node
    {
        return Node{ Side::right, std::move(digits) };
    }

    auto node_to_json(const Node & n) -> json
    {
        return json{ { "side", n.side == Side::left ? "left" : "right" }, { "digits", n.digits } };
    }

    auto node_from_json(const json & j) -> Node
    {
        try {
            auto side = j.at("side").get<string>();
            if (side != "left" && side != "right")
                throw InvalidQuery("node side must be left or right");
            return Node{ side == "left" ? Side::left : Side::right, j.at("digits").get<vector<uint32_t>>() };
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed node: ") + e.what());
        }
    }

    LevelFunction::LevelFunction(vector<bool> bits, size_t i_star) :
        _bits(std::move(bits)),
        _i_star(i_star)
    {
        bool any = false;
        for (size_t i = i_star ; i < _bits.size() ; ++i)
            any = any || _bits[i];
        if (! any)
            throw InvalidQuery("a level function needs an active level at or after i_star");
    }

    auto LevelFunction::lazy_below(size_t i_star, size_t window) -> LevelFunction
    {
        vector<bool> bits(window, false);
        for (size_t i = i_star ; i < window ; ++i)
            bits[i] = true;
        return LevelFunction(bits, i_star);
    }

    auto LevelFunction::from_string(const string & bits, size_t i_star) -> LevelFunction
    {
        vector<bool> b;
        for (char c : bits) {
            if (c != '0' && c != '1')
                throw InvalidQuery("level function bits must be 0 or 1");
            b.push_back(c == '1');
        }
        return LevelFunction(b, i_star);
    }

    auto LevelFunction::operator()(size_t k) const -> bool
    {
        if (k >= _bits.size())
            throw CapacityError("level " + std::to_string(k) + " is outside the level-function window");
        return _bits[k];
    }

    auto LevelFunction::active_at_zero() const -> bool
    {
        return ! _bits.empty() && _bits[0];
    }

    auto LevelFunction::lazy_below_i_star() const -> bool
    {
        for (size_t i = 0 ; i < std::min(_i_star, _bits.size()) ; ++i)
            if (_bits[i])
                return false;
        return true;
    }

    auto LevelFunction::to_string() const -> string
    {
        string s;
        for (bool b : _bits)
            s += b ? '1' : '0';
        return s;
    }

    auto LevelFunction::to_json() const -> json
    {
        return json{ { "bits", to_string() }, { "i_star", _i_star },
            { "active_at_zero", active_at_zero() }, { "lazy_below_i_star", lazy_below_i_star() } };
    }

    auto LevelFunction::from_json(const json & j) -> LevelFunction
    {
        try {
            return from_string(j.at("bits").get<string>(), j.at("i_star").get<size_t>());
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed level function: ") + e.what());
        }
    }

    auto TreeSystem::level_nodes(Side side, size_t k, uint64_t budget) const -> vector<Node>
    {
        vector<Node> current{ Node{ side, { } } };
        for (size_t level = 0 ; level < k ; ++level) {
            vector<Node> next;
            for (auto & n : current)
                for (auto & c : successors(n)) {
                    if (next.size() >= budget)
                        throw CapacityError("level " + std::to_string(k) + " has more nodes than the budget");
                    next.push_back(std::move(c));
                }
            current = std::move(next);
        }
        return current;
    }

    class EdgeCache
    {
        public:
            EdgeCache(size_t levels, size_t capacity) :
                _capacity(capacity)
            {
                for (size_t k = 0 ; k < levels ; ++k)
                    _levels.push_back(std::make_unique<Level>());
            }

            auto lookup(size_t k, uint64_t a, uint64_t b) -> optional<bool>
            {
                if (_capacity == 0 || k >= _levels.size())
                    return std::nullopt;
                auto & level = *_levels[k];
                std::lock_guard<std::mutex> guard(level.mutex);
                auto it = level.index.find(Key{ a, b });
                if (it == level.index.end()) {
                    ++_misses;
                    return std::nullopt;
                }
                level.order.splice(level.order.begin(), level.order, it->second);
                ++_hits;
                return it->second->second;
            }

            auto store(size_t k, uint64_t a, uint64_t b, bool value) -> void
            {
                if (_capacity == 0 || k >= _levels.size())
                    return;
                auto & level = *_levels[k];
                std::lock_guard<std::mutex> guard(level.mutex);
                Key key{ a, b };
                if (level.index.count(key))
                    return;
                level.order.emplace_front(key, value);
                level.index.emplace(key, level.order.begin());
                if (level.order.size() > _capacity) {
                    level.index.erase(level.order.back().first);
                    level.order.pop_back();
                }
            }

            auto hits() const -> uint64_t { return _hits; }
            auto misses() const -> uint64_t { return _misses; }

        private:
            struct Key
            {
                uint64_t a, b;
                auto operator==(const Key &) const -> bool = default;
            };

            struct KeyHash
            {
                auto operator()(const Key & k) const -> size_t
                {
                    return std::hash<uint64_t>()(k.a * 0x9e3779b97f4a7c15ULL ^ k.b);
                }
            };

            struct Level
            {
                std::mutex mutex;
                std::list<pair<Key, bool>> order;
                std::unordered_map<Key, std::list<pair<Key, bool>>::iterator, KeyHash> index;
            };

            size_t _capacity;
            vector<std::unique_ptr<Level>> _levels;
            std::atomic<uint64_t> _hits{ 0 }, _misses{ 0 };
    };

    struct Parameter::Data
    {
        GoodSequence seq;
        LevelFunction xi;
        vector<size_t> widths;
        vector<uint64_t> level_sizes;
        bool indexable = true;
    };

    Parameter::Parameter(GoodSequence graphs, LevelFunction xi, size_t cache_entries)
    {
        auto data = std::make_shared<Data>();
        size_t d = graphs.levels.size();
        if (xi.window() < d)
            throw InvalidQuery("level function window is shorter than the forged depth");
        for (size_t i = 0 ; i < d ; ++i) {
            auto w = graphs.profile.width(i);
            if (graphs.levels[i].n != w || graphs.levels[i].level != i)
                throw InvalidQuery("graph level " + std::to_string(i) + " does not match the profile");
            data->widths.push_back(w);
        }
        data->level_sizes.push_back(1);
        for (size_t i = 0 ; i < d ; ++i) {
            uint64_t prev = data->level_sizes.back();
            if (prev > UINT64_MAX / std::max<uint64_t>(data->widths[i], 1)) {
                data->indexable = false;
                data->level_sizes.push_back(UINT64_MAX);
            }
            else
                data->level_sizes.push_back(prev * data->widths[i]);
        }
        data->seq = std::move(graphs);
        data->xi = std::move(xi);
        _data = data;
        _cache = std::make_shared<EdgeCache>(d + 1, _data->indexable ? cache_entries : 0);
    }

    auto Parameter::profile() const -> const FastProfile &
    {
        return _data->seq.profile;
    }

    auto Parameter::sequence() const -> const GoodSequence &
    {
        return _data->seq;
    }

    auto Parameter::xi() const -> const LevelFunction &
    {
        return _data->xi;
    }

    auto Parameter::depth() const -> size_t
    {
        return _data->seq.levels.size();
    }

    auto Parameter::width(size_t k) const -> size_t
    {
        if (k >= _data->widths.size())
            throw CapacityError("level " + std::to_string(k) + " is outside the forged range");
        return _data->widths[k];
    }

    auto Parameter::level_size(size_t k) const -> uint64_t
    {
        return _data->level_sizes.at(k);
    }

    auto Parameter::is_lazy(size_t k) const -> bool
    {
        return ! _data->xi(k);
    }

    auto Parameter::check_node(const Node & n, Side side) const -> void
    {
        if (n.side != side)
            throw InvalidQuery("node " + n.to_string() + " is on the wrong side");
        if (n.level() > depth())
            throw CapacityError("node " + n.to_string() + " is beyond the forged range");
        for (size_t j = 0 ; j < n.level() ; ++j)
            if (n.digits[j] >= _data->widths[j])
                throw InvalidQuery("node " + n.to_string() + " has a digit out of range");
    }

    auto Parameter::contains(const Node & n) const -> bool
    {
        if (n.level() > depth())
            return false;
        for (size_t j = 0 ; j < n.level() ; ++j)
            if (n.digits[j] >= _data->widths[j])
                return false;
        return true;
    }

    auto Parameter::successors(const Node & n) const -> vector<Node>
    {
        vector<Node> result;
        if (n.level() >= depth())
            return result;
        auto w = _data->widths[n.level()];
        result.reserve(w);
        for (uint32_t t = 0 ; t < w ; ++t)
            result.push_back(n.child(t));
        return result;
    }

    auto Parameter::related(const Node & left, const Node & right) const -> bool
    {
        if (left.level() != right.level())
            throw InvalidQuery("related nodes must be on the same level");
        return r_edge(left.level(), left, right);
    }

    auto Parameter::child_edge(size_t k, uint32_t a, uint32_t b) const -> bool
    {
        if (! _data->xi(k))
            return true;
        auto & g = _data->seq.levels.at(k);
        return _transposed ? g.adjacent(b, a) : g.adjacent(a, b);
    }

    auto Parameter::base_edge(size_t k, span<const uint32_t> a, span<const uint32_t> b) const -> bool
    {
        if (k == 0)
            return true;

        uint64_t ia = 0, ib = 0;
        bool cached = k >= 2 && _data->indexable;
        if (cached) {
            for (size_t j = 0 ; j < k ; ++j) {
                ia = ia * _data->widths[j] + a[j];
                ib = ib * _data->widths[j] + b[j];
            }
            if (auto hit = _cache->lookup(k, ia, ib))
                return *hit;
        }

        bool edge = ! _data->xi(k - 1) || _data->seq.levels[k - 1].adjacent(a[k - 1], b[k - 1]);
        bool result = edge && base_edge(k - 1, a.first(k - 1), b.first(k - 1));
        if (cached)
            _cache->store(k, ia, ib, result);
        return result;
    }

    auto Parameter::r_edge(size_t k, const Node & left, const Node & right) const -> bool
    {
        check_node(left, Side::left);
        check_node(right, Side::right);
        if (left.level() != k || right.level() != k)
            throw InvalidQuery("r_edge nodes must both be at level " + std::to_string(k));
        // the cache is keyed in the orientation of the underlying sequence
        if (_transposed)
            return base_edge(k, right.digits, left.digits);
        return base_edge(k, left.digits, right.digits);
    }

    auto Parameter::dual() const -> Parameter
    {
        Parameter d = *this;
        d._transposed = ! _transposed;
        return d;
    }

    auto Parameter::is_self_dual() const -> bool
    {
        // both trees are {eta < m}, so the transpose agrees iff every active E_k is symmetric
        for (size_t k = 0 ; k < depth() ; ++k)
            if (_data->xi(k) && ! _data->seq.levels[k].is_symmetric())
                return false;
        return true;
    }

    auto Parameter::cache_hits() const -> uint64_t
    {
        return _cache->hits();
    }

    auto Parameter::cache_misses() const -> uint64_t
    {
        return _cache->misses();
    }

    auto Parameter::operator==(const Parameter & other) const -> bool
    {
        if (_transposed != other._transposed || ! (_data->xi == other._data->xi))
            return false;
        if (_data == other._data)
            return true;
        auto & a = _data->seq, & b = other._data->seq;
        return profile_to_json(a.profile) == profile_to_json(b.profile) && a.levels == b.levels;
    }

    auto parameter_to_json(const Parameter & p) -> json
    {
        json seeds = json::array();
        for (auto & g : p.sequence().levels)
            seeds.push_back(g.seed);
        return json{ { "version", 1 }, { "profile", profile_to_json(p.profile()) },
            { "base_seed", p.sequence().base_seed }, { "seeds", seeds }, { "xi", p.xi().to_json() },
            { "transposed", p.transposed() } };
    }

    auto parameter_from_json(const json & j) -> Parameter
    {
        try {
            if (j.at("version").get<int>() != 1)
                throw InvalidQuery("unsupported parameter version");
            GoodSequence seq;
            seq.profile = profile_from_json(j.at("profile"));
            seq.base_seed = j.at("base_seed").get<uint64_t>();
            auto seeds = j.at("seeds").get<vector<uint64_t>>();
            for (size_t i = 0 ; i < seeds.size() ; ++i)
                seq.levels.push_back(i == 0 ? complete_level(0, seq.profile.width(0)) : sample_level(seq.profile, i, seeds[i]));
            seq.verified_to = seeds.size();
            Parameter p(std::move(seq), LevelFunction::from_json(j.at("xi")));
            return j.value("transposed", false) ? p.dual() : p;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed parameter: ") + e.what());
        }
    }

    auto is_self_dual(const TreeSystem & sys, uint64_t budget) -> bool
    {
        auto flip = [] (Node n) {
            n.side = other_side(n.side);
            return n;
        };
        for (size_t k = 0 ; k <= sys.depth() ; ++k) {
            auto left = sys.level_nodes(Side::left, k, budget), right = sys.level_nodes(Side::right, k, budget);
            if (left.size() != right.size())
                return false;
            for (size_t i = 0 ; i < left.size() ; ++i)
                if (left[i].digits != right[i].digits)
                    return false;
            for (auto & a : left)
                for (auto & b : right)
                    if (sys.related(a, b) != sys.related(flip(b), flip(a)))
                        return false;
        }
        return true;
    }

    auto find_successor_witness(const TreeSystem & sys, const Node & nu, const vector<Node> & targets) -> optional<Node>
    {
        if (nu.side != Side::left)
            throw InvalidQuery("the witness base must be a left node");
        if (nu.level() >= sys.depth())
            throw CapacityError("no successors beyond the forged depth");
        for (auto & t : targets) {
            if (t.side != Side::right || t.level() != nu.level() + 1)
                throw InvalidQuery("targets must be right nodes one level below the base");
            if (! sys.related(nu, t.parent()))
                throw InvalidQuery("target " + t.to_string() + " has a parent unrelated to " + nu.to_string());
        }
        for (auto & c : sys.successors(nu)) {
            bool all = true;
            for (auto & t : targets)
                if (! sys.related(c, t)) {
                    all = false;
                    break;
                }
            if (all)
                return c;
        }
        return std::nullopt;
    }

    auto reduced_graph(const TreeSystem & sys, size_t k, const vector<Node> & left, const vector<Node> & right) -> ReducedGraph
    {
        ReducedGraph h;
        h.level = k;
        h.left = left;
        h.right = right;
        for (auto & v : left)
            if (v.side != Side::left || v.level() != k || ! sys.contains(v))
                throw InvalidQuery("reduced graph left vertex " + v.to_string() + " is not a level-" + std::to_string(k) + " node");
        for (auto & w : right)
            if (w.side != Side::right || w.level() != k || ! sys.contains(w))
                throw InvalidQuery("reduced graph right vertex " + w.to_string() + " is not a level-" + std::to_string(k) + " node");
        for (size_t i = 0 ; i < left.size() ; ++i)
            for (size_t j = 0 ; j < right.size() ; ++j)
                if (sys.related(left[i], right[j]))
                    h.edges.emplace_back(i, j);
        return h;
    }

    auto reduced_graph_to_json(const ReducedGraph & h) -> json
    {
        json left = json::array(), right = json::array(), edges = json::array();
        for (auto & v : h.left)
            left.push_back(v.to_string());
        for (auto & w : h.right)
            right.push_back(w.to_string());
        for (auto & [i, j] : h.edges)
            edges.push_back(json::array({ h.left[i].to_string(), h.right[j].to_string() }));
        return json{ { "level", h.level }, { "left", left }, { "right", right }, { "edges", edges },
            { "complete", h.is_complete() }, { "empty", h.is_empty() } };
    }

    namespace
    {
        // Nodes of both trees up to some depth, with the relation at each level
        // as one bitset row per left node, and the contiguous child ranges.
        struct Enumeration
        {
            vector<vector<Node>> nodes[2];
            vector<vector<size_t>> first_child[2], child_count[2], parent[2];
            vector<vector<Bits>> rel;

            auto side_index(Side s) const -> int { return s == Side::left ? 0 : 1; }
        };

        auto enumerate(const TreeSystem & sys, size_t depth, const AxiomOptions & options) -> Enumeration
        {
            Enumeration e;
            uint64_t total = 0;
            for (int s = 0 ; s < 2 ; ++s) {
                Side side = s == 0 ? Side::left : Side::right;
                e.nodes[s].push_back({ Node{ side, { } } });
                e.parent[s].push_back({ 0 });
                for (size_t k = 0 ; k < depth ; ++k) {
                    vector<Node> next;
                    vector<size_t> first, count, parents;
                    for (size_t i = 0 ; i < e.nodes[s][k].size() ; ++i) {
                        auto children = sys.successors(e.nodes[s][k][i]);
                        first.push_back(next.size());
                        count.push_back(children.size());
                        for (auto & c : children) {
                            parents.push_back(i);
                            next.push_back(std::move(c));
                        }
                        total += children.size();
                        if (total > options.budget)
                            throw CapacityError("tree enumeration exceeds the budget");
                    }
                    e.first_child[s].push_back(first);
                    e.child_count[s].push_back(count);
                    e.parent[s].push_back(parents);
                    e.nodes[s].push_back(std::move(next));
                }
            }

            for (size_t k = 0 ; k <= depth ; ++k) {
                auto & left = e.nodes[0][k], & right = e.nodes[1][k];
                uint64_t pairs = uint64_t(left.size()) * right.size();
                if (pairs > options.budget)
                    throw CapacityError("relation at level " + std::to_string(k) + " exceeds the budget");
                vector<Bits> rows(left.size(), Bits(right.size()));
                parallel_for(left.size(), options.threads, [&] (size_t i) {
                    for (size_t j = 0 ; j < right.size() ; ++j)
                        if (sys.related(left[i], right[j]))
                            rows[i].set(j);
                });
                e.rel.push_back(std::move(rows));
            }
            return e;
        }

        auto digits_json(const Node & n) -> json
        {
            return n.digits;
        }

        auto binomial_sum(size_t n, size_t k) -> BigInt
        {
            BigInt total = 0, term = 1;
            for (size_t j = 0 ; j <= std::min(n, k) ; ++j) {
                total += term;
                term = term * (n - j) / (j + 1);
            }
            return total;
        }

        // One side of the extension axiom at level k. For a base node b on
        // side `base`, the candidates are the level-(k+1) nodes on the other side
        // whose parent is related to b; every u of at most k candidates needs
        // k+1 successors of b related to all of u.
        auto check_extension(const Enumeration & e, size_t k, int base, const AxiomOptions & options, const string & name) -> AxiomCheck
        {
            AxiomCheck check;
            check.check = name;
            int other = 1 - base;
            auto & bases = e.nodes[base][k];

            auto related = [&] (int side_of_first, size_t level, size_t i, size_t j) {
                // i on side_of_first, j on the other side
                return side_of_first == 0 ? e.rel[level][i][j] : e.rel[level][j][i];
            };

            vector<vector<size_t>> candidates(bases.size());
            vector<vector<Bits>> masks(bases.size());
            BigInt total = 0;
            for (size_t b = 0 ; b < bases.size() ; ++b) {
                auto first = e.first_child[base][k][b], count = e.child_count[base][k][b];
                for (size_t c = 0 ; c < e.nodes[other][k + 1].size() ; ++c) {
                    if (! related(other, k, e.parent[other][k + 1][c], b))
                        continue;
                    candidates[b].push_back(c);
                    Bits mask(count);
                    for (size_t t = 0 ; t < count ; ++t)
                        if (related(other, k + 1, c, first + t))
                            mask.set(t);
                    masks[b].push_back(std::move(mask));
                }
                total += binomial_sum(candidates[b].size(), k);
            }
            check.exhaustive = total <= options.budget;

            vector<uint64_t> instances(bases.size(), 0);
            vector<optional<json>> failures(bases.size());
            parallel_for(bases.size(), options.threads, [&] (size_t b) {
                auto count = e.child_count[base][k][b];
                auto & cand = candidates[b];
                auto & mk = masks[b];
                vector<size_t> chosen;
                auto fail = [&] (const Bits & acc) {
                    json u = json::array();
                    for (auto c : chosen)
                        u.push_back(digits_json(e.nodes[other][k + 1][cand[c]]));
                    failures[b] = json{ { "k", k }, { "base", digits_json(bases[b]) }, { "u", u },
                        { "found", acc.count() }, { "needed", k + 1 } };
                };

                if (check.exhaustive) {
                    Bits all(count);
                    all.set();
                    auto search = [&] (auto & self, size_t start, const Bits & acc) -> bool {
                        ++instances[b];
                        if (acc.count() < k + 1) {
                            fail(acc);
                            return false;
                        }
                        if (chosen.size() == k)
                            return true;
                        for (size_t c = start ; c < cand.size() ; ++c) {
                            chosen.push_back(c);
                            Bits next = acc & mk[c];
                            if (! self(self, c + 1, next))
                                return false;
                            chosen.pop_back();
                        }
                        return true;
                    };
                    search(search, 0, all);
                }
                else {
                    std::mt19937_64 rng(options.seed ^ (uint64_t(k) << 32) ^ (uint64_t(base) << 48) ^ b);
                    size_t size = std::min(k, cand.size());
                    vector<size_t> pool(cand.size());
                    for (size_t c = 0 ; c < cand.size() ; ++c)
                        pool[c] = c;
                    for (uint64_t t = 0 ; t < options.samples_per_node ; ++t) {
                        for (size_t a = 0 ; a < size ; ++a)
                            std::swap(pool[a], pool[a + rng() % (pool.size() - a)]);
                        chosen.assign(pool.begin(), pool.begin() + size);
                        std::sort(chosen.begin(), chosen.end());
                        Bits acc(count);
                        acc.set();
                        for (auto c : chosen)
                            acc &= mk[c];
                        ++instances[b];
                        if (acc.count() < k + 1) {
                            fail(acc);
                            return;
                        }
                    }
                }
            });

            for (size_t b = 0 ; b < bases.size() ; ++b) {
                check.instances += instances[b];
                if (failures[b]) {
                    check.pass = false;
                    check.counterexample = *failures[b];
                    break;
                }
            }
            return check;
        }
    }

    auto AxiomReport::pass() const -> bool
    {
        return first_failure() == nullptr;
    }

    auto AxiomReport::first_failure() const -> const AxiomCheck *
    {
        for (auto & c : checks)
            if (! c.pass)
                return &c;
        return nullptr;
    }

    auto check_axioms(const TreeSystem & sys, size_t depth, const AxiomOptions & options) -> AxiomReport
    {
        if (depth > sys.depth())
            throw CapacityError("axiom depth exceeds the forged depth");
        auto e = enumerate(sys, depth, options);

        AxiomReport report;
        report.depth = depth;

        AxiomCheck root{ "root", e.rel[0][0][0], true, 1, nullptr };
        if (! root.pass)
            root.counterexample = json{ { "k", 0 } };
        report.checks.push_back(root);

        AxiomCheck monotone{ "monotone", true, true, 0, nullptr };
        for (size_t k = 0 ; k < depth && monotone.pass ; ++k) {
            auto & left = e.nodes[0][k + 1], & right = e.nodes[1][k + 1];
            for (size_t i = 0 ; i < left.size() && monotone.pass ; ++i)
                for (size_t j = 0 ; j < right.size() ; ++j) {
                    ++monotone.instances;
                    if (e.rel[k + 1][i][j] && ! e.rel[k][e.parent[0][k + 1][i]][e.parent[1][k + 1][j]]) {
                        monotone.pass = false;
                        monotone.counterexample = json{ { "k", k + 1 }, { "left", digits_json(left[i]) }, { "right", digits_json(right[j]) } };
                        break;
                    }
                }
        }
        report.checks.push_back(monotone);

        AxiomCheck two{ "two-successors", true, true, 0, nullptr };
        AxiomCheck lazy{ "lazy-complete", true, true, 0, nullptr };
        for (size_t k = 0 ; k < depth ; ++k) {
            bool is_lazy = sys.is_lazy(k);
            for (size_t i = 0 ; i < e.nodes[0][k].size() ; ++i)
                for (size_t j = 0 ; j < e.nodes[1][k].size() ; ++j) {
                    if (! e.rel[k][i][j])
                        continue;
                    auto fl = e.first_child[0][k][i], cl = e.child_count[0][k][i];
                    auto fr = e.first_child[1][k][j], cr = e.child_count[1][k][j];
                    for (int s = 0 ; s < 2 && two.pass ; ++s) {
                        // s = 0: each right child needs two related left children
                        size_t outer = s == 0 ? cr : cl, inner = s == 0 ? cl : cr;
                        for (size_t a = 0 ; a < outer && two.pass ; ++a) {
                            ++two.instances;
                            size_t found = 0;
                            for (size_t b = 0 ; b < inner ; ++b)
                                if (s == 0 ? e.rel[k + 1][fl + b][fr + a] : e.rel[k + 1][fl + a][fr + b])
                                    ++found;
                            if (found < 2) {
                                two.pass = false;
                                auto & fixed = s == 0 ? e.nodes[1][k + 1][fr + a] : e.nodes[0][k + 1][fl + a];
                                two.counterexample = json{ { "k", k }, { "left", digits_json(e.nodes[0][k][i]) },
                                    { "right", digits_json(e.nodes[1][k][j]) },
                                    { "child_side", s == 0 ? "right" : "left" }, { "child", digits_json(fixed) }, { "found", found } };
                            }
                        }
                    }
                    if (is_lazy && lazy.pass)
                        for (size_t a = 0 ; a < cl && lazy.pass ; ++a)
                            for (size_t b = 0 ; b < cr ; ++b) {
                                ++lazy.instances;
                                if (! e.rel[k + 1][fl + a][fr + b]) {
                                    lazy.pass = false;
                                    lazy.counterexample = json{ { "k", k }, { "left", digits_json(e.nodes[0][k + 1][fl + a]) },
                                        { "right", digits_json(e.nodes[1][k + 1][fr + b]) } };
                                    break;
                                }
                            }
                }
        }
        report.checks.push_back(two);
        report.checks.push_back(lazy);

        AxiomCheck left_ext{ "left-extension", true, true, 0, nullptr };
        AxiomCheck right_ext{ "right-extension", true, true, 0, nullptr };
        for (size_t k = 0 ; k < depth ; ++k) {
            // left extension: a right base node, left candidate sets
            for (auto [base, target] : { pair<int, AxiomCheck *>{ 1, &left_ext }, pair<int, AxiomCheck *>{ 0, &right_ext } }) {
                if (! target->pass)
                    continue;
                auto c = check_extension(e, k, base, options, target->check);
                target->instances += c.instances;
                target->exhaustive = target->exhaustive && c.exhaustive;
                if (! c.pass) {
                    target->pass = false;
                    target->counterexample = c.counterexample;
                }
            }
        }
        report.checks.push_back(left_ext);
        report.checks.push_back(right_ext);
        return report;
    }

    auto axiom_report_to_json(const AxiomReport & r) -> json
    {
        json checks = json::array();
        for (auto & c : r.checks)
            checks.push_back(json{ { "check", c.check }, { "pass", c.pass }, { "mode", c.exhaustive ? "exhaustive" : "sampled" },
                { "instances", c.instances }, { "counterexample", c.counterexample } });
        return json{ { "depth", r.depth }, { "pass", r.pass() }, { "checks", checks } };
    }

    namespace
    {
        auto parse_node(Side side, const string & s) -> Node
        {
            Node n{ side, { } };
            for (char c : s)
                n.digits.push_back(static_cast<uint32_t>(c - '0'));
            return n;
        }
    }

    WarmupFixture::WarmupFixture()
    {
        for (auto s : { "", "0", "1", "00", "01", "02", "10", "11", "12" })
            _left.push_back(parse_node(Side::left, s));
        // The right tree also needs node 2: R_1 relates 1 to it and 20..23 extend it.
        for (auto s : { "", "0", "1", "2", "00", "01", "02", "10", "11", "12", "13", "20", "21", "22", "23" })
            _right.push_back(parse_node(Side::right, s));

        auto pairs = [] (std::initializer_list<pair<const char *, const char *>> list) {
            vector<pair<Node, Node>> result;
            for (auto & [a, b] : list)
                result.emplace_back(parse_node(Side::left, a), parse_node(Side::right, b));
            return result;
        };
        _relations.push_back(pairs({ { "", "" } }));
        _relations.push_back(pairs({ { "0", "0" }, { "0", "1" }, { "1", "2" } }));
        _relations.push_back(pairs({ { "00", "00" }, { "00", "10" }, { "01", "01" }, { "01", "02" }, { "01", "12" },
                    { "01", "13" }, { "02", "01" }, { "02", "02" }, { "02", "10" }, { "02", "11" }, { "10", "20" },
                    { "11", "20" }, { "12", "21" }, { "12", "22" }, { "12", "23" } }));
    }

    auto WarmupFixture::contains(const Node & n) const -> bool
    {
        auto & tree = n.side == Side::left ? _left : _right;
        return std::find(tree.begin(), tree.end(), n) != tree.end();
    }

    auto WarmupFixture::successors(const Node & n) const -> vector<Node>
    {
        vector<Node> result;
        for (auto & m : n.side == Side::left ? _left : _right)
            if (m.level() == n.level() + 1 && m.extends(n))
                result.push_back(m);
        std::sort(result.begin(), result.end());
        return result;
    }

    auto WarmupFixture::related(const Node & left, const Node & right) const -> bool
    {
        if (left.side != Side::left || right.side != Side::right || left.level() != right.level())
            throw InvalidQuery("related takes a left and a right node on one level");
        if (left.level() > depth())
            throw CapacityError("the warm-up fixture has height 2");
        auto & r = _relations[left.level()];
        return std::find(r.begin(), r.end(), pair<Node, Node>{ left, right }) != r.end();
    }

    auto WarmupFixture::relation(size_t k) const -> const vector<pair<Node, Node>> &
    {
        return _relations.at(k);
    }

    auto load_warmup() -> const WarmupFixture &
    {
        static const WarmupFixture fixture;
        return fixture;
    }

    auto warmup_to_json(const WarmupFixture & w) -> json
    {
        json trees = json::object(), relations = json::array();
        for (auto side : { Side::left, Side::right }) {
            json levels = json::array();
            for (size_t k = 0 ; k <= w.depth() ; ++k) {
                json level = json::array();
                for (auto & n : w.level_nodes(side, k))
                    level.push_back(n.to_string());
                levels.push_back(level);
            }
            trees[side == Side::left ? "left" : "right"] = levels;
        }
        for (size_t k = 0 ; k <= w.depth() ; ++k) {
            json level = json::array();
            for (auto & [a, b] : w.relation(k))
                level.push_back(json::array({ a.to_string(), b.to_string() }));
            relations.push_back(level);
        }
        return json{ { "version", 1 }, { "trees", trees }, { "relations", relations } };
    }
}
