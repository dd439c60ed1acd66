#include <paramforge/typecheck.hh>

#include <algorithm>

using std::optional;
using std::size_t;
using std::string;
using std::uint64_t;
using std::vector;

using nlohmann::json;

namespace paramforge
{
    auto status_name(TypeStatus s) -> string
    {
        switch (s) {
            case TypeStatus::consistent: return "consistent";
            case TypeStatus::inconsistent: return "inconsistent";
            case TypeStatus::undecided: return "undecided";
        }
        return "";
    }

    auto s_rho(const TreeSystem & sys, const Node & prefix, size_t depth) -> vector<vector<Node>>
    {
        if (prefix.side != Side::left)
            throw InvalidQuery("s_rho takes a left prefix");
        if (depth > prefix.level())
            throw InvalidQuery("s_rho depth exceeds the prefix length");
        vector<vector<Node>> result{ { Node{ Side::right, { } } } };
        if (! sys.related(prefix.restrict(0), result[0][0]))
            result[0].clear();
        for (size_t k = 1 ; k <= depth ; ++k) {
            auto p = prefix.restrict(k);
            vector<Node> level;
            for (auto & v : result.back())
                for (auto & c : sys.successors(v))
                    if (sys.related(p, c))
                        level.push_back(c);
            result.push_back(std::move(level));
        }
        return result;
    }

    auto make_query(const Node & base, vector<Node> params, vector<Node> negated) -> TypeQuery
    {
        TypeQuery q{ base, std::move(params), std::move(negated), base.level() };
        if (! q.params.empty())
            q.depth = q.params.front().level();
        else if (! q.negated.empty())
            q.depth = q.negated.front().level();
        return q;
    }

    namespace
    {
        auto validate(const TreeSystem & sys, const TypeQuery & q) -> void
        {
            if (q.base.side != Side::left)
                throw InvalidQuery("the base of a type must be a left node");
            if (q.depth < q.base.level())
                throw InvalidQuery("query depth is below the base level");
            if (q.depth > sys.depth())
                throw CapacityError("query depth " + std::to_string(q.depth) + " is beyond the forged range");
            if (! sys.contains(q.base))
                throw InvalidQuery("base " + q.base.to_string() + " is not a node");
            for (auto * list : { &q.params, &q.negated })
                for (auto & a : *list) {
                    if (a.side != Side::right || a.level() != q.depth)
                        throw InvalidQuery("parameters must be right nodes at the query depth");
                    if (! sys.contains(a))
                        throw InvalidQuery("parameter " + a.to_string() + " is not a node");
                }
        }

        auto restricted(const vector<Node> & params, size_t k) -> vector<Node>
        {
            vector<Node> r;
            for (auto & a : params)
                r.push_back(a.restrict(k));
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            return r;
        }

        auto related_to_all(const TreeSystem & sys, const Node & x, const vector<Node> & targets) -> bool
        {
            for (auto & t : targets)
                if (! sys.related(x, t))
                    return false;
            return true;
        }
    }

    auto decide_type(const TreeSystem & sys, const TypeQuery & q, TypeMode mode, uint64_t budget) -> TypeVerdict
    {
        validate(sys, q);
        TypeVerdict v;
        size_t n = q.base.level();

        for (auto & b : q.negated)
            v.negated.push_back({ b, ! sys.related(q.base, b.restrict(n)) });

        for (size_t k = 0 ; k <= n ; ++k)
            for (auto & a : q.params)
                if (! sys.related(q.base.restrict(k), a.restrict(k))) {
                    v.status = TypeStatus::inconsistent;
                    v.level = k;
                    v.reason = "base prefix " + q.base.restrict(k).to_string() + " is unrelated to " + a.restrict(k).to_string();
                    return v;
                }

        if (mode == TypeMode::greedy) {
            // In a parameter the successors of x that work at level k+1 depend
            // only on the last digits of the targets, so a failed extension is
            // a proof of inconsistency no matter which earlier digits were chosen.
            bool local = dynamic_cast<const Parameter *>(&sys) != nullptr;
            Node cur = q.base;
            for (size_t k = n ; k < q.depth ; ++k) {
                auto targets = restricted(q.params, k + 1);
                auto w = find_successor_witness(sys, cur, targets);
                ++v.nodes_visited;
                if (! w) {
                    v.level = k + 1;
                    if (local || k == n) {
                        v.status = TypeStatus::inconsistent;
                        v.reason = "no successor of " + cur.to_string() + " is related to every parameter";
                    }
                    else {
                        v.status = TypeStatus::undecided;
                        v.reason = "greedy extension of " + cur.to_string() + " failed; rerun exhaustively";
                    }
                    return v;
                }
                cur = *w;
            }
            v.witness = cur;
            return v;
        }

        vector<vector<Node>> targets;
        for (size_t k = 0 ; k <= q.depth ; ++k)
            targets.push_back(restricted(q.params, k));

        size_t deepest = n;
        auto search = [&] (auto & self, const Node & x) -> optional<Node> {
            if (x.level() == q.depth)
                return x;
            for (auto & c : sys.successors(x)) {
                if (++v.nodes_visited > budget)
                    throw CapacityError("exhaustive type search exceeds the budget");
                if (! related_to_all(sys, c, targets[c.level()]))
                    continue;
                deepest = std::max(deepest, c.level());
                if (auto r = self(self, c))
                    return r;
            }
            return std::nullopt;
        };

        if (auto r = search(search, q.base)) {
            v.witness = *r;
            return v;
        }
        v.status = TypeStatus::inconsistent;
        v.level = deepest + 1;
        v.reason = "no extension of " + q.base.to_string() + " reaches level " + std::to_string(deepest + 1);
        return v;
    }

    auto obstruction_instance(const TreeSystem & sys, size_t n, const Node & nu) -> TypeQuery
    {
        if (nu.side != Side::right || nu.level() != n)
            throw InvalidQuery("the obstruction node must be a right node at level n");
        if (n + 1 > sys.depth())
            throw CapacityError("level n+1 is beyond the forged range");
        for (auto & x : sys.level_nodes(Side::left, n))
            if (sys.related(x, nu))
                return make_query(x, sys.successors(nu));
        throw InvalidQuery("no left node at level " + std::to_string(n) + " is related to " + nu.to_string());
    }

    namespace
    {
        auto nodes_to_json(const vector<Node> & nodes) -> json
        {
            json j = json::array();
            for (auto & n : nodes)
                j.push_back(n.digits);
            return j;
        }

        auto nodes_from_json(const json & j, Side side) -> vector<Node>
        {
            vector<Node> r;
            for (auto & d : j)
                r.push_back(Node{ side, d.get<vector<std::uint32_t>>() });
            return r;
        }
    }

    auto query_to_json(const TypeQuery & q) -> json
    {
        return json{ { "base", q.base.digits }, { "params", nodes_to_json(q.params) },
            { "negated", nodes_to_json(q.negated) }, { "depth", q.depth } };
    }

    auto query_from_json(const json & j) -> TypeQuery
    {
        try {
            auto base = Node{ Side::left, j.at("base").get<vector<std::uint32_t>>() };
            auto q = make_query(base, nodes_from_json(j.value("params", json::array()), Side::right),
                    nodes_from_json(j.value("negated", json::array()), Side::right));
            if (j.contains("depth"))
                q.depth = j.at("depth").get<size_t>();
            return q;
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed type query: ") + e.what());
        }
    }

    auto verdict_to_json(const TypeVerdict & v) -> json
    {
        json j{ { "status", status_name(v.status) }, { "nodes_visited", v.nodes_visited } };
        j["witness"] = v.witness ? json(v.witness->digits) : json(nullptr);
        j["level"] = v.level ? json(*v.level) : json(nullptr);
        if (! v.reason.empty())
            j["reason"] = v.reason;
        json negated = json::array();
        for (auto & s : v.negated)
            negated.push_back(json{ { "param", s.param.digits }, { "status", s.implied ? "implied-by-prefix" : "model-level, not decided" } });
        j["negated"] = negated;
        return j;
    }
}
