#include <paramforge/cli.hh>
#include <paramforge/boolalg.hh>
#include <paramforge/errors.hh>
#include <paramforge/graphforge.hh>
#include <paramforge/parameter.hh>
#include <paramforge/setcomb.hh>
#include <paramforge/typecheck.hh>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>

using std::optional;
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
        constexpr int report_version = 1;

        // A verified failure, as opposed to a usage problem.
        struct Outcome
        {
            json report;
            bool pass = true;
        };

        class Stopwatch
        {
            public:
                explicit Stopwatch(json & timings) : _timings(timings) { }

                template <typename F>
                auto time(const string & stage, F && f) -> decltype(f())
                {
                    auto start = std::chrono::steady_clock::now();
                    if constexpr (std::is_void_v<decltype(f())>) {
                        f();
                        record(stage, start);
                    }
                    else {
                        auto r = f();
                        record(stage, start);
                        return r;
                    }
                }

            private:
                auto record(const string & stage, std::chrono::steady_clock::time_point start) -> void
                {
                    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                    _timings[stage] = ms;
                }

                json & _timings;
        };

        auto read_json(const string & path) -> json
        {
            std::ifstream in(path);
            if (! in)
                throw InvalidQuery("cannot read " + path);
            try {
                return json::parse(in);
            }
            catch (const json::exception & e) {
                throw InvalidQuery("malformed JSON in " + path + ": " + e.what());
            }
        }

        // "0.1.12", "0112" (single digits) or "" for the root
        auto parse_node(Side side, const string & s) -> Node
        {
            Node n{ side, { } };
            if (s.empty())
                return n;
            try {
                if (s.find('.') != string::npos) {
                    std::stringstream in(s);
                    string part;
                    while (std::getline(in, part, '.'))
                        n.digits.push_back(static_cast<uint32_t>(std::stoul(part)));
                }
                else
                    for (char c : s) {
                        if (c < '0' || c > '9')
                            throw InvalidQuery("bad node " + s);
                        n.digits.push_back(static_cast<uint32_t>(c - '0'));
                    }
            }
            catch (const std::logic_error &) {
                throw InvalidQuery("bad node " + s);
            }
            return n;
        }

        auto config_to_json(const RunConfig & c) -> json
        {
            json j{ { "profile", c.profile }, { "seed", c.seed }, { "retries", c.retries }, { "budget", c.budget } };
            if (c.depth)
                j["depth"] = *c.depth;
            return j;
        }

        struct Context
        {
            RunConfig config;
            string parameter_file;
            json timings = json::object();

            auto profile() const -> FastProfile
            {
                return load_profile(config.profile);
            }

            auto cover_options() const -> CoverOptions
            {
                return CoverOptions{ config.budget, config.threads };
            }

            auto parameter(json & report) -> Parameter
            {
                Stopwatch watch(timings);
                if (! parameter_file.empty()) {
                    report["parameter_source"] = parameter_file;
                    return watch.time("load", [&] { return parameter_from_json(read_json(parameter_file)); });
                }
                auto profile = this->profile();
                auto seq = watch.time("forge", [&] { return forge_sequence(profile, config.seed, config.retries, cover_options()); });
                return Parameter(seq, LevelFunction::lazy_below(profile.i_star, seq.levels.size()));
            }
        };

        auto forge_command(Context & ctx) -> Outcome
        {
            Outcome o;
            auto profile = ctx.profile();
            Stopwatch watch(ctx.timings);
            try {
                auto seq = watch.time("forge", [&] {
                    return forge_sequence(profile, ctx.config.seed, ctx.config.retries, ctx.cover_options(), ctx.config.depth);
                });
                o.report["sequence"] = sequence_to_json(seq);
                // an independent pass over the finished sequence
                auto reports = watch.time("verify", [&] { return verify_sequence(seq, ctx.cover_options()); });
                json levels = json::array();
                for (auto & r : reports) {
                    levels.push_back(level_report_to_json(r));
                    o.pass = o.pass && r.pass();
                }
                o.report["verification"] = levels;
                o.report["levels"] = seq.levels.size();
            }
            catch (const ForgeExhausted & e) {
                o.pass = false;
                o.report["exhausted"] = json{ { "level", e.level }, { "attempts", e.attempts },
                    { "small_failures", e.small_failures }, { "large_failures", e.large_failures }, { "message", e.what() } };
            }
            return o;
        }

        auto verify_command(Context & ctx) -> Outcome
        {
            Outcome o;
            auto param = ctx.parameter(o.report);
            size_t depth = ctx.config.depth.value_or(std::min<size_t>(3, param.depth()));
            AxiomOptions options;
            options.budget = ctx.config.budget;
            options.seed = ctx.config.seed;
            options.threads = ctx.config.threads;
            Stopwatch watch(ctx.timings);
            auto r = watch.time("axioms", [&] { return check_axioms(param, depth, options); });
            o.report["axioms"] = axiom_report_to_json(r);
            o.report["self_dual"] = param.is_self_dual();
            o.pass = r.pass();
            return o;
        }

        auto type_check_command(Context & ctx, const string & query_file, optional<size_t> obstruction, const string & node,
                const string & mode) -> Outcome
        {
            Outcome o;
            auto param = ctx.parameter(o.report);
            TypeQuery q;
            if (! query_file.empty())
                q = query_from_json(read_json(query_file));
            else if (obstruction)
                q = obstruction_instance(param, *obstruction, parse_node(Side::right, node));
            else
                throw InvalidQuery("type-check needs --query or --obstruction");

            auto m = mode == "exhaustive" ? TypeMode::exhaustive : TypeMode::greedy;
            Stopwatch watch(ctx.timings);
            auto v = watch.time("decide", [&] { return decide_type(param, q, m, ctx.config.budget); });
            o.report["query"] = query_to_json(q);
            o.report["mode"] = mode;
            o.report["verdict"] = verdict_to_json(v);
            o.pass = v.consistent();
            return o;
        }

        auto build_pattern(Context & ctx, const string & pattern_file, size_t theta, json & report) -> PossibilityPattern
        {
            if (! pattern_file.empty())
                return pattern_from_json(read_json(pattern_file));
            auto param = ctx.parameter(report);
            size_t depth = ctx.config.depth.value_or(1);
            Stopwatch watch(ctx.timings);
            return watch.time("pattern", [&] { return pattern_from_parameter(param, depth, theta, max_atoms); });
        }

        auto pattern_summary(const PossibilityPattern & p) -> json
        {
            json sizes = json::array();
            for (auto & e : p.b)
                sizes.push_back(e.count());
            json j{ { "theta", p.theta }, { "atoms", p.algebra.atoms() }, { "b_sizes", sizes } };
            if (p.layout)
                j["layout"] = json{ { "depth", p.layout->depth }, { "widths", p.layout->widths } };
            return j;
        }

        auto pattern_command(Context & ctx, const string & pattern_file, size_t theta) -> Outcome
        {
            Outcome o;
            auto p = build_pattern(ctx, pattern_file, theta, o.report);
            o.report["pattern"] = pattern_summary(p);
            Stopwatch watch(ctx.timings);
            auto ext = watch.time("extend", [&] { return free_extension(p, max_atoms); });
            uint32_t full = (uint32_t(1) << p.theta) - 1;
            auto r = watch.time("check", [&] { return check_ext1(p, ext.embedding, ext.solution, { p.b[full] }); });
            o.report["extension_atoms"] = ext.algebra.atoms();
            o.report["ext1"] = ext1_report_to_json(r);
            o.pass = r.pass();
            return o;
        }

        auto refine_command(Context & ctx, const string & pattern_file, size_t theta) -> Outcome
        {
            Outcome o;
            auto p = build_pattern(ctx, pattern_file, theta, o.report);
            o.report["pattern"] = pattern_summary(p);
            Stopwatch watch(ctx.timings);
            auto s = watch.time("refine", [&] { return find_refinement(p, { }); });
            o.pass = s.has_value();
            if (s) {
                json b1 = json::array();
                for (auto & e : s->b1)
                    b1.push_back(element_to_json(e));
                o.report["solution"] = b1;
            }
            else
                o.report["solution"] = nullptr;
            return o;
        }

        // Every level n with n + 1 inside the forged range, checked at the first
        // few right nodes: the full successor set must be an obstruction exactly
        // on active levels, and a small set of successors never is.
        auto obstruction_command(Context & ctx, size_t nodes_per_level) -> Outcome
        {
            Outcome o;
            auto param = ctx.parameter(o.report);
            auto profile = param.profile();
            size_t top = std::min(ctx.config.depth.value_or(param.depth()), param.depth());
            json levels = json::array();
            Stopwatch watch(ctx.timings);
            watch.time("obstruction", [&] {
                for (size_t n = 0 ; n + 1 <= top ; ++n) {
                    size_t m = param.width(n);
                    PossibilityPattern p{ FiniteBA::with_atoms(1), m, { }, pattern_layout(param, n + 1, m) };
                    auto nodes = param.level_nodes(Side::right, n, ctx.config.budget);
                    if (nodes.size() > nodes_per_level)
                        nodes.resize(nodes_per_level);
                    bool active = ! param.is_lazy(n);
                    size_t small = std::min(profile.small_at(n), m);
                    json entries = json::array();
                    for (auto & nu : nodes) {
                        auto whole = obstruction_identity(param, p, nu);
                        auto band = obstruction_identity(param, p, nu, small);
                        bool ok = whole.identity_holds == active && ! band.identity_holds;
                        o.pass = o.pass && ok;
                        entries.push_back(json{ { "node", nu.digits }, { "full", obstruction_report_to_json(whole) },
                            { "small_band", obstruction_report_to_json(band) }, { "as_expected", ok } });
                    }
                    levels.push_back(json{ { "level", n }, { "active", active }, { "small", small }, { "nodes", entries } });
                }
            });
            o.report["levels"] = levels;
            return o;
        }

        // {"radices": [...], "family": [{"partition": block, ...}, ...]}
        auto cc_command(const string & input) -> Outcome
        {
            Outcome o;
            if (input.empty())
                throw InvalidQuery("cc-extract needs --input");
            auto j = read_json(input);
            vector<PartialFunction> family;
            FiniteBA ba = FiniteBA::with_atoms(1);
            try {
                ba = FiniteBA::partitioned(j.at("radices").get<vector<size_t>>());
                for (auto & f : j.at("family")) {
                    PartialFunction g;
                    for (auto & [k, v] : f.items())
                        g[std::stoul(k)] = v.get<size_t>();
                    family.push_back(g);
                }
            }
            catch (const json::exception & e) {
                throw InvalidQuery(string("malformed cc-extract input: ") + e.what());
            }
            catch (const std::logic_error & e) {
                throw InvalidQuery(string("malformed cc-extract input: ") + e.what());
            }
            auto r = cc_extract(ba, family);
            vector<PartialFunction> picked;
            for (auto i : r.indices)
                picked.push_back(family[i]);
            auto common = ba.one();
            for (auto & f : picked)
                common = meet(common, ba.generator(f));
            o.report["indices"] = r.indices;
            o.report["heart"] = r.heart;
            o.report["sunflower_size"] = r.sunflower_size;
            o.report["compatible"] = compatible(picked);
            o.report["meet_atoms"] = common.count();
            o.pass = compatible(picked) && ! common.is_zero();
            return o;
        }

        auto warmup_command() -> Outcome
        {
            Outcome o;
            auto & w = load_warmup();
            o.report["fixture"] = warmup_to_json(w);
            json sizes = json::array();
            for (size_t k = 0 ; k <= w.depth() ; ++k)
                sizes.push_back(w.relation(k).size());
            o.report["relation_sizes"] = sizes;

            struct Query
            {
                size_t k;
                vector<string> left, right;
                bool complete;
            };
            vector<Query> queries{
                { 1, { "0" }, { "0", "1" }, true },
                { 1, { "1" }, { "0", "1" }, false },
                { 2, { "01" }, { "12", "13" }, true } };
            json table = json::array();
            for (auto & q : queries) {
                vector<Node> left, right;
                for (auto & s : q.left)
                    left.push_back(parse_node(Side::left, s));
                for (auto & s : q.right)
                    right.push_back(parse_node(Side::right, s));
                auto h = reduced_graph(w, q.k, left, right);
                auto j = reduced_graph_to_json(h);
                j["complete"] = h.is_complete();
                j["empty"] = h.is_empty();
                table.push_back(j);
                o.pass = o.pass && h.is_complete() == q.complete && (q.complete || h.is_empty());
            }
            o.report["reduced_graphs"] = table;
            o.pass = o.pass && sizes == json{ 1, 3, 15 };
            return o;
        }
    }

    auto config_from_json(const json & j, RunConfig c) -> RunConfig
    {
        try {
            if (j.contains("profile"))
                c.profile = j.at("profile").get<string>();
            if (j.contains("seed"))
                c.seed = j.at("seed").get<uint64_t>();
            if (j.contains("depth"))
                c.depth = j.at("depth").get<size_t>();
            if (j.contains("retries"))
                c.retries = j.at("retries").get<size_t>();
            if (j.contains("budget"))
                c.budget = j.at("budget").get<uint64_t>();
            if (j.contains("out"))
                c.out = j.at("out").get<string>();
            if (j.contains("threads"))
                c.threads = j.at("threads").get<unsigned>();
            for (auto & [key, value] : j.items())
                if (key != "profile" && key != "seed" && key != "depth" && key != "retries" && key != "budget"
                        && key != "out" && key != "threads" && key != "version")
                    throw InvalidQuery("unknown config key " + key);
        }
        catch (const json::exception & e) {
            throw InvalidQuery(string("malformed config: ") + e.what());
        }
        if (c.retries == 0 || c.budget == 0 || c.threads == 0 || (c.depth && *c.depth == 0))
            throw InvalidQuery("budgets must be positive");
        return c;
    }

    auto run(const vector<string> & args) -> RunResult
    {
        CLI::App app{ "paramforge: forge and check finite parameter data" };
        app.require_subcommand(1);

        RunConfig flags;
        flags.profile = PARAMFORGE_DEFAULT_PROFILE;
        string config_file, parameter_file, query_file, node, mode = "greedy", pattern_file, input;
        optional<size_t> obstruction;
        size_t theta = 2, nodes_per_level = 4;
        bool no_timings = false, expect_fail = false;

        // flags given on the command line win over the config file
        auto common = [&] (CLI::App * sub) {
            sub->add_option("--config", config_file, "run config JSON");
            sub->add_option("--profile", flags.profile, "profile JSON");
            sub->add_option("--seed", flags.seed, "base seed");
            sub->add_option("--depth", flags.depth, "depth");
            sub->add_option("--budget", flags.budget, "enumeration budget");
            sub->add_option("--retries", flags.retries, "forge retry budget per level");
            sub->add_option("--out", flags.out, "report path");
            sub->add_option("--threads", flags.threads, "worker threads");
            sub->add_flag("--no-timings", no_timings, "omit timings from the report");
            sub->add_flag("--expect-fail", expect_fail, "exit 0 on a verified failure and 1 on a pass");
        };
        auto with_parameter = [&] (CLI::App * sub) {
            sub->add_option("--parameter", parameter_file, "parameter JSON instead of forging one");
        };

        auto forge = app.add_subcommand("forge", "forge a good sequence and verify every level");
        common(forge);
        auto verify = app.add_subcommand("verify-parameter", "check the parameter axioms");
        common(verify);
        with_parameter(verify);
        auto type_check = app.add_subcommand("type-check", "decide a finite type query");
        common(type_check);
        with_parameter(type_check);
        type_check->add_option("--query", query_file, "query JSON");
        type_check->add_option("--obstruction", obstruction, "use the obstruction instance at this level");
        type_check->add_option("--node", node, "right node for --obstruction, e.g. 0.1");
        type_check->add_option("--mode", mode, "greedy or exhaustive")->check(CLI::IsMember({ "greedy", "exhaustive" }));
        auto pattern = app.add_subcommand("pattern", "build a possibility pattern and check its free extension");
        common(pattern);
        with_parameter(pattern);
        pattern->add_option("--pattern", pattern_file, "pattern JSON instead of building one");
        pattern->add_option("--theta", theta, "number of pattern indices");
        auto refine = app.add_subcommand("refine", "search for a multiplicative refinement");
        common(refine);
        with_parameter(refine);
        refine->add_option("--pattern", pattern_file, "pattern JSON instead of building one");
        refine->add_option("--theta", theta, "number of pattern indices");
        auto obstruction_cmd = app.add_subcommand("obstruction", "check the obstruction identity level by level");
        common(obstruction_cmd);
        with_parameter(obstruction_cmd);
        obstruction_cmd->add_option("--nodes", nodes_per_level, "right nodes checked per level");
        auto cc = app.add_subcommand("cc-extract", "extract a compatible subfamily of generators");
        common(cc);
        cc->add_option("--input", input, "family JSON")->required();
        auto warmup = app.add_subcommand("warmup", "emit the warm-up fixture and its reduced graphs");
        common(warmup);

        RunResult result;
        try {
            vector<string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        }
        catch (const CLI::ParseError & e) {
            std::ostringstream out, err;
            result.exit_code = app.exit(e, out, err) == 0 ? 0 : 2;
            result.diagnostic = out.str() + err.str();
            return result;
        }

        auto sub = app.get_subcommands().front();
        string command = sub->get_name();
        try {
            Context ctx;
            ctx.config = flags;
            if (! config_file.empty()) {
                RunConfig defaults;
                defaults.profile = PARAMFORGE_DEFAULT_PROFILE;
                ctx.config = config_from_json(read_json(config_file), defaults);
                for (auto [name, apply] : vector<std::pair<string, std::function<void ()>>>{
                        { "--profile", [&] { ctx.config.profile = flags.profile; } },
                        { "--seed", [&] { ctx.config.seed = flags.seed; } },
                        { "--depth", [&] { ctx.config.depth = flags.depth; } },
                        { "--budget", [&] { ctx.config.budget = flags.budget; } },
                        { "--retries", [&] { ctx.config.retries = flags.retries; } },
                        { "--out", [&] { ctx.config.out = flags.out; } },
                        { "--threads", [&] { ctx.config.threads = flags.threads; } } })
                    if (sub->count(name) > 0)
                        apply();
            }
            ctx.config = config_from_json(json::object(), ctx.config);
            ctx.config.timings = ! no_timings;
            ctx.config.expect_fail = expect_fail;
            ctx.parameter_file = parameter_file;
            result.out = ctx.config.out;

            Outcome o;
            if (command == "forge")
                o = forge_command(ctx);
            else if (command == "verify-parameter")
                o = verify_command(ctx);
            else if (command == "type-check")
                o = type_check_command(ctx, query_file, obstruction, node, mode);
            else if (command == "pattern")
                o = pattern_command(ctx, pattern_file, theta);
            else if (command == "refine")
                o = refine_command(ctx, pattern_file, theta);
            else if (command == "obstruction")
                o = obstruction_command(ctx, nodes_per_level);
            else if (command == "cc-extract")
                o = cc_command(input);
            else
                o = warmup_command();

            json report{ { "version", report_version }, { "command", command }, { "seed", ctx.config.seed },
                { "config", config_to_json(ctx.config) }, { "pass", o.pass } };
            for (auto & [key, value] : o.report.items())
                report[key] = value;
            if (ctx.config.timings)
                report["timings_ms"] = ctx.timings;
            result.report = report.dump(2) + "\n";
            result.exit_code = (o.pass != ctx.config.expect_fail) ? 0 : 1;
        }
        catch (const ForgeExhausted & e) {
            result.exit_code = 2;
            result.diagnostic = command + ": forge gave up at level " + std::to_string(e.level) + " after "
                + std::to_string(e.attempts) + " attempts\n";
        }
        catch (const CapacityError & e) {
            result.exit_code = 2;
            result.diagnostic = command + ": capacity: " + e.what() + "\n";
        }
        catch (const std::invalid_argument & e) {
            result.exit_code = 2;
            result.diagnostic = command + ": " + e.what() + "\n";
        }
        catch (const std::logic_error & e) {
            result.exit_code = 2;
            result.diagnostic = command + ": " + e.what() + "\n";
        }
        return result;
    }
}
