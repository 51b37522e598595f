#include "inference.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>
#include <random>

namespace smrtc {

void ConstraintSystem::finalize() {
	dep.assign(n_vars, {});
	req.assign(n_vars, {});
	for (std::size_t i = 0; i < constraints.size(); i++) {
		const auto& c = constraints[i];
		dep[c.src].push_back(c.dst);
		req[c.dst].push_back(static_cast<int>(i));
	}
}

namespace {

struct Builder {
	ConstraintSystem cs;

	int fresh() { return cs.n_vars++; }

	void ident(int x, int y) { cs.constraints.push_back({Constraint::Ident, x, y, nullptr}); }

	// entry X, exit Y
	void build(const Stmt& s, int x, int y) {
		switch (s.kind) {
			case Stmt::Com:
				cs.constraints.push_back({Constraint::Sp, x, y, &s.com});
				if (s.com.id >= 0) cs.post_var_of.push_back({s.com.id, y});
				break;
			case Stmt::Seq: {
				int cur = x;
				for (std::size_t i = 0; i < s.children.size(); i++) {
					int next = i + 1 == s.children.size() ? y : fresh();
					build(*s.children[i], cur, next);
					cur = next;
				}
				break;
			}
			case Stmt::Choice:
				for (const auto& arm : s.children) build(*arm, x, y);
				break;
			case Stmt::Loop:
				ident(x, y);
				build(*s.children[0], y, y);
				break;
			case Stmt::Atomic: {
				int b = fresh();
				ident(x, b);  // beginAtomic keeps the environment
				int e = fresh();
				build(*s.children[0], b, e);
				cs.constraints.push_back({Constraint::Rm, e, y, nullptr});  // endAtomic
				break;
			}
		}
	}
};

}  // namespace

ConstraintSystem build_constraints(const Procedure& proc) {
	Builder b;
	b.cs.entry = b.fresh();
	b.cs.final = b.fresh();
	if (proc.body) b.build(*proc.body, b.cs.entry, b.cs.final);
	else b.ident(b.cs.entry, b.cs.final);
	b.cs.finalize();
	return std::move(b.cs);
}

std::vector<TypeEnv> solve(const TypeContext& ctx, const SafeCallTable& table, const VarUniverse& u,
                           const ConstraintSystem& cs, const TypeEnv& init, SolveStats* stats,
                           unsigned order_seed, std::optional<SpDiag>* first_top) {
	std::vector<TypeEnv> val(cs.n_vars, bottom_env(ctx, u));
	val[cs.entry] = init;

	std::vector<int> order(cs.n_vars);
	std::iota(order.begin(), order.end(), 0);
	if (order_seed != 0) {
		std::mt19937 rng(order_seed);
		std::shuffle(order.begin(), order.end(), rng);
	}

	std::deque<int> worklist(order.begin(), order.end());
	std::vector<bool> queued(cs.n_vars, true);

	// chains in the environment lattice are bounded by the variable count
	// times the per-type chain height (flags + custom growth), the worklist
	// pops by that bound times the constraint variables
	long chain = static_cast<long>(u.size()) * (4 + ctx.autom().n_locations()) + 2;
	long bound = static_cast<long>(cs.n_vars) * (3 * chain + 2);
	long pops = 0;

	while (!worklist.empty()) {
		int j = worklist.front();
		worklist.pop_front();
		queued[j] = false;
		pops++;
		if (pops > bound)
			throw std::logic_error("worklist exceeded its iteration bound; chain-length reasoning is broken");
		TypeEnv next = j == cs.entry ? init : bottom_env(ctx, u);
		for (int ci : cs.req[j]) {
			const auto& c = cs.constraints[ci];
			TypeEnv bound;
			switch (c.kind) {
				case Constraint::Ident:
					bound = val[c.src];
					break;
				case Constraint::Rm:
					bound = rm_transient(ctx, u, val[c.src]);
					break;
				case Constraint::Sp: {
					SpResult r = sp(ctx, table, u, val[c.src], *c.com);
					if (r.diag && first_top && !first_top->has_value()) *first_top = r.diag;
					bound = std::move(r.env);
					break;
				}
			}
			next = env_join(ctx, next, bound);
			if (next.top) break;
		}
		if (next == val[j]) continue;
		val[j] = std::move(next);
		for (int d : cs.dep[j]) {
			if (!queued[d]) {
				queued[d] = true;
				worklist.push_back(d);
			}
		}
	}
	if (stats) {
		stats->pops = pops;
		stats->bound = bound;
	}
	return val;
}

void validate_against_automaton(const Program& prog, const SmrAutomaton& o) {
	for_each_command(prog, [&](const Command& c) {
		if (c.kind == CmdKind::Enter) {
			int ev = o.find_event(c.func, EventKind::Enter);
			if (ev < 0)
				throw std::invalid_argument("enter " + c.func + ": not an SMR function of this automaton");
			if (o.events[ev].params.size() != c.args.size() + 1)
				throw std::invalid_argument("enter " + c.func + ": expected " +
				                            std::to_string(o.events[ev].params.size() - 1) + " argument(s)");
			for (std::size_t i = 0; i < c.args.size(); i++) {
				ParamType want = o.events[ev].params[i + 1];
				const auto& arg = c.args[i];
				bool good = (want == ParamType::Address && arg.kind == EnterArg::Ptr)
				         || (want == ParamType::Data && arg.kind != EnterArg::Ptr);
				if (!good)
					throw std::invalid_argument("enter " + c.func + ": argument " + std::to_string(i) +
					                            " has the wrong sort");
			}
		} else if (c.kind == CmdKind::Exit) {
			if (o.find_event(c.func, EventKind::Exit) < 0)
				throw std::invalid_argument("exit " + c.func + ": not an SMR function of this automaton");
		}
	});
}

VarUniverse universe_of(const Program& prog, const Procedure& proc) {
	VarUniverse u;
	auto add = [&](const std::string& name, bool angel, bool shared) {
		u.names.push_back(name);
		u.is_angel.push_back(angel);
		u.is_shared.push_back(shared);
	};
	for (const auto& v : prog.shared)
		if (v.kind == VarKind::SharedPtr) add(v.name, false, true);
	for (const auto& v : proc.locals) {
		if (v.kind == VarKind::LocalPtr) add(v.name, false, false);
		else if (v.kind == VarKind::Angel) add(v.name, true, false);
	}
	return u;
}

TypeReport typecheck(const Program& prog, const TypeContext& ctx, const SafeCallTable& table,
                     unsigned order_seed) {
	auto t0 = std::chrono::steady_clock::now();
	validate_against_automaton(prog, ctx.autom());
	Program pre = preprocess(prog);

	TypeReport report;
	report.ok = true;
	for (const auto& proc : pre.procs) {
		ProcTyping pt;
		pt.proc = proc.name;
		pt.universe = universe_of(pre, proc);
		ConstraintSystem cs = build_constraints(proc);
		TypeEnv init = initial_env(ctx, pt.universe);
		std::optional<SpDiag> first_top;
		auto val = solve(ctx, table, pt.universe, cs, init, &pt.stats, order_seed, &first_top);
		pt.final_env = val[cs.final];

		for (auto [cmd_id, var] : cs.post_var_of) pt.points.push_back({cmd_id, val[var]});
		std::sort(pt.points.begin(), pt.points.end(),
		          [](const auto& a, const auto& b) { return a.first < b.first; });

		if (pt.final_env.top && report.ok) {
			report.ok = false;
			// prefer the syntactically first premise failure observable on the
			// final solution; inside loops the sources may have cycled to Top,
			// in which case the failure recorded during solving stands in
			for (const auto& c : cs.constraints) {
				if (c.kind != Constraint::Sp || val[c.src].top) continue;
				auto r = sp(ctx, table, pt.universe, val[c.src], *c.com);
				if (r.diag) {
					report.failure = TypeFailure{proc.name, r.diag->rule, r.diag->variable,
					                             r.diag->message, r.diag->loc};
					break;
				}
			}
			if (!report.failure && first_top)
				report.failure = TypeFailure{proc.name, first_top->rule, first_top->variable,
				                             first_top->message, first_top->loc};
			if (!report.failure)
				report.failure = TypeFailure{proc.name, "unknown", "", "type inference failed", {}};
		}
		report.procs.push_back(std::move(pt));
	}
	report.wall_seconds =
	    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	return report;
}

nlohmann::json report_to_json(const TypeReport& report, const TypeContext& ctx) {
	nlohmann::json j;
	j["verdict"] = report.ok ? "ok" : "fail";
	j["wall_seconds"] = report.wall_seconds;
	if (report.failure) {
		j["failure"] = {
		    {"proc", report.failure->proc},	{"rule", report.failure->rule},
		    {"variable", report.failure->variable}, {"message", report.failure->message},
		    {"line", report.failure->loc.line},
		};
	}
	// recurring custom location sets get stable names E1, E2, ...
	std::map<LocSet, std::string> custom_names;
	auto custom_name = [&](LocSet l) -> std::string {
		auto it = custom_names.find(l);
		if (it != custom_names.end()) return it->second;
		std::string name = "E" + std::to_string(custom_names.size() + 1);
		custom_names[l] = name;
		return name;
	};
	auto type_json = [&](const CanonicalType& t) {
		nlohmann::json tj;
		tj["flags"] = nlohmann::json::array();
		if (t.flags & FlagA) tj["flags"].push_back("A");
		if (t.flags & FlagL) tj["flags"].push_back("L");
		if (t.flags & FlagS) tj["flags"].push_back("S");
		tj["custom"] = ctx.loc_names(t.custom);
		if (t.custom != ctx.all()) tj["name"] = custom_name(t.custom);
		return tj;
	};
	j["points"] = nlohmann::json::array();
	for (const auto& pt : report.procs) {
		for (const auto& [cmd_id, env] : pt.points) {
			nlohmann::json pj;
			pj["point"] = pt.proc + ":" + std::to_string(cmd_id);
			if (env.top) {
				pj["env"] = "top";
			} else {
				nlohmann::json ej;
				for (std::size_t i = 0; i < pt.universe.size(); i++)
					ej[pt.universe.names[i]] = type_json(env.types[i]);
				pj["env"] = ej;
			}
			j["points"].push_back(pj);
		}
	}
	nlohmann::json stats = nlohmann::json::array();
	for (const auto& pt : report.procs)
		stats.push_back({{"proc", pt.proc}, {"pops", pt.stats.pops}, {"bound", pt.stats.bound}});
	j["solver"] = stats;
	return j;
}

}  // namespace smrtc
