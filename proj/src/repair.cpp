#include "repair.hpp"

#include <set>

#include "instrument.hpp"

namespace smrtc {

namespace {

Command mk_annotation(CmdKind k, const std::string& dst, const std::string& src = "") {
	Command c;
	c.kind = k;
	c.dst = dst;
	c.src = src;
	c.id = -1;
	return c;
}

// Rebuilds a statement inserting `ann` immediately before the command with
// the given id (staying inside its atomic block). Returns null if absent.
std::unique_ptr<Stmt> insert_before(const Stmt& s, int target_id, const Command& ann, bool* done) {
	if (s.kind == Stmt::Com) {
		auto copy = Stmt::mk_com(s.com);
		if (s.com.id == target_id && !*done) {
			*done = true;
			std::vector<std::unique_ptr<Stmt>> kids;
			kids.push_back(Stmt::mk_com(ann));
			kids.push_back(std::move(copy));
			return Stmt::mk(Stmt::Seq, std::move(kids));
		}
		return copy;
	}
	std::vector<std::unique_ptr<Stmt>> kids;
	for (const auto& k : s.children) kids.push_back(insert_before(*k, target_id, ann, done));
	return Stmt::mk(s.kind, std::move(kids));
}

// Inserts `ann` right after the command with the given id.
std::unique_ptr<Stmt> insert_after(const Stmt& s, int target_id, const Command& ann, bool* done) {
	if (s.kind == Stmt::Com) {
		auto copy = Stmt::mk_com(s.com);
		if (s.com.id == target_id && !*done) {
			*done = true;
			std::vector<std::unique_ptr<Stmt>> kids;
			kids.push_back(std::move(copy));
			kids.push_back(Stmt::mk_com(ann));
			return Stmt::mk(Stmt::Seq, std::move(kids));
		}
		return copy;
	}
	std::vector<std::unique_ptr<Stmt>> kids;
	for (const auto& k : s.children) kids.push_back(insert_after(*k, target_id, ann, done));
	return Stmt::mk(s.kind, std::move(kids));
}

struct FailureSite {
	int proc_idx = -1;
	int cmd_id = -1;  // failing command within the (original) procedure
	std::string rule, variable;
};

// The typecheck failure names a rule/variable/line; resolve the line back to
// a command id in the un-preprocessed program.
FailureSite locate(const Program& prog, const TypeFailure& f) {
	FailureSite site;
	for (std::size_t i = 0; i < prog.procs.size(); i++) {
		if (prog.procs[i].name != f.proc) continue;
		site.proc_idx = static_cast<int>(i);
		if (!prog.procs[i].body) break;
		for_each_command(*prog.procs[i].body, [&](const Command& c) {
			if (site.cmd_id >= 0) return;
			if (c.loc.line == f.loc.line && c.loc.column == f.loc.column) site.cmd_id = c.id;
		});
	}
	site.rule = f.rule;
	site.variable = f.variable;
	return site;
}

std::vector<std::string> pointer_candidates(const Program& prog, const Procedure& proc,
                                            const FailureSite& site) {
	std::vector<std::string> out;
	auto add = [&](const std::string& n) {
		if (n.empty() || n == NULL_NAME) return;
		const VarDecl* d = prog.find_var(proc, n);
		if (!d || (d->kind != VarKind::LocalPtr && d->kind != VarKind::SharedPtr)) return;
		for (const auto& e : out)
			if (e == n) return;
		out.push_back(n);
	};
	for_each_command(*proc.body, [&](const Command& c) {
		if (c.id != site.cmd_id) return;
		// the diagnosed variable first, then the command's other pointers
		add(site.variable);
		add(c.dst);
		add(c.src);
		for (const auto& a : c.args)
			if (a.kind == EnterArg::Ptr) add(a.name);
		for (const auto& a : c.cond.atoms) {
			if (a.kind == Atom::PtrEq || a.kind == Atom::PtrNeq) {
				add(a.lhs);
				add(a.rhs);
			}
		}
	});
	return out;
}

}  // namespace

Program erase_annotations(const Program& prog) {
	Program out;
	out.shared = prog.shared;
	for (const auto& proc : prog.procs) {
		Procedure q;
		q.name = proc.name;
		for (const auto& v : proc.locals)
			if (v.kind != VarKind::Angel) q.locals.push_back(v);
		std::function<std::unique_ptr<Stmt>(const Stmt&)> strip = [&](const Stmt& s) -> std::unique_ptr<Stmt> {
			if (s.kind == Stmt::Com) {
				if (s.com.is_annotation()) return nullptr;
				return Stmt::mk_com(s.com);
			}
			std::vector<std::unique_ptr<Stmt>> kids;
			for (const auto& k : s.children) {
				auto kid = strip(*k);
				if (kid) kids.push_back(std::move(kid));
			}
			if (kids.empty()) {
				if (s.kind == Stmt::Seq || s.kind == Stmt::Atomic) return nullptr;
				kids.push_back(Stmt::mk_com(Command{}));
			}
			if (s.kind == Stmt::Seq && kids.size() == 1) return std::move(kids[0]);
			return Stmt::mk(s.kind, std::move(kids));
		};
		q.body = proc.body ? strip(*proc.body) : nullptr;
		if (!q.body) q.body = Stmt::mk_com(Command{});
		out.procs.push_back(std::move(q));
	}
	return out;
}

RepairResult repair(const Program& prog, const TypeContext& ctx, const SafeCallTable& table,
                    Budget budget, int max_rounds) {
	RepairResult result;
	result.program = clone(prog);
	budget.free_all = false;  // annotations are discharged under GC
	budget.realloc_all = false;

	bool has_leaveq = ctx.autom().find_event("leaveQ", EventKind::Exit) >= 0;
	std::set<std::string> tried;

	auto oracle_ok = [&](const Program& p) {
		ExploreReport r = explore(instrument(p), ctx.autom(), budget, Mode::Asserts);
		return r.verdict == "clean";
	};

	for (int round = 0; round < max_rounds; round++) {
		TypeReport report = typecheck(result.program, ctx, table);
		if (report.ok) {
			result.log.push_back({{"round", round}, {"event", "typecheck"}, {"verdict", "ok"}});
			bool clean = oracle_ok(result.program);
			result.log.push_back({{"round", round}, {"event", "oracle"}, {"clean", clean}});
			result.success = clean;
			return result;
		}
		const TypeFailure& f = *report.failure;
		result.log.push_back({{"round", round},
		                      {"event", "typecheck"},
		                      {"verdict", "fail"},
		                      {"rule", f.rule},
		                      {"variable", f.variable},
		                      {"proc", f.proc},
		                      {"line", f.loc.line}});
		FailureSite site = locate(result.program, f);
		if (site.proc_idx < 0 || site.cmd_id < 0) break;
		Procedure& proc = result.program.procs[site.proc_idx];
		auto candidates = pointer_candidates(result.program, proc, site);

		bool applied = false;
		// tactic 1: assert activeness right before the failing command
		for (const auto& var : candidates) {
			std::string key = proc.name + "#" + std::to_string(site.cmd_id) + "#active#" + var;
			if (tried.count(key)) continue;
			tried.insert(key);
			Program candidate = clone(result.program);
			bool done = false;
			candidate.procs[site.proc_idx].body = insert_before(
			    *candidate.procs[site.proc_idx].body, site.cmd_id,
			    mk_annotation(CmdKind::InvActive, var), &done);
			if (!done) continue;
			result.log.push_back(
			    {{"round", round}, {"event", "tactic"}, {"name", "active"}, {"variable", var}});
			if (!oracle_ok(candidate)) {
				result.log.push_back({{"round", round}, {"event", "oracle"}, {"clean", false}});
				continue;
			}
			result.log.push_back({{"round", round}, {"event", "oracle"}, {"clean", true}});
			result.program = std::move(candidate);
			applied = true;
			break;
		}

		// tactic 2 (leaveQ automata): route the failing pointer through an angel
		if (!applied && has_leaveq) {
			for (const auto& var : candidates) {
				std::string key = proc.name + "#" + std::to_string(site.cmd_id) + "#angel#" + var;
				if (tried.count(key)) continue;
				tried.insert(key);
				Program candidate = clone(result.program);
				Procedure& cproc = candidate.procs[site.proc_idx];
				std::string angel;
				for (const auto& v : cproc.locals)
					if (v.kind == VarKind::Angel) angel = v.name;
				if (angel.empty()) {
					// instantiate the template at the most recent leaveQ call
					int leaveq_enter = -1, leaveq_exit = -1;
					for_each_command(*cproc.body, [&](const Command& c) {
						if (c.id >= site.cmd_id && site.cmd_id >= 0) return;
						if (c.kind == CmdKind::Enter && c.func == "leaveQ") leaveq_enter = c.id;
						if (c.kind == CmdKind::Exit && c.func == "leaveQ" && leaveq_enter >= 0)
							leaveq_exit = c.id;
					});
					if (leaveq_exit < 0) continue;
					angel = "r_synth";
					cproc.locals.push_back({angel, VarKind::Angel});
					bool done = false;
					cproc.body = insert_before(*cproc.body, leaveq_enter,
					                           mk_annotation(CmdKind::InvAngel, angel), &done);
					if (!done) continue;
					done = false;
					cproc.body = insert_after(*cproc.body, leaveq_exit,
					                          mk_annotation(CmdKind::InvActive, angel), &done);
					if (!done) continue;
				}
				bool done = false;
				Command member = mk_annotation(CmdKind::InvMember, var, angel);
				cproc.body = insert_before(*cproc.body, site.cmd_id, member, &done);
				if (!done) continue;
				result.log.push_back({{"round", round},
				                      {"event", "tactic"},
				                      {"name", "angel"},
				                      {"variable", var},
				                      {"angel", angel}});
				if (!oracle_ok(candidate)) {
					result.log.push_back({{"round", round}, {"event", "oracle"}, {"clean", false}});
					continue;
				}
				result.log.push_back({{"round", round}, {"event", "oracle"}, {"clean", true}});
				result.program = std::move(candidate);
				applied = true;
				break;
			}
		}

		if (!applied) {
			result.log.push_back({{"round", round}, {"event", "giveup"}});
			return result;
		}
	}
	result.log.push_back({{"event", "giveup"}, {"reason", "max rounds"}});
	return result;
}

}  // namespace smrtc
