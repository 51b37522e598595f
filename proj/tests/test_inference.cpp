#include <doctest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "inference.hpp"

using namespace smrtc;

namespace {

std::string slurp(const std::string& path) {
	std::ifstream in(path);
	REQUIRE(in);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

Program corpus(const std::string& name) {
	return parse_program(slurp(std::string(SMRTC_CORPUS_DIR) + "/" + name));
}

struct Ebr {
	SmrAutomaton autom = load_automaton("ebr", true);
	TypeContext ctx{autom};
	SafeCallTable table = table_from_automaton(autom);
};

struct Hp {
	SmrAutomaton autom = load_automaton("hp2", true);
	TypeContext ctx{autom};
	SafeCallTable table = table_from_automaton(autom);
};

const char* HEADER = "struct Node { data; next; }\nshared Head;\n";

}  // namespace

TEST_CASE_FIXTURE(Ebr, "malloc grants exactly the local guarantee") {
	auto prog = parse_program(HEADER + std::string("proc f { local p; p = malloc; }"));
	TypeReport r = typecheck(prog, ctx, table);
	REQUIRE(r.ok);
	const auto& pt = r.procs[0];
	int pi = pt.universe.index_of("p");
	int hi = pt.universe.index_of("Head");
	CHECK(pt.final_env.types[pi].flags == FlagL);
	CHECK(pt.final_env.types[hi] == ctx.empty_type());
}

TEST_CASE_FIXTURE(Ebr, "skip program keeps the initial environment") {
	auto prog = parse_program(HEADER + std::string("proc f { skip; }"));
	TypeReport r = typecheck(prog, ctx, table);
	REQUIRE(r.ok);
	VarUniverse u = r.procs[0].universe;
	CHECK(r.procs[0].final_env == initial_env(ctx, u));
}

TEST_CASE_FIXTURE(Ebr, "unvalidated dereference fails with a named rule") {
	auto prog = parse_program(HEADER + std::string("proc f { local q; data u; u = q->data; }"));
	TypeReport r = typecheck(prog, ctx, table);
	REQUIRE(!r.ok);
	REQUIRE(r.failure.has_value());
	CHECK(r.failure->rule == "assign5");
	CHECK(r.failure->variable == "q");
}

TEST_CASE_FIXTURE(Ebr, "retire of an inactive pointer fails") {
	auto prog = parse_program(HEADER + std::string(R"(
proc f {
	local p;
	p = malloc;
	enter retire(p);
	exit retire;
}
)"));
	TypeReport r = typecheck(prog, ctx, table);
	REQUIRE(!r.ok);
	CHECK(r.failure->rule == "enter");
	CHECK(r.failure->variable == "p");
	auto fixed = parse_program(HEADER + std::string(R"(
proc f {
	local p;
	p = malloc;
	atomic {
		@inv active(p);
		enter retire(p);
	}
	exit retire;
}
)"));
	CHECK(typecheck(fixed, ctx, table).ok);
}

TEST_CASE_FIXTURE(Ebr, "loop environments reach a fixpoint") {
	auto prog = parse_program(HEADER + std::string(R"(
proc f {
	local p, q;
	p = malloc;
	loop {
		q = p;
		p = q;
	}
	q = p;
}
)"));
	TypeReport r = typecheck(prog, ctx, table);
	REQUIRE(r.ok);
	const auto& pt = r.procs[0];
	CHECK(pt.final_env.types[pt.universe.index_of("p")].flags == 0);
}

TEST_CASE("corpus queue and stack programs typecheck") {
	Hp hp;
	Ebr ebr;
	for (const char* name : {"treiber_hp.prog", "msqueue_hp.prog"}) {
		CAPTURE(name);
		TypeReport r = typecheck(corpus(name), hp.ctx, hp.table);
		if (!r.ok) {
			CAPTURE(r.failure->proc);
			CAPTURE(r.failure->rule);
			CAPTURE(r.failure->variable);
			CAPTURE(r.failure->message);
			CAPTURE(r.failure->loc.line);
		}
		CHECK(r.ok);
	}
	for (const char* name : {"treiber_ebr.prog", "msqueue_ebr.prog"}) {
		CAPTURE(name);
		TypeReport r = typecheck(corpus(name), ebr.ctx, ebr.table);
		if (!r.ok) {
			CAPTURE(r.failure->proc);
			CAPTURE(r.failure->rule);
			CAPTURE(r.failure->variable);
			CAPTURE(r.failure->message);
			CAPTURE(r.failure->loc.line);
		}
		CHECK(r.ok);
	}
}

TEST_CASE("dequeue-with-angel gains the guarantee then safety") {
	Ebr ebr;
	auto prog = corpus("msqueue_ebr.prog");
	TypeReport r = typecheck(prog, ebr.ctx, ebr.table);
	REQUIRE(r.ok);
	const ProcTyping* deq = nullptr;
	for (const auto& pt : r.procs)
		if (pt.proc == "dequeue") deq = &pt;
	REQUIRE(deq);
	int ri = deq->universe.index_of("r");
	REQUIRE(ri >= 0);
	int active_id = -1;
	for (const auto& proc : prog.procs) {
		if (proc.name != "dequeue") continue;
		for_each_command(*proc.body, [&](const Command& c) {
			if (c.kind == CmdKind::InvActive && c.dst == "r" && active_id < 0) active_id = c.id;
		});
	}
	REQUIRE(active_id >= 0);
	bool checked = false;
	for (const auto& [cmd, env] : deq->points) {
		if (cmd != active_id) continue;
		REQUIRE(!env.top);
		CHECK((env.types[ri].flags & FlagA) != 0);
		CHECK((env.types[ri].flags & FlagS) != 0);
		checked = true;
	}
	CHECK(checked);
}

TEST_CASE("solution is independent of the worklist order") {
	Hp hp;
	auto prog = corpus("msqueue_hp.prog");
	Program pre = preprocess(prog);
	for (const auto& proc : pre.procs) {
		VarUniverse u = universe_of(pre, proc);
		ConstraintSystem cs = build_constraints(proc);
		TypeEnv init = initial_env(hp.ctx, u);
		auto base = solve(hp.ctx, hp.table, u, cs, init);
		for (unsigned seed : {1u, 7u, 1234u}) {
			auto other = solve(hp.ctx, hp.table, u, cs, init, nullptr, seed);
			CHECK(base == other);
		}
	}
}

TEST_CASE("every constraint of the least solution holds") {
	Ebr ebr;
	Program pre = preprocess(corpus("msqueue_ebr.prog"));
	for (const auto& proc : pre.procs) {
		VarUniverse u = universe_of(pre, proc);
		ConstraintSystem cs = build_constraints(proc);
		auto val = solve(ebr.ctx, ebr.table, u, cs, initial_env(ebr.ctx, u));
		for (const auto& c : cs.constraints) {
			TypeEnv lhs = c.kind == Constraint::Ident ? val[c.src]
			            : c.kind == Constraint::Rm
			                ? rm_transient(ebr.ctx, u, val[c.src])
			                : sp(ebr.ctx, ebr.table, u, val[c.src], *c.com).env;
			CHECK(env_leq(ebr.ctx, lhs, val[c.dst]));
		}
	}
}

TEST_CASE("worklist pops stay within the chain bound") {
	Hp hp;
	auto prog = corpus("msqueue_hp.prog");
	TypeReport r = typecheck(prog, hp.ctx, hp.table);
	for (const auto& pt : r.procs) {
		CHECK(pt.stats.pops > 0);
		CHECK(pt.stats.pops <= pt.stats.bound);
	}
}

TEST_CASE("deleting the head-protection annotation flips the verdict") {
	Hp hp;
	auto prog = corpus("msqueue_hp.prog");
	for (auto& proc : prog.procs) {
		if (proc.name != "dequeue") continue;
		bool done = false;
		std::function<void(Stmt&)> zap = [&](Stmt& s) {
			if (done) return;
			if (s.kind == Stmt::Com && s.com.kind == CmdKind::InvActive && s.com.dst == "Head") {
				s.com = Command{};
				done = true;
				return;
			}
			for (auto& k : s.children) zap(*k);
		};
		zap(*proc.body);
		REQUIRE(done);
	}
	TypeReport r = typecheck(prog, hp.ctx, hp.table);
	REQUIRE(!r.ok);
	CHECK(r.failure->rule == "assume1");
}
