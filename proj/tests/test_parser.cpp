#include <doctest.h>
#include <functional>

#include <random>

#include "parser.hpp"

using namespace smrtc;

namespace {

const char* MSQ_HEADER = R"(
struct Node { data; next; }
shared Head, Tail;
)";

// random program generator for the round-trip property
struct Gen {
	std::mt19937 rng;
	explicit Gen(unsigned seed) : rng(seed) {}

	int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

	std::string ptr() { return pick(2) ? "p" : (pick(2) ? "q" : "Head"); }
	std::string dat() { return pick(2) ? "u" : "v"; }

	std::string command() {
		switch (pick(14)) {
			case 0: return ptr() + " = " + ptr() + ";";
			case 1: return ptr() + " = null;";
			case 2: return "p = q->next;";
			case 3: return "q->next = p;";
			case 4: return dat() + " = p->data;";
			case 5: return "p->data = " + dat() + ";";
			case 6: return dat() + " = *;";
			case 7: return "p = malloc;";
			case 8: return "assume(" + ptr() + " == " + ptr() + ");";
			case 9: return "assume(" + ptr() + " != null);";
			case 10: return "enter retire(p);";
			case 11: return "exit retire;";
			case 12: return "@inv active(p);";
			case 13: return "skip;";
		}
		return "skip;";
	}

	std::string stmt(int depth) {
		if (depth <= 0 || pick(3) == 0) return command();
		switch (pick(4)) {
			case 0: {
				std::string out;
				int n = 1 + pick(3);
				for (int i = 0; i < n; i++) out += stmt(depth - 1) + "\n";
				return out;
			}
			case 1:
				return "choose {\n" + stmt(depth - 1) + "} or {\n" + stmt(depth - 1) + "}\n";
			case 2:
				return "loop {\n" + stmt(depth - 1) + "}\n";
			case 3:
				return "atomic {\n" + command() + "\n" + command() + "\n}\n";
		}
		return command();
	}

	std::string program() {
		std::string out = MSQ_HEADER;
		out += "proc op {\nlocal p, q;\ndata u, v;\nangel r;\n";
		out += "@inv angel r;\n";
		out += stmt(3);
		out += "}\n";
		return out;
	}
};

}  // namespace

TEST_CASE("direct grammar production") {
	auto prog = parse_program(MSQ_HEADER + std::string("proc f { local p, q; p = q; }"));
	REQUIRE(prog.procs.size() == 1);
	const auto& body = *prog.procs[0].body;
	REQUIRE(body.kind == Stmt::Com);
	CHECK(body.com.kind == CmdKind::PtrAssign);
	CHECK(body.com.dst == "p");
	CHECK(body.com.src == "q");
}

TEST_CASE("dequeue excerpt with angel parses to the annotated shape") {
	auto prog = parse_program(MSQ_HEADER + std::string(R"(
proc dequeue {
	local head, next;
	angel r;
	@inv angel r;
	atomic {
		enter leaveQ();
		exit leaveQ;
		@inv active(r);
	}
	head = Head;
	@inv head in r;
	next = head->next;
}
)"));
	std::vector<CmdKind> kinds;
	for_each_command(prog, [&](const Command& c) { kinds.push_back(c.kind); });
	REQUIRE(kinds.size() == 7);
	CHECK(kinds[0] == CmdKind::InvAngel);
	CHECK(kinds[1] == CmdKind::Enter);
	CHECK(kinds[2] == CmdKind::Exit);
	CHECK(kinds[3] == CmdKind::InvActive);
	CHECK(kinds[5] == CmdKind::InvMember);
	// the active(r) annotation sits inside the atomic block
	const auto& body = *prog.procs[0].body;
	REQUIRE(body.kind == Stmt::Seq);
	CHECK(body.children[1]->kind == Stmt::Atomic);
}

TEST_CASE("empty loop body is a parse error") {
	CHECK_THROWS_AS(parse_program(MSQ_HEADER + std::string("proc f { loop { } }")), ParseError);
}

TEST_CASE("undeclared variable") {
	CHECK_THROWS_AS(parse_program(MSQ_HEADER + std::string("proc f { p = Head; }")), ParseError);
}

TEST_CASE("angels cannot be shared") {
	CHECK_THROWS_AS(parse_program("shared angel r;\nproc f { skip; }"), ParseError);
}

TEST_CASE("angel use requires a dominating allocation") {
	CHECK_THROWS_AS(parse_program(MSQ_HEADER + std::string(R"(
proc f {
	local p;
	angel r;
	@inv p in r;
}
)")), ParseError);
	// allocation on one branch only does not dominate
	CHECK_THROWS_AS(parse_program(MSQ_HEADER + std::string(R"(
proc f {
	local p;
	angel r;
	choose { @inv angel r; } or { skip; }
	@inv p in r;
}
)")), ParseError);
}

TEST_CASE("nested atomic blocks are rejected") {
	CHECK_THROWS_AS(parse_program(MSQ_HEADER + std::string("proc f { atomic { atomic { skip; } } }")),
	                ParseError);
}

TEST_CASE("round trip on generated programs") {
	for (unsigned seed = 1; seed <= 60; seed++) {
		Gen gen(seed);
		Program a = parse_program(gen.program());
		Program b = parse_program(pretty_print(a));
		CHECK(equal(a, b));
	}
}

TEST_CASE("empty procedure body prints as skip") {
	auto prog = parse_program("proc f { }");
	auto text = pretty_print(prog);
	CHECK(text.find("skip;") != std::string::npos);
	CHECK(equal(prog, parse_program(text)));
}

TEST_CASE("annotations print with the @inv prefix") {
	auto prog = parse_program(MSQ_HEADER + std::string(R"(
proc f {
	local p;
	angel r;
	@inv angel r;
	@inv active(p);
	@inv p in r;
	@inv p == Head;
}
)"));
	auto text = pretty_print(prog);
	CHECK(text.find("@inv angel r;") != std::string::npos);
	CHECK(text.find("@inv active(p);") != std::string::npos);
	CHECK(text.find("@inv p in r;") != std::string::npos);
	CHECK(text.find("@inv p == Head;") != std::string::npos);
}

TEST_CASE("preprocess wraps commands in atomic and skip padding") {
	auto prog = parse_program(MSQ_HEADER + std::string("proc f { local p; p = malloc; }"));
	auto pre = preprocess(prog);
	const auto& body = *pre.procs[0].body;
	REQUIRE(body.kind == Stmt::Atomic);
	const auto& inner = *body.children[0];
	REQUIRE(inner.kind == Stmt::Seq);
	REQUIRE(inner.children.size() == 3);
	CHECK(inner.children[0]->com.kind == CmdKind::Skip);
	CHECK(inner.children[1]->com.kind == CmdKind::Malloc);
	CHECK(inner.children[2]->com.kind == CmdKind::Skip);
}

TEST_CASE("preprocess only adds skip padding inside explicit atomic blocks") {
	auto prog = parse_program(MSQ_HEADER + std::string("proc f { local p; atomic { p = malloc; } }"));
	auto pre = preprocess(prog);
	const auto& body = *pre.procs[0].body;
	REQUIRE(body.kind == Stmt::Atomic);
	// no second atomic layer inside
	std::size_t atomics = 0;
	std::function<void(const Stmt&)> count = [&](const Stmt& s) {
		if (s.kind == Stmt::Atomic) atomics++;
		for (const auto& k : s.children) count(*k);
	};
	count(body);
	CHECK(atomics == 1);
}

TEST_CASE("preprocess is idempotent") {
	for (unsigned seed = 1; seed <= 40; seed++) {
		Gen gen(seed);
		Program a = parse_program(gen.program());
		Program once = preprocess(a);
		Program twice = preprocess(once);
		CHECK(equal(once, twice));
	}
}

TEST_CASE("preprocess preserves the non-skip command multiset") {
	for (unsigned seed = 1; seed <= 40; seed++) {
		Gen gen(seed);
		Program a = parse_program(gen.program());
		CHECK(command_multiset(a) == command_multiset(preprocess(a)));
	}
}

TEST_CASE("thread_index renames locals and keeps shared") {
	auto prog = parse_program(MSQ_HEADER + std::string(R"(
proc f {
	local head;
	head = Head;
	Head = head;
}
)"));
	auto indexed = thread_index(prog, 1);
	CHECK(indexed.procs[0].locals[0].name == "head_1");
	std::vector<std::string> seen;
	for_each_command(indexed, [&](const Command& c) {
		seen.push_back(c.dst);
		seen.push_back(c.src);
	});
	CHECK(seen == std::vector<std::string>{"head_1", "Head", "Head", "head_1"});
}

TEST_CASE("thread_index yields disjoint local sets for distinct threads") {
	Gen gen(7);
	Program a = parse_program(gen.program());
	auto p1 = thread_index(a, 1);
	auto p2 = thread_index(a, 2);
	for (const auto& v1 : p1.procs[0].locals)
		for (const auto& v2 : p2.procs[0].locals) CHECK(v1.name != v2.name);
}

TEST_CASE("while sugar desugars to loop with assumes") {
	auto prog = parse_program(MSQ_HEADER + std::string(R"(
proc f {
	local p;
	while (p == Head) { p = Head; }
}
)"));
	int loops = 0, assumes = 0;
	std::function<void(const Stmt&)> walk = [&](const Stmt& s) {
		if (s.kind == Stmt::Loop) loops++;
		if (s.kind == Stmt::Com && s.com.kind == CmdKind::Assume) assumes++;
		for (const auto& k : s.children) walk(*k);
	};
	walk(*prog.procs[0].body);
	CHECK(loops == 1);
	CHECK(assumes == 2);
	// exit assume is the negation
	const auto& seq = *prog.procs[0].body;
	REQUIRE(seq.kind == Stmt::Seq);
	const auto& last = *seq.children.back();
	REQUIRE(last.kind == Stmt::Com);
	CHECK(last.com.cond.atoms[0].kind == Atom::PtrNeq);
}
