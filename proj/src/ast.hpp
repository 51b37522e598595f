#pragma once

#include <cassert>
#include <memory>
#include <string>
#include <vector>

namespace smrtc {

struct SourceLoc {
	int line = 0;
	int column = 0;
};

enum class VarKind { SharedPtr, LocalPtr, SharedData, LocalData, Angel };

struct VarDecl {
	std::string name;
	VarKind kind;
};

// The special pointer constant. It is not a declared variable; commands and
// conditions refer to it by this name.
inline const std::string NULL_NAME = "null";

struct Atom {
	enum Kind { PtrEq, PtrNeq, DataTruthy, DataFalsy } kind;
	std::string lhs;  // pointer variable (PtrEq/PtrNeq) or data variable
	std::string rhs;  // pointer variable or "null"; unused for data atoms
};

// Conditions are a single atom, a conjunction, a disjunction, `true`, or the
// wildcard `*`. Guards richer than that never occur: the instrumentation
// emits at most one level of and/or.
struct Cond {
	enum Shape { True, Star, Single, And, Or } shape = True;
	std::vector<Atom> atoms;

	static Cond mk_true() { return Cond{}; }
	static Cond star() { return Cond{Star, {}}; }
	static Cond single(Atom a) { return Cond{Single, {a}}; }
};

enum class CmdKind {
	Skip,
	PtrAssign,   // dst = src | dst = null
	PtrLoad,     // dst = src->next
	PtrStore,    // dst->next = src | dst->next = null
	DataLoad,    // dst(u) = src->data
	DataStore,   // dst->data = src(u)
	DataOp,      // dst(u) = op(args) ; op "true"/"false" are constants, others nondet
	Malloc,      // dst = malloc
	Assume,
	Assert,      // instrumented programs only
	Havoc,       // instrumented programs only
	Enter,
	Exit,
	InvAngel,    // @inv angel dst
	InvEq,       // @inv dst == src
	InvMember,   // @inv dst in src(angel)
	InvActive,   // @inv active(dst)  (dst may be pointer or angel)
};

struct EnterArg {
	enum Kind { Ptr, Data, Lit } kind;
	std::string name;
	int lit = 0;
};

struct Command {
	CmdKind kind = CmdKind::Skip;
	std::string dst;
	std::string src;
	bool src_null = false;
	std::string func;             // Enter/Exit
	std::vector<EnterArg> args;   // Enter arguments; DataOp arguments (Data kind)
	std::string op;               // DataOp
	Cond cond;                    // Assume/Assert
	SourceLoc loc{};
	int id = -1;                  // stable ordinal within the procedure, set by the parser

	bool is_annotation() const {
		return kind == CmdKind::InvAngel || kind == CmdKind::InvEq
		    || kind == CmdKind::InvMember || kind == CmdKind::InvActive;
	}
};

// Statement tree. Seq and Choice are n-ary and kept flattened so that
// structural equality is stable across print/parse round trips.
struct Stmt {
	enum Kind { Com, Seq, Choice, Loop, Atomic } kind = Com;
	Command com;
	std::vector<std::unique_ptr<Stmt>> children;

	static std::unique_ptr<Stmt> mk_com(Command c) {
		auto s = std::make_unique<Stmt>();
		s->kind = Com;
		s->com = std::move(c);
		return s;
	}
	static std::unique_ptr<Stmt> mk(Kind k, std::vector<std::unique_ptr<Stmt>> kids) {
		assert(k != Com);
		auto s = std::make_unique<Stmt>();
		s->kind = k;
		if (k == Seq) {
			// flatten nested sequences
			for (auto& kid : kids) {
				if (kid->kind == Seq) {
					for (auto& inner : kid->children) s->children.push_back(std::move(inner));
				} else {
					s->children.push_back(std::move(kid));
				}
			}
		} else {
			s->children = std::move(kids);
		}
		return s;
	}
};

struct Procedure {
	std::string name;
	std::vector<VarDecl> locals;  // pointer, data, and angel declarations
	std::unique_ptr<Stmt> body;   // may be null for an empty body
};

struct Program {
	std::vector<VarDecl> shared;  // shared pointers, plus shared data in instrumented programs
	std::vector<Procedure> procs;

	const Procedure* find_proc(const std::string& name) const {
		for (const auto& p : procs)
			if (p.name == name) return &p;
		return nullptr;
	}
	const VarDecl* find_var(const Procedure& proc, const std::string& name) const {
		for (const auto& v : proc.locals)
			if (v.name == name) return &v;
		for (const auto& v : shared)
			if (v.name == name) return &v;
		return nullptr;
	}
};

bool equal(const Stmt& a, const Stmt& b);
bool equal(const Program& a, const Program& b);
std::unique_ptr<Stmt> clone(const Stmt& s);
Program clone(const Program& p);
std::size_t node_count(const Stmt& s);
std::size_t node_count(const Program& p);

// Walk all commands of a statement tree in syntactic order.
template <typename F>
void for_each_command(const Stmt& s, F&& f) {
	if (s.kind == Stmt::Com) {
		f(s.com);
		return;
	}
	for (const auto& c : s.children) for_each_command(*c, f);
}

template <typename F>
void for_each_command(const Program& p, F&& f) {
	for (const auto& proc : p.procs)
		if (proc.body) for_each_command(*proc.body, f);
}

}  // namespace smrtc
