#include "ast.hpp"

namespace smrtc {

static bool equal(const Atom& a, const Atom& b) {
	return a.kind == b.kind && a.lhs == b.lhs && a.rhs == b.rhs;
}

static bool equal(const Cond& a, const Cond& b) {
	if (a.shape != b.shape || a.atoms.size() != b.atoms.size()) return false;
	for (std::size_t i = 0; i < a.atoms.size(); i++)
		if (!equal(a.atoms[i], b.atoms[i])) return false;
	return true;
}

static bool equal(const Command& a, const Command& b) {
	if (a.kind != b.kind) return false;
	if (a.dst != b.dst || a.src != b.src || a.src_null != b.src_null) return false;
	if (a.func != b.func || a.op != b.op) return false;
	if (a.args.size() != b.args.size()) return false;
	for (std::size_t i = 0; i < a.args.size(); i++) {
		if (a.args[i].kind != b.args[i].kind) return false;
		if (a.args[i].name != b.args[i].name || a.args[i].lit != b.args[i].lit) return false;
	}
	return equal(a.cond, b.cond);
}

bool equal(const Stmt& a, const Stmt& b) {
	if (a.kind != b.kind) return false;
	if (a.kind == Stmt::Com) return equal(a.com, b.com);
	if (a.children.size() != b.children.size()) return false;
	for (std::size_t i = 0; i < a.children.size(); i++)
		if (!equal(*a.children[i], *b.children[i])) return false;
	return true;
}

bool equal(const Program& a, const Program& b) {
	if (a.shared.size() != b.shared.size() || a.procs.size() != b.procs.size()) return false;
	for (std::size_t i = 0; i < a.shared.size(); i++)
		if (a.shared[i].name != b.shared[i].name || a.shared[i].kind != b.shared[i].kind) return false;
	for (std::size_t i = 0; i < a.procs.size(); i++) {
		const auto& pa = a.procs[i];
		const auto& pb = b.procs[i];
		if (pa.name != pb.name || pa.locals.size() != pb.locals.size()) return false;
		for (std::size_t j = 0; j < pa.locals.size(); j++)
			if (pa.locals[j].name != pb.locals[j].name || pa.locals[j].kind != pb.locals[j].kind) return false;
		if ((pa.body == nullptr) != (pb.body == nullptr)) return false;
		if (pa.body && !equal(*pa.body, *pb.body)) return false;
	}
	return true;
}

std::unique_ptr<Stmt> clone(const Stmt& s) {
	auto out = std::make_unique<Stmt>();
	out->kind = s.kind;
	out->com = s.com;
	for (const auto& c : s.children) out->children.push_back(clone(*c));
	return out;
}

Program clone(const Program& p) {
	Program out;
	out.shared = p.shared;
	for (const auto& proc : p.procs) {
		Procedure q;
		q.name = proc.name;
		q.locals = proc.locals;
		q.body = proc.body ? clone(*proc.body) : nullptr;
		out.procs.push_back(std::move(q));
	}
	return out;
}

std::size_t node_count(const Stmt& s) {
	std::size_t n = 1;
	for (const auto& c : s.children) n += node_count(*c);
	return n;
}

std::size_t node_count(const Program& p) {
	std::size_t n = 0;
	for (const auto& proc : p.procs)
		if (proc.body) n += node_count(*proc.body);
	return n;
}

}  // namespace smrtc
