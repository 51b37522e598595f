#include "instrument.hpp"

#include <set>

namespace smrtc {

namespace {

const std::string RETIRE_PTR = "retire_ptr";
const std::string RETIRE_FLAG = "retire_flag";

struct Translator {
	const std::set<std::string>* angels = nullptr;
	int next_id = 0;

	Command cmd(CmdKind k, SourceLoc loc) {
		Command c;
		c.kind = k;
		c.loc = loc;
		c.id = next_id++;
		return c;
	}
	std::unique_ptr<Stmt> skip(SourceLoc loc) { return Stmt::mk_com(cmd(CmdKind::Skip, loc)); }

	std::unique_ptr<Stmt> seq(std::vector<std::unique_ptr<Stmt>> kids) {
		return Stmt::mk(Stmt::Seq, std::move(kids));
	}

	std::unique_ptr<Stmt> choice2(std::unique_ptr<Stmt> a, std::unique_ptr<Stmt> b) {
		std::vector<std::unique_ptr<Stmt>> kids;
		kids.push_back(std::move(a));
		kids.push_back(std::move(b));
		return Stmt::mk(Stmt::Choice, std::move(kids));
	}

	Command set_flag(const std::string& var, bool value, SourceLoc loc) {
		Command c = cmd(CmdKind::DataOp, loc);
		c.dst = var;
		c.op = value ? "true" : "false";
		return c;
	}

	std::unique_ptr<Stmt> translate_com(const Command& c) {
		SourceLoc loc = c.loc;
		switch (c.kind) {
			case CmdKind::Enter: {
				if (c.func != "retire") return skip(loc);
				// skip (+) { retire_ptr := q; retire_flag := true }
				std::string q;
				for (const auto& a : c.args)
					if (a.kind == EnterArg::Ptr) { q = a.name; break; }
				if (q.empty()) return skip(loc);
				Command store = cmd(CmdKind::PtrAssign, loc);
				store.dst = RETIRE_PTR;
				store.src = q;
				std::vector<std::unique_ptr<Stmt>> arm;
				arm.push_back(Stmt::mk_com(std::move(store)));
				arm.push_back(Stmt::mk_com(set_flag(RETIRE_FLAG, true, loc)));
				return choice2(skip(loc), seq(std::move(arm)));
			}
			case CmdKind::Exit:
				return skip(loc);
			case CmdKind::InvEq: {
				Command a = cmd(CmdKind::Assert, loc);
				a.cond = Cond::single(Atom{Atom::PtrEq, c.dst, c.src_null ? NULL_NAME : c.src});
				return Stmt::mk_com(std::move(a));
			}
			case CmdKind::InvActive: {
				if (!angels->count(c.dst)) {
					// assert(!retire_flag || retire_ptr != p)
					Command a = cmd(CmdKind::Assert, loc);
					a.cond.shape = Cond::Or;
					a.cond.atoms.push_back(Atom{Atom::DataFalsy, RETIRE_FLAG, ""});
					a.cond.atoms.push_back(Atom{Atom::PtrNeq, RETIRE_PTR, c.dst});
					return Stmt::mk_com(std::move(a));
				}
				// skip (+) { assume(retire_flag && retire_ptr == r); assert(!included_r); failed_r := true }
				Command asm_ = cmd(CmdKind::Assume, loc);
				asm_.cond.shape = Cond::And;
				asm_.cond.atoms.push_back(Atom{Atom::DataTruthy, RETIRE_FLAG, ""});
				asm_.cond.atoms.push_back(Atom{Atom::PtrEq, RETIRE_PTR, c.dst});
				Command ast = cmd(CmdKind::Assert, loc);
				ast.cond = Cond::single(Atom{Atom::DataFalsy, "included_" + c.dst, ""});
				std::vector<std::unique_ptr<Stmt>> arm;
				arm.push_back(Stmt::mk_com(std::move(asm_)));
				arm.push_back(Stmt::mk_com(std::move(ast)));
				arm.push_back(Stmt::mk_com(set_flag("failed_" + c.dst, true, loc)));
				return choice2(skip(loc), seq(std::move(arm)));
			}
			case CmdKind::InvAngel: {
				// havoc(r); included_r := false; failed_r := false
				Command h = cmd(CmdKind::Havoc, loc);
				h.dst = c.dst;
				std::vector<std::unique_ptr<Stmt>> kids;
				kids.push_back(Stmt::mk_com(std::move(h)));
				kids.push_back(Stmt::mk_com(set_flag("included_" + c.dst, false, loc)));
				kids.push_back(Stmt::mk_com(set_flag("failed_" + c.dst, false, loc)));
				return seq(std::move(kids));
			}
			case CmdKind::InvMember: {
				// skip (+) { assume(q == r); assert(!failed_r); included_r := true }
				Command asm_ = cmd(CmdKind::Assume, loc);
				asm_.cond = Cond::single(Atom{Atom::PtrEq, c.dst, c.src});
				Command ast = cmd(CmdKind::Assert, loc);
				ast.cond = Cond::single(Atom{Atom::DataFalsy, "failed_" + c.src, ""});
				std::vector<std::unique_ptr<Stmt>> arm;
				arm.push_back(Stmt::mk_com(std::move(asm_)));
				arm.push_back(Stmt::mk_com(std::move(ast)));
				arm.push_back(Stmt::mk_com(set_flag("included_" + c.src, true, loc)));
				return choice2(skip(loc), seq(std::move(arm)));
			}
			default: {
				Command copy = c;
				copy.id = next_id++;
				return Stmt::mk_com(std::move(copy));
			}
		}
	}

	std::unique_ptr<Stmt> translate(const Stmt& s) {
		if (s.kind == Stmt::Com) return translate_com(s.com);
		std::vector<std::unique_ptr<Stmt>> kids;
		for (const auto& k : s.children) kids.push_back(translate(*k));
		return Stmt::mk(s.kind, std::move(kids));
	}
};

bool needs_retire_ghosts(const Program& prog) {
	bool found = false;
	for_each_command(prog, [&](const Command& c) {
		if (c.kind == CmdKind::Enter && c.func == "retire") found = true;
		if (c.kind == CmdKind::InvActive) found = true;
	});
	return found;
}

}  // namespace

Program instrument(const Program& prog) {
	Program out;
	out.shared = prog.shared;
	bool ghosts = needs_retire_ghosts(prog);
	if (ghosts) {
		out.shared.push_back({RETIRE_PTR, VarKind::SharedPtr});
		out.shared.push_back({RETIRE_FLAG, VarKind::SharedData});
	}
	for (const auto& proc : prog.procs) {
		Procedure q;
		q.name = proc.name;
		std::set<std::string> angels;
		for (const auto& v : proc.locals) {
			if (v.kind == VarKind::Angel) {
				angels.insert(v.name);
				q.locals.push_back({v.name, VarKind::LocalPtr});  // angels become ordinary pointers
				q.locals.push_back({"included_" + v.name, VarKind::LocalData});
				q.locals.push_back({"failed_" + v.name, VarKind::LocalData});
			} else {
				q.locals.push_back(v);
			}
		}
		Translator tr;
		tr.angels = &angels;
		q.body = proc.body ? tr.translate(*proc.body) : nullptr;
		out.procs.push_back(std::move(q));
	}
	return out;
}

double size_ratio(const Program& prog) {
	std::size_t before = node_count(prog);
	std::size_t after = node_count(instrument(prog));
	return before == 0 ? 1.0 : static_cast<double>(after) / static_cast<double>(before);
}

}  // namespace smrtc
