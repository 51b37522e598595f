#include "parser.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace smrtc {

namespace {

struct Token {
	enum Kind { Ident, Int, Punct, End } kind = End;
	std::string text;
	int value = 0;
	SourceLoc loc;
};

struct Lexer {
	const std::string& src;
	std::size_t pos = 0;
	int line = 1, col = 1;

	explicit Lexer(const std::string& s) : src(s) {}

	void advance() {
		if (src[pos] == '\n') { line++; col = 1; } else { col++; }
		pos++;
	}

	void skip_ws() {
		while (pos < src.size()) {
			if (isspace(static_cast<unsigned char>(src[pos]))) {
				advance();
			} else if (src[pos] == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
				while (pos < src.size() && src[pos] != '\n') advance();
			} else {
				break;
			}
		}
	}

	Token next() {
		skip_ws();
		Token t;
		t.loc = SourceLoc{line, col};
		if (pos >= src.size()) return t;
		char c = src[pos];
		if (isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
			t.kind = Token::Ident;
			while (pos < src.size()) {
				char d = src[pos];
				if (isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '@') {
					t.text += d;
					advance();
				} else {
					break;
				}
			}
			return t;
		}
		if (isdigit(static_cast<unsigned char>(c))) {
			t.kind = Token::Int;
			while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos]))) {
				t.text += src[pos];
				advance();
			}
			t.value = std::stoi(t.text);
			return t;
		}
		t.kind = Token::Punct;
		auto two = src.substr(pos, 2);
		if (two == "==" || two == "!=" || two == "->" || two == "&&" || two == "||") {
			t.text = two;
			advance();
			advance();
			return t;
		}
		t.text = std::string(1, c);
		advance();
		return t;
	}
};

struct Parser {
	Lexer lx;
	Token tok;
	Program prog;
	Procedure* cur_proc = nullptr;
	int next_cmd_id = 0;
	bool in_atomic = false;

	explicit Parser(const std::string& s) : lx(s) { tok = lx.next(); }

	[[noreturn]] void fail(const std::string& msg) { throw ParseError(tok.loc, msg); }

	void bump() { tok = lx.next(); }

	bool at(const std::string& s) const { return tok.text == s && tok.kind != Token::End; }

	void expect(const std::string& s) {
		if (!at(s)) fail("expected '" + s + "', found '" + (tok.kind == Token::End ? "<eof>" : tok.text) + "'");
		bump();
	}

	std::string ident() {
		if (tok.kind != Token::Ident) fail("expected identifier");
		auto s = tok.text;
		bump();
		return s;
	}

	const VarDecl* lookup(const std::string& name) const {
		if (cur_proc)
			for (const auto& v : cur_proc->locals)
				if (v.name == name) return &v;
		for (const auto& v : prog.shared)
			if (v.name == name) return &v;
		return nullptr;
	}

	const VarDecl& var(const std::string& name, SourceLoc at) {
		const VarDecl* d = lookup(name);
		if (!d) throw ParseError(at, "undeclared variable '" + name + "'");
		return *d;
	}

	bool is_ptr(const VarDecl& d) const { return d.kind == VarKind::SharedPtr || d.kind == VarKind::LocalPtr; }
	bool is_data(const VarDecl& d) const { return d.kind == VarKind::SharedData || d.kind == VarKind::LocalData; }

	std::string ptr_var(SourceLoc at, const std::string& name) {
		const auto& d = var(name, at);
		if (!is_ptr(d)) throw ParseError(at, "'" + name + "' is not a pointer variable");
		return name;
	}

	std::string data_var(SourceLoc at, const std::string& name) {
		const auto& d = var(name, at);
		if (!is_data(d)) throw ParseError(at, "'" + name + "' is not a data variable");
		return name;
	}

	std::string angel_var(SourceLoc at, const std::string& name) {
		const auto& d = var(name, at);
		if (d.kind != VarKind::Angel) throw ParseError(at, "'" + name + "' is not an angel");
		return name;
	}

	void parse_struct() {
		expect("struct");
		ident();  // struct name, only one record type exists
		expect("{");
		bool saw_data = false, saw_next = false;
		while (!at("}")) {
			auto at_loc = tok.loc;
			auto sel = ident();
			expect(";");
			if (sel == "data" && !saw_data) saw_data = true;
			else if (sel == "next" && !saw_next) saw_next = true;
			else throw ParseError(at_loc, "only selectors 'data' and 'next' are supported");
		}
		expect("}");
	}

	void parse_shared() {
		expect("shared");
		VarKind kind = VarKind::SharedPtr;
		if (at("data")) {
			bump();
			kind = VarKind::SharedData;
		} else if (at("angel")) {
			fail("angels must be local");
		}
		while (true) {
			auto at_loc = tok.loc;
			auto name = ident();
			if (name == NULL_NAME) throw ParseError(at_loc, "'null' is reserved");
			if (lookup(name)) throw ParseError(at_loc, "duplicate variable '" + name + "'");
			prog.shared.push_back({name, kind});
			if (at(",")) { bump(); continue; }
			break;
		}
		expect(";");
	}

	Atom parse_atom() {
		auto at_loc = tok.loc;
		if (at("!")) {
			bump();
			auto name = ident();
			return Atom{Atom::DataFalsy, data_var(at_loc, name), ""};
		}
		auto name = ident();
		if (at("==") || at("!=")) {
			bool eq = at("==");
			bump();
			auto rhs_loc = tok.loc;
			auto rhs = ident();
			ptr_var(at_loc, name);
			if (rhs != NULL_NAME) ptr_var(rhs_loc, rhs);
			return Atom{eq ? Atom::PtrEq : Atom::PtrNeq, name, rhs};
		}
		return Atom{Atom::DataTruthy, data_var(at_loc, name), ""};
	}

	Cond parse_cond() {
		if (at("*")) {
			bump();
			return Cond::star();
		}
		if (at("true")) {
			bump();
			return Cond::mk_true();
		}
		Cond c = Cond::single(parse_atom());
		while (at("&&") || at("||")) {
			bool conj = at("&&");
			bump();
			if (c.shape == Cond::Single) c.shape = conj ? Cond::And : Cond::Or;
			else if ((c.shape == Cond::And) != conj) fail("mixed '&&' and '||' are not supported");
			c.atoms.push_back(parse_atom());
		}
		return c;
	}

	Command mk_cmd(CmdKind k, SourceLoc at) {
		Command c;
		c.kind = k;
		c.loc = at;
		c.id = next_cmd_id++;
		return c;
	}

	std::unique_ptr<Stmt> parse_block() {
		expect("{");
		std::vector<std::unique_ptr<Stmt>> kids;
		while (!at("}")) kids.push_back(parse_stmt());
		expect("}");
		if (kids.empty()) fail("empty block");
		if (kids.size() == 1) return std::move(kids[0]);
		return Stmt::mk(Stmt::Seq, std::move(kids));
	}

	std::unique_ptr<Stmt> parse_stmt() {
		auto at_loc = tok.loc;
		if (at("skip")) {
			bump();
			expect(";");
			return Stmt::mk_com(mk_cmd(CmdKind::Skip, at_loc));
		}
		if (at("atomic")) {
			bump();
			if (in_atomic) throw ParseError(at_loc, "nested atomic blocks are not supported");
			in_atomic = true;
			auto body = parse_block();
			in_atomic = false;
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(std::move(body));
			return Stmt::mk(Stmt::Atomic, std::move(kid));
		}
		if (at("choose")) {
			bump();
			std::vector<std::unique_ptr<Stmt>> arms;
			arms.push_back(parse_block());
			if (!at("or")) fail("'choose' needs at least one 'or' branch");
			while (at("or")) {
				bump();
				arms.push_back(parse_block());
			}
			return Stmt::mk(Stmt::Choice, std::move(arms));
		}
		if (at("loop")) {
			bump();
			auto body = parse_block();
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(std::move(body));
			return Stmt::mk(Stmt::Loop, std::move(kid));
		}
		if (at("while")) {
			bump();
			expect("(");
			Cond cond = parse_cond();
			expect(")");
			auto body = parse_block();
			// while(c){s}  ~>  loop { assume(c); s }; assume(!c)
			// data/wildcard conditions become pure nondeterminism
			Cond enter_c = cond, exit_c = cond;
			if (cond.shape == Cond::Single && (cond.atoms[0].kind == Atom::PtrEq || cond.atoms[0].kind == Atom::PtrNeq)) {
				exit_c.atoms[0].kind = cond.atoms[0].kind == Atom::PtrEq ? Atom::PtrNeq : Atom::PtrEq;
			} else {
				enter_c = Cond::star();
				exit_c = Cond::star();
			}
			auto enter = mk_cmd(CmdKind::Assume, at_loc);
			enter.cond = enter_c;
			auto leave = mk_cmd(CmdKind::Assume, at_loc);
			leave.cond = exit_c;
			std::vector<std::unique_ptr<Stmt>> inner;
			inner.push_back(Stmt::mk_com(std::move(enter)));
			inner.push_back(std::move(body));
			std::vector<std::unique_ptr<Stmt>> loop_kid;
			loop_kid.push_back(Stmt::mk(Stmt::Seq, std::move(inner)));
			std::vector<std::unique_ptr<Stmt>> seq;
			seq.push_back(Stmt::mk(Stmt::Loop, std::move(loop_kid)));
			seq.push_back(Stmt::mk_com(std::move(leave)));
			return Stmt::mk(Stmt::Seq, std::move(seq));
		}
		if (at("assume") || at("assert")) {
			bool is_assume = at("assume");
			bump();
			expect("(");
			Cond c = parse_cond();
			expect(")");
			expect(";");
			auto cmd = mk_cmd(is_assume ? CmdKind::Assume : CmdKind::Assert, at_loc);
			cmd.cond = std::move(c);
			return Stmt::mk_com(std::move(cmd));
		}
		if (at("havoc")) {
			bump();
			expect("(");
			auto name_loc = tok.loc;
			auto name = ident();
			expect(")");
			expect(";");
			auto cmd = mk_cmd(CmdKind::Havoc, at_loc);
			cmd.dst = ptr_var(name_loc, name);
			return Stmt::mk_com(std::move(cmd));
		}
		if (at("enter")) {
			bump();
			auto cmd = mk_cmd(CmdKind::Enter, at_loc);
			cmd.func = ident();
			expect("(");
			while (!at(")")) {
				EnterArg arg;
				if (tok.kind == Token::Int) {
					arg.kind = EnterArg::Lit;
					arg.lit = tok.value;
					bump();
				} else {
					auto a_loc = tok.loc;
					auto name = ident();
					const auto& d = var(name, a_loc);
					if (is_ptr(d)) arg.kind = EnterArg::Ptr;
					else if (is_data(d)) arg.kind = EnterArg::Data;
					else throw ParseError(a_loc, "angels cannot be passed to SMR functions");
					arg.name = name;
				}
				cmd.args.push_back(arg);
				if (at(",")) bump();
				else break;
			}
			expect(")");
			expect(";");
			return Stmt::mk_com(std::move(cmd));
		}
		if (at("exit")) {
			bump();
			auto cmd = mk_cmd(CmdKind::Exit, at_loc);
			cmd.func = ident();
			expect(";");
			return Stmt::mk_com(std::move(cmd));
		}
		if (at("@inv")) {
			bump();
			if (at("angel")) {
				bump();
				auto a_loc = tok.loc;
				auto name = ident();
				expect(";");
				auto cmd = mk_cmd(CmdKind::InvAngel, at_loc);
				cmd.dst = angel_var(a_loc, name);
				return Stmt::mk_com(std::move(cmd));
			}
			if (at("active")) {
				bump();
				expect("(");
				auto a_loc = tok.loc;
				auto name = ident();
				expect(")");
				expect(";");
				const auto& d = var(name, a_loc);
				if (!is_ptr(d) && d.kind != VarKind::Angel)
					throw ParseError(a_loc, "active() takes a pointer or an angel");
				auto cmd = mk_cmd(CmdKind::InvActive, at_loc);
				cmd.dst = name;
				return Stmt::mk_com(std::move(cmd));
			}
			auto a_loc = tok.loc;
			auto lhs = ident();
			if (at("in")) {
				bump();
				auto r_loc = tok.loc;
				auto rhs = ident();
				expect(";");
				auto cmd = mk_cmd(CmdKind::InvMember, at_loc);
				cmd.dst = ptr_var(a_loc, lhs);
				cmd.src = angel_var(r_loc, rhs);
				return Stmt::mk_com(std::move(cmd));
			}
			expect("==");
			auto r_loc = tok.loc;
			auto rhs = ident();
			expect(";");
			auto cmd = mk_cmd(CmdKind::InvEq, at_loc);
			cmd.dst = ptr_var(a_loc, lhs);
			if (rhs == NULL_NAME) cmd.src_null = true;
			else cmd.src = ptr_var(r_loc, rhs);
			return Stmt::mk_com(std::move(cmd));
		}

		// assignments
		auto lhs_loc = tok.loc;
		auto lhs = ident();
		if (at("->")) {
			bump();
			auto sel = ident();
			expect("=");
			ptr_var(lhs_loc, lhs);
			if (sel == "next") {
				auto cmd = mk_cmd(CmdKind::PtrStore, lhs_loc);
				cmd.dst = lhs;
				auto r_loc = tok.loc;
				auto rhs = ident();
				if (rhs == NULL_NAME) cmd.src_null = true;
				else cmd.src = ptr_var(r_loc, rhs);
				expect(";");
				return Stmt::mk_com(std::move(cmd));
			}
			if (sel == "data") {
				auto cmd = mk_cmd(CmdKind::DataStore, lhs_loc);
				cmd.dst = lhs;
				auto r_loc = tok.loc;
				cmd.src = data_var(r_loc, ident());
				expect(";");
				return Stmt::mk_com(std::move(cmd));
			}
			throw ParseError(lhs_loc, "unknown selector '" + sel + "'");
		}
		expect("=");
		const auto& d = var(lhs, lhs_loc);
		if (is_ptr(d)) {
			if (at("malloc")) {
				bump();
				expect(";");
				auto cmd = mk_cmd(CmdKind::Malloc, lhs_loc);
				cmd.dst = lhs;
				return Stmt::mk_com(std::move(cmd));
			}
			auto r_loc = tok.loc;
			auto rhs = ident();
			if (at("->")) {
				bump();
				auto sel = ident();
				if (sel != "next") throw ParseError(r_loc, "pointer loads read '->next'");
				expect(";");
				auto cmd = mk_cmd(CmdKind::PtrLoad, lhs_loc);
				cmd.dst = lhs;
				cmd.src = ptr_var(r_loc, rhs);
				return Stmt::mk_com(std::move(cmd));
			}
			expect(";");
			auto cmd = mk_cmd(CmdKind::PtrAssign, lhs_loc);
			cmd.dst = lhs;
			if (rhs == NULL_NAME) cmd.src_null = true;
			else cmd.src = ptr_var(r_loc, rhs);
			return Stmt::mk_com(std::move(cmd));
		}
		if (is_data(d)) {
			if (at("*")) {
				bump();
				expect(";");
				auto cmd = mk_cmd(CmdKind::DataOp, lhs_loc);
				cmd.dst = lhs;
				cmd.op = "nondet";
				return Stmt::mk_com(std::move(cmd));
			}
			if (tok.kind == Token::Int) {
				int v = tok.value;
				bump();
				expect(";");
				auto cmd = mk_cmd(CmdKind::DataOp, lhs_loc);
				cmd.dst = lhs;
				cmd.op = v == 0 ? "false" : "true";
				return Stmt::mk_com(std::move(cmd));
			}
			auto r_loc = tok.loc;
			auto rhs = ident();
			if (at("->")) {
				bump();
				auto sel = ident();
				if (sel != "data") throw ParseError(r_loc, "data loads read '->data'");
				expect(";");
				auto cmd = mk_cmd(CmdKind::DataLoad, lhs_loc);
				cmd.dst = lhs;
				cmd.src = ptr_var(r_loc, rhs);
				return Stmt::mk_com(std::move(cmd));
			}
			auto cmd = mk_cmd(CmdKind::DataOp, lhs_loc);
			cmd.dst = lhs;
			if (at("(")) {
				bump();
				cmd.op = rhs;
				while (!at(")")) {
					auto a_loc = tok.loc;
					EnterArg arg;
					arg.kind = EnterArg::Data;
					arg.name = data_var(a_loc, ident());
					cmd.args.push_back(arg);
					if (at(",")) bump();
					else break;
				}
				expect(")");
			} else if (rhs == "true" || rhs == "false") {
				cmd.op = rhs;
			} else {
				// plain data copy u = v is the unary identity op
				cmd.op = "id";
				EnterArg arg;
				arg.kind = EnterArg::Data;
				arg.name = data_var(r_loc, rhs);
				cmd.args.push_back(arg);
			}
			expect(";");
			return Stmt::mk_com(std::move(cmd));
		}
		throw ParseError(lhs_loc, "cannot assign to angel '" + lhs + "'");
	}

	void parse_proc() {
		expect("proc");
		auto name_loc = tok.loc;
		Procedure proc;
		proc.name = ident();
		if (prog.find_proc(proc.name)) throw ParseError(name_loc, "duplicate procedure '" + proc.name + "'");
		prog.procs.push_back(std::move(proc));
		cur_proc = &prog.procs.back();
		next_cmd_id = 0;
		expect("{");
		while (at("local") || at("data") || at("angel")) {
			VarKind kind = at("local") ? VarKind::LocalPtr : at("data") ? VarKind::LocalData : VarKind::Angel;
			bump();
			while (true) {
				auto a_loc = tok.loc;
				auto vn = ident();
				if (vn == NULL_NAME) throw ParseError(a_loc, "'null' is reserved");
				if (lookup(vn)) throw ParseError(a_loc, "duplicate variable '" + vn + "'");
				cur_proc->locals.push_back({vn, kind});
				if (at(",")) { bump(); continue; }
				break;
			}
			expect(";");
		}
		std::vector<std::unique_ptr<Stmt>> body;
		while (!at("}")) body.push_back(parse_stmt());
		expect("}");
		if (body.empty()) {
			cur_proc->body = Stmt::mk_com(Command{});  // empty body reads as skip
		} else if (body.size() == 1) {
			cur_proc->body = std::move(body[0]);
		} else {
			cur_proc->body = Stmt::mk(Stmt::Seq, std::move(body));
		}
		cur_proc = nullptr;
	}

	Program run() {
		while (tok.kind != Token::End) {
			if (at("struct")) parse_struct();
			else if (at("shared")) parse_shared();
			else if (at("proc")) parse_proc();
			else fail("expected 'struct', 'shared', or 'proc'");
		}
		return std::move(prog);
	}
};

// Domination of angel uses by their allocation: forward analysis over the
// statement tree tracking the definitely-allocated angels.
using AngelSet = std::set<std::string>;

void check_angel_use(const Command& c, const AngelSet& alloc) {
	std::string used;
	if (c.kind == CmdKind::InvMember) used = c.src;
	else if (c.kind == CmdKind::InvActive && !c.dst.empty()) used = c.dst;
	else return;
	if (used.empty()) return;
	if (c.kind == CmdKind::InvActive) return;  // resolved below by the caller
	if (!alloc.count(used))
		throw ParseError(c.loc, "angel '" + used + "' used before '@inv angel " + used + ";'");
}

AngelSet flow_angels(const Stmt& s, AngelSet in, const std::set<std::string>& angel_names) {
	switch (s.kind) {
		case Stmt::Com: {
			const auto& c = s.com;
			if (c.kind == CmdKind::InvMember && !in.count(c.src))
				throw ParseError(c.loc, "angel '" + c.src + "' used before its allocation");
			if (c.kind == CmdKind::InvActive && angel_names.count(c.dst) && !in.count(c.dst))
				throw ParseError(c.loc, "angel '" + c.dst + "' used before its allocation");
			if (c.kind == CmdKind::InvAngel) in.insert(c.dst);
			return in;
		}
		case Stmt::Seq:
			for (const auto& k : s.children) in = flow_angels(*k, std::move(in), angel_names);
			return in;
		case Stmt::Choice: {
			AngelSet out;
			bool first = true;
			for (const auto& k : s.children) {
				AngelSet one = flow_angels(*k, in, angel_names);
				if (first) { out = std::move(one); first = false; }
				else {
					AngelSet merged;
					std::set_intersection(out.begin(), out.end(), one.begin(), one.end(),
					                      std::inserter(merged, merged.begin()));
					out = std::move(merged);
				}
			}
			return out;
		}
		case Stmt::Loop:
			flow_angels(*s.children[0], in, angel_names);  // body checked from the loop head
			return in;  // zero iterations possible
		case Stmt::Atomic:
			return flow_angels(*s.children[0], std::move(in), angel_names);
	}
	return in;
}

}  // namespace

Program parse_program(const std::string& text) {
	Parser p(text);
	Program prog = p.run();
	for (const auto& proc : prog.procs) {
		std::set<std::string> angel_names;
		for (const auto& v : proc.locals)
			if (v.kind == VarKind::Angel) angel_names.insert(v.name);
		if (proc.body) flow_angels(*proc.body, {}, angel_names);
	}
	return prog;
}

// ------------------------------------------------------------------ printing

namespace {

struct Printer {
	std::ostringstream out;
	int depth = 0;

	void indent() {
		for (int i = 0; i < depth; i++) out << "\t";
	}

	static std::string pexpr(const std::string& var, bool is_null) {
		return is_null ? NULL_NAME : var;
	}

	void print_cond(const Cond& c) {
		if (c.shape == Cond::True) { out << "true"; return; }
		if (c.shape == Cond::Star) { out << "*"; return; }
		const char* sep = c.shape == Cond::And ? " && " : " || ";
		for (std::size_t i = 0; i < c.atoms.size(); i++) {
			if (i) out << sep;
			const auto& a = c.atoms[i];
			switch (a.kind) {
				case Atom::PtrEq: out << a.lhs << " == " << a.rhs; break;
				case Atom::PtrNeq: out << a.lhs << " != " << a.rhs; break;
				case Atom::DataTruthy: out << a.lhs; break;
				case Atom::DataFalsy: out << "!" << a.lhs; break;
			}
		}
	}

	void print_com(const Command& c) {
		indent();
		switch (c.kind) {
			case CmdKind::Skip: out << "skip;"; break;
			case CmdKind::PtrAssign: out << c.dst << " = " << pexpr(c.src, c.src_null) << ";"; break;
			case CmdKind::PtrLoad: out << c.dst << " = " << c.src << "->next;"; break;
			case CmdKind::PtrStore: out << c.dst << "->next = " << pexpr(c.src, c.src_null) << ";"; break;
			case CmdKind::DataLoad: out << c.dst << " = " << c.src << "->data;"; break;
			case CmdKind::DataStore: out << c.dst << "->data = " << c.src << ";"; break;
			case CmdKind::DataOp:
				out << c.dst << " = ";
				if (c.op == "nondet") out << "*;";
				else if (c.op == "true" || c.op == "false") out << c.op << ";";
				else if (c.op == "id") out << c.args[0].name << ";";
				else {
					out << c.op << "(";
					for (std::size_t i = 0; i < c.args.size(); i++) {
						if (i) out << ", ";
						out << c.args[i].name;
					}
					out << ");";
				}
				break;
			case CmdKind::Malloc: out << c.dst << " = malloc;"; break;
			case CmdKind::Assume:
				out << "assume(";
				print_cond(c.cond);
				out << ");";
				break;
			case CmdKind::Assert:
				out << "assert(";
				print_cond(c.cond);
				out << ");";
				break;
			case CmdKind::Havoc: out << "havoc(" << c.dst << ");"; break;
			case CmdKind::Enter:
				out << "enter " << c.func << "(";
				for (std::size_t i = 0; i < c.args.size(); i++) {
					if (i) out << ", ";
					if (c.args[i].kind == EnterArg::Lit) out << c.args[i].lit;
					else out << c.args[i].name;
				}
				out << ");";
				break;
			case CmdKind::Exit: out << "exit " << c.func << ";"; break;
			case CmdKind::InvAngel: out << "@inv angel " << c.dst << ";"; break;
			case CmdKind::InvEq: out << "@inv " << c.dst << " == " << pexpr(c.src, c.src_null) << ";"; break;
			case CmdKind::InvMember: out << "@inv " << c.dst << " in " << c.src << ";"; break;
			case CmdKind::InvActive: out << "@inv active(" << c.dst << ");"; break;
		}
		out << "\n";
	}

	void print_block(const Stmt& s) {
		out << "{\n";
		depth++;
		print_seq(s);
		depth--;
		indent();
		out << "}";
	}

	void print_seq(const Stmt& s) {
		if (s.kind == Stmt::Seq) {
			for (const auto& k : s.children) print_stmt(*k);
		} else {
			print_stmt(s);
		}
	}

	void print_stmt(const Stmt& s) {
		switch (s.kind) {
			case Stmt::Com: print_com(s.com); break;
			case Stmt::Seq:
				for (const auto& k : s.children) print_stmt(*k);
				break;
			case Stmt::Choice:
				indent();
				out << "choose ";
				print_block(*s.children[0]);
				for (std::size_t i = 1; i < s.children.size(); i++) {
					out << " or ";
					print_block(*s.children[i]);
				}
				out << "\n";
				break;
			case Stmt::Loop:
				indent();
				out << "loop ";
				print_block(*s.children[0]);
				out << "\n";
				break;
			case Stmt::Atomic:
				indent();
				out << "atomic ";
				print_block(*s.children[0]);
				out << "\n";
				break;
		}
	}
};

}  // namespace

std::string pretty_print(const Program& prog) {
	Printer pr;
	pr.out << "struct Node { data; next; }\n";
	std::vector<std::string> sp, sd;
	for (const auto& v : prog.shared)
		(v.kind == VarKind::SharedPtr ? sp : sd).push_back(v.name);
	auto emit_decl = [&](const char* kw, const std::vector<std::string>& names) {
		if (names.empty()) return;
		pr.out << kw << " ";
		for (std::size_t i = 0; i < names.size(); i++) {
			if (i) pr.out << ", ";
			pr.out << names[i];
		}
		pr.out << ";\n";
	};
	emit_decl("shared", sp);
	emit_decl("shared data", sd);
	for (const auto& proc : prog.procs) {
		pr.out << "\nproc " << proc.name << " {\n";
		pr.depth = 1;
		std::vector<std::string> lp, ld, la;
		for (const auto& v : proc.locals) {
			if (v.kind == VarKind::LocalPtr) lp.push_back(v.name);
			else if (v.kind == VarKind::LocalData) ld.push_back(v.name);
			else la.push_back(v.name);
		}
		auto emit_local = [&](const char* kw, const std::vector<std::string>& names) {
			if (names.empty()) return;
			pr.indent();
			pr.out << kw << " ";
			for (std::size_t i = 0; i < names.size(); i++) {
				if (i) pr.out << ", ";
				pr.out << names[i];
			}
			pr.out << ";\n";
		};
		emit_local("local", lp);
		emit_local("data", ld);
		emit_local("angel", la);
		if (proc.body) pr.print_seq(*proc.body);
		else {
			pr.indent();
			pr.out << "skip;\n";
		}
		pr.depth = 0;
		pr.out << "}\n";
	}
	return pr.out.str();
}

// -------------------------------------------------------------- preprocessing

namespace {

bool is_skip(const Stmt& s) { return s.kind == Stmt::Com && s.com.kind == CmdKind::Skip; }

// Removes all skip commands (they are assume(true) and carry no meaning).
std::unique_ptr<Stmt> strip_skips(const Stmt& s) {
	switch (s.kind) {
		case Stmt::Com:
			if (is_skip(s)) return nullptr;
			return clone(s);
		case Stmt::Seq: {
			std::vector<std::unique_ptr<Stmt>> kids;
			for (const auto& k : s.children) {
				auto stripped = strip_skips(*k);
				if (stripped) kids.push_back(std::move(stripped));
			}
			if (kids.empty()) return nullptr;
			if (kids.size() == 1) return std::move(kids[0]);
			return Stmt::mk(Stmt::Seq, std::move(kids));
		}
		case Stmt::Choice: {
			std::vector<std::unique_ptr<Stmt>> kids;
			for (const auto& k : s.children) {
				auto stripped = strip_skips(*k);
				if (!stripped) stripped = Stmt::mk_com(Command{});  // keep arm shape
				kids.push_back(std::move(stripped));
			}
			return Stmt::mk(Stmt::Choice, std::move(kids));
		}
		case Stmt::Loop:
		case Stmt::Atomic: {
			auto body = strip_skips(*s.children[0]);
			if (!body) {
				if (s.kind == Stmt::Atomic) return nullptr;
				body = Stmt::mk_com(Command{});
			}
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(std::move(body));
			return Stmt::mk(s.kind, std::move(kid));
		}
	}
	return nullptr;
}

std::unique_ptr<Stmt> pad(std::unique_ptr<Stmt> core) {
	std::vector<std::unique_ptr<Stmt>> kids;
	kids.push_back(Stmt::mk_com(Command{}));
	kids.push_back(std::move(core));
	kids.push_back(Stmt::mk_com(Command{}));
	return Stmt::mk(Stmt::Seq, std::move(kids));
}

std::unique_ptr<Stmt> wrap(const Stmt& s, bool in_atomic) {
	switch (s.kind) {
		case Stmt::Com: {
			auto core = clone(s);
			if (in_atomic) return pad(std::move(core));
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(pad(std::move(core)));
			return Stmt::mk(Stmt::Atomic, std::move(kid));
		}
		case Stmt::Seq: {
			std::vector<std::unique_ptr<Stmt>> kids;
			for (const auto& k : s.children) kids.push_back(wrap(*k, in_atomic));
			return Stmt::mk(Stmt::Seq, std::move(kids));
		}
		case Stmt::Choice: {
			std::vector<std::unique_ptr<Stmt>> kids;
			for (const auto& k : s.children) kids.push_back(wrap(*k, in_atomic));
			return Stmt::mk(Stmt::Choice, std::move(kids));
		}
		case Stmt::Loop: {
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(wrap(*s.children[0], in_atomic));
			return Stmt::mk(Stmt::Loop, std::move(kid));
		}
		case Stmt::Atomic: {
			std::vector<std::unique_ptr<Stmt>> kid;
			kid.push_back(wrap(*s.children[0], true));
			return Stmt::mk(Stmt::Atomic, std::move(kid));
		}
	}
	return nullptr;
}

}  // namespace

Program preprocess(const Program& prog) {
	Program out;
	out.shared = prog.shared;
	for (const auto& proc : prog.procs) {
		Procedure q;
		q.name = proc.name;
		q.locals = proc.locals;
		std::unique_ptr<Stmt> body = proc.body ? strip_skips(*proc.body) : nullptr;
		if (!body) body = Stmt::mk_com(Command{});
		q.body = wrap(*body, false);
		out.procs.push_back(std::move(q));
	}
	return out;
}

namespace {

void rename_in(Command& c, const std::set<std::string>& locals, const std::string& suffix) {
	auto ren = [&](std::string& name) {
		if (!name.empty() && locals.count(name)) name += suffix;
	};
	ren(c.dst);
	ren(c.src);
	for (auto& a : c.args)
		if (a.kind != EnterArg::Lit) ren(a.name);
	for (auto& a : c.cond.atoms) {
		ren(a.lhs);
		if (a.rhs != NULL_NAME) ren(a.rhs);
	}
}

void rename_stmt(Stmt& s, const std::set<std::string>& locals, const std::string& suffix) {
	if (s.kind == Stmt::Com) rename_in(s.com, locals, suffix);
	for (auto& k : s.children) rename_stmt(*k, locals, suffix);
}

}  // namespace

Program thread_index(const Program& prog, int t) {
	Program out = clone(prog);
	std::string suffix = "_" + std::to_string(t);
	for (auto& proc : out.procs) {
		std::set<std::string> locals;
		for (auto& v : proc.locals) locals.insert(v.name);
		for (auto& v : proc.locals) v.name += suffix;
		if (proc.body) rename_stmt(*proc.body, locals, suffix);
	}
	return out;
}

std::vector<std::string> command_multiset(const Program& prog) {
	std::vector<std::string> out;
	for_each_command(prog, [&](const Command& c) {
		if (c.kind == CmdKind::Skip) return;
		Printer pr;
		pr.print_com(c);
		out.push_back(pr.out.str());
	});
	std::sort(out.begin(), out.end());
	return out;
}

}  // namespace smrtc
