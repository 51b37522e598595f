#include "automaton.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "lexutil.hpp"

namespace smrtc {

// ------------------------------------------------------------ satisfiability
//
// Guards relate event parameters to observer variables or literals; they never
// relate two parameters or two variables. Satisfiability over the unbounded
// value domain is decided by enumerating small models: terms of one type can
// realize every equality partition using as many values as there are terms,
// plus the pinned literal values for data.

namespace {

struct SatSpace {
	const SmrAutomaton& autom;
	const EventSig& sig;
	// term order: params [0..n), then vars [n..n+m)
	int n_params, n_vars;
	std::vector<int> lits;  // distinct data literals occurring in the formulas

	SatSpace(const SmrAutomaton& a, int event) : autom(a), sig(a.events[event]) {
		n_params = static_cast<int>(sig.params.size());
		n_vars = static_cast<int>(a.vars.size());
	}

	ParamType term_type(int t) const {
		return t < n_params ? sig.params[t] : autom.vars[t - n_params].type;
	}

	void collect_lits(const Guard& g) {
		if (g.kind == Guard::Lit && g.var < 0) {
			if (std::find(lits.begin(), lits.end(), g.lit) == lits.end()) lits.push_back(g.lit);
		}
		for (const auto& k : g.kids) collect_lits(k);
	}

	bool eval(const Guard& g, const std::vector<int>& val) const {
		switch (g.kind) {
			case Guard::True: return true;
			case Guard::Lit: {
				int lhs = val[g.param];
				int rhs = g.var >= 0 ? val[n_params + g.var] : g.lit;
				return g.eq ? lhs == rhs : lhs != rhs;
			}
			case Guard::And:
				for (const auto& k : g.kids)
					if (!eval(k, val)) return false;
				return true;
			case Guard::Or:
				for (const auto& k : g.kids)
					if (eval(k, val)) return true;
				return false;
			case Guard::Not:
				return !eval(g.kids[0], val);
		}
		return false;
	}

	// Enumerates assignments and calls pred; returns true if any satisfies it.
	template <typename Pred>
	bool exists(Pred&& pred) const {
		int n_terms = n_params + n_vars;
		std::vector<std::vector<int>> domains(n_terms);
		int thread_count = 0, addr_count = 0, data_count = 0;
		for (int t = 0; t < n_terms; t++) {
			switch (term_type(t)) {
				case ParamType::Thread: thread_count++; break;
				case ParamType::Address: addr_count++; break;
				case ParamType::Data: data_count++; break;
			}
		}
		for (int t = 0; t < n_terms; t++) {
			auto& dom = domains[t];
			switch (term_type(t)) {
				case ParamType::Thread:
					for (int v = 0; v < thread_count; v++) dom.push_back(v);
					break;
				case ParamType::Address:
					for (int v = 0; v < addr_count; v++) dom.push_back(100 + v);
					break;
				case ParamType::Data:
					dom = lits;
					for (int v = 0; v < data_count; v++) dom.push_back(10000 + v);
					break;
			}
		}
		std::vector<int> val(n_terms, 0);
		std::vector<std::size_t> idx(n_terms, 0);
		for (int t = 0; t < n_terms; t++) val[t] = domains[t][0];
		while (true) {
			if (pred(val)) return true;
			int t = 0;
			for (; t < n_terms; t++) {
				if (++idx[t] < domains[t].size()) {
					val[t] = domains[t][idx[t]];
					break;
				}
				idx[t] = 0;
				val[t] = domains[t][0];
			}
			if (t == n_terms) return false;
		}
	}
};

Guard constraints_guard(const SmrAutomaton& a, const EventSig& sig, const SatQuery& q) {
	std::vector<Guard> parts;
	for (std::size_t i = 0; i < q.constraints.size() && i < sig.params.size(); i++) {
		const auto& c = q.constraints[i];
		switch (c.kind) {
			case ParamConstraint::Free: break;
			case ParamConstraint::EqZt: parts.push_back(Guard::atom(static_cast<int>(i), true, a.zt)); break;
			case ParamConstraint::EqZa: parts.push_back(Guard::atom(static_cast<int>(i), true, a.za)); break;
			case ParamConstraint::EqLit: parts.push_back(Guard::atom(static_cast<int>(i), true, -1, c.lit)); break;
		}
	}
	if (q.thread_is_zt.has_value() && !sig.params.empty() && sig.params[0] == ParamType::Thread) {
		parts.push_back(Guard::atom(0, *q.thread_is_zt, a.zt));
	}
	if (parts.empty()) return Guard::mk_true();
	return Guard::mk(Guard::And, std::move(parts));
}

}  // namespace

bool satisfiable(const SatQuery& q, const Guard& guard) {
	SatSpace space(*q.autom, q.event);
	Guard cons = constraints_guard(*q.autom, space.sig, q);
	space.collect_lits(guard);
	space.collect_lits(cons);
	return space.exists([&](const std::vector<int>& val) {
		return space.eval(guard, val) && space.eval(cons, val);
	});
}

bool satisfiable_all_false(const SatQuery& q, const std::vector<const Guard*>& guards) {
	SatSpace space(*q.autom, q.event);
	Guard cons = constraints_guard(*q.autom, space.sig, q);
	for (const auto* g : guards) space.collect_lits(*g);
	space.collect_lits(cons);
	return space.exists([&](const std::vector<int>& val) {
		if (!space.eval(cons, val)) return false;
		for (const auto* g : guards)
			if (space.eval(*g, val)) return false;
		return true;
	});
}

// ------------------------------------------------------------------- parsing

namespace {

using lex::Token;

struct AutomParser {
	lex::Lexer lx;
	Token tok;
	SmrAutomaton out;

	explicit AutomParser(const std::string& s) : lx(s) { tok = lx.next(); }

	[[noreturn]] void fail(const std::string& msg) {
		throw AutomatonError("automaton parse error at " + std::to_string(tok.line) + ":" +
		                     std::to_string(tok.column) + ": " + msg);
	}
	void bump() { tok = lx.next(); }
	bool at(const std::string& s) const { return tok.kind != Token::End && tok.text == s; }
	void expect(const std::string& s) {
		if (!at(s)) fail("expected '" + s + "'");
		bump();
	}
	std::string ident() {
		if (tok.kind != Token::Ident) fail("expected identifier");
		auto s = tok.text;
		bump();
		return s;
	}

	int loc_index(const std::string& name) {
		for (std::size_t i = 0; i < out.loc_names.size(); i++)
			if (out.loc_names[i] == name) return static_cast<int>(i);
		fail("unknown location '" + name + "'");
	}

	int var_index(const std::string& name) {
		for (std::size_t i = 0; i < out.vars.size(); i++)
			if (out.vars[i].name == name) return static_cast<int>(i);
		return -1;
	}

	void parse_vars() {
		expect("vars");
		while (true) {
			auto name = ident();
			expect(":");
			auto ty = ident();
			ParamType t;
			if (ty == "thread") t = ParamType::Thread;
			else if (ty == "address") t = ParamType::Address;
			else fail("variable type must be 'thread' or 'address'");
			out.vars.push_back({name, t});
			if (at(",")) { bump(); continue; }
			break;
		}
		expect(";");
		for (std::size_t i = 0; i < out.vars.size(); i++) {
			if (out.vars[i].type == ParamType::Thread && out.zt < 0) out.zt = static_cast<int>(i);
			if (out.vars[i].type == ParamType::Address && out.za < 0) out.za = static_cast<int>(i);
		}
		if (out.zt < 0 || out.za < 0) fail("automaton needs a thread variable and an address variable");
	}

	EventSig parse_event_decl() {
		EventSig sig;
		if (at("enter")) sig.kind = EventKind::Enter;
		else if (at("exit")) sig.kind = EventKind::Exit;
		else if (at("free")) sig.kind = EventKind::Free;
		else fail("expected 'enter', 'exit', or 'free'");
		bump();
		if (sig.kind == EventKind::Free) sig.name = "free";
		else sig.name = ident();
		expect("(");
		std::size_t pos = 0;
		while (!at(")")) {
			ident();  // placeholder name
			ParamType t;
			if (sig.kind == EventKind::Free) t = ParamType::Address;
			else if (pos == 0) t = ParamType::Thread;
			else t = ParamType::Address;
			if (at(":")) {
				bump();
				auto ty = ident();
				if (ty == "thread") t = ParamType::Thread;
				else if (ty == "address") t = ParamType::Address;
				else if (ty == "data") t = ParamType::Data;
				else fail("unknown parameter type '" + ty + "'");
			}
			sig.params.push_back(t);
			pos++;
			if (at(",")) bump();
			else break;
		}
		expect(")");
		if (sig.kind == EventKind::Exit && sig.params.size() != 1) fail("exit events carry only the thread");
		if (sig.kind == EventKind::Free && sig.params.size() != 1) fail("free events carry only the address");
		if (sig.kind == EventKind::Enter && (sig.params.empty() || sig.params[0] != ParamType::Thread))
			fail("enter events carry the thread first");
		return sig;
	}

	void parse_transition(const std::string& src_name) {
		int src = loc_index(src_name);
		expect("->");
		int dst = loc_index(ident());
		expect("on");
		EventKind kind;
		if (at("enter")) kind = EventKind::Enter;
		else if (at("exit")) kind = EventKind::Exit;
		else if (at("free")) kind = EventKind::Free;
		else fail("expected event");
		bump();
		std::string fname = kind == EventKind::Free ? "free" : ident();
		int ev = out.find_event(fname, kind);
		if (ev < 0) fail("undeclared event '" + fname + "'");
		expect("(");
		std::vector<std::string> pnames;
		while (!at(")")) {
			pnames.push_back(ident());
			if (at(",")) bump();
			else break;
		}
		expect(")");
		if (pnames.size() != out.events[ev].params.size()) fail("event arity mismatch on '" + fname + "'");
		auto pidx = [&](const std::string& n) -> int {
			for (std::size_t i = 0; i < pnames.size(); i++)
				if (pnames[i] == n) return static_cast<int>(i);
			return -1;
		};
		Guard guard = Guard::mk_true();
		std::vector<Guard> atoms;
		if (at("when")) {
			bump();
			while (true) {
				auto lhs = ident();
				bool eq;
				if (at("==")) eq = true;
				else if (at("!=")) eq = false;
				else fail("expected '==' or '!='");
				bump();
				int p = pidx(lhs);
				if (p < 0) fail("guard must compare an event parameter; '" + lhs + "' is not one");
				if (tok.kind == Token::Int) {
					atoms.push_back(Guard::atom(p, eq, -1, tok.value));
					bump();
				} else {
					auto rhs = ident();
					if (pidx(rhs) >= 0) fail("guards cannot compare two parameters");
					int v = var_index(rhs);
					if (v < 0) fail("unknown variable '" + rhs + "' in guard");
					atoms.push_back(Guard::atom(p, eq, v));
				}
				if (at("&&")) { bump(); continue; }
				break;
			}
			guard = atoms.size() == 1 ? atoms[0] : Guard::mk(Guard::And, std::move(atoms));
		}
		expect(";");
		out.transitions.push_back({src, ev, std::move(guard), dst});
	}

	SmrAutomaton run() {
		expect("automaton");
		out.name = ident();
		expect("{");
		while (!at("}")) {
			if (at("assume")) {
				bump();
				expect("elision");
				expect(";");
				out.elision = true;
			} else if (at("vars")) {
				parse_vars();
			} else if (at("events")) {
				bump();
				while (true) {
					auto sig = parse_event_decl();
					if (out.find_event(sig.name, sig.kind) >= 0) fail("duplicate event '" + sig.name + "'");
					out.events.push_back(std::move(sig));
					if (at(",")) { bump(); continue; }
					break;
				}
				expect(";");
			} else if (at("call")) {
				bump();
				SafeCallRule rule;
				rule.func = ident();
				expect("requires");
				expect("valid");
				expect("(");
				while (!at(")")) {
					if (tok.kind != Token::Int) fail("expected argument position");
					rule.valid_positions.push_back(tok.value);
					bump();
					if (at(",")) bump();
					else break;
				}
				expect(")");
				expect(";");
				out.call_rules.push_back(std::move(rule));
			} else if (at("locations")) {
				bump();
				bool any_active = false;
				while (true) {
					auto name = ident();
					out.loc_names.push_back(name);
					out.accepting.push_back(false);
					out.active_marked.push_back(false);
					while (at("init") || at("accepting") || at("active")) {
						if (at("init")) out.initial = static_cast<int>(out.loc_names.size()) - 1;
						else if (at("accepting")) out.accepting.back() = true;
						else {
							out.active_marked.back() = true;
							any_active = true;
						}
						bump();
					}
					if (at(",")) { bump(); continue; }
					break;
				}
				expect(";");
				if (!any_active) out.active_marked.clear();
			} else {
				auto src = ident();
				parse_transition(src);
			}
		}
		expect("}");
		validate();
		return std::move(out);
	}

	void validate() {
		if (out.loc_names.empty()) fail("automaton needs locations");
		for (const auto& t : out.transitions) {
			if (out.accepting[t.dst] && out.events[t.event].kind != EventKind::Free)
				throw AutomatonError(out.name + ": accepting locations are reached only with free (Assumption violated)");
			if (out.accepting[t.src] && !out.accepting[t.dst])
				throw AutomatonError(out.name + ": accepting locations cannot be left");
		}
	}
};

}  // namespace

SmrAutomaton parse_automaton(const std::string& text) {
	AutomParser p(text);
	return p.run();
}

// A file may declare several automata; they are combined by product.
SmrAutomaton parse_automata_product(const std::string& text) {
	std::vector<std::size_t> starts;
	for (std::size_t pos = text.find("automaton"); pos != std::string::npos;
	     pos = text.find("automaton", pos + 1))
		starts.push_back(pos);
	if (starts.size() <= 1) return parse_automaton(text);
	std::optional<SmrAutomaton> acc;
	for (std::size_t i = 0; i < starts.size(); i++) {
		std::size_t to = i + 1 < starts.size() ? starts[i + 1] : text.size();
		SmrAutomaton one = parse_automaton(text.substr(starts[i], to - starts[i]));
		if (!acc) acc = std::move(one);
		else acc = product(*acc, one);
	}
	return std::move(*acc);
}

// ------------------------------------------------------------------- product

namespace {

Guard remap_vars(const Guard& g, const std::vector<int>& varmap) {
	Guard out = g;
	if (out.kind == Guard::Lit && out.var >= 0) out.var = varmap[out.var];
	for (auto& k : out.kids) k = remap_vars(k, varmap);
	return out;
}

}  // namespace

SmrAutomaton product(const SmrAutomaton& a, const SmrAutomaton& b) {
	SmrAutomaton out;
	out.name = a.name + "x" + b.name;
	out.elision = a.elision && b.elision;

	// identify zt/za, append the rest
	std::vector<int> amap(a.vars.size()), bmap(b.vars.size());
	out.vars.push_back(a.vars[a.zt]);
	out.vars.push_back(a.vars[a.za]);
	out.zt = 0;
	out.za = 1;
	auto add_vars = [&](const SmrAutomaton& o, std::vector<int>& map, const std::string& prefix) {
		for (std::size_t i = 0; i < o.vars.size(); i++) {
			if (static_cast<int>(i) == o.zt) map[i] = 0;
			else if (static_cast<int>(i) == o.za) map[i] = 1;
			else {
				out.vars.push_back({prefix + o.vars[i].name, o.vars[i].type});
				map[i] = static_cast<int>(out.vars.size()) - 1;
			}
		}
	};
	add_vars(a, amap, "");
	add_vars(b, bmap, b.name + ".");

	// alphabet union; arities of shared events must agree
	std::vector<int> aev(a.events.size(), -1), bev(b.events.size(), -1);
	for (std::size_t i = 0; i < a.events.size(); i++) {
		out.events.push_back(a.events[i]);
		aev[i] = static_cast<int>(i);
	}
	for (std::size_t i = 0; i < b.events.size(); i++) {
		int found = out.find_event(b.events[i].name, b.events[i].kind);
		if (found >= 0) {
			if (out.events[found].params != b.events[i].params)
				throw AutomatonError("product: event '" + b.events[i].name + "' declared with clashing arity");
			bev[i] = found;
		} else {
			out.events.push_back(b.events[i]);
			bev[i] = static_cast<int>(out.events.size()) - 1;
		}
	}

	for (const auto& r : a.call_rules) out.call_rules.push_back(r);
	for (const auto& r : b.call_rules)
		if (!out.find_call_rule(r.func)) out.call_rules.push_back(r);

	// discover reachable pairs; accepting pairs collapse into one sink
	std::map<std::pair<int, int>, int> index;
	std::vector<std::pair<int, int>> pairs;
	int acc = -1;
	auto mk_loc = [&](int la, int lb) -> int {
		if (a.accepting[la] || b.accepting[lb]) {
			if (acc < 0) {
				acc = static_cast<int>(out.loc_names.size());
				out.loc_names.push_back("ACC");
				out.accepting.push_back(true);
				out.active_marked.push_back(true);
				pairs.push_back({-1, -1});
			}
			return acc;
		}
		auto key = std::make_pair(la, lb);
		auto it = index.find(key);
		if (it != index.end()) return it->second;
		int idx = static_cast<int>(out.loc_names.size());
		index[key] = idx;
		out.loc_names.push_back("(" + a.loc_names[la] + "," + b.loc_names[lb] + ")");
		out.accepting.push_back(false);
		bool act_a = a.active_marked.empty() || a.active_marked[la];
		bool act_b = b.active_marked.empty() || b.active_marked[lb];
		out.active_marked.push_back(act_a && act_b);
		pairs.push_back({la, lb});
		return idx;
	};

	out.initial = mk_loc(a.initial, b.initial);
	std::queue<int> work;
	work.push(out.initial);
	std::set<int> seen{out.initial};

	while (!work.empty()) {
		int src = work.front();
		work.pop();
		auto [la, lb] = pairs[src];
		if (la < 0) continue;  // sink
		for (std::size_t e = 0; e < out.events.size(); e++) {
			struct Cand {
				int dst;
				Guard guard;
				bool implicit;
			};
			auto component = [&](const SmrAutomaton& o, const std::vector<int>& evmap,
			                     const std::vector<int>& varmap, int loc) {
				std::vector<Cand> cands;
				std::vector<Guard> listed;
				for (const auto& t : o.transitions) {
					if (t.src != loc || evmap[t.event] != static_cast<int>(e)) continue;
					Guard g = remap_vars(t.guard, varmap);
					listed.push_back(g);
					cands.push_back({t.dst, std::move(g), false});
				}
				// implicit self loop when no listed transition fires
				Guard self = Guard::mk_true();
				if (!listed.empty()) {
					std::vector<Guard> negs;
					for (auto& g : listed) negs.push_back(Guard::mk(Guard::Not, {g}));
					self = negs.size() == 1 ? negs[0] : Guard::mk(Guard::And, std::move(negs));
				}
				cands.push_back({loc, std::move(self), true});
				return cands;
			};
			auto ca = component(a, aev, amap, la);
			auto cb = component(b, bev, bmap, lb);
			for (const auto& ta : ca) {
				for (const auto& tb : cb) {
					// the implicit self x implicit self pair stays implicit
					if (ta.implicit && tb.implicit) continue;
					std::vector<Guard> parts;
					if (ta.guard.kind != Guard::True) parts.push_back(ta.guard);
					if (tb.guard.kind != Guard::True) parts.push_back(tb.guard);
					Guard g = parts.empty() ? Guard::mk_true()
					        : parts.size() == 1 ? parts[0]
					                            : Guard::mk(Guard::And, std::move(parts));
					SatQuery q{&out, static_cast<int>(e), {}, std::nullopt};
					if (!satisfiable(q, g)) continue;
					int dst = mk_loc(ta.dst, tb.dst);
					out.transitions.push_back({src, static_cast<int>(e), std::move(g), dst});
					if (!seen.count(dst)) {
						seen.insert(dst);
						work.push(dst);
					}
				}
			}
		}
	}
	if (out.active_marked.size() == out.loc_names.size()) {
		bool all = true;
		for (bool f : out.active_marked) all = all && f;
		if (all) out.active_marked.clear();
	}
	return out;
}

// ------------------------------------------------------------------ analysis

namespace {

bool eval_concrete(const SmrAutomaton& o, const Guard& g, const std::vector<int>& phi,
                   const std::vector<int>& values) {
	switch (g.kind) {
		case Guard::True: return true;
		case Guard::Lit: {
			int lhs = values[g.param];
			int rhs = g.var >= 0 ? phi[g.var] : g.lit;
			return g.eq ? lhs == rhs : lhs != rhs;
		}
		case Guard::And:
			for (const auto& k : g.kids)
				if (!eval_concrete(o, k, phi, values)) return false;
			return true;
		case Guard::Or:
			for (const auto& k : g.kids)
				if (eval_concrete(o, k, phi, values)) return true;
			return false;
		case Guard::Not:
			return !eval_concrete(o, g.kids[0], phi, values);
	}
	return false;
}

}  // namespace

LocSet run_history(const SmrAutomaton& o, const std::vector<int>& phi, const History& h) {
	LocSet cur = loc_bit(o.initial);
	for (const auto& evt : h) {
		int e = o.find_event(evt.func, evt.kind);
		if (e < 0) continue;  // event outside the alphabet: no transition listed anywhere
		if (o.events[e].params.size() != evt.values.size())
			throw AutomatonError("event arity mismatch in history for '" + evt.func + "'");
		LocSet next = 0;
		for (int l = 0; l < o.n_locations(); l++) {
			if (!loc_in(cur, l)) continue;
			bool moved = false;
			for (const auto& t : o.transitions) {
				if (t.src != l || t.event != e) continue;
				if (eval_concrete(o, t.guard, phi, evt.values)) {
					next |= loc_bit(t.dst);
					moved = true;
				}
			}
			if (!moved) next |= loc_bit(l);
		}
		cur = next;
	}
	return cur;
}

bool history_in_spec(const SmrAutomaton& o, const std::vector<int>& phi, const History& h) {
	return (run_history(o, phi, h) & o.accepting_set()) == 0;
}

LocSet post_image(const SmrAutomaton& o, int event, const std::vector<ParamConstraint>& constraints,
                  LocSet from) {
	SatQuery q{&o, event, constraints, true};
	LocSet out = 0;
	for (int l = 0; l < o.n_locations(); l++) {
		if (!loc_in(from, l)) continue;
		std::vector<const Guard*> listed;
		for (const auto& t : o.transitions) {
			if (t.src != l || t.event != event) continue;
			listed.push_back(&t.guard);
			if (satisfiable(q, t.guard)) out |= loc_bit(t.dst);
		}
		if (listed.empty() || satisfiable_all_false(q, listed)) out |= loc_bit(l);
	}
	return out;
}

namespace {

// Interference steps: listed transitions another thread (or the environment's
// free) can take. Computed once per automaton and cached by the caller.
std::vector<std::pair<int, int>> interference_edges(const SmrAutomaton& o) {
	std::vector<std::pair<int, int>> edges;
	for (const auto& t : o.transitions) {
		if (t.src == t.dst) continue;
		SatQuery q{&o, t.event, {}, std::nullopt};
		if (o.events[t.event].kind != EventKind::Free) q.thread_is_zt = false;
		if (satisfiable(q, t.guard)) edges.push_back({t.src, t.dst});
	}
	return edges;
}

}  // namespace

LocSet interference_closure(const SmrAutomaton& o, LocSet l) {
	auto edges = interference_edges(o);
	bool changed = true;
	while (changed) {
		changed = false;
		for (auto [src, dst] : edges) {
			if (loc_in(l, src) && !loc_in(l, dst)) {
				l |= loc_bit(dst);
				changed = true;
			}
		}
	}
	return l;
}

LocSet largest_closed_subset(const SmrAutomaton& o, LocSet l) {
	auto edges = interference_edges(o);
	bool changed = true;
	while (changed) {
		changed = false;
		for (auto [src, dst] : edges) {
			if (loc_in(l, src) && !loc_in(l, dst)) {
				l &= ~loc_bit(src);
				changed = true;
			}
		}
	}
	return l;
}

LocSet safe_locations(const SmrAutomaton& o) {
	LocSet candidate = o.all_locations();
	for (const auto& t : o.transitions) {
		if (o.events[t.event].kind != EventKind::Free) continue;
		if (o.accepting[t.dst]) continue;
		if (t.src == t.dst) continue;
		SatQuery q{&o, t.event, {ParamConstraint{ParamConstraint::EqZa, 0}}, std::nullopt};
		if (satisfiable(q, t.guard)) candidate &= ~loc_bit(t.src);
	}
	return largest_closed_subset(o, candidate);
}

std::string automaton_dot(const SmrAutomaton& o) {
	std::ostringstream out;
	out << "digraph \"" << o.name << "\" {\n";
	for (int l = 0; l < o.n_locations(); l++) {
		out << "  n" << l << " [label=\"" << o.loc_names[l] << "\""
		    << (o.accepting[l] ? ",peripheries=2" : "") << "];\n";
	}
	for (const auto& t : o.transitions)
		out << "  n" << t.src << " -> n" << t.dst << " [label=\"" << o.events[t.event].name << "\"];\n";
	out << "}\n";
	return out.str();
}

// ------------------------------------------------------------------ builtins

namespace {

const std::string BASE_SMR = R"(
automaton Base {
	assume elision;
	vars zt: thread, za: address;
	events enter retire(t, a), exit retire(t), free(a);
	call retire requires valid(0);
	locations Init init active, Retired, Bad accepting;
	Init -> Retired on enter retire(t, a) when a == za;
	Retired -> Init on free(a) when a == za;
	Init -> Bad on free(a) when a == za;
}
)";

const std::string EBR_SMR = R"(
automaton EBR {
	assume elision;
	vars zt: thread, za: address;
	events enter leaveQ(t), exit leaveQ(t), enter enterQ(t), exit enterQ(t),
	       enter retire(t, a), exit retire(t), free(a);
	locations Idle init, Protected, Retired, Bad accepting;
	Idle -> Protected on exit leaveQ(t) when t == zt;
	Protected -> Retired on enter retire(t, a) when a == za;
	Protected -> Idle on enter enterQ(t) when t == zt;
	Retired -> Idle on enter enterQ(t) when t == zt;
	Retired -> Bad on free(a) when a == za;
}
)";

// Hazard pointers with two hazard pointers per thread: the product of one
// observer per hazard pointer index. Each factor tracks whether its index
// continuously protects za since before a retire. The reachable product has
// 16 locations plus the accepting class: 17 locations.
std::string hp_factor(int index) {
	std::string k = std::to_string(index);
	return R"(
automaton HP)" + k + R"( {
	assume elision;
	vars zt: thread, za: address;
	events enter protect(t, a, i: data), exit protect(t),
	       enter retire(t, a), exit retire(t), free(a);
	locations Idle)" + k + R"( init, Pending)" + k + R"(, Issued)" + k + R"(, Covered)" + k +
	       R"(, Bad)" + k + R"( accepting;
	Idle)" + k + R"( -> Pending)" + k + R"( on enter protect(t, a, i) when t == zt && a == za && i == )" + k + R"(;
	Pending)" + k + R"( -> Issued)" + k + R"( on exit protect(t) when t == zt;
	Issued)" + k + R"( -> Covered)" + k + R"( on enter retire(t, a) when a == za;
	Covered)" + k + R"( -> Bad)" + k + R"( on free(a) when a == za;
	Pending)" + k + R"( -> Idle)" + k + R"( on enter protect(t, a, i) when t == zt && a != za && i == )" + k + R"(;
	Issued)" + k + R"( -> Idle)" + k + R"( on enter protect(t, a, i) when t == zt && a != za && i == )" + k + R"(;
	Covered)" + k + R"( -> Idle)" + k + R"( on enter protect(t, a, i) when t == zt && a != za && i == )" + k + R"(;
}
)";
}

const std::string HP2_SMR = hp_factor(0) + hp_factor(1);

}  // namespace

const std::string& builtin_automaton_text(const std::string& name) {
	if (name == "base") return BASE_SMR;
	if (name == "ebr") return EBR_SMR;
	if (name == "hp2") return HP2_SMR;
	throw AutomatonError("unknown built-in automaton '" + name + "'");
}

SmrAutomaton load_automaton(const std::string& name_or_text, bool with_base) {
	std::string text;
	if (name_or_text.find("automaton") != std::string::npos) text = name_or_text;
	else text = builtin_automaton_text(name_or_text);
	SmrAutomaton o = parse_automata_product(text);
	if (!with_base || o.name == "Base") return o;
	return product(parse_automaton(BASE_SMR), o);
}

}  // namespace smrtc
