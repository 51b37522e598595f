#include "nfa.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace smrtc {

namespace {

void collect_lits(const Guard& g, std::vector<int>& lits) {
	if (g.kind == Guard::Lit && g.var < 0) {
		if (std::find(lits.begin(), lits.end(), g.lit) == lits.end()) lits.push_back(g.lit);
	}
	for (const auto& k : g.kids) collect_lits(k, lits);
}

// var indices of the given type
std::vector<int> typed_vars(const SmrAutomaton& o, ParamType t) {
	std::vector<int> out;
	for (std::size_t i = 0; i < o.vars.size(); i++)
		if (o.vars[i].type == t) out.push_back(static_cast<int>(i));
	return out;
}

// The satisfiability constraint a symbol imposes: for every thread/address
// parameter, equality with exactly the variables in its mask; for data
// parameters, equality with the chosen literal (or none of them).
Guard symbol_guard(const SmrAutomaton& o, const std::vector<int>& lits, const EventSig& sig,
                   const AbstractSymbol& sym) {
	std::vector<Guard> parts;
	for (std::size_t p = 0; p < sig.params.size(); p++) {
		if (sig.params[p] == ParamType::Data) {
			int choice = sym.vals[p];
			for (std::size_t li = 0; li < lits.size(); li++)
				parts.push_back(Guard::atom(static_cast<int>(p), static_cast<int>(li) == choice, -1, lits[li]));
		} else {
			for (std::size_t v = 0; v < o.vars.size(); v++) {
				if (o.vars[v].type != sig.params[p]) continue;
				bool in_mask = (sym.vals[p] >> v) & 1;
				parts.push_back(Guard::atom(static_cast<int>(p), in_mask, static_cast<int>(v)));
			}
		}
	}
	if (parts.empty()) return Guard::mk_true();
	return Guard::mk(Guard::And, std::move(parts));
}

std::string symbol_name(const SmrAutomaton& o, const std::vector<int>& lits, const EventSig& sig,
                        const AbstractSymbol& sym) {
	std::ostringstream out;
	out << (sig.kind == EventKind::Enter ? "enter " : sig.kind == EventKind::Exit ? "exit " : "")
	    << sig.name << "(";
	for (std::size_t p = 0; p < sig.params.size(); p++) {
		if (p) out << ",";
		if (sig.params[p] == ParamType::Data) {
			if (sym.vals[p] < static_cast<int>(lits.size())) out << lits[sym.vals[p]];
			else out << "#";
		} else {
			out << "{";
			bool first = true;
			for (std::size_t v = 0; v < o.vars.size(); v++) {
				if ((sym.vals[p] >> v) & 1) {
					if (!first) out << " ";
					out << o.vars[v].name;
					first = false;
				}
			}
			out << "}";
		}
	}
	out << ")";
	return out.str();
}

}  // namespace

AbstractNfa abstract_to_nfa(const SmrAutomaton& o) {
	AbstractNfa nfa;
	nfa.sigs = o.events;
	nfa.n_states = o.n_locations();
	nfa.initial = o.initial;
	nfa.accepting = o.accepting_set();
	for (const auto& t : o.transitions) collect_lits(t.guard, nfa.lits);
	std::sort(nfa.lits.begin(), nfa.lits.end());

	// enumerate the abstract alphabet
	for (std::size_t e = 0; e < o.events.size(); e++) {
		const auto& sig = o.events[e];
		std::vector<std::vector<int>> choices;
		for (ParamType pt : sig.params) {
			std::vector<int> c;
			if (pt == ParamType::Data) {
				for (int li = 0; li <= static_cast<int>(nfa.lits.size()); li++) c.push_back(li);
			} else {
				auto vars = typed_vars(o, pt);
				// masks over same-typed variables
				int n = static_cast<int>(vars.size());
				for (int m = 0; m < (1 << n); m++) {
					int mask = 0;
					for (int i = 0; i < n; i++)
						if ((m >> i) & 1) mask |= 1 << vars[i];
					c.push_back(mask);
				}
				std::sort(c.begin(), c.end());
			}
			choices.push_back(std::move(c));
		}
		std::vector<std::size_t> idx(choices.size(), 0);
		while (true) {
			AbstractSymbol sym;
			sym.event = static_cast<int>(e);
			for (std::size_t p = 0; p < choices.size(); p++) sym.vals.push_back(choices[p][idx[p]]);
			nfa.symbols.push_back(sym);
			nfa.symbol_names.push_back(symbol_name(o, nfa.lits, sig, sym));
			std::size_t p = 0;
			for (; p < choices.size(); p++) {
				if (++idx[p] < choices[p].size()) break;
				idx[p] = 0;
			}
			if (p == choices.size()) break;
		}
	}

	// transitions: listed when guard /\ symbol constraint is satisfiable,
	// self loop when the symbol constraint can hold with all guards false
	nfa.delta.assign(nfa.symbols.size(), std::vector<LocSet>(nfa.n_states, 0));
	for (std::size_t si = 0; si < nfa.symbols.size(); si++) {
		const auto& sym = nfa.symbols[si];
		Guard symg = symbol_guard(o, nfa.lits, o.events[sym.event], sym);
		SatQuery q{&o, sym.event, {}, std::nullopt};
		for (int l = 0; l < nfa.n_states; l++) {
			std::vector<const Guard*> listed;
			for (const auto& t : o.transitions) {
				if (t.src != l || t.event != sym.event) continue;
				listed.push_back(&t.guard);
				Guard combined = Guard::mk(Guard::And, {t.guard, symg});
				if (satisfiable(q, combined)) nfa.delta[si][l] |= loc_bit(t.dst);
			}
			// self loop: symbol possible while no listed guard holds
			bool self_possible;
			if (listed.empty()) {
				self_possible = satisfiable(q, symg);
			} else {
				std::vector<Guard> negs;
				negs.push_back(symg);
				for (const auto* g : listed) negs.push_back(Guard::mk(Guard::Not, {*g}));
				self_possible = satisfiable(q, Guard::mk(Guard::And, std::move(negs)));
			}
			if (self_possible) nfa.delta[si][l] |= loc_bit(l);
		}
	}
	return nfa;
}

int abstract_symbol_of(const AbstractNfa& nfa, const SmrAutomaton& o, const std::vector<int>& phi,
                       const Event& evt) {
	int e = o.find_event(evt.func, evt.kind);
	if (e < 0) return -1;
	const auto& sig = o.events[e];
	std::vector<int> vals;
	for (std::size_t p = 0; p < sig.params.size(); p++) {
		if (sig.params[p] == ParamType::Data) {
			int choice = static_cast<int>(nfa.lits.size());
			for (std::size_t li = 0; li < nfa.lits.size(); li++)
				if (nfa.lits[li] == evt.values[p]) choice = static_cast<int>(li);
			vals.push_back(choice);
		} else {
			int mask = 0;
			for (std::size_t v = 0; v < o.vars.size(); v++)
				if (o.vars[v].type == sig.params[p] && phi[v] == evt.values[p]) mask |= 1 << v;
			vals.push_back(mask);
		}
	}
	for (std::size_t si = 0; si < nfa.symbols.size(); si++)
		if (nfa.symbols[si].event == e && nfa.symbols[si].vals == vals) return static_cast<int>(si);
	return -1;
}

bool nfa_language_inclusion(const AbstractNfa& a, const AbstractNfa& b) {
	if (a.n_symbols() != b.n_symbols())
		throw std::invalid_argument("nfa_language_inclusion: alphabet mismatch");
	// search for a word accepted by a but not by b
	std::set<std::pair<LocSet, LocSet>> seen;
	std::queue<std::pair<LocSet, LocSet>> work;
	auto push = [&](LocSet sa, LocSet sb) {
		auto key = std::make_pair(sa, sb);
		if (seen.insert(key).second) work.push(key);
	};
	push(loc_bit(a.initial), loc_bit(b.initial));
	while (!work.empty()) {
		auto [sa, sb] = work.front();
		work.pop();
		if ((sa & a.accepting) != 0 && (sb & b.accepting) == 0) return false;
		for (int sym = 0; sym < a.n_symbols(); sym++) push(a.step(sa, sym), b.step(sb, sym));
	}
	return true;
}

// -------------------------------------------------------------------- audit

namespace {

// safe-continuation check: from subsets P (replaced call) and Q (actual
// call), every word built from non-free symbols plus free-of-za symbols that
// avoids acceptance from P must avoid it from Q as well
enum class InclusionResult { Holds, Fails, Unknown };

InclusionResult safe_language_included(const AbstractNfa& nfa, const SmrAutomaton& o, LocSet p0,
                                       LocSet q0, long pair_limit) {
	std::vector<int> alphabet;
	for (int si = 0; si < nfa.n_symbols(); si++) {
		const auto& sym = nfa.symbols[si];
		if (o.events[sym.event].kind == EventKind::Free) {
			// only frees of the tracked address occur in freeable continuations
			bool za_in = (sym.vals[0] >> o.za) & 1;
			if (!za_in) continue;
		}
		alphabet.push_back(si);
	}
	std::set<std::pair<LocSet, LocSet>> seen;
	std::queue<std::pair<LocSet, LocSet>> work;
	auto push = [&](LocSet p, LocSet q) {
		if ((p & nfa.accepting) != 0) return;  // not a freeable continuation of the replaced call
		auto key = std::make_pair(p, q);
		if (seen.insert(key).second) work.push(key);
	};
	push(p0, q0);
	while (!work.empty()) {
		if (static_cast<long>(seen.size()) > pair_limit) return InclusionResult::Unknown;
		auto [p, q] = work.front();
		work.pop();
		if ((q & nfa.accepting) != 0) return InclusionResult::Fails;
		for (int sym : alphabet) push(nfa.step(p, sym), nfa.step(q, sym));
	}
	return InclusionResult::Holds;
}

}  // namespace

std::vector<AuditEntry> verify_safe_call_table(const SmrAutomaton& o, const SafeCallTable& table,
                                               long pair_limit) {
	AbstractNfa nfa = abstract_to_nfa(o);
	std::vector<AuditEntry> report;

	for (std::size_t e = 0; e < o.events.size(); e++) {
		const auto& sig = o.events[e];
		if (sig.kind != EventKind::Enter) continue;
		// pointer positions = address-typed parameters
		std::vector<int> ptr_params;
		for (std::size_t p = 0; p < sig.params.size(); p++)
			if (sig.params[p] == ParamType::Address) ptr_params.push_back(static_cast<int>(p));
		int n = static_cast<int>(ptr_params.size());
		for (int m = 0; m < (1 << n); m++) {
			std::vector<bool> mask(n);
			bool has_invalid = false;
			for (int i = 0; i < n; i++) {
				mask[i] = (m >> i) & 1;
				if (!mask[i]) has_invalid = true;
			}
			AuditEntry entry{sig.name, mask, "verified"};
			if (!has_invalid) {
				// all-valid calls are vacuously safe
				report.push_back(std::move(entry));
				continue;
			}
			if (!table.is_safe(sig.name, mask)) continue;  // marked unsafe, nothing to verify

			bool refuted = false, unknown = false;
			for (std::size_t ai = 0; ai < nfa.symbols.size() && !refuted; ai++) {
				const auto& actual = nfa.symbols[ai];
				if (actual.event != static_cast<int>(e)) continue;
				for (std::size_t bi = 0; bi < nfa.symbols.size() && !refuted; bi++) {
					const auto& replaced = nfa.symbols[bi];
					if (replaced.event != static_cast<int>(e)) continue;
					// positions must agree unless the argument is invalid and
					// is not the tracked address
					bool admissible = true;
					for (std::size_t p = 0; p < sig.params.size(); p++) {
						bool may_differ = false;
						for (int i = 0; i < n; i++) {
							if (ptr_params[i] != static_cast<int>(p)) continue;
							bool za_carried = (actual.vals[p] >> o.za) & 1;
							may_differ = !mask[i] && !za_carried;
						}
						if (!may_differ && actual.vals[p] != replaced.vals[p]) admissible = false;
					}
					if (!admissible) continue;
					for (int l = 0; l < nfa.n_states && !refuted; l++) {
						LocSet q0 = nfa.step(loc_bit(l), static_cast<int>(ai));
						LocSet p0 = nfa.step(loc_bit(l), static_cast<int>(bi));
						if (p0 == q0) continue;
						auto res = safe_language_included(nfa, o, p0, q0, pair_limit);
						if (res == InclusionResult::Fails) refuted = true;
						else if (res == InclusionResult::Unknown) unknown = true;
					}
				}
			}
			entry.verdict = refuted ? "refuted" : unknown ? "inconclusive" : "verified";
			report.push_back(std::move(entry));
		}
	}
	return report;
}

}  // namespace smrtc
