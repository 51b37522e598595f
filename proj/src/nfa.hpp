#pragma once

#include <string>
#include <vector>

#include "automaton.hpp"
#include "sp.hpp"

namespace smrtc {

// Finite-alphabet abstraction of an SMR automaton: thread/address parameter
// values collapse to the subset of same-typed observer variables they equal,
// data parameters to a literal from the guards or "fresh". States are the
// automaton's locations; implicit self loops are materialized.
struct AbstractSymbol {
	int event;
	std::vector<int> vals;  // thread/address params: variable-index bitmask; data: literal index
	                        // (lits.size() encodes "none of the literals")
};

struct AbstractNfa {
	std::vector<EventSig> sigs;
	std::vector<int> lits;  // data literal universe collected from the guards
	std::vector<AbstractSymbol> symbols;
	std::vector<std::string> symbol_names;
	int n_states = 0;
	int initial = 0;
	LocSet accepting = 0;
	std::vector<std::vector<LocSet>> delta;  // [symbol][state] -> successor set

	int n_symbols() const { return static_cast<int>(symbols.size()); }
	LocSet step(LocSet from, int symbol) const {
		LocSet out = 0;
		for (int s = 0; s < n_states; s++)
			if (loc_in(from, s)) out |= delta[symbol][s];
		return out;
	}
	bool accepts(const std::vector<int>& word) const {
		LocSet cur = loc_bit(initial);
		for (int sym : word) cur = step(cur, sym);
		return (cur & accepting) != 0;
	}
};

AbstractNfa abstract_to_nfa(const SmrAutomaton& o);

// The abstraction of a concrete event under a fixed valuation.
int abstract_symbol_of(const AbstractNfa& nfa, const SmrAutomaton& o, const std::vector<int>& phi,
                       const Event& evt);

// Exact language inclusion L(a) <= L(b); both automata must share an alphabet
// (same symbol table). Decided by a product of subset constructions.
bool nfa_language_inclusion(const AbstractNfa& a, const AbstractNfa& b);

// Report-only audit of safe-call declarations against the Def-5.12-style
// condition, checked on the abstract NFA: for safe entries with invalid
// positions, replacing those argument values must not allow more free-of-za
// behavior than the actual call.
struct AuditEntry {
	std::string func;
	std::vector<bool> mask;  // per pointer position: valid?
	std::string verdict;     // verified | refuted | inconclusive
};

std::vector<AuditEntry> verify_safe_call_table(const SmrAutomaton& o, const SafeCallTable& table,
                                               long pair_limit = 200000);

}  // namespace smrtc
