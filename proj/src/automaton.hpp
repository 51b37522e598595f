#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smrtc {

// Location sets are bitsets; automata stay well under 64 locations.
using LocSet = std::uint64_t;

inline bool loc_in(LocSet s, int l) { return (s >> l) & 1u; }
inline LocSet loc_bit(int l) { return LocSet(1) << l; }

enum class EventKind { Enter, Exit, Free };
enum class ParamType { Thread, Address, Data };

struct EventSig {
	std::string name;
	EventKind kind;
	std::vector<ParamType> params;  // Enter: thread first; Exit: [thread]; Free: [address]
};

struct ObserverVar {
	std::string name;
	ParamType type;
};

// Guard formulas. The DSL only admits conjunctions of param-vs-variable and
// param-vs-literal atoms; products introduce negations and disjunctions when
// they complete a factor with its implicit self loop.
struct Guard {
	enum Kind { True, Lit, And, Or, Not } kind = True;
	int param = -1;  // Lit: event parameter index
	bool eq = true;
	int var = -1;    // Lit: observer variable index, or -1 for a literal
	int lit = 0;
	std::vector<Guard> kids;

	static Guard mk_true() { return Guard{}; }
	static Guard atom(int param, bool eq, int var, int lit = 0) {
		Guard g;
		g.kind = Lit;
		g.param = param;
		g.eq = eq;
		g.var = var;
		g.lit = lit;
		return g;
	}
	static Guard mk(Kind k, std::vector<Guard> kids) {
		Guard g;
		g.kind = k;
		g.kids = std::move(kids);
		return g;
	}
};

struct Transition {
	int src;
	int event;  // index into events
	Guard guard;
	int dst;
};

struct AutomatonError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

struct SafeCallRule {
	std::string func;
	std::vector<int> valid_positions;  // 0-based over pointer arguments
};

struct SmrAutomaton {
	std::string name;
	std::vector<std::string> loc_names;
	int initial = 0;
	std::vector<bool> accepting;
	std::vector<bool> active_marked;  // locations forming the Locs(A) component; empty means all
	std::vector<ObserverVar> vars;
	int zt = -1;  // first thread-valued variable
	int za = -1;  // first address-valued variable
	std::vector<EventSig> events;
	std::vector<Transition> transitions;
	bool elision = false;
	std::vector<SafeCallRule> call_rules;

	int n_locations() const { return static_cast<int>(loc_names.size()); }
	LocSet all_locations() const {
		return n_locations() == 64 ? ~LocSet(0) : (LocSet(1) << n_locations()) - 1;
	}
	LocSet accepting_set() const {
		LocSet s = 0;
		for (int l = 0; l < n_locations(); l++)
			if (accepting[l]) s |= loc_bit(l);
		return s;
	}
	LocSet active_set() const {
		if (active_marked.empty()) return all_locations();
		LocSet s = 0;
		for (int l = 0; l < n_locations(); l++)
			if (active_marked[l]) s |= loc_bit(l);
		return s;
	}
	int find_event(const std::string& fname, EventKind k) const {
		for (std::size_t i = 0; i < events.size(); i++)
			if (events[i].name == fname && events[i].kind == k) return static_cast<int>(i);
		return -1;
	}
	const SafeCallRule* find_call_rule(const std::string& func) const {
		for (const auto& r : call_rules)
			if (r.func == func) return &r;
		return nullptr;
	}
};

// Concrete event with actual values; how histories are made of.
struct Event {
	std::string func;
	EventKind kind;
	std::vector<int> values;  // matches the event signature (thread first, etc.)
};

using History = std::vector<Event>;

// Per-parameter constraints for satisfiability-based operations.
struct ParamConstraint {
	enum Kind { Free, EqZt, EqZa, EqLit } kind = Free;
	int lit = 0;
};

SmrAutomaton parse_automaton(const std::string& text);
SmrAutomaton parse_automata_product(const std::string& text);

// Synchronous product. Shared variables are identified (zt with zt, za with
// za), accepting pairs collapse into a single sink, unreachable pairs are
// pruned.
SmrAutomaton product(const SmrAutomaton& a, const SmrAutomaton& b);

// Built-in automata shipped with the tool: "base", "ebr", "hp2".
const std::string& builtin_automaton_text(const std::string& name);
SmrAutomaton load_automaton(const std::string& name_or_text, bool with_base);

// --- analysis operations ---------------------------------------------------

// NFA run for a fixed valuation phi (variable index -> value). Implicit self
// loops: a location without an enabled listed transition stays put.
LocSet run_history(const SmrAutomaton& o, const std::vector<int>& phi, const History& h);

// h in S(O) for this valuation iff no accepting location is reached.
bool history_in_spec(const SmrAutomaton& o, const std::vector<int>& phi, const History& h);

// Post-image of a location set under one event occurrence. The thread
// parameter is pinned to zt; further pins come from `constraints`.
LocSet post_image(const SmrAutomaton& o, int event, const std::vector<ParamConstraint>& constraints, LocSet from);

// Smallest superset of L no other-thread step (and no free) can leave.
LocSet interference_closure(const SmrAutomaton& o, LocSet l);

// Greatest fixpoint: largest subset of L closed under interference.
LocSet largest_closed_subset(const SmrAutomaton& o, LocSet l);

// Largest interference-closed set whose members admit no free of the tracked
// address into a non-accepting location.
LocSet safe_locations(const SmrAutomaton& o);

// Satisfiability of guard /\ per-param constraints /\ (thread param == or != zt).
// Exposed for tests.
struct SatQuery {
	const SmrAutomaton* autom;
	int event;
	std::vector<ParamConstraint> constraints;     // per param; may be shorter than arity
	std::optional<bool> thread_is_zt;             // pin the thread param (enter/exit only)
};
bool satisfiable(const SatQuery& q, const Guard& guard);
// Satisfiability of constraints with *all* given guards false (implicit self loop).
bool satisfiable_all_false(const SatQuery& q, const std::vector<const Guard*>& guards);

std::string automaton_dot(const SmrAutomaton& o);  // debugging aid

}  // namespace smrtc
