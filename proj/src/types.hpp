#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "automaton.hpp"

namespace smrtc {

enum GuaranteeFlag : std::uint8_t {
	FlagL = 1,
	FlagA = 2,
	FlagS = 4,
};
constexpr std::uint8_t FLAGS_AL = FlagA | FlagL;

// A guarantee set in canonical form: base flags plus one interference-closed
// location set standing for the conjunction of all custom guarantees (the
// full set encodes "none"). Canonical means custom = closure(Locs) and flags
// are S-saturated, which makes structural equality coincide with mutual
// derivability under the epsilon transformer (the antichain quotient).
struct CanonicalType {
	std::uint8_t flags = 0;
	LocSet custom = 0;
	LocSet locs = 0;  // cached: flag locations /\ custom

	friend bool operator==(const CanonicalType& a, const CanonicalType& b) {
		return a.flags == b.flags && a.custom == b.custom;
	}
	friend bool operator<(const CanonicalType& a, const CanonicalType& b) {
		return a.flags != b.flags ? a.flags < b.flags : a.custom < b.custom;
	}
};

// One SMR event occurrence as seen by the type transformer: the executing
// thread is pinned to zt, and parameter positions may be pinned to za (the
// tracked pointer occurs there) or to literal values (constant data args).
struct EventInstance {
	int event = -1;  // -1 is the epsilon transformer
	std::vector<ParamConstraint> constraints;
};

struct TypeEnv {
	bool top = false;
	std::vector<CanonicalType> types;

	friend bool operator==(const TypeEnv& a, const TypeEnv& b) {
		if (a.top != b.top) return false;
		return a.top || a.types == b.types;
	}
};

// Precomputed per-automaton tables: SafeLoc, the active component, closure
// fixpoints, post images. All type operations go through here.
class TypeContext {
public:
	explicit TypeContext(const SmrAutomaton& o);

	const SmrAutomaton& autom() const { return o_; }
	LocSet all() const { return all_; }
	LocSet active_locations() const { return active_; }
	LocSet safe_loc() const { return safe_; }

	LocSet closure(LocSet l) const;
	LocSet largest_closed(LocSet l) const;
	LocSet post(const EventInstance& ev, LocSet from) const;

	CanonicalType make(std::uint8_t flags, LocSet custom) const;
	CanonicalType empty_type() const { return empty_; }
	CanonicalType bottom_type() const { return bottom_; }
	CanonicalType flag_type(std::uint8_t flags) const { return make(flags, all_); }

	static bool is_valid(const CanonicalType& t) { return t.flags != 0; }
	LocSet locs(const CanonicalType& t) const { return t.locs; }

	// epsilon-transformer order: the most precise type is the least element
	bool leq(const CanonicalType& a, const CanonicalType& b) const;
	CanonicalType join(const CanonicalType& a, const CanonicalType& b) const;
	CanonicalType meet(const CanonicalType& a, const CanonicalType& b) const;

	// most precise T' with T, x, com ~> T'
	CanonicalType transformer(const CanonicalType& t, const EventInstance& ev) const;
	// the three conditions of the type transformer relation
	bool transformer_holds(const CanonicalType& t, const EventInstance& ev, const CanonicalType& t2) const;

	// every canonical type of this automaton (for exhaustive lattice checks;
	// feasible only on small automata)
	std::vector<CanonicalType> enumerate_types() const;
	std::vector<LocSet> enumerate_closed_sets() const;

	std::string describe(const CanonicalType& t) const;
	std::vector<std::string> loc_names(LocSet l) const;

private:
	SmrAutomaton o_;
	LocSet all_, active_, safe_;
	CanonicalType empty_, bottom_;
	std::vector<std::pair<int, int>> interference_;
	mutable std::map<LocSet, LocSet> cl_cache_, lcs_cache_;
	mutable std::map<std::tuple<int, std::string, LocSet>, LocSet> post_cache_;

	LocSet flag_locs(std::uint8_t flags) const;
};

// --- environments ------------------------------------------------------------

// Variable universe of one procedure: shared pointers, local pointers, angels.
struct VarUniverse {
	std::vector<std::string> names;
	std::vector<bool> is_angel;
	std::vector<bool> is_shared;

	int index_of(const std::string& name) const {
		for (std::size_t i = 0; i < names.size(); i++)
			if (names[i] == name) return static_cast<int>(i);
		return -1;
	}
	std::size_t size() const { return names.size(); }
};

TypeEnv initial_env(const TypeContext& ctx, const VarUniverse& u);
TypeEnv bottom_env(const TypeContext& ctx, const VarUniverse& u);
TypeEnv top_env();
bool env_leq(const TypeContext& ctx, const TypeEnv& a, const TypeEnv& b);
TypeEnv env_join(const TypeContext& ctx, const TypeEnv& a, const TypeEnv& b);
TypeEnv rm_transient(const TypeContext& ctx, const VarUniverse& u, const TypeEnv& env);

}  // namespace smrtc
