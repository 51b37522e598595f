#pragma once

#include <optional>
#include <string>

#include "ast.hpp"
#include "types.hpp"

namespace smrtc {

// Which SMR calls tolerate invalid pointer arguments. Built from the
// automaton's `call f requires valid(i)` declarations; functions without a
// declaration accept invalid arguments (protect-style). The all-valid mask is
// always safe.
struct SafeCallTable {
	std::vector<SafeCallRule> rules;

	const SafeCallRule* find(const std::string& func) const {
		for (const auto& r : rules)
			if (r.func == func) return &r;
		return nullptr;
	}
	// mask: per pointer-argument position, whether the argument is valid
	bool is_safe(const std::string& func, const std::vector<bool>& mask) const {
		const auto* r = find(func);
		if (!r) return true;
		for (int pos : r->valid_positions)
			if (pos >= 0 && pos < static_cast<int>(mask.size()) && !mask[pos]) return false;
		return true;
	}
};

SafeCallTable table_from_automaton(const SmrAutomaton& o);

struct SpDiag {
	std::string rule;
	std::string variable;
	std::string message;
	SourceLoc loc{};
};

struct SpResult {
	TypeEnv env;
	std::optional<SpDiag> diag;  // set iff a premise failed and env is Top
};

// Strongest post environment for one primitive command. Top in, Top out.
SpResult sp(const TypeContext& ctx, const SafeCallTable& table, const VarUniverse& u,
            const TypeEnv& env, const Command& com);

// safeCall as a standalone predicate (used by the oracle as well).
bool safe_call(const SafeCallTable& table, const std::string& func, const std::vector<bool>& valid_mask);

// The event instance a command emits for variable x (or no variable).
EventInstance event_instance(const TypeContext& ctx, const Command& com, const std::string& x, bool x_is_pointer);

}  // namespace smrtc
