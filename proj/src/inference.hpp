#pragma once

#include <json.hpp>

#include "parser.hpp"
#include "sp.hpp"

namespace smrtc {

struct Constraint {
	enum Kind { Ident, Sp, Rm } kind = Ident;
	int src = -1;
	int dst = -1;
	const Command* com = nullptr;  // Sp only; owned by the preprocessed program
};

// Constraint system of one procedure over enriched type environments.
struct ConstraintSystem {
	int n_vars = 0;
	int entry = -1;  // seeded with the initial environment
	int final = -1;
	std::vector<Constraint> constraints;          // in syntactic order
	std::vector<std::vector<int>> dep;            // var -> vars to recompute after it changed
	std::vector<std::vector<int>> req;            // var -> constraints bounding it
	std::vector<std::pair<int, int>> post_var_of; // (command id, post var), original commands only

	void finalize();
};

ConstraintSystem build_constraints(const Procedure& preprocessed_proc);

struct SolveStats {
	long pops = 0;
	long bound = 0;
};

// Least solution by FIFO worklist Kleene iteration. order_seed permutes the
// processing order (the solution must not depend on it). first_top, when
// given, receives the first premise failure observed by the default FIFO
// order (syntactically deterministic).
std::vector<TypeEnv> solve(const TypeContext& ctx, const SafeCallTable& table, const VarUniverse& u,
                           const ConstraintSystem& cs, const TypeEnv& init,
                           SolveStats* stats = nullptr, unsigned order_seed = 0,
                           std::optional<SpDiag>* first_top = nullptr);

struct TypeFailure {
	std::string proc;
	std::string rule;
	std::string variable;
	std::string message;
	SourceLoc loc{};
};

struct ProcTyping {
	std::string proc;
	VarUniverse universe;
	// per original command id: environment after the command
	std::vector<std::pair<int, TypeEnv>> points;
	TypeEnv final_env;
	SolveStats stats;
};

struct TypeReport {
	bool ok = false;
	std::optional<TypeFailure> failure;
	std::vector<ProcTyping> procs;
	double wall_seconds = 0;
};

// Checks the program against the automaton alphabet (enter/exit names and
// arities). Throws std::invalid_argument on mismatch.
void validate_against_automaton(const Program& prog, const SmrAutomaton& o);

VarUniverse universe_of(const Program& prog, const Procedure& proc);

TypeReport typecheck(const Program& prog, const TypeContext& ctx, const SafeCallTable& table,
                     unsigned order_seed = 0);

nlohmann::json report_to_json(const TypeReport& report, const TypeContext& ctx);

}  // namespace smrtc
