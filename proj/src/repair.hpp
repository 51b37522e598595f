#pragma once

#include "inference.hpp"
#include "oracle.hpp"

namespace smrtc {

struct RepairResult {
	bool success = false;
	Program program;
	std::vector<nlohmann::json> log;  // one record per attempted/validated tactic
};

// Guess-and-check annotation repair: on a failed type check, try inserting
// `@inv active(x)` before the failing command; for automata with a leaveQ
// event, fall back to the angel template plus a membership annotation. Every
// inserted annotation must survive the instrumented oracle check before it is
// kept. Gives up after max_rounds applied tactics.
RepairResult repair(const Program& prog, const TypeContext& ctx, const SafeCallTable& table,
                    Budget budget, int max_rounds = 8);

// Strips all invariant annotations and angel declarations; the executable
// commands and block structure stay untouched.
Program erase_annotations(const Program& prog);

}  // namespace smrtc
