#pragma once

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "ast.hpp"
#include "automaton.hpp"
#include "sp.hpp"

namespace smrtc {

struct Budget {
	int threads = 2;
	int addresses = 3;
	int dom = 2;
	int steps = 20;
	bool free_all = false;     // X = Adr instead of X = {}
	bool realloc_all = false;  // Y = Adr instead of Y = {}
	int jobs = 1;
	long max_states = 4000000;
};

enum class Mode { Prf, Invariants, Asserts };

struct TraceStep {
	int thread;  // -2 environment free, -1 init thread
	std::string text;
	std::string update;
};

struct ExploreReport {
	std::string verdict;  // clean | race | invariant | assert
	std::string detail;   // race kind / failed annotation
	bool exhausted = false;  // frontier alive when the step bound (or state cap) hit
	long states = 0;
	int steps_explored = 0;
	std::vector<TraceStep> witness;
	std::vector<Event> witness_history;
	std::uint64_t fingerprint = 0;  // program-visible reachable state set
	long fingerprint_states = 0;
	Budget budget;
};

// Pointer-race classification of a single enabled action.
struct RaceVerdict {
	std::string strict;   // none | unsafe-access | unsafe-assumption | unsafe-retire | unsafe-call
	std::string relaxed;  // none | ... (unsafe-assumption only when a freed address is involved)
};

class Explorer {
public:
	Explorer(const Program& prog, const SmrAutomaton& o, Budget budget);
	~Explorer();

	ExploreReport run(Mode mode);

	// test access: number of distinct initial configurations (one per
	// assignment of procedures to threads)
	int initial_count() const;

	Explorer(const Explorer&) = delete;
	Explorer& operator=(const Explorer&) = delete;

private:
	struct Impl;
	std::unique_ptr<Impl> impl_;
};

ExploreReport explore(const Program& prog, const SmrAutomaton& o, Budget budget, Mode mode);

nlohmann::json explore_report_to_json(const ExploreReport& r);

}  // namespace smrtc
