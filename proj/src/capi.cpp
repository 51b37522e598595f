#include "smrtc/smrtc.h"

#include <cstring>
#include <memory>

#include "inference.hpp"
#include "instrument.hpp"
#include "nfa.hpp"
#include "oracle.hpp"
#include "repair.hpp"

using namespace smrtc;

struct smrtc_program {
	Program prog;
};

struct smrtc_automaton {
	SmrAutomaton autom;
	std::unique_ptr<TypeContext> ctx;  // built lazily; reused across calls
	SafeCallTable table;

	TypeContext& context() {
		if (!ctx) ctx = std::make_unique<TypeContext>(autom);
		return *ctx;
	}
};

namespace {

char* dup_string(const std::string& s) {
	char* out = static_cast<char*>(malloc(s.size() + 1));
	memcpy(out, s.c_str(), s.size() + 1);
	return out;
}

void set_error(char** error, const std::string& msg) {
	if (!error) return;
	nlohmann::json j{{"error", msg}};
	*error = dup_string(j.dump());
}

Budget budget_from_json(const char* budget_json) {
	Budget b;
	if (!budget_json || !*budget_json) return b;
	auto j = nlohmann::json::parse(budget_json);
	if (j.contains("threads")) b.threads = j["threads"];
	if (j.contains("addresses")) b.addresses = j["addresses"];
	if (j.contains("dom")) b.dom = j["dom"];
	if (j.contains("steps")) b.steps = j["steps"];
	if (j.contains("frees")) b.free_all = j["frees"];
	if (j.contains("realloc")) b.realloc_all = j["realloc"];
	if (j.contains("jobs")) b.jobs = j["jobs"];
	if (j.contains("max_states")) b.max_states = j["max_states"];
	return b;
}

}  // namespace

extern "C" {

const char* smrtc_version(void) { return "1.0.0"; }

void smrtc_string_free(char* s) { free(s); }

smrtc_status smrtc_program_parse(const char* text, smrtc_program** out, char** error) {
	if (!text || !out) return SMRTC_ERR_INVALID;
	try {
		auto p = std::make_unique<smrtc_program>();
		p->prog = parse_program(text);
		*out = p.release();
		return SMRTC_OK;
	} catch (const std::exception& e) {
		set_error(error, e.what());
		return SMRTC_ERR_PARSE;
	}
}

void smrtc_program_free(smrtc_program* p) { delete p; }

smrtc_status smrtc_program_print(const smrtc_program* p, char** text) {
	if (!p || !text) return SMRTC_ERR_INVALID;
	*text = dup_string(pretty_print(p->prog));
	return SMRTC_OK;
}

smrtc_status smrtc_automaton_load(const char* name_or_text, int with_base, smrtc_automaton** out,
                                  char** error) {
	if (!name_or_text || !out) return SMRTC_ERR_INVALID;
	try {
		auto a = std::make_unique<smrtc_automaton>();
		a->autom = load_automaton(name_or_text, with_base != 0);
		a->table = table_from_automaton(a->autom);
		*out = a.release();
		return SMRTC_OK;
	} catch (const std::exception& e) {
		set_error(error, e.what());
		return SMRTC_ERR_PARSE;
	}
}

void smrtc_automaton_free(smrtc_automaton* a) { delete a; }

smrtc_status smrtc_automaton_info(const smrtc_automaton* a, int audit, char** json) {
	if (!a || !json) return SMRTC_ERR_INVALID;
	try {
		auto* mut = const_cast<smrtc_automaton*>(a);
		const auto& ctx = mut->context();
		const auto& o = a->autom;
		nlohmann::json j;
		j["name"] = o.name;
		j["locations"] = o.loc_names;
		j["initial"] = o.loc_names[o.initial];
		j["accepting"] = ctx.loc_names(o.accepting_set());
		j["safeloc"] = ctx.loc_names(ctx.safe_loc());
		j["active"] = ctx.loc_names(ctx.active_locations());
		j["elision"] = o.elision;
		nlohmann::json evs = nlohmann::json::array();
		for (const auto& e : o.events) {
			std::string kind = e.kind == EventKind::Enter ? "enter"
			                 : e.kind == EventKind::Exit  ? "exit"
			                                              : "free";
			evs.push_back({{"name", e.name}, {"kind", kind}, {"arity", e.params.size()}});
		}
		j["events"] = evs;
		j["transitions"] = o.transitions.size();
		if (audit) {
			nlohmann::json entries = nlohmann::json::array();
			for (const auto& e : verify_safe_call_table(o, a->table)) {
				nlohmann::json mask = nlohmann::json::array();
				for (bool v : e.mask) mask.push_back(v);
				entries.push_back({{"func", e.func}, {"valid_mask", mask}, {"verdict", e.verdict}});
			}
			j["safe_call_audit"] = entries;
		}
		*json = dup_string(j.dump(2));
		return SMRTC_OK;
	} catch (const std::exception& e) {
		(void)e;
		return SMRTC_ERR_INTERNAL;
	}
}

smrtc_status smrtc_typecheck(const smrtc_program* p, const smrtc_automaton* a, char** report_json,
                             char** error) {
	if (!p || !a || !report_json) return SMRTC_ERR_INVALID;
	try {
		auto* mut = const_cast<smrtc_automaton*>(a);
		TypeReport report = typecheck(p->prog, mut->context(), a->table);
		*report_json = dup_string(report_to_json(report, mut->context()).dump(2));
		return SMRTC_OK;
	} catch (const std::exception& e) {
		set_error(error, e.what());
		return SMRTC_ERR_INVALID;
	}
}

smrtc_status smrtc_instrument(const smrtc_program* p, char** program_text) {
	if (!p || !program_text) return SMRTC_ERR_INVALID;
	try {
		*program_text = dup_string(pretty_print(instrument(p->prog)));
		return SMRTC_OK;
	} catch (const std::exception&) {
		return SMRTC_ERR_INTERNAL;
	}
}

smrtc_status smrtc_explore(const smrtc_program* p, const smrtc_automaton* a,
                           const char* budget_json, const char* mode, char** report_json,
                           char** error) {
	if (!p || !a || !report_json || !mode) return SMRTC_ERR_INVALID;
	try {
		Budget b = budget_from_json(budget_json);
		Mode m;
		std::string ms = mode;
		if (ms == "prf") m = Mode::Prf;
		else if (ms == "invariants") m = Mode::Invariants;
		else if (ms == "asserts") m = Mode::Asserts;
		else {
			set_error(error, "unknown mode '" + ms + "'");
			return SMRTC_ERR_INVALID;
		}
		validate_against_automaton(p->prog, a->autom);
		ExploreReport r = explore(p->prog, a->autom, b, m);
		*report_json = dup_string(explore_report_to_json(r).dump(2));
		return SMRTC_OK;
	} catch (const std::exception& e) {
		set_error(error, e.what());
		return SMRTC_ERR_INVALID;
	}
}

smrtc_status smrtc_repair(const smrtc_program* p, const smrtc_automaton* a,
                          const char* budget_json, int max_rounds, char** program_text,
                          char** log_jsonl, char** error) {
	if (!p || !a || !program_text || !log_jsonl) return SMRTC_ERR_INVALID;
	try {
		auto* mut = const_cast<smrtc_automaton*>(a);
		Budget b = budget_from_json(budget_json);
		RepairResult r = repair(p->prog, mut->context(), a->table, b,
		                        max_rounds > 0 ? max_rounds : 8);
		std::string log;
		for (const auto& line : r.log) log += line.dump() + "\n";
		*log_jsonl = dup_string(log);
		*program_text = r.success ? dup_string(pretty_print(r.program)) : dup_string("");
		return SMRTC_OK;
	} catch (const std::exception& e) {
		set_error(error, e.what());
		return SMRTC_ERR_INVALID;
	}
}

}  // extern "C"
