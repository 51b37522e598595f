// Command line front end. Links only the public C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "smrtc/smrtc.h"

namespace {

struct Options {
	std::string program_file;
	std::string smr = "base";
	bool no_base = false;
	bool json = false;
	bool do_repair = false;
	int threads = 2, addresses = 3, steps = 20, dom = 2, jobs = 1, max_rounds = 8;
	bool frees = false, realloc = false;
	std::string mode = "prf";
	std::string out_file;
	std::string automaton_op = "info";
};

std::string slurp(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw std::runtime_error("cannot read '" + path + "'");
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_out(const Options& opt, const std::string& text) {
	if (opt.out_file.empty()) {
		std::cout << text << "\n";
	} else {
		std::ofstream out(opt.out_file);
		out << text;
	}
}

struct StringGuard {
	char* s = nullptr;
	~StringGuard() { smrtc_string_free(s); }
};

std::string budget_json(const Options& opt) {
	std::ostringstream ss;
	ss << "{\"threads\":" << opt.threads << ",\"addresses\":" << opt.addresses
	   << ",\"dom\":" << opt.dom << ",\"steps\":" << opt.steps
	   << ",\"frees\":" << (opt.frees ? "true" : "false")
	   << ",\"realloc\":" << (opt.realloc ? "true" : "false") << ",\"jobs\":" << opt.jobs << "}";
	return ss.str();
}

int fail_usage(const std::string& msg) {
	std::cerr << "error: " << msg << "\n";
	return 2;
}

smrtc_program* load_program(const Options& opt, int& rc) {
	std::string text;
	try {
		text = slurp(opt.program_file);
	} catch (const std::exception& e) {
		rc = fail_usage(e.what());
		return nullptr;
	}
	smrtc_program* prog = nullptr;
	StringGuard err;
	if (smrtc_program_parse(text.c_str(), &prog, &err.s) != SMRTC_OK) {
		rc = fail_usage(err.s ? err.s : "parse error");
		return nullptr;
	}
	return prog;
}

smrtc_automaton* load_automaton(const Options& opt, int& rc) {
	std::string spec = opt.smr;
	std::ifstream probe(spec);
	if (probe) spec = slurp(spec);
	smrtc_automaton* autom = nullptr;
	StringGuard err;
	if (smrtc_automaton_load(spec.c_str(), opt.no_base ? 0 : 1, &autom, &err.s) != SMRTC_OK) {
		rc = fail_usage(err.s ? err.s : "automaton error");
		return nullptr;
	}
	return autom;
}

int run_typecheck(const Options& opt) {
	int rc = 0;
	smrtc_program* prog = load_program(opt, rc);
	if (!prog) return rc;
	smrtc_automaton* autom = load_automaton(opt, rc);
	if (!autom) {
		smrtc_program_free(prog);
		return rc;
	}

	int exit_code = 0;
	if (opt.do_repair) {
		StringGuard text, log, err;
		if (smrtc_repair(prog, autom, budget_json(opt).c_str(), opt.max_rounds, &text.s, &log.s,
		                 &err.s) != SMRTC_OK) {
			exit_code = fail_usage(err.s ? err.s : "repair error");
		} else {
			bool repaired = text.s && *text.s;
			if (opt.json) {
				write_out(opt, std::string("{\"repaired\":") + (repaired ? "true" : "false") + "}");
				std::cerr << log.s;
			} else {
				std::cerr << log.s;
				if (repaired) write_out(opt, text.s);
			}
			exit_code = repaired ? 0 : 1;
		}
	} else {
		StringGuard report, err;
		if (smrtc_typecheck(prog, autom, &report.s, &err.s) != SMRTC_OK) {
			exit_code = fail_usage(err.s ? err.s : "typecheck error");
		} else {
			std::string r = report.s;
			bool ok = r.find("\"verdict\": \"ok\"") != std::string::npos;
			if (opt.json) write_out(opt, r);
			else {
				if (ok) write_out(opt, "typecheck: ok");
				else write_out(opt, "typecheck: fail\n" + r);
			}
			exit_code = ok ? 0 : 1;
		}
	}
	smrtc_automaton_free(autom);
	smrtc_program_free(prog);
	return exit_code;
}

int run_instrument(const Options& opt) {
	int rc = 0;
	smrtc_program* prog = load_program(opt, rc);
	if (!prog) return rc;
	StringGuard text;
	int exit_code = 0;
	if (smrtc_instrument(prog, &text.s) != SMRTC_OK) exit_code = fail_usage("instrument error");
	else write_out(opt, text.s);
	smrtc_program_free(prog);
	return exit_code;
}

int run_explore(const Options& opt) {
	int rc = 0;
	smrtc_program* prog = load_program(opt, rc);
	if (!prog) return rc;
	smrtc_automaton* autom = load_automaton(opt, rc);
	if (!autom) {
		smrtc_program_free(prog);
		return rc;
	}
	StringGuard report, err;
	int exit_code = 0;
	if (smrtc_explore(prog, autom, budget_json(opt).c_str(), opt.mode.c_str(), &report.s,
	                  &err.s) != SMRTC_OK) {
		exit_code = fail_usage(err.s ? err.s : "explore error");
	} else {
		std::string r = report.s;
		write_out(opt, r);
		exit_code = r.find("\"verdict\": \"clean\"") != std::string::npos ? 0 : 1;
	}
	smrtc_automaton_free(autom);
	smrtc_program_free(prog);
	return exit_code;
}

int run_automaton(const Options& opt) {
	int rc = 0;
	smrtc_automaton* autom = load_automaton(opt, rc);
	if (!autom) return rc;
	StringGuard info;
	int exit_code = 0;
	bool audit = opt.automaton_op == "audit";
	if (smrtc_automaton_info(autom, audit ? 1 : 0, &info.s) != SMRTC_OK) {
		exit_code = fail_usage("automaton error");
	} else if (opt.automaton_op == "safeloc" && !opt.json) {
		// extract just the safeloc list for a quick look
		std::string s = info.s;
		auto from = s.find("\"safeloc\"");
		auto to = s.find("]", from);
		write_out(opt, "safeloc: " + s.substr(from + 11, to - from - 10));
	} else {
		write_out(opt, info.s);
	}
	smrtc_automaton_free(autom);
	return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"guarantee-type checker for lock-free data structures with SMR"};
	app.require_subcommand(1);
	Options opt;

	auto add_common = [&](CLI::App* cmd, bool with_program) {
		if (with_program)
			cmd->add_option("--program", opt.program_file, "program file")->required();
		cmd->add_option("--smr", opt.smr, "built-in automaton name or .smr file");
		cmd->add_flag("--no-base", opt.no_base, "skip the product with the base automaton");
		cmd->add_flag("--json", opt.json, "machine-readable output");
		cmd->add_option("--out", opt.out_file, "write output to a file");
		cmd->add_option("--threads", opt.threads, "exploration thread count");
		cmd->add_option("--addresses", opt.addresses, "address pool size");
		cmd->add_option("--steps", opt.steps, "exploration step bound");
		cmd->add_option("--dom", opt.dom, "data domain size");
		cmd->add_option("--jobs", opt.jobs, "worker threads for exploration");
	};

	auto* tc = app.add_subcommand("typecheck", "run the type inference");
	add_common(tc, true);
	tc->add_flag("--repair", opt.do_repair, "attempt annotation repair on failure");
	tc->add_option("--max-rounds", opt.max_rounds, "repair rounds before giving up");

	auto* ins = app.add_subcommand("instrument", "emit the assertion instrumentation");
	add_common(ins, true);

	auto* ex = app.add_subcommand("explore", "bounded exhaustive exploration");
	add_common(ex, true);
	ex->add_option("--mode", opt.mode, "prf | invariants | asserts");
	ex->add_flag("--frees", opt.frees, "allow environment frees (X = Adr)");
	ex->add_flag("--realloc", opt.realloc, "allow reallocation of freed addresses (Y = Adr)");

	auto* au = app.add_subcommand("automaton", "inspect an SMR automaton");
	au->add_option("op", opt.automaton_op, "info | safeloc | audit");
	add_common(au, false);

	auto* rep = app.add_subcommand("repair", "repair annotations of a failing program");
	add_common(rep, true);
	rep->add_option("--max-rounds", opt.max_rounds, "repair rounds before giving up");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	if (tc->parsed()) return run_typecheck(opt);
	if (ins->parsed()) return run_instrument(opt);
	if (ex->parsed()) return run_explore(opt);
	if (au->parsed()) return run_automaton(opt);
	if (rep->parsed()) {
		opt.do_repair = true;
		return run_typecheck(opt);
	}
	return 2;
}
