#pragma once

#include <stdexcept>
#include <string>

#include "ast.hpp"

namespace smrtc {

struct ParseError : std::runtime_error {
	SourceLoc loc;
	ParseError(SourceLoc at, const std::string& msg)
	    : std::runtime_error("parse error at " + std::to_string(at.line) + ":" + std::to_string(at.column) + ": " + msg), loc(at) {}
};

// Parses the program DSL. Performs well-formedness checks: declared variables,
// angels local-only, balanced atomic blocks (no nesting), angel allocation
// dominating every angel use.
Program parse_program(const std::string& text);

std::string pretty_print(const Program& prog);

// Wraps every primitive command in an atomic block (unless already inside
// one) and in skip padding `(skip; com); skip`. Idempotent.
Program preprocess(const Program& prog);

// Renames all non-shared variables var -> var_<t>.
Program thread_index(const Program& prog, int t);

// Multiset of primitive commands ignoring skips and atomic brackets; used by
// tests to check preprocess only adds wrappers.
std::vector<std::string> command_multiset(const Program& prog);

}  // namespace smrtc
