#pragma once

#include "ast.hpp"

namespace smrtc {

// Source-to-source translation for discharging invariant annotations under a
// garbage-collected semantics: SMR calls become skips (retire feeds the
// guessed failure witness), annotations become asserts over ghost state, and
// angels become havoc'd pointers.
Program instrument(const Program& prog);

// |F(P)| / |P| in statement-tree nodes.
double size_ratio(const Program& prog);

}  // namespace smrtc
