#include "sp.hpp"

namespace smrtc {

SafeCallTable table_from_automaton(const SmrAutomaton& o) {
	SafeCallTable t;
	t.rules = o.call_rules;
	return t;
}

bool safe_call(const SafeCallTable& table, const std::string& func, const std::vector<bool>& valid_mask) {
	return table.is_safe(func, valid_mask);
}

EventInstance event_instance(const TypeContext& ctx, const Command& com, const std::string& x,
                             bool x_is_pointer) {
	EventInstance ev;
	const auto& o = ctx.autom();
	if (com.kind == CmdKind::Exit) {
		ev.event = o.find_event(com.func, EventKind::Exit);
		ev.constraints = {ParamConstraint{ParamConstraint::EqZt, 0}};
		return ev;
	}
	if (com.kind != CmdKind::Enter) return ev;  // epsilon
	ev.event = o.find_event(com.func, EventKind::Enter);
	if (ev.event < 0) return ev;
	ev.constraints.assign(o.events[ev.event].params.size(), ParamConstraint{});
	ev.constraints[0] = ParamConstraint{ParamConstraint::EqZt, 0};
	for (std::size_t i = 0; i < com.args.size(); i++) {
		std::size_t p = i + 1;  // event parameter 0 is the thread
		if (p >= ev.constraints.size()) break;
		const auto& arg = com.args[i];
		if (arg.kind == EnterArg::Lit)
			ev.constraints[p] = ParamConstraint{ParamConstraint::EqLit, arg.lit};
		else if (arg.kind == EnterArg::Ptr && x_is_pointer && arg.name == x)
			ev.constraints[p] = ParamConstraint{ParamConstraint::EqZa, 0};
	}
	return ev;
}

namespace {

SpResult fail(const Command& com, const std::string& rule, const std::string& var,
              const std::string& msg) {
	SpResult r;
	r.env = top_env();
	r.diag = SpDiag{rule, var, msg, com.loc};
	return r;
}

SpResult ok(TypeEnv env) {
	SpResult r;
	r.env = std::move(env);
	return r;
}

}  // namespace

SpResult sp(const TypeContext& ctx, const SafeCallTable& table, const VarUniverse& u,
            const TypeEnv& env, const Command& com) {
	if (env.top) return ok(top_env());
	auto type_of = [&](const std::string& name) -> const CanonicalType& {
		int i = u.index_of(name);
		if (i < 0) throw std::invalid_argument("sp: variable '" + name + "' not in universe");
		return env.types[i];
	};
	auto with = [&](std::initializer_list<std::pair<std::string, CanonicalType>> updates) {
		TypeEnv out = env;
		for (const auto& [name, t] : updates) out.types[u.index_of(name)] = t;
		return ok(std::move(out));
	};
	auto valid = [&](const std::string& name) { return TypeContext::is_valid(type_of(name)); };
	auto drop_l = [&](const CanonicalType& t) { return ctx.make(t.flags & ~FlagL, t.custom); };

	switch (com.kind) {
		case CmdKind::Skip:
			return ok(env);

		case CmdKind::PtrAssign: {
			if (com.src_null) return with({{com.dst, ctx.empty_type()}});
			CanonicalType t = drop_l(type_of(com.src));
			return with({{com.dst, t}, {com.src, t}});
		}

		case CmdKind::PtrLoad:
			if (!valid(com.src))
				return fail(com, "assign2", com.src, com.src + " may be dangling at the dereference");
			return with({{com.dst, ctx.empty_type()}});

		case CmdKind::PtrStore: {
			if (!valid(com.dst))
				return fail(com, "assign3", com.dst, com.dst + " may be dangling at the dereference");
			if (com.src_null) return ok(env);
			return with({{com.src, drop_l(type_of(com.src))}});
		}

		case CmdKind::DataLoad:
			if (!valid(com.src))
				return fail(com, "assign5", com.src, com.src + " may be dangling at the dereference");
			return ok(env);

		case CmdKind::DataStore:
			if (!valid(com.dst))
				return fail(com, "assign6", com.dst, com.dst + " may be dangling at the dereference");
			return ok(env);

		case CmdKind::DataOp:
		case CmdKind::Assert:
			return ok(env);

		case CmdKind::Havoc:
			return with({{com.dst, ctx.empty_type()}});

		case CmdKind::Malloc: {
			int i = u.index_of(com.dst);
			if (u.is_shared[i])
				return fail(com, "malloc", com.dst, "allocations must target thread-local pointers");
			return with({{com.dst, ctx.flag_type(FlagL)}});
		}

		case CmdKind::Assume: {
			const auto& c = com.cond;
			if (c.shape != Cond::Single || c.atoms[0].kind != Atom::PtrEq) return ok(env);
			const auto& a = c.atoms[0];
			if (a.rhs == NULL_NAME) return ok(env);  // null comparisons are exempt
			// relaxed premise: one valid side rules out a relaxed pointer race
			if (!valid(a.lhs) && !valid(a.rhs))
				return fail(com, "assume1", a.lhs,
				            "assume(" + a.lhs + " == " + a.rhs + ") compares two potentially dangling pointers");
			CanonicalType m = ctx.meet(type_of(a.lhs), type_of(a.rhs));
			CanonicalType t = ctx.make(m.flags & ~FlagL, m.custom);
			return with({{a.lhs, t}, {a.rhs, t}});
		}

		case CmdKind::InvEq: {
			if (com.src_null) return ok(env);
			CanonicalType t = ctx.meet(type_of(com.dst), type_of(com.src));
			return with({{com.dst, t}, {com.src, t}});
		}

		case CmdKind::InvActive: {
			CanonicalType t = ctx.meet(type_of(com.dst), ctx.flag_type(FlagA));
			return with({{com.dst, t}});
		}

		case CmdKind::InvAngel: {
			int i = u.index_of(com.dst);
			if (u.is_shared[i]) return fail(com, "angel", com.dst, "angels must be local");
			return with({{com.dst, ctx.empty_type()}});
		}

		case CmdKind::InvMember: {
			CanonicalType t = ctx.meet(type_of(com.dst), type_of(com.src));
			return with({{com.dst, t}});
		}

		case CmdKind::Enter: {
			int ev = ctx.autom().find_event(com.func, EventKind::Enter);
			if (ev < 0)
				return fail(com, "enter", com.func, "'" + com.func + "' is not in the SMR automaton's alphabet");
			std::vector<bool> mask;
			std::vector<std::string> ptr_args;
			for (const auto& arg : com.args) {
				if (arg.kind != EnterArg::Ptr) continue;
				ptr_args.push_back(arg.name);
				mask.push_back(valid(arg.name));
			}
			if (!safe_call(table, com.func, mask)) {
				std::string culprit;
				for (std::size_t i = 0; i < mask.size(); i++)
					if (!mask[i]) { culprit = ptr_args[i]; break; }
				return fail(com, "enter", culprit,
				            "call to " + com.func + " with potentially dangling argument " + culprit);
			}
			if (com.func == "retire") {
				for (const auto& p : ptr_args)
					if (!(type_of(p).flags & FlagA))
						return fail(com, "enter", p, "retire requires the argument to be active");
			}
			TypeEnv out = env;
			for (std::size_t i = 0; i < u.size(); i++) {
				EventInstance inst = event_instance(ctx, com, u.names[i], !u.is_angel[i]);
				out.types[i] = ctx.transformer(env.types[i], inst);
			}
			return ok(std::move(out));
		}

		case CmdKind::Exit: {
			int ev = ctx.autom().find_event(com.func, EventKind::Exit);
			if (ev < 0)
				return fail(com, "exit", com.func, "'" + com.func + "' is not in the SMR automaton's alphabet");
			TypeEnv out = env;
			for (std::size_t i = 0; i < u.size(); i++) {
				EventInstance inst = event_instance(ctx, com, u.names[i], !u.is_angel[i]);
				out.types[i] = ctx.transformer(env.types[i], inst);
			}
			return ok(std::move(out));
		}
	}
	return ok(env);
}

}  // namespace smrtc
