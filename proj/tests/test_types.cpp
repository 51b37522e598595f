#include <doctest.h>

#include <set>

#include "types.hpp"

using namespace smrtc;

namespace {

struct Fixture {
	SmrAutomaton prod = load_automaton("ebr", true);
	TypeContext ctx{prod};

	int loc(const std::string& name) const {
		for (int i = 0; i < prod.n_locations(); i++)
			if (prod.loc_names[i] == name) return i;
		REQUIRE(false);
		return -1;
	}
	LocSet bits(std::initializer_list<const char*> names) const {
		LocSet s = 0;
		for (const char* n : names) s |= loc_bit(loc(n));
		return s;
	}
	EventInstance exit_leaveq() const {
		EventInstance ev;
		ev.event = prod.find_event("leaveQ", EventKind::Exit);
		ev.constraints = {{ParamConstraint::EqZt, 0}};
		return ev;
	}
	EventInstance enter_enterq() const {
		EventInstance ev;
		ev.event = prod.find_event("enterQ", EventKind::Enter);
		ev.constraints = {{ParamConstraint::EqZt, 0}};
		return ev;
	}
	// enter retire(x) with the transformer tracking the argument
	EventInstance retire_tracked() const {
		EventInstance ev;
		ev.event = prod.find_event("retire", EventKind::Enter);
		ev.constraints = {{ParamConstraint::EqZt, 0}, {ParamConstraint::EqZa, 0}};
		return ev;
	}
	CanonicalType e_acc() const {
		return ctx.make(0, ctx.closure(bits({"(Init,Protected)", "(Retired,Protected)",
		                                     "(Retired,Retired)", "ACC"})));
	}
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "Locs of the empty type is every location") {
	CHECK(ctx.locs(ctx.empty_type()) == prod.all_locations());
}

TEST_CASE_FIXTURE(Fixture, "Locs(E_acc and A) matches the worked example") {
	CanonicalType t = ctx.meet(e_acc(), ctx.flag_type(FlagA));
	CHECK(ctx.locs(t) == bits({"(Init,Protected)", "ACC"}));
}

TEST_CASE_FIXTURE(Fixture, "Locs of a conjunction with itself is unchanged") {
	CanonicalType t = e_acc();
	CHECK(ctx.locs(ctx.meet(t, t)) == ctx.locs(t));
	CHECK(ctx.meet(t, t) == t);
}

TEST_CASE_FIXTURE(Fixture, "isValid") {
	CHECK(TypeContext::is_valid(ctx.flag_type(FlagS)));
	CHECK(!TypeContext::is_valid(ctx.empty_type()));
	CHECK(TypeContext::is_valid(ctx.flag_type(FlagA | FlagL)));
}

TEST_CASE_FIXTURE(Fixture, "transformer: exit leaveQ yields the access guarantee") {
	CanonicalType t = ctx.transformer(ctx.empty_type(), exit_leaveq());
	CHECK(t.flags == 0);
	CHECK(ctx.locs(t) == ctx.locs(e_acc()));
	CHECK(t == e_acc());
}

TEST_CASE_FIXTURE(Fixture, "meet with A saturates E_acc with S") {
	CanonicalType t = ctx.meet(e_acc(), ctx.flag_type(FlagA));
	CHECK((t.flags & FlagS) != 0);
	CHECK((ctx.locs(t) & ~ctx.safe_loc()) == 0);
	CHECK(ctx.transformer_holds(t, EventInstance{}, t));
}

TEST_CASE_FIXTURE(Fixture, "transformer is the identity on epsilon") {
	for (const auto& t : ctx.enumerate_types()) CHECK(ctx.transformer(t, EventInstance{}) == t);
}

TEST_CASE_FIXTURE(Fixture, "enterQ strips the safety guarantee") {
	CanonicalType t = ctx.meet(e_acc(), ctx.flag_type(FlagA));
	CanonicalType after = ctx.transformer(t, enter_enterq());
	CHECK((after.flags & FlagS) == 0);
}

TEST_CASE_FIXTURE(Fixture, "retire keeps S but drops A for the tracked pointer") {
	CanonicalType t = ctx.meet(e_acc(), ctx.flag_type(FlagA));
	CanonicalType after = ctx.transformer(t, retire_tracked());
	CHECK((after.flags & FlagA) == 0);
	CHECK((after.flags & FlagS) != 0);
}

TEST_CASE_FIXTURE(Fixture, "transformer_holds examples") {
	CHECK(ctx.transformer_holds(ctx.empty_type(), exit_leaveq(), e_acc()));
	// SMR steps cannot establish A
	CHECK(!ctx.transformer_holds(ctx.empty_type(), EventInstance{}, ctx.flag_type(FlagA)));
	for (const auto& t : ctx.enumerate_types()) CHECK(ctx.transformer_holds(t, EventInstance{}, t));
}

TEST_CASE_FIXTURE(Fixture, "canonicalization is idempotent and Locs-stable") {
	for (const auto& t : ctx.enumerate_types()) {
		CanonicalType again = ctx.make(t.flags, t.custom);
		CHECK(again == t);
		CHECK(ctx.locs(again) == ctx.locs(t));
		// S-saturation soundness
		if (t.flags & FlagS) CHECK((ctx.locs(t) & ~ctx.safe_loc()) == 0);
		// custom stays interference closed
		CHECK(ctx.closure(t.custom) == t.custom);
	}
}

TEST_CASE_FIXTURE(Fixture, "leq is a partial order with antisymmetry") {
	auto types = ctx.enumerate_types();
	for (const auto& a : types) {
		CHECK(ctx.leq(a, a));
		for (const auto& b : types) {
			if (ctx.leq(a, b) && ctx.leq(b, a)) CHECK(a == b);
			for (const auto& c : types)
				if (ctx.leq(a, b) && ctx.leq(b, c)) CHECK(ctx.leq(a, c));
		}
	}
}

TEST_CASE_FIXTURE(Fixture, "join and meet satisfy the lattice laws exhaustively") {
	auto types = ctx.enumerate_types();
	CHECK(types.size() > 20);
	for (const auto& a : types) {
		CHECK(ctx.join(a, a) == a);
		CHECK(ctx.meet(a, a) == a);
		for (const auto& b : types) {
			auto j = ctx.join(a, b);
			auto m = ctx.meet(a, b);
			CHECK(j == ctx.join(b, a));
			CHECK(m == ctx.meet(b, a));
			// bounds
			CHECK(ctx.leq(a, j));
			CHECK(ctx.leq(b, j));
			CHECK(ctx.leq(m, a));
			CHECK(ctx.leq(m, b));
			// absorption
			CHECK(ctx.join(a, ctx.meet(a, b)) == a);
			CHECK(ctx.meet(a, ctx.join(a, b)) == a);
			// least upper bound / greatest lower bound
			for (const auto& c : types) {
				if (ctx.leq(a, c) && ctx.leq(b, c)) CHECK(ctx.leq(j, c));
				if (ctx.leq(c, a) && ctx.leq(c, b)) CHECK(ctx.leq(c, m));
			}
		}
	}
}

TEST_CASE_FIXTURE(Fixture, "join/meet associativity on sampled triples") {
	auto types = ctx.enumerate_types();
	for (std::size_t i = 0; i < types.size(); i += 3)
		for (std::size_t j = 0; j < types.size(); j += 4)
			for (std::size_t k = 0; k < types.size(); k += 5) {
				const auto &a = types[i], &b = types[j], &c = types[k];
				CHECK(ctx.join(a, ctx.join(b, c)) == ctx.join(ctx.join(a, b), c));
				CHECK(ctx.meet(a, ctx.meet(b, c)) == ctx.meet(ctx.meet(a, b), c));
			}
}

TEST_CASE_FIXTURE(Fixture, "meet handles non-closed location intersections") {
	// intersections of two interference-closed sets are closed again (the
	// closure is edge-local), so a non-closed intersection only arises when a
	// base flag contributes its non-closed component
	for (LocSet c1 : ctx.enumerate_closed_sets())
		for (LocSet c2 : ctx.enumerate_closed_sets())
			CHECK(ctx.closure(c1 & c2) == (c1 & c2));

	CanonicalType t1 = ctx.flag_type(FlagA);
	CanonicalType t2 = e_acc();
	LocSet inter = ctx.locs(t1) & ctx.locs(t2);
	CHECK(ctx.closure(inter) != inter);  // A's component is not closed
	CanonicalType m = ctx.meet(t1, t2);
	CHECK((ctx.locs(m) & ~inter) == 0);
	// the custom component must be closed even though the intersection is not
	CHECK(ctx.closure(m.custom) == m.custom);
	CHECK(m.custom == ctx.closure(ctx.locs(m)));
}

TEST_CASE_FIXTURE(Fixture, "transformer computes the least post type") {
	auto types = ctx.enumerate_types();
	std::vector<EventInstance> events = {exit_leaveq(), enter_enterq(), retire_tracked(),
	                                     EventInstance{}};
	for (const auto& t : types) {
		for (const auto& ev : events) {
			CanonicalType best = ctx.transformer(t, ev);
			CHECK(ctx.transformer_holds(t, ev, best));
			for (const auto& cand : types)
				if (ctx.transformer_holds(t, ev, cand)) CHECK(ctx.leq(best, cand));
		}
	}
}

TEST_CASE_FIXTURE(Fixture, "rm_transient") {
	VarUniverse u;
	u.names = {"Head", "head"};
	u.is_angel = {false, false};
	u.is_shared = {true, false};
	TypeEnv env = initial_env(ctx, u);
	env.types[0] = ctx.flag_type(FlagA);
	env.types[1] = ctx.meet(e_acc(), ctx.flag_type(FlagA));
	REQUIRE((env.types[1].flags & FlagS) != 0);
	TypeEnv out = rm_transient(ctx, u, env);
	CHECK(out.types[0] == ctx.empty_type());   // shared loses everything
	CHECK((out.types[1].flags & FlagA) == 0);  // locals lose A
	CHECK((out.types[1].flags & FlagS) != 0);  // S persists
	// all-empty environment is a fixpoint
	TypeEnv empty = initial_env(ctx, u);
	CHECK(rm_transient(ctx, u, empty) == empty);
	// L on a local survives
	env.types[1] = ctx.flag_type(FlagL);
	CHECK((rm_transient(ctx, u, env).types[1].flags & FlagL) != 0);
}

TEST_CASE_FIXTURE(Fixture, "environment order") {
	VarUniverse u;
	u.names = {"p"};
	u.is_angel = {false};
	u.is_shared = {false};
	TypeEnv env = initial_env(ctx, u);
	CHECK(env_leq(ctx, env, top_env()));
	CHECK(env_leq(ctx, env, env));
	CHECK(!env_leq(ctx, top_env(), env));
	CHECK(env_leq(ctx, top_env(), top_env()));
	auto types = ctx.enumerate_types();
	for (std::size_t i = 0; i < types.size(); i += 2) {
		for (std::size_t j = 0; j < types.size(); j += 3) {
			TypeEnv a = env, b = env;
			a.types[0] = types[i];
			b.types[0] = types[j];
			if (env_leq(ctx, a, b) && env_leq(ctx, b, a)) CHECK(a == b);
		}
	}
}
