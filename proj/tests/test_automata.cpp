#include <doctest.h>

#include <functional>
#include <set>
#include <random>

#include "automaton.hpp"
#include "types.hpp"

using namespace smrtc;

namespace {

int loc(const SmrAutomaton& o, const std::string& name) {
	for (int i = 0; i < o.n_locations(); i++)
		if (o.loc_names[i] == name) return i;
	REQUIRE(false);
	return -1;
}

LocSet bits(const SmrAutomaton& o, std::initializer_list<const char*> names) {
	LocSet s = 0;
	for (const char* n : names) s |= loc_bit(loc(o, n));
	return s;
}

Event retire(int t, int a) { return Event{"retire", EventKind::Enter, {t, 100 + a}}; }
Event free_of(int a) { return Event{"free", EventKind::Free, {100 + a}}; }

History random_history(std::mt19937& rng, const SmrAutomaton& o, int length) {
	History h;
	std::uniform_int_distribution<int> pick_event(0, static_cast<int>(o.events.size()) - 1);
	std::uniform_int_distribution<int> pick_thread(0, 1);
	std::uniform_int_distribution<int> pick_addr(0, 1);
	std::uniform_int_distribution<int> pick_data(0, 1);
	for (int i = 0; i < length; i++) {
		const auto& sig = o.events[pick_event(rng)];
		Event e;
		e.func = sig.name;
		e.kind = sig.kind;
		for (ParamType pt : sig.params) {
			if (pt == ParamType::Thread) e.values.push_back(pick_thread(rng));
			else if (pt == ParamType::Address) e.values.push_back(100 + pick_addr(rng));
			else e.values.push_back(pick_data(rng));
		}
		h.push_back(std::move(e));
	}
	return h;
}

const std::string TRIVIAL_SMR = R"(
automaton Trivial {
	vars zt: thread, za: address;
	events enter retire(t, a), exit retire(t), free(a);
	locations T0 init;
}
)";

}  // namespace

TEST_CASE("base automaton matches the figure") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	CHECK(base.n_locations() == 3);
	CHECK(base.accepting_set() == bits(base, {"Bad"}));
	CHECK(base.elision);
	// two non-accepting locations
	int nonacc = 0;
	for (int l = 0; l < base.n_locations(); l++)
		if (!base.accepting[l]) nonacc++;
	CHECK(nonacc == 2);
}

TEST_CASE("ebr automaton has variables zt and za") {
	auto ebr = parse_automaton(builtin_automaton_text("ebr"));
	CHECK(ebr.n_locations() == 4);
	REQUIRE(ebr.zt >= 0);
	REQUIRE(ebr.za >= 0);
	CHECK(ebr.vars[ebr.zt].type == ParamType::Thread);
	CHECK(ebr.vars[ebr.za].type == ParamType::Address);
}

TEST_CASE("hp2 automaton has 17 locations") {
	auto hp = parse_automaton(builtin_automaton_text("hp2"));
	CHECK(hp.n_locations() == 17);
}

TEST_CASE("accepting-state assumption is validated") {
	CHECK_THROWS_AS(parse_automaton(R"(
automaton Bad1 {
	vars zt: thread, za: address;
	events enter retire(t, a), free(a);
	locations L0 init, LF accepting;
	L0 -> LF on enter retire(t, a) when a == za;
}
)"), AutomatonError);
	CHECK_THROWS_AS(parse_automaton(R"(
automaton Bad2 {
	vars zt: thread, za: address;
	events enter retire(t, a), free(a);
	locations L0 init, LF accepting;
	L0 -> LF on free(a) when a == za;
	LF -> L0 on free(a) when a == za;
}
)"), AutomatonError);
}

TEST_CASE("guards cannot compare two parameters") {
	CHECK_THROWS_AS(parse_automaton(R"(
automaton Bad3 {
	vars zt: thread, za: address;
	events enter retire(t, a), free(a);
	locations L0 init;
	L0 -> L0 on enter retire(t, a) when t == a;
}
)"), AutomatonError);
}

TEST_CASE("run_history on base") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	std::vector<int> phi = {0, 100};  // zt -> thread 0, za -> address 0

	SUBCASE("retire of the tracked address moves to Retired") {
		CHECK(run_history(base, phi, {retire(1, 0)}) == bits(base, {"Retired"}));
	}
	SUBCASE("empty history stays initial") {
		CHECK(run_history(base, phi, {}) == bits(base, {"Init"}));
	}
	SUBCASE("spurious free is forbidden") {
		CHECK(run_history(base, phi, {free_of(0)}) == bits(base, {"Bad"}));
		CHECK(!history_in_spec(base, phi, {free_of(0)}));
		CHECK(history_in_spec(base, phi, {retire(1, 0), free_of(0)}));
	}
	SUBCASE("other addresses take the implicit self loop") {
		CHECK(run_history(base, phi, {retire(1, 1)}) == bits(base, {"Init"}));
	}
}

TEST_CASE("product of base and ebr matches the cross-product figure") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	auto ebr = parse_automaton(builtin_automaton_text("ebr"));
	auto prod = product(base, ebr);
	// five non-accepting reachable pairs plus the collapsed accepting class
	CHECK(prod.n_locations() == 6);
	CHECK(prod.accepting_set() == bits(prod, {"ACC"}));
	std::set<std::string> names(prod.loc_names.begin(), prod.loc_names.end());
	CHECK(names.count("(Init,Idle)"));
	CHECK(names.count("(Init,Protected)"));
	CHECK(names.count("(Retired,Idle)"));
	CHECK(names.count("(Retired,Protected)"));
	CHECK(names.count("(Retired,Retired)"));
}

TEST_CASE("product with the trivial one-location automaton is isomorphic") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	auto triv = parse_automaton(TRIVIAL_SMR);
	auto prod = product(base, triv);
	CHECK(prod.n_locations() == base.n_locations());
	std::mt19937 rng(42);
	for (int i = 0; i < 400; i++) {
		History h = random_history(rng, base, 5);
		for (int t = 0; t < 2; t++)
			for (int a = 0; a < 2; a++) {
				std::vector<int> phi = {t, 100 + a};
				CHECK(history_in_spec(base, phi, h) == history_in_spec(prod, phi, h));
			}
	}
}

TEST_CASE("product intersects the specifications") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	auto ebr = parse_automaton(builtin_automaton_text("ebr"));
	auto prod = product(base, ebr);
	std::mt19937 rng(7);
	int rejected = 0;
	for (int i = 0; i < 1000; i++) {
		History h = random_history(rng, prod, 6);
		for (int t = 0; t < 2; t++)
			for (int a = 0; a < 2; a++) {
				std::vector<int> phi2 = {t, 100 + a};
				bool in_base = history_in_spec(base, phi2, h);
				bool in_ebr = history_in_spec(ebr, phi2, h);
				bool in_prod = history_in_spec(prod, phi2, h);
				CHECK(in_prod == (in_base && in_ebr));
				if (!in_prod) rejected++;
			}
	}
	CHECK(rejected > 0);  // the sample exercises both outcomes
}

TEST_CASE("post_image on base") {
	auto base = parse_automaton(builtin_automaton_text("base"));
	int ev_retire = base.find_event("retire", EventKind::Enter);
	LocSet init = bits(base, {"Init"});

	SUBCASE("tracked argument forces the move") {
		std::vector<ParamConstraint> cs = {{ParamConstraint::EqZt, 0}, {ParamConstraint::EqZa, 0}};
		CHECK(post_image(base, ev_retire, cs, init) == bits(base, {"Retired"}));
	}
	SUBCASE("unconstrained argument keeps both outcomes") {
		std::vector<ParamConstraint> cs = {{ParamConstraint::EqZt, 0}};
		CHECK(post_image(base, ev_retire, cs, init) == bits(base, {"Init", "Retired"}));
	}
}

TEST_CASE("post_image of exit leaveQ reaches Locs(E_acc)") {
	auto prod = load_automaton("ebr", true);
	int ev = prod.find_event("leaveQ", EventKind::Exit);
	std::vector<ParamConstraint> cs = {{ParamConstraint::EqZt, 0}};
	LocSet post = post_image(prod, ev, cs, prod.all_locations());
	// all minus the two "not yet left Q" locations
	CHECK(post == (prod.all_locations() & ~bits(prod, {"(Init,Idle)", "(Retired,Idle)"})));
}

TEST_CASE("interference closure basics") {
	auto prod = load_automaton("ebr", true);
	CHECK(interference_closure(prod, 0) == 0);
	CHECK(interference_closure(prod, prod.all_locations()) == prod.all_locations());
	// closure of the protected location includes the retire interference
	LocSet cl = interference_closure(prod, bits(prod, {"(Init,Protected)"}));
	CHECK(loc_in(cl, loc(prod, "(Retired,Retired)")));
}

TEST_CASE("closure laws and brute-forced largest closed subset") {
	auto check_automaton = [&](const SmrAutomaton& o) {
		REQUIRE(o.n_locations() <= 6);
		LocSet all = o.all_locations();
		// brute force all closed subsets
		std::vector<LocSet> closed;
		for (LocSet l = 0; l <= all; l++)
			if (interference_closure(o, l) == l) closed.push_back(l);
		for (LocSet l = 0; l <= all; l++) {
			LocSet cl = interference_closure(o, l);
			CHECK((cl & l) == l);                              // extensive
			CHECK(interference_closure(o, cl) == cl);          // idempotent
			LocSet best = 0;
			for (LocSet c : closed)
				if ((c & ~l) == 0 && __builtin_popcountll(c) > __builtin_popcountll(best)) best = c;
			// union of closed sets is closed, so the largest is the union
			LocSet uni = 0;
			for (LocSet c : closed)
				if ((c & ~l) == 0) uni |= c;
			CHECK(interference_closure(o, uni) == uni);
			CHECK(largest_closed_subset(o, l) == uni);
			(void)best;
		}
		// monotonicity on sampled pairs
		for (LocSet x = 0; x <= all; x += 3)
			for (LocSet y = x; y <= all; y += 5)
				if ((x & ~y) == 0)
					CHECK((interference_closure(o, x) & ~interference_closure(o, y)) == 0);
	};
	check_automaton(parse_automaton(builtin_automaton_text("base")));
	check_automaton(parse_automaton(builtin_automaton_text("ebr")));
	check_automaton(load_automaton("ebr", true));
}

TEST_CASE("safe locations") {
	SUBCASE("base x ebr matches the shaded region") {
		auto prod = load_automaton("ebr", true);
		CHECK(safe_locations(prod) ==
		      bits(prod, {"(Init,Protected)", "(Retired,Retired)", "ACC"}));
	}
	SUBCASE("base alone protects only the accepting class") {
		auto base = parse_automaton(builtin_automaton_text("base"));
		CHECK(safe_locations(base) == bits(base, {"Bad"}));
	}
	SUBCASE("no free transitions means every location is safe") {
		auto o = parse_automaton(R"(
automaton NoFree {
	vars zt: thread, za: address;
	events enter retire(t, a), free(a);
	locations L0 init, L1;
	L0 -> L1 on enter retire(t, a) when a == za;
}
)");
		CHECK(safe_locations(o) == o.all_locations());
	}
}

TEST_CASE("run_history is insensitive to materialized self loops") {
	// adding an explicit self loop where the implicit one lives must not
	// change spec membership
	auto a = parse_automaton(builtin_automaton_text("base"));
	auto b = parse_automaton(R"(
automaton BasePlus {
	assume elision;
	vars zt: thread, za: address;
	events enter retire(t, a), exit retire(t), free(a);
	locations Init init active, Retired, Bad accepting;
	Init -> Retired on enter retire(t, a) when a == za;
	Init -> Init on enter retire(t, a) when a != za;
	Retired -> Init on free(a) when a == za;
	Init -> Bad on free(a) when a == za;
}
)");
	std::mt19937 rng(3);
	for (int i = 0; i < 500; i++) {
		History h = random_history(rng, a, 6);
		std::vector<int> phi = {0, 100};
		CHECK(history_in_spec(a, phi, h) == history_in_spec(b, phi, h));
	}
}

TEST_CASE("hp2 revocation semantics") {
	// re-protecting an index with a different address revokes that index's
	// protection; the other index's protection survives
	auto hp = load_automaton("hp2", false);
	std::vector<int> phi = {0, 100};  // zt -> 0, za -> address 0
	Event p0 = {"protect", EventKind::Enter, {0, 100, 0}};       // protect(za, 0)
	Event p0_other = {"protect", EventKind::Enter, {0, 101, 0}}; // protect(other, 0)
	Event p1 = {"protect", EventKind::Enter, {0, 100, 1}};
	Event ep = {"protect", EventKind::Exit, {0}};
	Event ret = {"retire", EventKind::Enter, {1, 100}};
	Event fr = {"free", EventKind::Free, {100}};

	// protected at 0, retired: the free is flagged
	CHECK(!history_in_spec(hp, phi, {p0, ep, ret, fr}));
	// revoking index 0 afterwards drops the guarantee
	CHECK(history_in_spec(hp, phi, {p0, ep, ret, p0_other, fr}));
	// both indices protect; revoking 0 keeps index 1's guarantee
	CHECK(!history_in_spec(hp, phi, {p0, ep, p1, ep, ret, p0_other, fr}));
	// protect issued only after the retire does not defer the free
	CHECK(history_in_spec(hp, phi, {ret, p0, ep, fr}));
}
