#include "types.hpp"

#include <algorithm>
#include <sstream>

namespace smrtc {

namespace {

std::vector<std::pair<int, int>> compute_interference(const SmrAutomaton& o) {
	std::vector<std::pair<int, int>> edges;
	for (const auto& t : o.transitions) {
		if (t.src == t.dst) continue;
		SatQuery q{&o, t.event, {}, std::nullopt};
		if (o.events[t.event].kind != EventKind::Free) q.thread_is_zt = false;
		if (satisfiable(q, t.guard)) edges.push_back({t.src, t.dst});
	}
	return edges;
}

std::string constraints_key(const std::vector<ParamConstraint>& cs) {
	std::string key;
	for (const auto& c : cs) {
		key += static_cast<char>('0' + static_cast<int>(c.kind));
		if (c.kind == ParamConstraint::EqLit) key += std::to_string(c.lit) + ".";
	}
	return key;
}

}  // namespace

TypeContext::TypeContext(const SmrAutomaton& o) : o_(o) {
	if (o_.n_locations() > 62)
		throw AutomatonError("automaton too large for the location bitset");
	all_ = o_.all_locations();
	active_ = o_.active_set() | o_.accepting_set();
	safe_ = safe_locations(o_);
	interference_ = compute_interference(o_);
	empty_ = make(0, all_);
	bottom_ = make(FLAGS_AL | FlagS, 0);
}

LocSet TypeContext::closure(LocSet l) const {
	auto it = cl_cache_.find(l);
	if (it != cl_cache_.end()) return it->second;
	LocSet out = l;
	bool changed = true;
	while (changed) {
		changed = false;
		for (auto [src, dst] : interference_) {
			if (loc_in(out, src) && !loc_in(out, dst)) {
				out |= loc_bit(dst);
				changed = true;
			}
		}
	}
	cl_cache_[l] = out;
	return out;
}

LocSet TypeContext::largest_closed(LocSet l) const {
	auto it = lcs_cache_.find(l);
	if (it != lcs_cache_.end()) return it->second;
	LocSet out = l;
	bool changed = true;
	while (changed) {
		changed = false;
		for (auto [src, dst] : interference_) {
			if (loc_in(out, src) && !loc_in(out, dst)) {
				out &= ~loc_bit(src);
				changed = true;
			}
		}
	}
	lcs_cache_[l] = out;
	return out;
}

LocSet TypeContext::post(const EventInstance& ev, LocSet from) const {
	if (ev.event < 0) return from;
	auto key = std::make_tuple(ev.event, constraints_key(ev.constraints), from);
	auto it = post_cache_.find(key);
	if (it != post_cache_.end()) return it->second;
	LocSet out = post_image(o_, ev.event, ev.constraints, from);
	post_cache_[key] = out;
	return out;
}

LocSet TypeContext::flag_locs(std::uint8_t flags) const {
	LocSet out = all_;
	if (flags & FLAGS_AL) out &= active_;
	if (flags & FlagS) out &= safe_;
	return out;
}

CanonicalType TypeContext::make(std::uint8_t flags, LocSet custom) const {
	LocSet lset = flag_locs(flags) & custom;
	std::uint8_t out = flags & FLAGS_AL;
	bool valid = flags != 0;
	if (valid && (lset & ~safe_) == 0) out |= FlagS;
	CanonicalType t;
	t.flags = out;
	t.custom = closure(lset);
	t.locs = flag_locs(out) & t.custom;
	// canonicalization keeps Locs: closure(lset) /\ flag locations == lset
	return t;
}

bool TypeContext::leq(const CanonicalType& a, const CanonicalType& b) const {
	std::uint8_t al_a = a.flags & FLAGS_AL, al_b = b.flags & FLAGS_AL;
	if ((al_b & ~al_a) != 0) return false;
	if (is_valid(b) && !is_valid(a)) return false;
	return (a.locs & ~b.locs) == 0;
}

CanonicalType TypeContext::join(const CanonicalType& a, const CanonicalType& b) const {
	std::uint8_t al = a.flags & b.flags & FLAGS_AL;
	bool valid = is_valid(a) && is_valid(b);
	LocSet u = a.locs | b.locs;
	std::uint8_t flags = al;
	// a valid upper bound needs S, which is representable only inside SafeLoc;
	// otherwise validity is lost at the join
	if (valid && (u & ~safe_) == 0) flags |= FlagS;
	return make(flags, closure(u));
}

CanonicalType TypeContext::meet(const CanonicalType& a, const CanonicalType& b) const {
	std::uint8_t al = (a.flags | b.flags) & FLAGS_AL;
	bool valid = is_valid(a) || is_valid(b);
	std::uint8_t flags = al != 0 ? al : static_cast<std::uint8_t>(valid ? FlagS : 0);
	LocSet inter = a.locs & b.locs;
	LocSet fl = flag_locs(flags);
	LocSet widest = largest_closed(inter | (all_ & ~fl));
	return make(flags, widest);
}

CanonicalType TypeContext::transformer(const CanonicalType& t, const EventInstance& ev) const {
	if (ev.event < 0) return t;
	LocSet p = post(ev, t.locs);
	std::uint8_t flags = 0;
	if ((p & ~active_) == 0) flags |= t.flags & FLAGS_AL;
	if (is_valid(t) && (p & ~safe_) == 0) flags |= FlagS;
	return make(flags, closure(p));
}

bool TypeContext::transformer_holds(const CanonicalType& t, const EventInstance& ev,
                                    const CanonicalType& t2) const {
	LocSet p = ev.event < 0 ? t.locs : post(ev, t.locs);
	if ((p & ~t2.locs) != 0) return false;
	if (is_valid(t2) && !is_valid(t)) return false;
	return ((t2.flags & FLAGS_AL) & ~(t.flags & FLAGS_AL)) == 0;
}

std::vector<LocSet> TypeContext::enumerate_closed_sets() const {
	int n = o_.n_locations();
	if (n > 20) throw AutomatonError("closed-set enumeration is for small automata only");
	std::vector<LocSet> out;
	for (LocSet l = 0; l <= all_; l++)
		if (closure(l) == l) out.push_back(l);
	return out;
}

std::vector<CanonicalType> TypeContext::enumerate_types() const {
	std::vector<CanonicalType> out;
	auto push = [&](const CanonicalType& t) {
		if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
	};
	for (LocSet c : enumerate_closed_sets()) {
		for (std::uint8_t flags : {std::uint8_t(0), std::uint8_t(FlagL), std::uint8_t(FlagA),
		                           std::uint8_t(FlagA | FlagL), std::uint8_t(FlagS),
		                           std::uint8_t(FlagL | FlagS), std::uint8_t(FlagA | FlagS),
		                           std::uint8_t(FlagA | FlagL | FlagS)}) {
			push(make(flags, c));
		}
	}
	std::sort(out.begin(), out.end());
	return out;
}

std::string TypeContext::describe(const CanonicalType& t) const {
	std::ostringstream out;
	out << "{";
	bool first = true;
	auto emit = [&](const char* s) {
		if (!first) out << ",";
		out << s;
		first = false;
	};
	if (t.flags & FlagA) emit("A");
	if (t.flags & FlagL) emit("L");
	if (t.flags & FlagS) emit("S");
	if (t.custom != all_) {
		if (!first) out << ",";
		out << "E[";
		bool f2 = true;
		for (int l = 0; l < o_.n_locations(); l++) {
			if (!loc_in(t.custom, l)) continue;
			if (!f2) out << " ";
			out << o_.loc_names[l];
			f2 = false;
		}
		out << "]";
		first = false;
	}
	out << "}";
	return out.str();
}

std::vector<std::string> TypeContext::loc_names(LocSet l) const {
	std::vector<std::string> out;
	for (int i = 0; i < o_.n_locations(); i++)
		if (loc_in(l, i)) out.push_back(o_.loc_names[i]);
	return out;
}

// ------------------------------------------------------------------------ env

TypeEnv initial_env(const TypeContext& ctx, const VarUniverse& u) {
	TypeEnv env;
	env.types.assign(u.size(), ctx.empty_type());
	return env;
}

TypeEnv bottom_env(const TypeContext& ctx, const VarUniverse& u) {
	TypeEnv env;
	env.types.assign(u.size(), ctx.bottom_type());
	return env;
}

TypeEnv top_env() {
	TypeEnv env;
	env.top = true;
	return env;
}

bool env_leq(const TypeContext& ctx, const TypeEnv& a, const TypeEnv& b) {
	if (b.top) return true;
	if (a.top) return false;
	if (a.types.size() != b.types.size())
		throw std::invalid_argument("env_leq: domain mismatch");
	for (std::size_t i = 0; i < a.types.size(); i++)
		if (!ctx.leq(a.types[i], b.types[i])) return false;
	return true;
}

TypeEnv env_join(const TypeContext& ctx, const TypeEnv& a, const TypeEnv& b) {
	if (a.top || b.top) return top_env();
	if (a.types.size() != b.types.size())
		throw std::invalid_argument("env_join: domain mismatch");
	TypeEnv out;
	out.types.reserve(a.types.size());
	for (std::size_t i = 0; i < a.types.size(); i++)
		out.types.push_back(ctx.join(a.types[i], b.types[i]));
	return out;
}

TypeEnv rm_transient(const TypeContext& ctx, const VarUniverse& u, const TypeEnv& env) {
	if (env.top) return env;
	TypeEnv out;
	out.types.reserve(env.types.size());
	for (std::size_t i = 0; i < env.types.size(); i++) {
		const auto& t = env.types[i];
		if (u.is_shared[i]) out.types.push_back(ctx.empty_type());
		else out.types.push_back(ctx.make(t.flags & ~FlagA, t.custom));
	}
	return out;
}

}  // namespace smrtc
