#include "oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "parser.hpp"

namespace smrtc {

namespace {

constexpr std::int16_t SEG = -1;

// ----------------------------------------------------------------------- cfg

// Begin/end atomic are not surface commands; mark them with dedicated kinds.
enum class StepKind { Plain, Begin, End };

struct Edge {
	const Command* com;  // null for Begin/End
	StepKind kind;
	int dst;
};

struct ProcCfg {
	std::vector<std::vector<Edge>> out;
	int entry = 0;
	int exit = 0;
};

struct CfgBuilder {
	ProcCfg cfg;

	int fresh() {
		cfg.out.emplace_back();
		return static_cast<int>(cfg.out.size()) - 1;
	}
	void build(const Stmt& s, int from, int to) {
		switch (s.kind) {
			case Stmt::Com:
				cfg.out[from].push_back({&s.com, StepKind::Plain, to});
				break;
			case Stmt::Seq: {
				int cur = from;
				for (std::size_t i = 0; i < s.children.size(); i++) {
					int next = i + 1 == s.children.size() ? to : fresh();
					build(*s.children[i], cur, next);
					cur = next;
				}
				break;
			}
			case Stmt::Choice:
				for (const auto& arm : s.children) build(*arm, from, to);
				break;
			case Stmt::Loop:
				// the loop head doubles as the exit: iterate or fall through
				build(*s.children[0], from, from);
				if (from != to) epsilons.push_back({from, to});
				break;
			case Stmt::Atomic: {
				int b = fresh(), e = fresh();
				cfg.out[from].push_back({nullptr, StepKind::Begin, b});
				build(*s.children[0], b, e);
				cfg.out[e].push_back({nullptr, StepKind::End, to});
				break;
			}
		}
	}
	std::vector<std::pair<int, int>> epsilons;

	ProcCfg finish(const Stmt* body) {
		int entry = fresh();
		int exit = fresh();
		cfg.entry = entry;
		cfg.exit = exit;
		if (body) build(*body, entry, exit);
		else epsilons.push_back({entry, exit});
		// resolve epsilon edges (loop fallthrough) by merging edge lists
		bool changed = true;
		while (changed) {
			changed = false;
			for (auto [from, to] : epsilons) {
				for (const auto& e : cfg.out[to]) {
					bool present = false;
					for (const auto& f : cfg.out[from])
						if (f.com == e.com && f.dst == e.dst && f.kind == e.kind) present = true;
					if (!present) {
						cfg.out[from].push_back(e);
						changed = true;
					}
				}
			}
		}
		// a loop head that can fall through to the procedure exit terminates
		for (auto [from, to] : epsilons)
			if (to == exit) exit_aliases.insert(from);
		exit_aliases.insert(exit);
		return std::move(cfg);
	}
	std::set<int> exit_aliases;
};

}  // namespace

// ---------------------------------------------------------------------- impl

struct Explorer::Impl {
	Program prog;  // original text form kept for printing
	SmrAutomaton autom;
	Budget budget;
	SafeCallTable table;

	// per-procedure cfgs; proc index order as in prog
	std::vector<ProcCfg> cfgs;
	std::vector<std::set<int>> exit_nodes;
	int init_proc = -1;
	std::vector<int> runnable_procs;

	// slot layout
	struct Layout {
		// pointer slots: shared first, then per thread the locals of its proc
		std::vector<std::string> shared_ptrs;
		std::vector<std::string> shared_data;
		// per (thread) local slot names resolved lazily via proc tables
	};
	int n_threads_total = 0;  // runnable threads + 1 init thread
	int n_addr = 0, n_dom = 0;

	std::vector<std::string> shared_ptr_names, shared_data_names;
	// per proc: local ptr names, local data names, angel names
	struct ProcVars {
		std::vector<std::string> ptrs, datas, angels;
	};
	std::vector<ProcVars> proc_vars;

	// phi valuations for the observer: each var gets a value
	std::vector<std::vector<int>> phis;

	struct Assignment {
		std::vector<int> proc_of_thread;
	};
	std::vector<Assignment> assignments;

	// --- state ---------------------------------------------------------------
	struct State {
		std::int16_t assign = 0;
		std::vector<std::int16_t> ctrl;   // per thread; last entry is the init thread; -1 done
		std::int16_t lock = -2;           // thread index or -2
		std::vector<std::int16_t> pmem;   // shared ptr slots, then per-thread locals
		std::vector<std::int16_t> dmem;   // shared data, per-thread data, then addr data
		std::vector<std::int16_t> nextp;  // per addr: ->next
		std::vector<std::uint8_t> validv; // per pointer slot
		std::vector<std::uint8_t> validn; // per addr: ->next selector
		std::uint32_t fresh = 0, freed = 0, retired = 0;
		std::vector<std::uint64_t> obs;   // per phi
		std::vector<std::uint32_t> angel_members, angel_allowed;
		std::vector<std::uint8_t> angel_live;

		std::string encode() const {
			std::string s;
			auto put16 = [&](std::int16_t v) {
				s.push_back(static_cast<char>(v & 0xff));
				s.push_back(static_cast<char>((v >> 8) & 0xff));
			};
			put16(assign);
			for (auto v : ctrl) put16(v);
			put16(lock);
			for (auto v : pmem) put16(v);
			for (auto v : dmem) put16(v);
			for (auto v : nextp) put16(v);
			for (auto v : validv) s.push_back(static_cast<char>(v));
			for (auto v : validn) s.push_back(static_cast<char>(v));
			auto put32 = [&](std::uint32_t v) {
				for (int i = 0; i < 4; i++) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
			};
			put32(fresh);
			put32(freed);
			put32(retired);
			for (auto v : angel_members) put32(v);
			for (auto v : angel_allowed) put32(v);
			for (auto v : angel_live) s.push_back(static_cast<char>(v));
			for (auto v : obs) {
				put32(static_cast<std::uint32_t>(v));
				put32(static_cast<std::uint32_t>(v >> 32));
			}
			return s;
		}

		std::uint64_t program_hash() const {
			// everything except the observer component
			std::uint64_t h = 1469598103934665603ull;
			auto mix = [&](std::uint64_t v) {
				h ^= v;
				h *= 1099511628211ull;
			};
			mix(assign);
			for (auto v : ctrl) mix(static_cast<std::uint16_t>(v));
			mix(static_cast<std::uint16_t>(lock));
			for (auto v : pmem) mix(static_cast<std::uint16_t>(v));
			for (auto v : dmem) mix(static_cast<std::uint16_t>(v));
			for (auto v : nextp) mix(static_cast<std::uint16_t>(v));
			for (auto v : validv) mix(v);
			for (auto v : validn) mix(v);
			mix(fresh);
			mix(freed);
			mix(retired);
			for (auto v : angel_members) mix(v);
			for (auto v : angel_allowed) mix(v);
			for (auto v : angel_live) mix(v);
			return h;
		}
	};

	struct Action {
		int thread;  // -2 env free
		const Command* com;  // null for begin/end/free
		StepKind kind = StepKind::Plain;
		int free_addr = -1;
		std::string text;
		std::string update;
		std::optional<Event> event;
		RaceVerdict race;
		std::string violation;  // invariant/assert failure description
	};

	Impl(const Program& p, const SmrAutomaton& o, Budget b) : prog(clone(p)), autom(o), budget(b) {
		table = table_from_automaton(o);
		validate_layout();
	}

	// --- layout --------------------------------------------------------------
	int n_runnable() const { return static_cast<int>(runnable_procs.size()); }
	int init_thread() const { return budget.threads; }         // index of init pseudo-thread
	int total_threads() const { return budget.threads + 1; }

	std::map<std::pair<int, std::string>, int> ptr_slot_of;   // (thread or -1 shared, name)
	std::map<std::pair<int, std::string>, int> data_slot_of;  // thread data slots + shared
	std::map<std::pair<int, std::string>, int> angel_slot_of;
	int n_ptr_slots = 0, n_data_slots = 0, n_angel_slots = 0;
	int addr_data_base = 0;

	void validate_layout() {
		n_addr = budget.addresses;
		n_dom = std::max(2, budget.dom);
		if (n_addr > 30) throw std::invalid_argument("address pool too large");

		for (std::size_t i = 0; i < prog.procs.size(); i++) {
			if (prog.procs[i].name == "init") init_proc = static_cast<int>(i);
			else runnable_procs.push_back(static_cast<int>(i));
		}
		for (const auto& v : prog.shared) {
			if (v.kind == VarKind::SharedPtr) {
				ptr_slot_of[{-1, v.name}] = n_ptr_slots++;
				shared_ptr_names.push_back(v.name);
			} else {
				data_slot_of[{-1, v.name}] = n_data_slots++;
				shared_data_names.push_back(v.name);
			}
		}
		// per-thread locals: allocate a slot for every local of every proc the
		// thread might run (assignment-dependent slots would complicate
		// hashing; the union is small)
		proc_vars.resize(prog.procs.size());
		for (std::size_t i = 0; i < prog.procs.size(); i++) {
			for (const auto& v : prog.procs[i].locals) {
				if (v.kind == VarKind::LocalPtr) proc_vars[i].ptrs.push_back(v.name);
				else if (v.kind == VarKind::LocalData) proc_vars[i].datas.push_back(v.name);
				else proc_vars[i].angels.push_back(v.name);
			}
		}
		for (int t = 0; t < total_threads(); t++) {
			for (std::size_t i = 0; i < prog.procs.size(); i++) {
				bool relevant = (t == init_thread()) ? static_cast<int>(i) == init_proc
				                                     : static_cast<int>(i) != init_proc;
				if (!relevant) continue;
				for (const auto& n : proc_vars[i].ptrs)
					if (!ptr_slot_of.count({t, n})) ptr_slot_of[{t, n}] = n_ptr_slots++;
				for (const auto& n : proc_vars[i].datas)
					if (!data_slot_of.count({t, n})) data_slot_of[{t, n}] = n_data_slots++;
				for (const auto& n : proc_vars[i].angels)
					if (!angel_slot_of.count({t, n})) angel_slot_of[{t, n}] = n_angel_slots++;
			}
		}
		addr_data_base = n_data_slots;
		n_data_slots += n_addr;

		for (const auto& proc : prog.procs) {
			CfgBuilder b;
			cfgs.push_back(b.finish(proc.body.get()));
			exit_nodes.push_back(b.exit_aliases);
		}

		// phi space: all combinations of thread values (including the init
		// thread) and addresses
		std::vector<std::vector<int>> domains;
		for (const auto& v : autom.vars) {
			std::vector<int> d;
			if (v.type == ParamType::Thread)
				for (int t = 0; t < total_threads(); t++) d.push_back(t);
			else
				for (int a = 0; a < n_addr; a++) d.push_back(a);
			domains.push_back(std::move(d));
		}
		std::vector<int> cur(domains.size(), 0);
		std::vector<std::size_t> idx(domains.size(), 0);
		for (std::size_t i = 0; i < domains.size(); i++) cur[i] = domains[i][0];
		while (true) {
			phis.push_back(cur);
			std::size_t i = 0;
			for (; i < domains.size(); i++) {
				if (++idx[i] < domains[i].size()) {
					cur[i] = domains[i][idx[i]];
					break;
				}
				idx[i] = 0;
				cur[i] = domains[i][0];
			}
			if (i == domains.size()) break;
		}

		// thread-to-procedure assignments (cartesian product)
		if (runnable_procs.empty()) {
			assignments.push_back({std::vector<int>(budget.threads, -1)});
		} else {
			std::vector<int> pick(budget.threads, 0);
			while (true) {
				Assignment a;
				for (int t = 0; t < budget.threads; t++) a.proc_of_thread.push_back(runnable_procs[pick[t]]);
				assignments.push_back(std::move(a));
				int t = 0;
				for (; t < budget.threads; t++) {
					if (++pick[t] < static_cast<int>(runnable_procs.size())) break;
					pick[t] = 0;
				}
				if (t == budget.threads) break;
			}
		}
	}

	// --- memory access helpers ------------------------------------------------
	int proc_of(const State& s, int t) const {
		if (t == init_thread()) return init_proc;
		return assignments[s.assign].proc_of_thread[t];
	}

	int pslot(const State& s, int t, const std::string& name) const {
		auto it = ptr_slot_of.find({t, name});
		if (it != ptr_slot_of.end()) return it->second;
		it = ptr_slot_of.find({-1, name});
		if (it != ptr_slot_of.end()) return it->second;
		throw std::logic_error("unknown pointer '" + name + "'");
		(void)s;
	}
	int dslot(const State& s, int t, const std::string& name) const {
		auto it = data_slot_of.find({t, name});
		if (it != data_slot_of.end()) return it->second;
		it = data_slot_of.find({-1, name});
		if (it != data_slot_of.end()) return it->second;
		throw std::logic_error("unknown data variable '" + name + "'");
		(void)s;
	}
	int aslot(int t, const std::string& name) const {
		auto it = angel_slot_of.find({t, name});
		if (it == angel_slot_of.end()) throw std::logic_error("unknown angel '" + name + "'");
		return it->second;
	}

	std::int16_t pval(const State& s, int t, const std::string& name, bool is_null) const {
		if (is_null || name == NULL_NAME) return SEG;
		return s.pmem[pslot(s, t, name)];
	}

	std::uint32_t active_set(const State& s) const {
		std::uint32_t all = n_addr >= 32 ? ~0u : ((1u << n_addr) - 1);
		return all & ~(s.freed | s.retired);
	}

	bool cond_holds(const State& s, int t, const Cond& c) const {
		auto atom = [&](const Atom& a) {
			switch (a.kind) {
				case Atom::PtrEq:
					return pval(s, t, a.lhs, false) == pval(s, t, a.rhs, a.rhs == NULL_NAME);
				case Atom::PtrNeq:
					return pval(s, t, a.lhs, false) != pval(s, t, a.rhs, a.rhs == NULL_NAME);
				case Atom::DataTruthy:
					return s.dmem[dslot(s, t, a.lhs)] != 0;
				case Atom::DataFalsy:
					return s.dmem[dslot(s, t, a.lhs)] == 0;
			}
			return false;
		};
		switch (c.shape) {
			case Cond::True: return true;
			case Cond::Star: return true;
			case Cond::Single: return atom(c.atoms[0]);
			case Cond::And:
				for (const auto& a : c.atoms)
					if (!atom(a)) return false;
				return true;
			case Cond::Or:
				for (const auto& a : c.atoms)
					if (atom(a)) return true;
				return false;
		}
		return false;
	}

	// invalidate all expressions holding address a, and a's own selector
	void invalidate_address(State& s, int a) const {
		for (int i = 0; i < n_ptr_slots; i++)
			if (s.pmem[i] == a) s.validv[i] = 0;
		for (int b = 0; b < n_addr; b++)
			if (s.nextp[b] == a) s.validn[b] = 0;
		s.validn[a] = 0;
	}

	void check_internal_invariants(const State& s) const {
		if ((s.fresh & s.retired) != 0)
			throw std::logic_error("oracle invariant violated: fresh and retired overlap");
		for (int i = 0; i < n_ptr_slots; i++)
			if (s.pmem[i] >= 0 && loc_in_u32(s.freed, s.pmem[i]) && s.validv[i])
				throw std::logic_error("oracle invariant violated: valid pointer to freed address");
		for (int b = 0; b < n_addr; b++)
			if (s.nextp[b] >= 0 && loc_in_u32(s.freed, s.nextp[b]) && s.validn[b])
				throw std::logic_error("oracle invariant violated: valid selector to freed address");
	}
	static bool loc_in_u32(std::uint32_t set, int i) { return (set >> i) & 1u; }

	// --- observer -------------------------------------------------------------
	// returns false if the extended history leaves the specification
	bool observer_advance(State& s, const Event& evt) const {
		int e = autom.find_event(evt.func, evt.kind);
		if (e < 0) return true;
		LocSet acc = autom.accepting_set();
		for (std::size_t pi = 0; pi < phis.size(); pi++) {
			LocSet cur = s.obs[pi];
			LocSet next = 0;
			for (int l = 0; l < autom.n_locations(); l++) {
				if (!loc_in(cur, l)) continue;
				bool moved = false;
				for (const auto& tr : autom.transitions) {
					if (tr.src != l || tr.event != e) continue;
					if (eval_guard(tr.guard, phis[pi], evt.values)) {
						next |= loc_bit(tr.dst);
						moved = true;
					}
				}
				if (!moved) next |= loc_bit(l);
			}
			if (next & acc) return false;
			s.obs[pi] = next;
		}
		return true;
	}

	bool eval_guard(const Guard& g, const std::vector<int>& phi, const std::vector<int>& values) const {
		switch (g.kind) {
			case Guard::True: return true;
			case Guard::Lit: {
				int lhs = values[g.param];
				int rhs = g.var >= 0 ? phi[g.var] : g.lit;
				return g.eq ? lhs == rhs : lhs != rhs;
			}
			case Guard::And:
				for (const auto& k : g.kids)
					if (!eval_guard(k, phi, values)) return false;
				return true;
			case Guard::Or:
				for (const auto& k : g.kids)
					if (eval_guard(k, phi, values)) return true;
				return false;
			case Guard::Not:
				return !eval_guard(g.kids[0], phi, values);
		}
		return false;
	}

	// --- race classification ----------------------------------------------------
	RaceVerdict classify(const State& s, int t, const Command& c) const {
		RaceVerdict v{"none", "none"};
		auto valid_var = [&](const std::string& name) {
			return s.validv[pslot(s, t, name)] != 0;
		};
		auto deref_race = [&](const std::string& base) {
			if (!valid_var(base)) {
				v.strict = "unsafe-access";
				v.relaxed = "unsafe-access";
			}
		};
		switch (c.kind) {
			case CmdKind::PtrLoad:
			case CmdKind::DataLoad:
				deref_race(c.src);
				break;
			case CmdKind::PtrStore:
			case CmdKind::DataStore:
				deref_race(c.dst);
				break;
			case CmdKind::Assume:
				for (const auto& a : c.cond.atoms) {
					if (a.kind != Atom::PtrEq) continue;
					if (a.rhs == NULL_NAME || a.lhs == NULL_NAME) continue;  // null comparisons are exempt
					bool lv = valid_var(a.lhs), rv = valid_var(a.rhs);
					if (!lv || !rv) {
						v.strict = "unsafe-assumption";
						// relaxed: an invalid side plus a currently freed counterpart
						auto freed_side = [&](const std::string& n) {
							auto val = pval(s, t, n, false);
							return val >= 0 && loc_in_u32(s.freed, val);
						};
						if ((!lv && freed_side(a.rhs)) || (!rv && freed_side(a.lhs)))
							v.relaxed = "unsafe-assumption";
					}
				}
				break;
			case CmdKind::Enter: {
				std::vector<bool> mask;
				bool any_retire_invalid = false;
				for (const auto& arg : c.args) {
					if (arg.kind != EnterArg::Ptr) continue;
					bool ok = valid_var(arg.name);
					mask.push_back(ok);
					if (!ok && c.func == "retire") any_retire_invalid = true;
				}
				if (any_retire_invalid) {
					v.strict = "unsafe-retire";
					v.relaxed = "unsafe-retire";
				} else if (!safe_call(table, c.func, mask)) {
					v.strict = "unsafe-call";
					v.relaxed = "unsafe-call";
				}
				break;
			}
			default:
				break;
		}
		return v;
	}

	// --- successors -------------------------------------------------------------
	// All (action, successor-states) pairs enabled in s.
	void successors(const State& s, Mode mode,
	                std::vector<std::pair<Action, State>>& out) const {
		bool init_running = init_proc >= 0 && s.ctrl[init_thread()] >= 0;
		for (int t = 0; t < total_threads(); t++) {
			if (init_running && t != init_thread()) continue;
			if (s.ctrl[t] < 0) continue;
			if (s.lock != -2 && s.lock != t) continue;
			int pi = proc_of(s, t);
			if (pi < 0) continue;
			const auto& cfg = cfgs[pi];
			int node = s.ctrl[t];
			for (const auto& edge : cfg.out[node]) {
				step_edge(s, t, pi, edge, mode, out);
			}
		}
		// environment frees
		if (!init_running && budget.free_all && s.lock == -2) {
			for (int a = 0; a < n_addr; a++) {
				State ns = s;
				Event evt{"free", EventKind::Free, {100 + a}};
				if (!observer_advance(ns, evt)) continue;
				ns.fresh &= ~(1u << a);
				ns.freed |= 1u << a;
				ns.retired &= ~(1u << a);
				invalidate_address(ns, a);
				Action act;
				act.thread = -2;
				act.text = "free(a" + std::to_string(a) + ")";
				act.update = "freed += a" + std::to_string(a);
				act.event = evt;
				out.push_back({std::move(act), std::move(ns)});
			}
		}
	}

	void finish_thread(State& ns, int t, int pi, int dst) const {
		if (exit_nodes[pi].count(dst)) ns.ctrl[t] = -1;
		else ns.ctrl[t] = static_cast<std::int16_t>(dst);
	}

	void step_edge(const State& s, int t, int pi, const Edge& edge, Mode mode,
	               std::vector<std::pair<Action, State>>& out) const {
		Action act;
		act.thread = t == init_thread() ? -1 : t;
		auto emit = [&](State ns, std::string text, std::string update) {
			finish_thread(ns, t, pi, edge.dst);
			act.text = std::move(text);
			act.update = std::move(update);
			check_internal_invariants(ns);
			out.push_back({act, std::move(ns)});
		};

		if (edge.kind == StepKind::Begin) {
			if (s.lock != -2) return;
			State ns = s;
			ns.lock = static_cast<std::int16_t>(t);
			emit(std::move(ns), "beginAtomic", "");
			return;
		}
		if (edge.kind == StepKind::End) {
			State ns = s;
			ns.lock = -2;
			emit(std::move(ns), "endAtomic", "");
			return;
		}

		const Command& c = *edge.com;
		act.com = &c;
		act.race = classify(s, t, c);
		std::string ctext = command_text(c);

		switch (c.kind) {
			case CmdKind::Skip:
				emit(s, ctext, "");
				return;

			case CmdKind::Assume:
				if (!cond_holds(s, t, c.cond)) return;
				emit(s, ctext, "");
				return;

			case CmdKind::Assert: {
				State ns = s;
				if (mode == Mode::Asserts && !cond_holds(s, t, c.cond))
					act.violation = "assert failed: " + ctext;
				emit(std::move(ns), ctext, "");
				return;
			}

			case CmdKind::PtrAssign: {
				State ns = s;
				int dst = pslot(s, t, c.dst);
				std::int16_t val = pval(s, t, c.src, c.src_null);
				ns.pmem[dst] = val;
				ns.validv[dst] = c.src_null ? 1 : s.validv[pslot(s, t, c.src)];
				emit(std::move(ns), ctext, c.dst + " <- " + val_text(val));
				return;
			}

			case CmdKind::PtrLoad: {
				std::int16_t base = pval(s, t, c.src, false);
				if (base < 0) return;  // stuck on undefined base
				State ns = s;
				int dst = pslot(s, t, c.dst);
				ns.pmem[dst] = s.nextp[base];
				ns.validv[dst] = s.validn[base];
				emit(std::move(ns), ctext, c.dst + " <- " + val_text(ns.pmem[dst]));
				return;
			}

			case CmdKind::PtrStore: {
				std::int16_t base = pval(s, t, c.dst, false);
				if (base < 0) return;
				State ns = s;
				std::int16_t val = pval(s, t, c.src, c.src_null);
				ns.nextp[base] = val;
				ns.validn[base] = c.src_null ? 1 : s.validv[pslot(s, t, c.src)];
				emit(std::move(ns), ctext, "a" + std::to_string(base) + ".next <- " + val_text(val));
				return;
			}

			case CmdKind::DataLoad: {
				std::int16_t base = pval(s, t, c.src, false);
				if (base < 0) return;
				State ns = s;
				ns.dmem[dslot(s, t, c.dst)] = s.dmem[addr_data_base + base];
				emit(std::move(ns), ctext, c.dst + " <- " + std::to_string(ns.dmem[dslot(s, t, c.dst)]));
				return;
			}

			case CmdKind::DataStore: {
				std::int16_t base = pval(s, t, c.dst, false);
				if (base < 0) return;
				State ns = s;
				ns.dmem[addr_data_base + base] = s.dmem[dslot(s, t, c.src)];
				emit(std::move(ns), ctext, "a" + std::to_string(base) + ".data <- " +
				                            std::to_string(ns.dmem[addr_data_base + base]));
				return;
			}

			case CmdKind::DataOp: {
				std::vector<std::int16_t> values;
				if (c.op == "true") values = {1};
				else if (c.op == "false") values = {0};
				else if (c.op == "id") values = {s.dmem[dslot(s, t, c.args[0].name)]};
				else {
					for (int d = 0; d < n_dom; d++) values.push_back(static_cast<std::int16_t>(d));
				}
				for (auto v : values) {
					State ns = s;
					ns.dmem[dslot(s, t, c.dst)] = v;
					emit(std::move(ns), ctext, c.dst + " <- " + std::to_string(v));
				}
				return;
			}

			case CmdKind::Malloc: {
				std::uint32_t candidates = s.fresh;
				if (budget.realloc_all) candidates |= s.freed;
				for (int a = 0; a < n_addr; a++) {
					if (!loc_in_u32(candidates, a)) continue;
					for (int d = 0; d < n_dom; d++) {
						State ns = s;
						int dst = pslot(s, t, c.dst);
						ns.pmem[dst] = static_cast<std::int16_t>(a);
						ns.nextp[a] = SEG;
						ns.dmem[addr_data_base + a] = static_cast<std::int16_t>(d);
						ns.fresh &= ~(1u << a);
						ns.freed &= ~(1u << a);
						ns.validv[dst] = 1;
						ns.validn[a] = 1;
						emit(std::move(ns), ctext, c.dst + " <- a" + std::to_string(a));
					}
				}
				return;
			}

			case CmdKind::Havoc: {
				for (int a = -1; a < n_addr; a++) {
					State ns = s;
					int dst = pslot(s, t, c.dst);
					ns.pmem[dst] = static_cast<std::int16_t>(a);
					ns.validv[dst] = 1;
					emit(std::move(ns), ctext, c.dst + " <- " + val_text(static_cast<std::int16_t>(a)));
				}
				return;
			}

			case CmdKind::Enter: {
				Event evt;
				evt.func = c.func;
				evt.kind = EventKind::Enter;
				evt.values.push_back(t);
				bool undef_arg = false;
				int retire_target = -1;
				for (const auto& arg : c.args) {
					if (arg.kind == EnterArg::Lit) evt.values.push_back(arg.lit);
					else if (arg.kind == EnterArg::Data) evt.values.push_back(s.dmem[dslot(s, t, arg.name)]);
					else {
						std::int16_t val = pval(s, t, arg.name, false);
						if (val < 0) undef_arg = true;
						evt.values.push_back(val < 0 ? -1 : 100 + val);
						if (c.func == "retire" && retire_target < 0) retire_target = val;
					}
				}
				if (undef_arg) return;  // enter requires defined pointer arguments
				State ns = s;
				if (!observer_advance(ns, evt)) return;
				if (retire_target >= 0) ns.retired |= 1u << retire_target;
				check_internal_invariants(ns);
				act.event = evt;
				emit(std::move(ns), ctext, retire_target >= 0 ? "retired += a" + std::to_string(retire_target) : "");
				return;
			}

			case CmdKind::Exit: {
				Event evt{c.func, EventKind::Exit, {t}};
				State ns = s;
				if (!observer_advance(ns, evt)) return;
				act.event = evt;
				emit(std::move(ns), ctext, "");
				return;
			}

			case CmdKind::InvAngel: {
				State ns = s;
				int slot = aslot(t, c.dst);
				ns.angel_members[slot] = 0;
				ns.angel_allowed[slot] = n_addr >= 32 ? ~0u : ((1u << n_addr) - 1);
				ns.angel_live[slot] = 1;
				emit(std::move(ns), ctext, c.dst + " := fresh angel");
				return;
			}

			case CmdKind::InvEq: {
				State ns = s;
				if (mode == Mode::Invariants &&
				    pval(s, t, c.dst, false) != pval(s, t, c.src, c.src_null))
					act.violation = "invariant failed: " + ctext;
				emit(std::move(ns), ctext, "");
				return;
			}

			case CmdKind::InvMember: {
				State ns = s;
				std::int16_t a = pval(s, t, c.dst, false);
				int slot = aslot(t, c.src);
				if (a < 0 || !loc_in_u32(s.angel_allowed[slot], a)) {
					if (mode == Mode::Invariants) act.violation = "invariant failed: " + ctext;
				} else {
					ns.angel_members[slot] |= 1u << a;
				}
				emit(std::move(ns), ctext, "");
				return;
			}

			case CmdKind::InvActive: {
				State ns = s;
				bool is_angel = angel_slot_of.count({t, c.dst}) != 0;
				if (is_angel) {
					int slot = aslot(t, c.dst);
					std::uint32_t act_set = active_set(s);
					if ((s.angel_members[slot] & ~act_set) != 0) {
						if (mode == Mode::Invariants) act.violation = "invariant failed: " + ctext;
					} else {
						ns.angel_allowed[slot] &= act_set;
					}
				} else {
					std::int16_t a = pval(s, t, c.dst, false);
					if (a < 0 || !loc_in_u32(active_set(s), a)) {
						if (mode == Mode::Invariants) act.violation = "invariant failed: " + ctext;
					}
				}
				emit(std::move(ns), ctext, "");
				return;
			}
		}
	}

	static std::string val_text(std::int16_t v) {
		return v < 0 ? "undef" : "a" + std::to_string(v);
	}

	static std::string command_text(const Command& c) {
		switch (c.kind) {
			case CmdKind::Skip: return "skip";
			case CmdKind::PtrAssign: return c.dst + " = " + (c.src_null ? NULL_NAME : c.src);
			case CmdKind::PtrLoad: return c.dst + " = " + c.src + "->next";
			case CmdKind::PtrStore: return c.dst + "->next = " + (c.src_null ? NULL_NAME : c.src);
			case CmdKind::DataLoad: return c.dst + " = " + c.src + "->data";
			case CmdKind::DataStore: return c.dst + "->data = " + c.src;
			case CmdKind::DataOp: return c.dst + " = " + c.op;
			case CmdKind::Malloc: return c.dst + " = malloc";
			case CmdKind::Assume: return "assume(...)";
			case CmdKind::Assert: return "assert(...)";
			case CmdKind::Havoc: return "havoc(" + c.dst + ")";
			case CmdKind::Enter: return "enter " + c.func;
			case CmdKind::Exit: return "exit " + c.func;
			case CmdKind::InvAngel: return "@inv angel " + c.dst;
			case CmdKind::InvEq: return "@inv " + c.dst + " == " + (c.src_null ? NULL_NAME : c.src);
			case CmdKind::InvMember: return "@inv " + c.dst + " in " + c.src;
			case CmdKind::InvActive: return "@inv active(" + c.dst + ")";
		}
		return "?";
	}

	State initial_state(int assign_idx) const {
		State s;
		s.assign = static_cast<std::int16_t>(assign_idx);
		s.ctrl.assign(total_threads(), -1);
		for (int t = 0; t < budget.threads; t++) {
			int pi = assignments[assign_idx].proc_of_thread[t];
			if (pi >= 0) s.ctrl[t] = static_cast<std::int16_t>(cfgs[pi].entry);
		}
		if (init_proc >= 0) s.ctrl[init_thread()] = static_cast<std::int16_t>(cfgs[init_proc].entry);
		s.lock = -2;
		s.pmem.assign(n_ptr_slots, SEG);
		s.dmem.assign(n_data_slots, 0);
		s.nextp.assign(n_addr, SEG);
		s.validv.assign(n_ptr_slots, 1);  // all pointer variables start valid
		s.validn.assign(n_addr, 0);
		s.fresh = n_addr >= 32 ? ~0u : ((1u << n_addr) - 1);
		s.obs.assign(phis.size(), loc_bit(autom.initial));
		s.angel_members.assign(std::max(1, n_angel_slots), 0);
		s.angel_allowed.assign(std::max(1, n_angel_slots), 0);
		s.angel_live.assign(std::max(1, n_angel_slots), 0);
		// fix threads whose proc exit is immediately reachable (empty body)
		for (int t = 0; t < total_threads(); t++) {
			if (s.ctrl[t] >= 0) {
				int pi = proc_of(s, t);
				if (exit_nodes[pi].count(s.ctrl[t])) s.ctrl[t] = -1;
			}
		}
		return s;
	}

	// --- exploration ------------------------------------------------------------
	ExploreReport run(Mode mode) {
		ExploreReport report;
		report.budget = budget;

		struct Node {
			State state;
			long parent;
			Action action;
		};
		std::vector<Node> nodes;
		std::unordered_set<std::string> visited;
		std::set<std::uint64_t> program_hashes;
		std::vector<long> frontier;

		for (std::size_t i = 0; i < assignments.size(); i++) {
			State st = initial_state(static_cast<int>(i));
			auto enc = st.encode();
			if (!visited.insert(enc).second) continue;
			program_hashes.insert(st.program_hash());
			nodes.push_back({std::move(st), -1, Action{}});
			frontier.push_back(static_cast<long>(nodes.size()) - 1);
		}

		long violating = -1;
		std::string verdict = "clean", detail;
		int depth = 0;
		std::vector<long> current;
		using Batch = std::vector<std::tuple<long, Action, State>>;

		while (!frontier.empty() && depth < budget.steps && violating < 0 && !report.exhausted) {
			current.clear();
			std::swap(current, frontier);
			depth++;

			// the layer's successors; with jobs > 1 the frontier is split into
			// chunks expanded concurrently, merged back in chunk order so the
			// result does not depend on scheduling
			int jobs = std::max(1, budget.jobs);
			std::vector<Batch> batches(jobs);
			auto expand = [&](int worker) {
				Batch& out = batches[worker];
				std::vector<std::pair<Action, State>> succ;
				for (std::size_t k = worker; k < current.size(); k += jobs) {
					long id = current[k];
					succ.clear();
					successors(nodes[id].state, mode, succ);
					for (auto& [action, st] : succ) out.push_back({id, std::move(action), std::move(st)});
				}
			};
			if (jobs == 1) {
				expand(0);
			} else {
				std::vector<std::thread> workers;
				for (int w = 0; w < jobs; w++) workers.emplace_back(expand, w);
				for (auto& w : workers) w.join();
			}

			// merge in worker order: deterministic for a fixed budget
			for (int w = 0; w < jobs && violating < 0; w++) {
				for (auto& [id, action, st] : batches[w]) {
					bool bad = false;
					std::string kind, what;
					if (mode == Mode::Prf && action.race.relaxed != "none") {
						bad = true;
						kind = "race";
						what = action.race.relaxed;
					} else if ((mode == Mode::Invariants || mode == Mode::Asserts) &&
					           !action.violation.empty()) {
						bad = true;
						kind = mode == Mode::Invariants ? "invariant" : "assert";
						what = action.violation;
					}
					long nid = -1;
					auto enc = st.encode();
					if (visited.insert(enc).second) {
						program_hashes.insert(st.program_hash());
						nodes.push_back({std::move(st), id, action});
						nid = static_cast<long>(nodes.size()) - 1;
						frontier.push_back(nid);
					}
					if (bad && violating < 0) {
						verdict = kind;
						detail = what;
						if (nid < 0) {
							nodes.push_back({State{}, id, action});
							nid = static_cast<long>(nodes.size()) - 1;
						}
						violating = nid;
						break;
					}
					if (static_cast<long>(visited.size()) > budget.max_states) {
						report.exhausted = true;
						break;
					}
				}
				if (report.exhausted) break;
			}
		}

		if (!frontier.empty() && violating < 0) report.exhausted = report.exhausted || depth >= budget.steps;
		report.verdict = verdict;
		report.detail = detail;
		report.states = static_cast<long>(visited.size());
		report.steps_explored = depth;
		std::uint64_t fp = 1469598103934665603ull;
		for (auto h : program_hashes) {
			fp ^= h;
			fp *= 1099511628211ull;
		}
		report.fingerprint = fp;
		report.fingerprint_states = static_cast<long>(program_hashes.size());

		if (violating >= 0) {
			std::vector<long> chain;
			for (long cur = violating; cur >= 0; cur = nodes[cur].parent) chain.push_back(cur);
			std::reverse(chain.begin(), chain.end());
			for (long id : chain) {
				if (nodes[id].parent < 0) continue;
				const auto& a = nodes[id].action;
				report.witness.push_back({a.thread, a.text, a.update});
				if (a.event) report.witness_history.push_back(*a.event);
			}
		}
		return report;
	}
};

Explorer::Explorer(const Program& prog, const SmrAutomaton& o, Budget budget)
    : impl_(std::make_unique<Impl>(prog, o, budget)) {}

Explorer::~Explorer() = default;

ExploreReport Explorer::run(Mode mode) { return impl_->run(mode); }

int Explorer::initial_count() const { return static_cast<int>(impl_->assignments.size()); }

ExploreReport explore(const Program& prog, const SmrAutomaton& o, Budget budget, Mode mode) {
	Explorer e(prog, o, budget);
	return e.run(mode);
}

nlohmann::json explore_report_to_json(const ExploreReport& r) {
	nlohmann::json j;
	j["verdict"] = r.verdict;
	if (!r.detail.empty()) j["detail"] = r.detail;
	j["exhausted"] = r.exhausted;
	j["states"] = r.states;
	j["steps"] = r.steps_explored;
	j["fingerprint"] = r.fingerprint;
	j["budget"] = {{"threads", r.budget.threads}, {"addresses", r.budget.addresses},
	               {"dom", r.budget.dom},         {"steps", r.budget.steps},
	               {"frees", r.budget.free_all},  {"realloc", r.budget.realloc_all}};
	j["witness"] = nlohmann::json::array();
	for (const auto& step : r.witness)
		j["witness"].push_back({{"thread", step.thread}, {"command", step.text}, {"update", step.update}});
	return j;
}

}  // namespace smrtc
