#pragma once

#include <atomic>
#include <future>
#include <numeric>
#include <optional>

#include "groupshift/bigint.hpp"
#include "groupshift/sft.hpp"

namespace groupshift {

// ---------------------------------------------------------------------------
// Window compilation: every forbidden pattern and rule is instantiated at all
// translates whose support lies fully inside the window, so local
// admissibility is exactly "no instance fires". Instances are indexed by the
// decision-order position of their last cell; the backtracker checks an
// instance the moment that cell is colored.
// ---------------------------------------------------------------------------

struct ConstraintInstance {
    std::vector<int> cells;            // window cell indices, in source support order
    std::vector<Symbol> symbols;       // pattern instance: symbols to match
    const LocalRule* rule = nullptr;   // rule instance: predicate over the tuple
    int last_pos = 0;                  // max decision-order position among cells
};

class CompiledWindow {
public:
    CompiledWindow(const SftSpec& x, Support window, std::vector<int> order = {})
        : sft_(&x), window_(std::move(window)) {
        int n = static_cast<int>(window_.size());
        order_ = order.empty() ? default_order(n) : std::move(order);
        pos_of_.assign(n, -1);
        for (int d = 0; d < n; ++d) pos_of_[order_[d]] = d;

        for (const Pattern& p : x.forbidden) add_instances(p.support, &p, nullptr);
        for (const LocalRule& r : x.rules) add_instances(r.support, nullptr, &r);
        finalize();
    }

    const Support& window() const { return window_; }
    const SftSpec& sft() const { return *sft_; }
    int cell_count() const { return static_cast<int>(window_.size()); }
    const std::vector<int>& order() const { return order_; }
    const std::vector<ConstraintInstance>& instances() const { return instances_; }

    /// Checks the instances whose last decision position is `pos` against the
    /// current assignment. Returns false if some forbidden instance fires.
    bool admissible_at(int pos, const std::vector<Symbol>& assignment,
                       std::vector<Symbol>& scratch) const {
        if (fast_) {
            Symbol s = assignment[order_[pos]];
            if ((unary_forbidden_[pos] >> s) & 1ull) return false;
            for (const PairCheck& pc : pair_checks_[pos]) {
                if ((pc.forbidden[assignment[pc.other_cell]] >> s) & 1ull) return false;
            }
        }
        for (int idx : legacy_by_pos_[pos]) {
            const ConstraintInstance& inst = instances_[idx];
            if (inst.rule == nullptr) {
                bool match = true;
                for (std::size_t i = 0; i < inst.cells.size(); ++i) {
                    if (assignment[inst.cells[i]] != inst.symbols[i]) {
                        match = false;
                        break;
                    }
                }
                if (match) return false;
            } else {
                scratch.resize(inst.cells.size());
                for (std::size_t i = 0; i < inst.cells.size(); ++i) {
                    scratch[i] = assignment[inst.cells[i]];
                }
                if (inst.rule->forbids(std::span<const Symbol>(scratch.data(), scratch.size()))) {
                    return false;
                }
            }
        }
        return true;
    }

    bool no_pending_after(int pos) const { return pending_at_or_after_[pos] == 0; }

    /// Exact specialization against per-cell candidate lists: removes
    /// candidates that force a violation through a single unary or binary
    /// instance, and drops instances that can no longer fire. Sound for
    /// counting (only provably dead branches are cut); it exists so that the
    /// unconstrained-tail shortcut sees through satisfied constraints.
    void specialize(std::vector<std::vector<Symbol>>& allowed) {
        auto contains = [](const std::vector<Symbol>& v, Symbol s) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        std::vector<Symbol> tup;
        auto fires = [&](const ConstraintInstance& inst, Symbol s0, Symbol s1) {
            if (inst.rule == nullptr) return inst.symbols[0] == s0 && inst.symbols[1] == s1;
            tup = {s0, s1};
            return inst.rule->forbids(std::span<const Symbol>(tup.data(), 2));
        };
        auto fires1 = [&](const ConstraintInstance& inst, Symbol s0) {
            if (inst.rule == nullptr) return inst.symbols[0] == s0;
            tup = {s0};
            return inst.rule->forbids(std::span<const Symbol>(tup.data(), 1));
        };
        bool changed = true;
        while (changed) {
            changed = false;
            for (const ConstraintInstance& inst : instances_) {
                if (inst.cells.size() == 1) {
                    auto& cands = allowed[inst.cells[0]];
                    auto it = std::remove_if(cands.begin(), cands.end(),
                                             [&](Symbol s) { return fires1(inst, s); });
                    if (it != cands.end()) {
                        cands.erase(it, cands.end());
                        changed = true;
                    }
                } else if (inst.cells.size() == 2 && inst.cells[0] != inst.cells[1]) {
                    auto& ca = allowed[inst.cells[0]];
                    auto& cb = allowed[inst.cells[1]];
                    if (ca.size() * cb.size() > 65536) continue;
                    auto prune = [&](std::vector<Symbol>& self, const std::vector<Symbol>& other,
                                     bool self_first) {
                        auto doomed = [&](Symbol s) {
                            for (Symbol t : other) {
                                bool f = self_first ? fires(inst, s, t) : fires(inst, t, s);
                                if (!f) return false;
                            }
                            return !other.empty();
                        };
                        auto it = std::remove_if(self.begin(), self.end(), doomed);
                        if (it != self.end()) {
                            self.erase(it, self.end());
                            changed = true;
                        }
                    };
                    prune(ca, cb, true);
                    prune(cb, ca, false);
                }
            }
        }
        // drop instances that can no longer fire
        std::vector<ConstraintInstance> kept;
        for (ConstraintInstance& inst : instances_) {
            bool can_fire = true;
            if (inst.rule == nullptr) {
                for (std::size_t i = 0; i < inst.cells.size(); ++i) {
                    if (!contains(allowed[inst.cells[i]], inst.symbols[i])) {
                        can_fire = false;
                        break;
                    }
                }
            } else {
                // enumerate candidate combinations per distinct cell when the
                // product is small; otherwise keep the instance conservatively
                std::vector<int> distinct;
                for (int c : inst.cells) {
                    if (std::find(distinct.begin(), distinct.end(), c) == distinct.end()) {
                        distinct.push_back(c);
                    }
                }
                std::uint64_t space = 1;
                bool enumerable = true;
                for (int c : distinct) {
                    space *= allowed[c].size();
                    if (space > 65536) {
                        enumerable = false;
                        break;
                    }
                }
                if (enumerable) {
                    can_fire = false;
                    std::vector<std::size_t> pick(distinct.size(), 0);
                    std::vector<Symbol> tuple(inst.cells.size());
                    if (space > 0) {
                        while (true) {
                            for (std::size_t i = 0; i < inst.cells.size(); ++i) {
                                for (std::size_t d = 0; d < distinct.size(); ++d) {
                                    if (distinct[d] == inst.cells[i]) {
                                        tuple[i] = allowed[distinct[d]][pick[d]];
                                    }
                                }
                            }
                            if (inst.rule->forbids(
                                    std::span<const Symbol>(tuple.data(), tuple.size()))) {
                                can_fire = true;
                                break;
                            }
                            std::size_t d = 0;
                            while (d < distinct.size() && pick[d] + 1 == allowed[distinct[d]].size()) {
                                pick[d++] = 0;
                            }
                            if (d == distinct.size()) break;
                            ++pick[d];
                        }
                    }
                }
            }
            if (can_fire) kept.push_back(std::move(inst));
        }
        instances_ = std::move(kept);
        finalize();
    }

    /// Full check of a totally assigned window (used by is_locally_admissible).
    bool admissible_total(const std::vector<Symbol>& assignment) const {
        std::vector<Symbol> scratch;
        for (int d = 0; d < cell_count(); ++d) {
            if (!admissible_at(d, assignment, scratch)) return false;
        }
        return true;
    }

private:
    static std::vector<int> default_order(int n) {
        std::vector<int> o(n);
        std::iota(o.begin(), o.end(), 0);
        return o;
    }

    /// Compiles the per-position check structures: with at most 64 symbols,
    /// unary instances fold into a bitmask and binary ones into per-neighbor
    /// symbol tables, so a node check costs O(#constrained neighbors); larger
    /// instances and big alphabets take the literal scan.
    void finalize() {
        int n = cell_count();
        int nsym = sft_->alphabet.size();
        fast_ = nsym <= 64;
        by_last_.assign(n, {});
        legacy_by_pos_.assign(n, {});
        unary_forbidden_.assign(n, 0);
        pair_checks_.assign(n, {});
        std::vector<Symbol> tup;
        // rule tables are instance-independent: tabulate once per (rule, slot)
        std::map<std::pair<const LocalRule*, int>, std::vector<std::uint64_t>> rule_tables;
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            const ConstraintInstance& inst = instances_[i];
            by_last_[inst.last_pos].push_back(static_cast<int>(i));
            bool tabulated = false;
            if (fast_ && inst.rule == nullptr && inst.cells.size() == 1) {
                unary_forbidden_[inst.last_pos] |= 1ull << inst.symbols[0];
                tabulated = true;
            } else if (fast_ && inst.cells.size() == 2 && inst.cells[0] != inst.cells[1]) {
                int self_slot = pos_of_[inst.cells[0]] > pos_of_[inst.cells[1]] ? 0 : 1;
                int other = inst.cells[1 - self_slot];
                auto& checks = pair_checks_[inst.last_pos];
                PairCheck* pc = nullptr;
                for (auto& existing : checks) {
                    if (existing.other_cell == other) pc = &existing;
                }
                if (pc == nullptr) {
                    checks.push_back(PairCheck{
                        other, std::vector<std::uint64_t>(static_cast<std::size_t>(nsym), 0)});
                    pc = &checks.back();
                }
                if (inst.rule == nullptr) {
                    pc->forbidden[inst.symbols[1 - self_slot]] |= 1ull << inst.symbols[self_slot];
                    tabulated = true;
                } else {
                    auto key = std::make_pair(inst.rule, self_slot);
                    auto it = rule_tables.find(key);
                    if (it == rule_tables.end()) {
                        std::vector<std::uint64_t> table(static_cast<std::size_t>(nsym), 0);
                        for (Symbol so = 0; so < nsym; ++so) {
                            for (Symbol ss = 0; ss < nsym; ++ss) {
                                tup = {self_slot == 0 ? ss : so, self_slot == 0 ? so : ss};
                                if (inst.rule->forbids(std::span<const Symbol>(tup.data(), 2))) {
                                    table[so] |= 1ull << ss;
                                }
                            }
                        }
                        it = rule_tables.emplace(std::move(key), std::move(table)).first;
                    }
                    for (Symbol so = 0; so < nsym; ++so) pc->forbidden[so] |= it->second[so];
                    tabulated = true;
                }
            }
            if (!tabulated) legacy_by_pos_[inst.last_pos].push_back(static_cast<int>(i));
        }
        pending_at_or_after_.assign(n + 1, 0);
        for (int d = n - 1; d >= 0; --d) {
            pending_at_or_after_[d] =
                pending_at_or_after_[d + 1] + static_cast<int>(by_last_[d].size());
        }
    }

    void add_instances(const Support& supp, const Pattern* p, const LocalRule* r) {
        if (supp.empty()) {
            if (p != nullptr) {
                throw spec_error("a forbidden pattern with empty support forbids everything");
            }
            return;
        }
        const Group& g = sft_->group;
        Element anchor_inv = g.invert(supp.cell(0));
        for (const Element& c : window_.cells()) {
            Element t = g.multiply(anchor_inv, c);
            ConstraintInstance inst;
            inst.cells.reserve(supp.size());
            bool inside = true;
            int last = -1;
            for (const Element& f : supp.cells()) {
                Element moved = g.multiply(f, t);
                auto idx = window_.find(moved);
                if (!idx) {
                    inside = false;
                    break;
                }
                inst.cells.push_back(static_cast<int>(*idx));
                last = std::max(last, pos_of_[*idx]);
            }
            if (!inside) continue;
            inst.last_pos = last;
            if (p != nullptr) inst.symbols = p->symbols;
            inst.rule = r;
            instances_.push_back(std::move(inst));
        }
    }

    struct PairCheck {
        int other_cell;
        std::vector<std::uint64_t> forbidden; // [other symbol] -> forbidden self symbols
    };

    const SftSpec* sft_;
    Support window_;
    std::vector<int> order_;
    std::vector<int> pos_of_;
    std::vector<ConstraintInstance> instances_;
    std::vector<std::vector<int>> by_last_;
    std::vector<int> pending_at_or_after_;
    bool fast_ = false;
    std::vector<std::uint64_t> unary_forbidden_;      // by position
    std::vector<std::vector<PairCheck>> pair_checks_; // by position
    std::vector<std::vector<int>> legacy_by_pos_;     // by position
};

// ---------------------------------------------------------------------------
// Local admissibility and exhaustive enumeration
// ---------------------------------------------------------------------------

/// True iff no forbidden pattern (or rule instance) occurs at any position
/// whose translated support lies inside supp(q).
inline bool is_locally_admissible(const SftSpec& x, const Pattern& q) {
    if (q.support.empty()) return true;
    CompiledWindow cw(x, q.support);
    return cw.admissible_total(q.symbols);
}

namespace detail {

/// First-solution search with forward checking over tabulated binary
/// constraints and an MRV cell order. Only used for existence queries (the
/// found completion depends on the heuristic order); lexicographic-first
/// completions go through the plain backtracker. Requires at most 64 symbols
/// to pack domains into one word; larger alphabets fall back automatically.
class CompletionSolver {
public:
    explicit CompletionSolver(const CompiledWindow& cw)
        : cw_(cw), nsym_(cw.sft().alphabet.size()) {
        enabled_ = nsym_ <= 64;
        if (!enabled_) return;
        int n = cw.cell_count();
        edges_.assign(n, {});
        unary_mask_.assign(n, ~0ull >> (64 - nsym_));
        heavy_by_cell_.assign(n, {});
        auto edge_table = [&](int a, int b) -> std::vector<std::uint64_t>& {
            for (auto& e : edges_[a]) {
                if (e.other == b) return e.mask;
            }
            edges_[a].push_back({b, std::vector<std::uint64_t>(
                                        static_cast<std::size_t>(nsym_), ~0ull >> (64 - nsym_))});
            return edges_[a].back().mask;
        };
        for (const ConstraintInstance& inst : cw.instances()) {
            if (inst.rule == nullptr && inst.cells.size() == 1) {
                unary_mask_[inst.cells[0]] &= ~(1ull << inst.symbols[0]);
            } else if (inst.rule == nullptr && inst.cells.size() == 2) {
                int a = inst.cells[0], b = inst.cells[1];
                Symbol sa = inst.symbols[0], sb = inst.symbols[1];
                if (a == b) {
                    if (sa == sb) unary_mask_[a] &= ~(1ull << sa);
                    continue;
                }
                edge_table(a, b)[sa] &= ~(1ull << sb);
                edge_table(b, a)[sb] &= ~(1ull << sa);
            } else if (inst.rule != nullptr && inst.cells.size() <= 2 &&
                       inst.cells.size() == 2 && inst.cells[0] != inst.cells[1]) {
                // tabulate small rule instances
                int a = inst.cells[0], b = inst.cells[1];
                std::vector<Symbol> t(2);
                for (Symbol sa = 0; sa < nsym_; ++sa) {
                    for (Symbol sb = 0; sb < nsym_; ++sb) {
                        t[0] = sa;
                        t[1] = sb;
                        if (inst.rule->forbids(std::span<const Symbol>(t.data(), 2))) {
                            edge_table(a, b)[sa] &= ~(1ull << sb);
                            edge_table(b, a)[sb] &= ~(1ull << sa);
                        }
                    }
                }
            } else {
                heavy_.push_back(&inst);
                int id = static_cast<int>(heavy_.size()) - 1;
                for (int c : inst.cells) heavy_by_cell_[c].push_back(id);
            }
        }
        // deduplicate heavy memberships for instances touching a cell twice
        for (auto& list : heavy_by_cell_) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
    }

    bool enabled() const { return enabled_; }

    /// True iff the partial assignment (-1 = unassigned) extends to a full
    /// locally admissible coloring within the per-cell candidate lists.
    bool exists_completion(const std::vector<std::vector<Symbol>>& allowed,
                           std::vector<Symbol> assignment, const Budget& budget,
                           std::atomic<std::uint64_t>* nodes) const {
        int n = cw_.cell_count();
        std::vector<std::uint64_t> domain(n);
        for (int i = 0; i < n; ++i) {
            std::uint64_t m = 0;
            for (Symbol s : allowed[i]) m |= 1ull << s;
            m &= unary_mask_[i];
            if (assignment[i] >= 0) m &= 1ull << assignment[i];
            if (m == 0) return false;
            domain[i] = m;
        }
        std::vector<int> heavy_remaining(heavy_.size());
        for (std::size_t h = 0; h < heavy_.size(); ++h) {
            int rem = 0;
            for (int c : heavy_[h]->cells) {
                if (assignment[c] < 0) ++rem;
            }
            heavy_remaining[h] = rem;
        }
        std::vector<Symbol> scratch;
        // propagate the already-assigned prefix
        for (int i = 0; i < n; ++i) {
            if (assignment[i] < 0) continue;
            for (const Edge& e : edges_[i]) {
                domain[e.other] &= e.mask[assignment[i]];
                if (domain[e.other] == 0) return false;
            }
            for (int h : heavy_by_cell_[i]) {
                if (heavy_remaining[h] == 0 && violates_heavy(h, assignment, scratch)) return false;
            }
        }
        struct TrailEntry {
            int cell;
            std::uint64_t old_domain;
        };
        std::vector<TrailEntry> trail;
        std::function<bool()> solve = [&]() -> bool {
            if (nodes->fetch_add(1, std::memory_order_relaxed) + 1 > budget.nodes) {
                throw resource_limit_error("node budget exceeded (" +
                                           std::to_string(budget.nodes) + ")");
            }
            // MRV: smallest domain among unassigned, ties by index
            int best = -1;
            int best_count = 65;
            for (int i = 0; i < n; ++i) {
                if (assignment[i] >= 0) continue;
                int c = __builtin_popcountll(domain[i]);
                if (c < best_count) {
                    best_count = c;
                    best = i;
                }
            }
            if (best < 0) return true;
            std::uint64_t options = domain[best];
            while (options) {
                Symbol s = static_cast<Symbol>(__builtin_ctzll(options));
                options &= options - 1;
                std::size_t trail_mark = trail.size();
                assignment[best] = s;
                trail.push_back({best, domain[best]});
                domain[best] = 1ull << s;
                bool ok = true;
                for (const Edge& e : edges_[best]) {
                    if (assignment[e.other] >= 0) continue;
                    std::uint64_t next = domain[e.other] & e.mask[s];
                    if (next != domain[e.other]) {
                        trail.push_back({e.other, domain[e.other]});
                        domain[e.other] = next;
                    }
                    if (next == 0) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    for (int h : heavy_by_cell_[best]) {
                        if (--heavy_remaining[h] == 0 && violates_heavy(h, assignment, scratch)) {
                            ok = false;
                        }
                        if (!ok) {
                            // undo the decrements applied so far in this loop
                            for (int h2 : heavy_by_cell_[best]) {
                                ++heavy_remaining[h2];
                                if (h2 == h) break;
                            }
                            break;
                        }
                    }
                    if (ok) {
                        if (solve()) return true;
                        for (int h : heavy_by_cell_[best]) ++heavy_remaining[h];
                    }
                }
                while (trail.size() > trail_mark) {
                    domain[trail.back().cell] = trail.back().old_domain;
                    trail.pop_back();
                }
                assignment[best] = -1;
            }
            return false;
        };
        return solve();
    }

private:
    struct Edge {
        int other;
        std::vector<std::uint64_t> mask; // mask[s_self] = allowed symbols of `other`
    };

    bool violates_heavy(int h, const std::vector<Symbol>& assignment,
                        std::vector<Symbol>& scratch) const {
        const ConstraintInstance& inst = *heavy_[h];
        if (inst.rule == nullptr) {
            for (std::size_t i = 0; i < inst.cells.size(); ++i) {
                if (assignment[inst.cells[i]] != inst.symbols[i]) return false;
            }
            return true;
        }
        scratch.resize(inst.cells.size());
        for (std::size_t i = 0; i < inst.cells.size(); ++i) scratch[i] = assignment[inst.cells[i]];
        return inst.rule->forbids(std::span<const Symbol>(scratch.data(), scratch.size()));
    }

    const CompiledWindow& cw_;
    Symbol nsym_;
    bool enabled_ = false;
    std::vector<std::vector<Edge>> edges_;
    std::vector<std::uint64_t> unary_mask_;
    std::vector<const ConstraintInstance*> heavy_;
    std::vector<std::vector<int>> heavy_by_cell_;
};

struct SearchContext {
    const CompiledWindow& cw;
    const std::vector<std::vector<Symbol>>& allowed; // per cell, candidate symbols in order
    Budget budget;
    std::atomic<std::uint64_t>* nodes;
    const CompletionSolver* completion = nullptr; // existence-only fast path

    void charge() const {
        if (nodes->fetch_add(1, std::memory_order_relaxed) + 1 > budget.nodes) {
            throw resource_limit_error("node budget exceeded (" + std::to_string(budget.nodes) + ")");
        }
    }
};

inline BigUint free_tail_product(const SearchContext& ctx, int pos) {
    BigUint r(1);
    for (int d = pos; d < ctx.cw.cell_count(); ++d) {
        r *= static_cast<std::uint64_t>(ctx.allowed[ctx.cw.order()[d]].size());
    }
    return r;
}

/// First-solution search over positions [pos, n). Assignment must already be
/// consistent through pos-1. Leaves the assignment dirty on failure.
inline bool complete_from(const SearchContext& ctx, int pos, std::vector<Symbol>& assignment,
                          std::vector<Symbol>& scratch) {
    if (pos == ctx.cw.cell_count()) return true;
    if (ctx.cw.no_pending_after(pos)) {
        // remaining cells are unconstrained; completable iff none is candidate-free
        for (int d = pos; d < ctx.cw.cell_count(); ++d) {
            if (ctx.allowed[ctx.cw.order()[d]].empty()) return false;
        }
        return true;
    }
    ctx.charge();
    int cell = ctx.cw.order()[pos];
    for (Symbol s : ctx.allowed[cell]) {
        assignment[cell] = s;
        if (!ctx.cw.admissible_at(pos, assignment, scratch)) continue;
        if (complete_from(ctx, pos + 1, assignment, scratch)) return true;
    }
    return false;
}

inline BigUint count_from(const SearchContext& ctx, int pos, std::vector<Symbol>& assignment,
                          std::vector<Symbol>& scratch) {
    if (pos == ctx.cw.cell_count()) return BigUint(1);
    if (ctx.cw.no_pending_after(pos)) return free_tail_product(ctx, pos);
    ctx.charge();
    int cell = ctx.cw.order()[pos];
    BigUint total;
    for (Symbol s : ctx.allowed[cell]) {
        assignment[cell] = s;
        if (!ctx.cw.admissible_at(pos, assignment, scratch)) continue;
        total += count_from(ctx, pos + 1, assignment, scratch);
    }
    return total;
}

inline void enumerate_from(const SearchContext& ctx, int pos, std::vector<Symbol>& assignment,
                           std::vector<Symbol>& scratch, std::vector<Pattern>& out) {
    if (pos == ctx.cw.cell_count()) {
        if (out.size() >= ctx.budget.max_patterns) {
            throw resource_limit_error("pattern enumeration budget exceeded (" +
                                       std::to_string(ctx.budget.max_patterns) + ")");
        }
        out.emplace_back(ctx.cw.window(), assignment);
        return;
    }
    ctx.charge();
    int cell = ctx.cw.order()[pos];
    for (Symbol s : ctx.allowed[cell]) {
        assignment[cell] = s;
        if (!ctx.cw.admissible_at(pos, assignment, scratch)) continue;
        enumerate_from(ctx, pos + 1, assignment, scratch, out);
    }
}

/// Counts distinct assignments of the first `prefix_len` positions that extend
/// to a full admissible assignment.
inline BigUint project_from(const SearchContext& ctx, int pos, int prefix_len,
                            std::vector<Symbol>& assignment, std::vector<Symbol>& scratch) {
    if (pos == prefix_len) {
        if (ctx.completion != nullptr && ctx.completion->enabled()) {
            std::vector<Symbol> clean = assignment;
            for (int d = prefix_len; d < ctx.cw.cell_count(); ++d) clean[ctx.cw.order()[d]] = -1;
            return ctx.completion->exists_completion(ctx.allowed, std::move(clean), ctx.budget,
                                                     ctx.nodes)
                       ? BigUint(1)
                       : BigUint(0);
        }
        return complete_from(ctx, pos, assignment, scratch) ? BigUint(1) : BigUint(0);
    }
    if (ctx.cw.no_pending_after(pos)) {
        // every remaining prefix choice is unconstrained; the suffix is
        // completable iff no remaining cell is candidate-free
        for (int d = prefix_len; d < ctx.cw.cell_count(); ++d) {
            if (ctx.allowed[ctx.cw.order()[d]].empty()) return BigUint(0);
        }
        BigUint r(1);
        for (int d = pos; d < prefix_len; ++d) {
            r *= static_cast<std::uint64_t>(ctx.allowed[ctx.cw.order()[d]].size());
        }
        return r;
    }
    ctx.charge();
    int cell = ctx.cw.order()[pos];
    BigUint total;
    for (Symbol s : ctx.allowed[cell]) {
        assignment[cell] = s;
        if (!ctx.cw.admissible_at(pos, assignment, scratch)) continue;
        total += project_from(ctx, pos + 1, prefix_len, assignment, scratch);
    }
    return total;
}

inline std::vector<std::vector<Symbol>> full_candidates(const SftSpec& x, std::size_t cells) {
    std::vector<Symbol> all(static_cast<std::size_t>(x.alphabet.size()));
    std::iota(all.begin(), all.end(), 0);
    return std::vector<std::vector<Symbol>>(cells, all);
}

/// Runs `body(pos0_symbol)` for every first-position candidate, potentially in
/// parallel, and folds the results in candidate order so the outcome does not
/// depend on the worker count.
template <typename Result, typename Body>
std::vector<Result> split_first_cell(const SearchContext& ctx, Body body) {
    if (ctx.cw.cell_count() == 0) return {};
    const std::vector<Symbol>& cands = ctx.allowed[ctx.cw.order()[0]];
    std::vector<Result> results(cands.size());
    if (ctx.budget.jobs <= 1 || cands.size() <= 1) {
        for (std::size_t i = 0; i < cands.size(); ++i) results[i] = body(cands[i]);
        return results;
    }
    // bounded wave of workers; results folded in candidate order regardless
    std::size_t wave = static_cast<std::size_t>(ctx.budget.jobs);
    for (std::size_t base = 0; base < cands.size(); base += wave) {
        std::size_t end = std::min(base + wave, cands.size());
        std::vector<std::future<Result>> futures;
        futures.reserve(end - base);
        for (std::size_t i = base; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, body, cands[i]));
        }
        for (std::size_t i = base; i < end; ++i) results[i] = futures[i - base].get();
    }
    return results;
}

} // namespace detail

struct EnumerationOptions {
    Budget budget;
    // optional per-cell candidate restriction, indexed like the window support
    std::vector<std::vector<Symbol>> candidates;
};

/// Exact count of locally admissible patterns on the window (optionally with
/// per-cell candidate restrictions). Deterministic for any job count.
inline BigUint count_locally_admissible(const SftSpec& x, const Support& window,
                                        const EnumerationOptions& opts = {}) {
    if (window.empty()) return BigUint(1);
    CompiledWindow cw(x, window);
    auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                           : opts.candidates;
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::SearchContext ctx{cw, allowed, opts.budget, &nodes};
    auto parts = detail::split_first_cell<BigUint>(ctx, [&](Symbol s0) {
        std::vector<Symbol> assignment(window.size(), -1);
        std::vector<Symbol> scratch;
        int cell0 = cw.order()[0];
        assignment[cell0] = s0;
        if (!cw.admissible_at(0, assignment, scratch)) return BigUint(0);
        if (cw.no_pending_after(1)) return detail::free_tail_product(ctx, 1);
        return detail::count_from(ctx, 1, assignment, scratch);
    });
    BigUint total;
    for (auto& p : parts) total += p;
    return total;
}

/// All locally admissible patterns on the window, cells in shortlex order and
/// symbols in alphabet order, so the output order is fixed bit-exactly.
inline std::vector<Pattern> locally_admissible(const SftSpec& x, const Support& window,
                                               const EnumerationOptions& opts = {}) {
    if (window.empty()) return {Pattern(Support{}, {})};
    CompiledWindow cw(x, window);
    auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                           : opts.candidates;
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::SearchContext ctx{cw, allowed, opts.budget, &nodes};
    auto parts = detail::split_first_cell<std::vector<Pattern>>(ctx, [&](Symbol s0) {
        std::vector<Pattern> local;
        std::vector<Symbol> assignment(window.size(), -1);
        std::vector<Symbol> scratch;
        assignment[cw.order()[0]] = s0;
        if (cw.admissible_at(0, assignment, scratch)) {
            detail::enumerate_from(ctx, 1, assignment, scratch, local);
        }
        return local;
    });
    std::vector<Pattern> out;
    for (auto& p : parts) {
        out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        if (out.size() > opts.budget.max_patterns) {
            throw resource_limit_error("pattern enumeration budget exceeded");
        }
    }
    return out;
}

namespace detail {

// saturating leaf count: returns true as soon as the count exceeds cap
inline bool count_exceeds_from(const SearchContext& ctx, int pos, std::vector<Symbol>& assignment,
                               std::vector<Symbol>& scratch, std::uint64_t cap,
                               std::uint64_t& count) {
    if (pos == ctx.cw.cell_count()) return ++count > cap;
    if (ctx.cw.no_pending_after(pos)) {
        // product of remaining candidate counts, saturated at cap + 1
        std::uint64_t prod = 1;
        for (int d = pos; d < ctx.cw.cell_count(); ++d) {
            std::uint64_t m = ctx.allowed[ctx.cw.order()[d]].size();
            if (m == 0) {
                prod = 0;
                break;
            }
            prod *= m;
            if (prod > cap) {
                prod = cap + 1;
                break;
            }
        }
        count += prod;
        return count > cap;
    }
    ctx.charge();
    int cell = ctx.cw.order()[pos];
    for (Symbol s : ctx.allowed[cell]) {
        assignment[cell] = s;
        if (!ctx.cw.admissible_at(pos, assignment, scratch)) continue;
        if (count_exceeds_from(ctx, pos + 1, assignment, scratch, cap, count)) return true;
    }
    return false;
}

} // namespace detail

/// Exact count when it is at most cap, nullopt otherwise (early abort, no
/// pattern materialization).
inline std::optional<std::uint64_t> count_locally_admissible_capped(const SftSpec& x,
                                                                    const Support& window,
                                                                    std::uint64_t cap,
                                                                    const Budget& budget = {}) {
    if (window.empty()) return 1;
    CompiledWindow cw(x, window);
    auto allowed = detail::full_candidates(x, window.size());
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::SearchContext ctx{cw, allowed, budget, &nodes};
    std::vector<Symbol> assignment(window.size(), -1);
    std::vector<Symbol> scratch;
    std::uint64_t count = 0;
    if (detail::count_exceeds_from(ctx, 0, assignment, scratch, cap, count)) return std::nullopt;
    return count;
}

/// Number of distinct restrictions to `a` of locally admissible colorings of
/// `window` (a must be contained in the window). Counts each admissible
/// a-pattern that extends to a full admissible window coloring.
inline BigUint projection_count(const SftSpec& x, const Support& a, const Support& window,
                                const EnumerationOptions& opts = {}) {
    if (!a.subset_of(window)) throw support_mismatch_error("projection set must lie in the window");
    if (a.empty()) {
        // the empty pattern restricts from any coloring, so the count is 1
        // iff some admissible window coloring exists
        CompiledWindow cw(x, window);
        auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                               : opts.candidates;
        std::atomic<std::uint64_t> nodes{0};
        detail::SearchContext ctx{cw, allowed, opts.budget, &nodes};
        std::vector<Symbol> assignment(window.size(), -1);
        std::vector<Symbol> scratch;
        return detail::complete_from(ctx, 0, assignment, scratch) ? BigUint(1) : BigUint(0);
    }
    // decision order: a's cells first, then the rest, each in shortlex order
    std::vector<int> order;
    std::vector<char> in_a(window.size(), 0);
    for (const Element& e : a.cells()) in_a[*window.find(e)] = 1;
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (in_a[i]) order.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (!in_a[i]) order.push_back(static_cast<int>(i));
    }
    CompiledWindow cw(x, window, order);
    auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                           : opts.candidates;
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::CompletionSolver solver(cw);
    detail::SearchContext ctx{cw, allowed, opts.budget, &nodes, &solver};
    int prefix_len = static_cast<int>(a.size());
    auto parts = detail::split_first_cell<BigUint>(ctx, [&](Symbol s0) {
        std::vector<Symbol> assignment(window.size(), -1);
        std::vector<Symbol> scratch;
        assignment[cw.order()[0]] = s0;
        if (!cw.admissible_at(0, assignment, scratch)) return BigUint(0);
        return detail::project_from(ctx, 1, prefix_len, assignment, scratch);
    });
    BigUint total;
    for (auto& p : parts) total += p;
    return total;
}

/// First locally admissible coloring of the window extending the given pins
/// (cell -> symbol), in lexicographic order; nullopt if none exists.
inline std::optional<Pattern> find_completion(const SftSpec& x, const Support& window,
                                              const std::vector<std::pair<Element, Symbol>>& pins,
                                              const EnumerationOptions& opts = {}) {
    auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                           : opts.candidates;
    for (const auto& [cell, sym] : pins) {
        auto idx = window.find(cell);
        if (!idx) throw support_mismatch_error("pinned cell not in window");
        allowed[*idx] = {sym};
    }
    CompiledWindow cw(x, window);
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::SearchContext ctx{cw, allowed, opts.budget, &nodes};
    std::vector<Symbol> assignment(window.size(), -1);
    std::vector<Symbol> scratch;
    std::function<bool(int)> run = [&](int pos) -> bool {
        if (pos == cw.cell_count()) return true;
        ctx.charge();
        int cell = cw.order()[pos];
        for (Symbol s : allowed[cell]) {
            assignment[cell] = s;
            if (!cw.admissible_at(pos, assignment, scratch)) continue;
            if (run(pos + 1)) return true;
        }
        assignment[cell] = -1;
        return false;
    };
    if (!run(0)) return std::nullopt;
    return Pattern(window, assignment);
}

} // namespace groupshift
