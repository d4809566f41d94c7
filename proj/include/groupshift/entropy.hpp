#pragma once

#include <chrono>
#include <cmath>
#include <unordered_set>

#include "groupshift/engine.hpp"

namespace groupshift {

// ---------------------------------------------------------------------------
// The monotone upper-bound estimator
// ---------------------------------------------------------------------------

/// One estimator step: h_n is the least dyadic k/2^n strictly above the best
/// per-window raw bound min_A (1/|A|) ln |restrictions to A|.
struct TraceRow {
    int n = 0;
    std::size_t ball_size = 0;
    std::size_t family_size = 0;
    long long h_num = 0; // h_n = h_num / 2^n
    double raw_bound = 0.0;
    double elapsed_ms = 0.0;
    bool empty_local_language = false;
    bool no_window = false; // no family window fits inside B_n yet

    double h_value() const {
        if (empty_local_language) return -std::numeric_limits<double>::infinity();
        if (no_window) return std::numeric_limits<double>::infinity();
        return static_cast<double>(h_num) / std::pow(2.0, n);
    }
};

struct EntropyTrace {
    std::vector<TraceRow> rows;

    /// Exact dyadic comparison h_{i+1} <= h_i for every consecutive pair.
    bool nonincreasing() const {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            if (rows[i].empty_local_language || rows[i + 1].empty_local_language) continue;
            if (rows[i].no_window) continue; // vacuous bound before any window fits
            if (rows[i + 1].no_window) return false;
            // k1/2^n1 <= k0/2^n0  <=>  k1 * 2^n0 <= k0 * 2^n1
            long long lhs = rows[i + 1].h_num << rows[i].n;
            long long rhs = rows[i].h_num << rows[i + 1].n;
            if (lhs > rhs) return false;
        }
        return true;
    }
};

/// The window family minimized over at each step. Valid upper bounds need any
/// family; monotonicity needs nesting across n, which every policy here
/// provides (sub-balls grow, subset pools grow, fixed windows persist). When
/// the ball colorings cannot be materialized, per-window counting costs about
/// |Sigma|^|A| extension searches, so lean mode additionally filters windows
/// by that figure; the rich/lean switch is fixed once per estimate call.
struct SubsetFamily {
    enum class Policy { Default, SubBalls, AllSubsetsCapped, Windows };
    Policy policy = Policy::Default;
    int subset_size_cap = 12;                // max |A| for enumerated subsets
    std::size_t ball_cell_cap = 13;          // sub-balls larger than this are skipped
    std::size_t lean_candidate_cap = 5000;   // lean mode: keep A only if |Sigma|^|A| fits
    std::vector<Support> windows;            // Windows policy

    static SubsetFamily sub_balls() { return SubsetFamily{Policy::SubBalls, 12, 13, 5000, {}}; }
    static SubsetFamily all_subsets_capped(int cap) {
        return SubsetFamily{Policy::AllSubsetsCapped, cap, 13, 5000, {}};
    }
    static SubsetFamily for_windows(std::vector<Support> w) {
        return SubsetFamily{Policy::Windows, 12, 13, 5000, std::move(w)};
    }

    /// Materializes the family at step n. `balls` holds B_0..B_n.
    std::vector<Support> materialize(const std::vector<Ball>& balls, bool rich, int nsym) const {
        const Ball& bn = balls.back();
        auto candidate_space_fits = [&](std::size_t cells) {
            if (rich) return true;
            std::uint64_t space = 1;
            for (std::size_t i = 0; i < cells; ++i) {
                space *= static_cast<std::uint64_t>(nsym);
                if (space > lean_candidate_cap) return false;
            }
            return true;
        };
        std::vector<Support> family;
        auto add_sub_balls = [&]() {
            for (const Ball& b : balls) {
                if (b.size() <= ball_cell_cap && candidate_space_fits(b.size())) {
                    family.emplace_back(b.elements);
                }
            }
        };
        auto add_subsets = [&]() {
            // subsets of the largest sub-ball within the pool cap; lean mode
            // keeps the pool small and filters each subset by candidate space
            std::size_t pool_cells_cap = rich ? std::min<std::size_t>(ball_cell_cap, 20)
                                              : std::min<std::size_t>(ball_cell_cap, 5);
            int pool_idx = -1;
            for (std::size_t i = 0; i < balls.size(); ++i) {
                if (balls[i].size() <= pool_cells_cap) pool_idx = static_cast<int>(i);
            }
            if (pool_idx < 0) return;
            const std::vector<Element>& pool = balls[pool_idx].elements;
            std::size_t p = pool.size();
            for (std::uint64_t mask = 1; mask < (1ull << p); ++mask) {
                int bits = __builtin_popcountll(mask);
                if (bits > subset_size_cap) continue;
                if (!candidate_space_fits(static_cast<std::size_t>(bits))) continue;
                std::vector<Element> cells;
                for (std::size_t i = 0; i < p; ++i) {
                    if (mask & (1ull << i)) cells.push_back(pool[i]);
                }
                family.emplace_back(std::move(cells));
            }
        };
        switch (policy) {
            case Policy::SubBalls: add_sub_balls(); break;
            case Policy::AllSubsetsCapped: add_subsets(); break;
            case Policy::Windows: {
                Support bn_support(bn.elements);
                for (const Support& w : windows) {
                    if (w.subset_of(bn_support) && !w.empty()) family.push_back(w);
                }
                break;
            }
            case Policy::Default:
                add_sub_balls();
                add_subsets();
                break;
        }
        // dedupe, keep first occurrence
        std::vector<Support> out;
        for (auto& s : family) {
            bool dup = false;
            for (auto& t : out) {
                if (s == t) dup = true;
            }
            if (!dup) out.push_back(std::move(s));
        }
        return out;
    }
};

struct EstimateOptions {
    Budget budget;
    std::uint64_t materialize_cap = 300'000; // colorings kept in memory per ball
    bool force_projection_mode = false;      // testing hook
};

/// Locally admissible patterns on A that extend to a locally admissible
/// coloring of the whole window: the exact count of distinct restrictions.
inline BigUint restriction_count(const SftSpec& x, const Support& a, const Support& window,
                                 const EstimateOptions& opts = {}) {
    EnumerationOptions eopts;
    eopts.budget = opts.budget;
    return projection_count(x, a, window, eopts);
}

/// Locally admissible patterns on A alone (the cheaper over-count; can be
/// strictly larger than restriction_count when extensions fail).
inline BigUint local_count(const SftSpec& x, const Support& a, const EstimateOptions& opts = {}) {
    EnumerationOptions eopts;
    eopts.budget = opts.budget;
    return count_locally_admissible(x, a, eopts);
}

namespace detail {

/// least k with raw < k/2^n (next grid point when raw lands on the grid)
inline long long grid_round_up(double raw, int n) {
    double scaled = raw * std::pow(2.0, n);
    long long k = static_cast<long long>(std::floor(scaled)) + 1;
    return k;
}

} // namespace detail

/// The monotone estimator: for each n <= n_max, enumerate (implicitly) the
/// locally admissible colorings of B_n and minimize the grid-rounded per-cell
/// log-count of their restrictions over the window family. Natural log.
/// Rows are nonincreasing; an empty local language is reported with a flag.
inline EntropyTrace estimate(const SftSpec& x, int n_max, const SubsetFamily& family = {},
                             const EstimateOptions& opts = {}) {
    EntropyTrace trace;
    std::vector<Ball> balls;
    const Group& g = x.group;

    // Fix the family mode once per call so it is nested across n: rich when
    // the top ball's coloring set materializes, lean otherwise.
    bool rich = !opts.force_projection_mode &&
                count_locally_admissible_capped(x, Support(g.ball(n_max, opts.budget).elements),
                                                opts.materialize_cap, opts.budget)
                    .has_value();

    for (int n = 0; n <= n_max; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        balls.push_back(g.ball(n, opts.budget));
        Support window(balls.back().elements);
        std::vector<Support> fam = family.materialize(balls, rich, x.alphabet.size());

        TraceRow row;
        row.n = n;
        row.ball_size = balls.back().size();
        row.family_size = fam.size();
        if (fam.empty()) {
            row.no_window = true;
            auto t1 = std::chrono::steady_clock::now();
            row.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            trace.rows.push_back(row);
            continue;
        }

        // materialize the coloring set when it fits; fall back to per-window
        // projection counting otherwise
        std::vector<Pattern> colorings;
        bool materialized = false;
        if (!opts.force_projection_mode &&
            count_locally_admissible_capped(x, window, opts.materialize_cap, opts.budget)
                .has_value()) {
            EnumerationOptions eopts;
            eopts.budget = opts.budget;
            eopts.budget.max_patterns = opts.materialize_cap + 1;
            colorings = locally_admissible(x, window, eopts);
            materialized = true;
        }

        if (materialized && colorings.empty()) {
            row.empty_local_language = true;
            row.raw_bound = -std::numeric_limits<double>::infinity();
            auto t1 = std::chrono::steady_clock::now();
            row.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            trace.rows.push_back(row);
            continue;
        }

        long long best_k = 0;
        double best_raw = 0.0;
        bool first = true;
        bool empty = false;
        for (const Support& a : fam) {
            BigUint count;
            if (materialized) {
                std::vector<std::size_t> positions;
                positions.reserve(a.size());
                for (const Element& e : a.cells()) positions.push_back(*window.find(e));
                std::unordered_set<std::string> distinct;
                for (const Pattern& p : colorings) {
                    std::string key;
                    key.reserve(positions.size() * 2);
                    for (std::size_t pos : positions) {
                        Symbol s = p.symbols[pos];
                        key.push_back(static_cast<char>(s & 0xff));
                        key.push_back(static_cast<char>((s >> 8) & 0xff));
                    }
                    distinct.insert(std::move(key));
                }
                count = BigUint(distinct.size());
            } else {
                count = restriction_count(x, a, window, opts);
            }
            if (count.is_zero()) {
                empty = true;
                break;
            }
            double raw = count.log() / static_cast<double>(a.size());
            long long k = detail::grid_round_up(raw, n);
            if (first || k < best_k || (k == best_k && raw < best_raw)) {
                best_k = k;
                best_raw = raw;
                first = false;
            }
        }
        if (empty || first) {
            row.empty_local_language = true;
            row.raw_bound = -std::numeric_limits<double>::infinity();
        } else {
            row.h_num = best_k;
            row.raw_bound = best_raw;
        }
        auto t1 = std::chrono::steady_clock::now();
        row.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        trace.rows.push_back(row);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Exact entropy for Z-SFTs via transfer matrices
// ---------------------------------------------------------------------------

struct PerronResult {
    double lambda = 0.0;
    int iterations = 0;
};

/// Spectral radius of a nonnegative 0/1 matrix given as adjacency lists, by
/// power iteration on (M + I); lambda(M + I) = lambda(M) + 1 for nonnegative
/// M, and adding I kills peripheral rotation so the norm ratio converges.
inline PerronResult perron_radius(const std::vector<std::vector<int>>& out_edges, double tol = 1e-13,
                                  int max_iterations = 1'000'000) {
    std::size_t n = out_edges.size();
    if (n == 0) return {0.0, 0};
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n, 0.0);
    double prev_ratio = -1.0;
    int stable = 0;
    for (int it = 1; it <= max_iterations; ++it) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = x[i]; // the +I term
            for (int j : out_edges[i]) acc += x[j];
            y[i] = acc;
            norm2 += acc * acc;
        }
        double norm = std::sqrt(norm2);
        if (norm == 0.0) return {0.0, it};
        double ratio = norm; // ||(M+I)x|| with ||x|| = 1
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (prev_ratio >= 0.0 && std::abs(ratio - prev_ratio) <= tol * std::max(1.0, ratio)) {
            if (++stable >= 3) return {ratio - 1.0, it};
        } else {
            stable = 0;
        }
        prev_ratio = ratio;
    }
    throw non_convergence_error("power iteration did not converge within " +
                                std::to_string(max_iterations) + " iterations");
}

struct ExactZResult {
    double entropy = 0.0;  // ln(lambda); 0 when degenerate
    double lambda = 0.0;   // Perron eigenvalue of the block transition matrix
    std::size_t states = 0;
    int iterations = 0;
    bool degenerate = false; // spectral radius 0: empty or single-orbit-free shift
};

/// Exact topological entropy of a Z-SFT: recode to memory-m blocks, build the
/// 0/1 transition matrix, return ln of its spectral radius.
inline ExactZResult exact_z(const SftSpec& x, int memory, const EstimateOptions& opts = {}) {
    auto rank = x.group.free_abelian_rank();
    if (!rank || *rank != 1) throw spec_error("exact_z needs a Z-SFT (free-abelian rank 1)");
    if (memory < 1) throw spec_error("memory must be >= 1");
    if (!x.rules.empty()) throw spec_error("exact_z needs a literal-pattern SFT");

    const Group& g = x.group;
    auto exponent = [&](const Element& e) {
        long long v = 0;
        for (auto letter : e.word()) v += (letter == 0) ? 1 : -1;
        return v;
    };
    for (const Pattern& p : x.forbidden) {
        long long lo = 0, hi = 0;
        for (const Element& c : p.support.cells()) {
            long long v = exponent(c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > memory) {
            throw memory_too_small_error("forbidden support spans " + std::to_string(hi - lo + 1) +
                                         " cells; memory " + std::to_string(memory) + " is too small");
        }
    }

    // block alphabet: locally admissible m-windows [0, m)
    std::vector<Element> win_cells, ext_cells;
    Element a = g.element("a");
    Element cur;
    for (int i = 0; i < memory + 1; ++i) {
        if (i < memory) win_cells.push_back(cur);
        ext_cells.push_back(cur);
        cur = g.multiply(cur, a);
    }
    Support window(win_cells);
    Support extended(ext_cells);
    EnumerationOptions eopts;
    eopts.budget = opts.budget;
    std::vector<Pattern> blocks = locally_admissible(x, window, eopts);

    ExactZResult result;
    result.states = blocks.size();
    if (blocks.empty()) {
        result.degenerate = true;
        return result;
    }

    // transitions: overlap consistency plus admissibility of the glued window
    CompiledWindow glued(x, extended);
    std::vector<std::vector<int>> out_edges(blocks.size());
    std::vector<Symbol> assignment(extended.size());
    for (std::size_t u = 0; u < blocks.size(); ++u) {
        for (std::size_t v = 0; v < blocks.size(); ++v) {
            bool overlap = true;
            for (int i = 0; i + 1 < memory; ++i) {
                if (blocks[u].symbols[i + 1] != blocks[v].symbols[i]) {
                    overlap = false;
                    break;
                }
            }
            if (!overlap) continue;
            for (int i = 0; i < memory; ++i) assignment[i] = blocks[u].symbols[i];
            assignment[memory] = blocks[v].symbols[memory - 1];
            if (!glued.admissible_total(assignment)) continue;
            out_edges[u].push_back(static_cast<int>(v));
        }
    }

    PerronResult pr = perron_radius(out_edges);
    result.lambda = pr.lambda;
    result.iterations = pr.iterations;
    if (pr.lambda < 0.5) { // 0/1 matrices: spectral radius is 0 or >= 1
        result.degenerate = true;
        result.entropy = 0.0;
        return result;
    }
    result.entropy = std::log(pr.lambda);
    return result;
}

// ---------------------------------------------------------------------------
// Strip transfer-matrix lower bound for nearest-neighbor Z^2-SFTs
// ---------------------------------------------------------------------------

struct StripBoundResult {
    double bound = 0.0; // (1/w) ln lambda; certified lower bound when >= 0
    double lambda = 0.0;
    std::size_t states = 0;
    int iterations = 0;
};

/// Periodic-boundary strip bound: closed walks of the width-w cyclic-column
/// transfer matrix are doubly periodic configurations, so the growth rate
/// under-counts the language and (1/w) ln lambda <= h_top.
inline StripBoundResult strip_lower_bound(const SftSpec& x, int width,
                                          const EstimateOptions& opts = {}) {
    auto rank = x.group.free_abelian_rank();
    if (!rank || *rank != 2) throw spec_error("strip_lower_bound needs a Z^2-SFT");
    if (width < 1) throw spec_error("strip width must be >= 1");
    if (!x.rules.empty()) throw spec_error("strip_lower_bound needs a literal-pattern SFT");

    auto coords = [&](const Element& e) {
        long long cx = 0, cy = 0;
        for (auto letter : e.word()) {
            if (letter == 0) ++cx;
            if (letter == 1) --cx;
            if (letter == 2) ++cy;
            if (letter == 3) --cy;
        }
        return std::pair<long long, long long>(cx, cy);
    };

    // classify forbidden patterns by their 2x2 footprint
    struct Constraint {
        std::vector<std::pair<std::pair<int, int>, Symbol>> cells; // ((dx, dy), symbol)
        int max_dx = 0;
    };
    std::vector<Constraint> constraints;
    for (const Pattern& p : x.forbidden) {
        Constraint c;
        long long min_x = 0, min_y = 0;
        std::vector<std::pair<std::pair<long long, long long>, Symbol>> raw;
        for (std::size_t i = 0; i < p.support.size(); ++i) {
            auto [cx, cy] = coords(p.support.cell(i));
            raw.push_back({{cx, cy}, p.symbols[i]});
            min_x = std::min(min_x, cx);
            min_y = std::min(min_y, cy);
        }
        for (auto& [xy, s] : raw) {
            int dx = static_cast<int>(xy.first - min_x);
            int dy = static_cast<int>(xy.second - min_y);
            if (dx > 1 || dy > 1) {
                throw spec_error("strip_lower_bound needs nearest-neighbor constraints (2x2 box)");
            }
            c.cells.push_back({{dx, dy}, s});
            c.max_dx = std::max(c.max_dx, dx);
        }
        constraints.push_back(std::move(c));
    }

    int nsym = x.alphabet.size();
    std::uint64_t space = 1;
    for (int i = 0; i < width; ++i) {
        space *= static_cast<std::uint64_t>(nsym);
        if (space > opts.budget.max_patterns) {
            throw resource_limit_error("strip state space exceeds budget");
        }
    }

    // a column state is admissible when no intra-column constraint fires
    // cyclically (including a cell paired with itself when width == 1)
    auto column_ok = [&](const std::vector<Symbol>& col) {
        for (const Constraint& c : constraints) {
            if (c.max_dx != 0) continue;
            for (int j = 0; j < width; ++j) {
                bool fire = true;
                for (auto& [dxy, s] : c.cells) {
                    int row = (j + dxy.second) % width;
                    if (col[row] != s) {
                        fire = false;
                        break;
                    }
                }
                if (fire) return false;
            }
        }
        return true;
    };
    auto transition_ok = [&](const std::vector<Symbol>& u, const std::vector<Symbol>& v) {
        for (const Constraint& c : constraints) {
            if (c.max_dx != 1) continue;
            for (int j = 0; j < width; ++j) {
                bool fire = true;
                for (auto& [dxy, s] : c.cells) {
                    int row = (j + dxy.second) % width;
                    Symbol have = (dxy.first == 0) ? u[row] : v[row];
                    if (have != s) {
                        fire = false;
                        break;
                    }
                }
                if (fire) return false;
            }
        }
        return true;
    };

    std::vector<std::vector<Symbol>> states;
    std::vector<Symbol> col(width, 0);
    while (true) {
        if (column_ok(col)) states.push_back(col);
        int i = 0;
        while (i < width && col[i] == nsym - 1) col[i++] = 0;
        if (i == width) break;
        ++col[i];
    }

    StripBoundResult out;
    out.states = states.size();
    if (states.empty()) {
        out.bound = -std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<std::vector<int>> out_edges(states.size());
    for (std::size_t u = 0; u < states.size(); ++u) {
        for (std::size_t v = 0; v < states.size(); ++v) {
            if (transition_ok(states[u], states[v])) out_edges[u].push_back(static_cast<int>(v));
        }
    }
    PerronResult pr = perron_radius(out_edges);
    out.lambda = pr.lambda;
    out.iterations = pr.iterations;
    if (pr.lambda < 0.5) {
        out.bound = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.bound = std::log(pr.lambda) / static_cast<double>(width);
    return out;
}

} // namespace groupshift
