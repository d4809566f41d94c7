#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groupshift/engine.hpp"

namespace groupshift {

class insufficient_data_error : public spec_error {
public:
    using spec_error::spec_error;
};

/// Streaming enumeration of locally admissible colorings; the visitor gets
/// the symbol tuple in window support order and returns false to stop early.
/// Serial and deterministic (cells in shortlex order, symbols in alphabet
/// order).
inline void enumerate_locally_admissible(const SftSpec& x, const Support& window,
                                         const EnumerationOptions& opts,
                                         const std::function<bool(const std::vector<Symbol>&)>& visit) {
    if (window.empty()) {
        visit({});
        return;
    }
    CompiledWindow cw(x, window);
    auto allowed = opts.candidates.empty() ? detail::full_candidates(x, window.size())
                                           : opts.candidates;
    cw.specialize(allowed);
    std::atomic<std::uint64_t> nodes{0};
    detail::SearchContext ctx{cw, allowed, opts.budget, &nodes};
    std::vector<Symbol> assignment(window.size(), -1);
    std::vector<Symbol> scratch;
    bool stop = false;
    std::function<void(int)> rec = [&](int pos) {
        if (stop) return;
        if (pos == cw.cell_count()) {
            if (!visit(assignment)) stop = true;
            return;
        }
        ctx.charge();
        int cell = cw.order()[pos];
        for (Symbol s : allowed[cell]) {
            if (stop) return;
            assignment[cell] = s;
            if (!cw.admissible_at(pos, assignment, scratch)) continue;
            rec(pos + 1);
        }
    };
    rec(0);
}

// ---------------------------------------------------------------------------
// Cocycles and charts
// ---------------------------------------------------------------------------

/// Finite description of an H-cocycle on a G-subshift X: for each H-generator
/// and each window pattern of X, the G-element the induced action steps by.
/// The table is total on the locally admissible window patterns.
struct Cocycle {
    std::vector<std::string> h_generators; // closed under formal inverses
    std::vector<int> h_inverse;            // h_inverse[i] = index of the formal inverse
    Support window;                        // W, cells canonical in G
    std::vector<std::map<std::vector<Symbol>, Element>> table; // per generator

    int h_generator_count() const { return static_cast<int>(h_generators.size()); }

    int h_generator_index(const std::string& name) const {
        for (int i = 0; i < h_generator_count(); ++i) {
            if (h_generators[i] == name) return i;
        }
        throw unknown_generator_error(name);
    }

    Word parse_h_word(const std::string& text) const {
        Word w;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) w.push_back(static_cast<std::int16_t>(h_generator_index(tok)));
        return w;
    }

    std::string h_word_to_string(const Word& w) const {
        std::string out;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) out.push_back(' ');
            out += h_generators[w[i]];
        }
        return out;
    }

    Word free_reduce(const Word& w) const {
        Word stack;
        for (auto g : w) {
            if (!stack.empty() && h_inverse[stack.back()] == g) {
                stack.pop_back();
            } else {
                stack.push_back(g);
            }
        }
        return stack;
    }

    void set_entry(int gen, std::vector<Symbol> key, Element value) {
        if (table.empty()) table.resize(h_generators.size());
        table[gen][std::move(key)] = std::move(value);
    }
};

/// A pair (X, cocycle): X a G-SFT, the cocycle an H-cocycle on it.
struct Chart {
    SftSpec sft;
    Cocycle cocycle;
};

/// One cocycle step from `base` reading generator `gen`: looks up the window
/// pattern of p seen at base (q(f) = p(f * base) for f in W) and multiplies
/// the table value on the left. Returns nullopt when the window escapes
/// supp(p) (insufficient data).
inline std::optional<Element> cocycle_step(const Chart& ch, int gen, const Pattern& p,
                                           const Element& base) {
    const Group& g = ch.sft.group;
    const Support& w = ch.cocycle.window;
    std::vector<Symbol> key;
    key.reserve(w.size());
    for (const Element& f : w.cells()) {
        auto sym = p.try_at(g.multiply(f, base));
        if (!sym) return std::nullopt;
        key.push_back(*sym);
    }
    const auto& tab = ch.cocycle.table.at(static_cast<std::size_t>(gen));
    auto it = tab.find(key);
    if (it == tab.end()) {
        throw pattern_not_in_table_error("window restriction at \"" + g.to_string(base) +
                                         "\" is not in the cocycle table");
    }
    return g.multiply(it->second, base);
}

/// Folds the cocycle equation over the word, rightmost letter first:
/// g_0 = base, g_{k+1} = table(s, window at g_k) * g_k.
inline std::optional<Element> evaluate_word(const Chart& ch, const Word& h_word, const Pattern& p,
                                            const Element& base) {
    Element g = base;
    for (std::size_t i = h_word.size(); i-- > 0;) {
        auto next = cocycle_step(ch, h_word[i], p, g);
        if (!next) return std::nullopt;
        g = *next;
    }
    return g;
}

inline std::optional<Element> evaluate_word(const Chart& ch, const std::string& h_word,
                                            const Pattern& p, const Element& base) {
    return evaluate_word(ch, ch.cocycle.parse_h_word(h_word), p, base);
}

// ---------------------------------------------------------------------------
// Built-in charts
// ---------------------------------------------------------------------------

/// The snake chart: the snake shift with the single-cell window, stepping +1
/// along the arrow and -1 along the tail.
inline Chart snake_chart() {
    SftSpec x = snake_shift();
    Cocycle c;
    c.h_generators = {"+1", "-1"};
    c.h_inverse = {1, 0};
    c.window = Support(std::vector<Element>{Element{}});
    c.table.resize(2);
    for (Symbol s = 0; s < 12; ++s) {
        c.set_entry(0, {s}, snake::direction_element(x.group, snake::arrow_of(s)));
        c.set_entry(1, {s}, snake::direction_element(x.group, snake::tail_of(s)));
    }
    return Chart{std::move(x), std::move(c)};
}

/// The canonical free chart of a subgroup: the single-point G-SFT with
/// gamma(h) = the image of h. Embedding an H-SFT over it reproduces the free
/// G-extension up to alphabet relabeling.
inline Chart subgroup_chart(const Group& g, const Group& h, const GeneratorEmbedding& embedding) {
    SftSpec x(g, Alphabet({"*"}));
    Cocycle c;
    c.h_generators.assign(h.spec().generators.begin(), h.spec().generators.end());
    c.h_inverse = h.spec().inverse;
    c.window = Support(std::vector<Element>{Element{}});
    c.table.resize(c.h_generators.size());
    for (int i = 0; i < h.generator_count(); ++i) {
        Element img = g.canonicalize(embedding.images.at(static_cast<std::size_t>(i)));
        c.set_entry(i, {0}, img);
    }
    return Chart{std::move(x), std::move(c)};
}

// ---------------------------------------------------------------------------
// The (X, gamma)-embedding of an H-SFT
// ---------------------------------------------------------------------------

struct EmbedResult {
    SftSpec sft;                 // over Sigma_Y x Sigma_X (Y-major symbol pairs)
    Support evaluation_support;  // union of every support used to transport Y patterns
    std::size_t x_lift_count = 0;
    std::size_t transport_count = 0;
};

/// Builds the G-SFT whose configurations are pairs (y, x) with x in X and
/// every induced H-copy carrying an admissible Y-configuration. Forbidden
/// patterns: lifts of X's own family, plus, for every forbidden Y-pattern q,
/// product patterns asserting an X-context together with q's symbols at the
/// evaluated path endpoints (shortlex-geodesic word representatives).
inline EmbedResult embed(const SftSpec& y, const Chart& ch, std::size_t max_support_cells = 64,
                         std::uint64_t budget_patterns = 2'000'000) {
    const Group& g = ch.sft.group;
    const Group& h = y.group;
    int ny = y.alphabet.size();
    int nx = ch.sft.alphabet.size();

    // align the chart's H-generators with the generators of y's group
    std::vector<int> chart_gen_of(h.generator_count(), -1);
    if (ch.cocycle.h_generator_count() != h.generator_count()) {
        throw spec_error("chart H-generators do not match the embedded shift's group");
    }
    for (int i = 0; i < h.generator_count(); ++i) chart_gen_of[i] = i;

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(ny) * nx);
    for (int a = 0; a < ny; ++a) {
        for (int b = 0; b < nx; ++b) names.push_back(y.alphabet.symbols[a] + "|" + ch.sft.alphabet.symbols[b]);
    }
    EmbedResult out{SftSpec(g, Alphabet(std::move(names))), Support{}, 0, 0};
    auto pair_symbol = [nx](Symbol ys, Symbol xs) { return ys * nx + xs; };

    // lifts of X's forbidden patterns over every Y-assignment
    for (const Pattern& p : ch.sft.forbidden) {
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < p.support.size(); ++i) {
            total *= static_cast<std::uint64_t>(ny);
            if (total > budget_patterns) throw resource_limit_error("embed lift budget exceeded");
        }
        std::vector<Symbol> ys(p.support.size(), 0);
        while (true) {
            std::vector<Symbol> syms(p.support.size());
            for (std::size_t i = 0; i < p.support.size(); ++i) syms[i] = pair_symbol(ys[i], p.symbols[i]);
            out.sft.add_forbidden(Pattern(p.support, std::move(syms)));
            ++out.x_lift_count;
            std::size_t i = 0;
            while (i < p.support.size() && ys[i] == ny - 1) ys[i++] = 0;
            if (i == p.support.size()) break;
            ++ys[i];
        }
    }
    // X's rules lift componentwise
    for (const LocalRule& r : ch.sft.rules) {
        LocalRule lifted{r.name + ".x", r.support, nullptr};
        auto inner = r.forbids;
        lifted.forbids = [inner, nx](std::span<const Symbol> t) {
            std::vector<Symbol> proj(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) proj[i] = t[i] % nx;
            return inner(std::span<const Symbol>(proj.data(), proj.size()));
        };
        out.sft.add_rule(std::move(lifted));
    }

    // transport of Y's forbidden patterns
    for (const Pattern& q : y.forbidden) {
        // shortlex geodesic representatives via H's canonical words
        std::vector<Word> rep_words;
        for (const Element& cell : q.support.cells()) {
            Word w;
            for (auto letter : cell.word()) {
                w.push_back(static_cast<std::int16_t>(chart_gen_of[letter]));
            }
            rep_words.push_back(std::move(w));
        }

        struct Frame {
            std::map<Element, Symbol> assign; // partial X-pattern
            std::size_t word_idx = 0;
            std::size_t letters_done = 0;
            Element position;                 // evaluation position of the current word
            std::vector<Element> endpoints;   // finished word endpoints
        };
        std::vector<Frame> stack;
        stack.push_back(Frame{});
        while (!stack.empty()) {
            Frame fr = std::move(stack.back());
            stack.pop_back();
            if (fr.word_idx == rep_words.size()) {
                // all words evaluated; merge endpoint constraints
                std::map<Element, Symbol> y_constraints;
                bool vacuous = false;
                for (std::size_t j = 0; j < fr.endpoints.size(); ++j) {
                    auto [it, fresh] = y_constraints.emplace(fr.endpoints[j], q.symbols[j]);
                    if (!fresh && it->second != q.symbols[j]) vacuous = true;
                }
                if (vacuous) continue;
                // D = visited windows plus endpoints
                std::vector<Element> cells;
                for (auto& [e, s] : fr.assign) cells.push_back(e);
                for (auto& [e, s] : y_constraints) cells.push_back(e);
                Support d(cells);
                // complete the X-layer on endpoint cells not yet assigned,
                // keeping only locally admissible X-patterns on D
                std::vector<std::vector<Symbol>> candidates(d.size());
                for (std::size_t i = 0; i < d.size(); ++i) {
                    auto it = fr.assign.find(d.cell(i));
                    if (it != fr.assign.end()) {
                        candidates[i] = {it->second};
                    } else {
                        candidates[i].resize(static_cast<std::size_t>(nx));
                        std::iota(candidates[i].begin(), candidates[i].end(), 0);
                    }
                }
                EnumerationOptions eopts;
                eopts.candidates = candidates;
                eopts.budget.max_patterns = budget_patterns;
                auto x_patterns = locally_admissible(ch.sft, d, eopts);
                for (const Pattern& xp : x_patterns) {
                    // blow up the Y-layer on non-endpoint cells
                    std::vector<std::size_t> free_cells;
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        if (!y_constraints.count(d.cell(i))) free_cells.push_back(i);
                    }
                    std::uint64_t total = 1;
                    for (std::size_t i = 0; i < free_cells.size(); ++i) {
                        total *= static_cast<std::uint64_t>(ny);
                        if (total > budget_patterns) {
                            throw resource_limit_error("embed transport budget exceeded");
                        }
                    }
                    std::vector<Symbol> yfree(free_cells.size(), 0);
                    while (true) {
                        std::vector<Symbol> syms(d.size());
                        for (std::size_t i = 0; i < d.size(); ++i) {
                            auto yc = y_constraints.find(d.cell(i));
                            Symbol ysym = yc != y_constraints.end() ? yc->second : -1;
                            syms[i] = pair_symbol(ysym >= 0 ? ysym : 0, xp.symbols[i]);
                        }
                        for (std::size_t k = 0; k < free_cells.size(); ++k) {
                            syms[free_cells[k]] = pair_symbol(yfree[k], xp.symbols[free_cells[k]]);
                        }
                        out.sft.add_forbidden(Pattern(d, std::move(syms)));
                        ++out.transport_count;
                        if (out.transport_count > budget_patterns) {
                            throw resource_limit_error("embed transport budget exceeded");
                        }
                        std::size_t k = 0;
                        while (k < free_cells.size() && yfree[k] == ny - 1) yfree[k++] = 0;
                        if (k == free_cells.size()) break;
                        ++yfree[k];
                    }
                }
                out.evaluation_support = support_union(out.evaluation_support, d);
                continue;
            }
            const Word& word = rep_words[fr.word_idx];
            if (fr.letters_done == word.size()) {
                // word finished: record endpoint, move to the next word
                Frame next = fr;
                next.endpoints.push_back(fr.position);
                ++next.word_idx;
                next.letters_done = 0;
                next.position = Element{};
                stack.push_back(std::move(next));
                continue;
            }
            // consume the next letter (rightmost first)
            int gen = word[word.size() - 1 - fr.letters_done];
            // the window at the current position must be fully assigned
            const Support& w = ch.cocycle.window;
            std::vector<Element> missing;
            std::vector<Symbol> key;
            bool complete = true;
            for (const Element& f : w.cells()) {
                Element cell = g.multiply(f, fr.position);
                auto it = fr.assign.find(cell);
                if (it == fr.assign.end()) {
                    complete = false;
                    missing.push_back(cell);
                } else if (complete) {
                    key.push_back(it->second);
                }
            }
            if (!complete) {
                if (fr.assign.size() + missing.size() > max_support_cells) {
                    throw insufficient_data_error(
                        "embedding evaluation escapes the configured support bound");
                }
                // branch on the first missing cell's symbol
                for (Symbol s = nx - 1; s >= 0; --s) {
                    Frame next = fr;
                    next.assign.emplace(missing.front(), s);
                    stack.push_back(std::move(next));
                }
                continue;
            }
            const auto& tab = ch.cocycle.table.at(static_cast<std::size_t>(gen));
            auto it = tab.find(key);
            if (it == tab.end()) continue; // window restriction not in the table: not admissible
            Frame next = fr;
            next.position = g.multiply(it->second, fr.position);
            ++next.letters_done;
            stack.push_back(std::move(next));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chart from a finite presentation
// ---------------------------------------------------------------------------

/// Decodes the symbols of the F^S alphabet: component s of symbol sym.
struct PresentationAlphabet {
    std::vector<Element> f_elements; // F in shortlex order
    int s_count = 0;

    int f_size() const { return static_cast<int>(f_elements.size()); }

    int component(Symbol sym, int s) const {
        int div = 1;
        for (int k = s + 1; k < s_count; ++k) div *= f_size();
        return (sym / div) % f_size();
    }

    Symbol symbol_count() const {
        Symbol n = 1;
        for (int k = 0; k < s_count; ++k) n *= f_size();
        return n;
    }
};

/// Builds the chart of a finitely presented group <S | R> acting within range
/// F on G: alphabet F^S, inverse-consistency constraints (single cells plus
/// two-cell rules), and one path rule per relator. The cocycle window is the
/// single cell: table(s, sigma) = sigma(s).
inline Chart chart_from_presentation(const std::vector<std::string>& h_generators,
                                     const std::vector<int>& h_inverse,
                                     const std::vector<std::string>& relators, const Support& f_range,
                                     const Group& g, std::uint64_t budget = 10'000'000) {
    int m = static_cast<int>(h_generators.size());
    if (m == 0) throw spec_error("presentation needs at least one generator");
    PresentationAlphabet pa{f_range.cells(), m};
    std::uint64_t sym_count = 1;
    for (int s = 0; s < m; ++s) {
        sym_count *= static_cast<std::uint64_t>(pa.f_size());
        if (sym_count > budget) throw resource_limit_error("presentation alphabet exceeds budget");
    }
    std::vector<std::string> names;
    names.reserve(sym_count);
    for (Symbol sym = 0; sym < static_cast<Symbol>(sym_count); ++sym) {
        std::string nm;
        for (int s = 0; s < m; ++s) {
            if (s) nm += ";";
            nm += h_generators[s] + ">" + g.to_string(pa.f_elements[pa.component(sym, s)]);
        }
        names.push_back(std::move(nm));
    }
    SftSpec x(g, Alphabet(std::move(names)));

    // locate identity and inverses within F (when present)
    std::optional<std::size_t> f_identity = f_range.find(Element{});
    std::vector<std::optional<std::size_t>> f_inverse(pa.f_size());
    for (int i = 0; i < pa.f_size(); ++i) {
        f_inverse[i] = f_range.find(g.invert(pa.f_elements[i]));
    }

    // (i) inverse consistency. Single cell: sigma(s) = 1 forces
    // sigma(s^-1) = 1. Pairs: sigma(s) = f != 1 at a cell forces
    // sigma'(s^-1) = f^-1 at cell f.
    for (Symbol sym = 0; sym < static_cast<Symbol>(sym_count); ++sym) {
        bool bad = false;
        for (int s = 0; s < m && !bad; ++s) {
            int fi = pa.component(sym, s);
            if (f_identity && fi == static_cast<int>(*f_identity)) {
                int gi = pa.component(sym, h_inverse[s]);
                if (gi != static_cast<int>(*f_identity)) bad = true;
            }
        }
        if (bad) {
            x.add_forbidden(Pattern(Support(std::vector<Element>{Element{}}), {sym}));
        }
    }
    for (int fi = 0; fi < pa.f_size(); ++fi) {
        const Element& f = pa.f_elements[fi];
        if (f.is_identity()) continue;
        Support supp(std::vector<Element>{Element{}, f});
        std::size_t pos_id = *supp.find(Element{});
        std::size_t pos_f = *supp.find(f);
        PresentationAlphabet pa_copy = pa;
        std::vector<int> h_inv_copy = h_inverse;
        std::optional<std::size_t> finv = f_inverse[fi];
        LocalRule rule{"inverse-consistency@" + g.to_string(f), supp, nullptr};
        rule.forbids = [pa_copy, h_inv_copy, fi, finv, pos_id, pos_f](std::span<const Symbol> t) {
            Symbol here = t[pos_id];
            Symbol there = t[pos_f];
            for (int s = 0; s < pa_copy.s_count; ++s) {
                if (pa_copy.component(here, s) != fi) continue;
                int want = finv ? static_cast<int>(*finv) : -1;
                if (pa_copy.component(there, h_inv_copy[s]) != want) return true;
            }
            return false;
        };
        x.add_rule(std::move(rule));
    }

    // (ii) one path rule per relator: reading the relator right-to-left from
    // the center must multiply to the identity.
    for (const std::string& rel_text : relators) {
        // parse over h_generators
        Word rel;
        {
            std::istringstream in(rel_text);
            std::string tok;
            while (in >> tok) {
                int idx = -1;
                for (int s = 0; s < m; ++s) {
                    if (h_generators[s] == tok) idx = s;
                }
                if (idx < 0) throw unknown_generator_error(rel_text);
                rel.push_back(static_cast<std::int16_t>(idx));
            }
        }
        if (rel.empty()) continue;
        int n = static_cast<int>(rel.size());
        // support: all products of at most n-1 F-steps
        std::vector<Element> cells{Element{}};
        {
            std::vector<Element> frontier{Element{}};
            for (int k = 1; k < n; ++k) {
                std::vector<Element> next;
                for (const Element& e : frontier) {
                    for (const Element& f : f_range.cells()) {
                        next.push_back(g.multiply(f, e));
                    }
                }
                cells.insert(cells.end(), next.begin(), next.end());
                frontier = std::move(next);
            }
        }
        Support supp(cells);
        std::map<Element, std::size_t> cell_index;
        for (std::size_t i = 0; i < supp.size(); ++i) cell_index[supp.cell(i)] = i;
        PresentationAlphabet pa_copy = pa;
        Group g_copy = g;
        std::vector<Element> f_elems = pa.f_elements;
        Word rel_copy = rel;
        LocalRule rule{"relator@" + rel_text, supp, nullptr};
        rule.forbids = [pa_copy, g_copy, f_elems, rel_copy, cell_index](std::span<const Symbol> t) {
            Element pos{};
            for (std::size_t k = rel_copy.size(); k-- > 0;) {
                auto it = cell_index.find(pos);
                if (it == cell_index.end()) return false; // cannot happen inside the support
                Symbol sym = t[it->second];
                int fi = pa_copy.component(sym, rel_copy[k]);
                pos = g_copy.multiply(f_elems[fi], pos);
            }
            return !pos.is_identity();
        };
        x.add_rule(std::move(rule));
    }

    Cocycle c;
    c.h_generators = h_generators;
    c.h_inverse = h_inverse;
    c.window = Support(std::vector<Element>{Element{}});
    c.table.resize(h_generators.size());
    for (Symbol sym = 0; sym < static_cast<Symbol>(sym_count); ++sym) {
        Pattern single(Support(std::vector<Element>{Element{}}), {sym});
        if (!is_locally_admissible(x, single)) continue;
        for (int s = 0; s < m; ++s) {
            c.set_entry(s, {sym}, pa.f_elements[pa.component(sym, s)]);
        }
    }
    return Chart{std::move(x), std::move(c)};
}

// ---------------------------------------------------------------------------
// Spot checks: cocycle consistency and freeness
// ---------------------------------------------------------------------------

struct CocycleCheckReport {
    std::uint64_t patterns_scanned = 0;
    std::uint64_t checks = 0;
    std::vector<std::string> violations; // descriptions, capped
    bool ok() const { return violations.empty(); }
};

/// Inverse-consistency spot check on ball(radius) window patterns: following
/// s then s^-1 must return to the start whenever both lookups are defined.
inline CocycleCheckReport check_cocycle(const Chart& ch, int radius,
                                        EnumerationOptions opts = {}, std::size_t max_violations = 16) {
    CocycleCheckReport report;
    const Group& g = ch.sft.group;
    Support window(g.ball(radius).elements);
    Pattern p(window, std::vector<Symbol>(window.size(), 0));
    enumerate_locally_admissible(ch.sft, window, opts, [&](const std::vector<Symbol>& symbols) {
        p.symbols = symbols;
        ++report.patterns_scanned;
        for (int s = 0; s < ch.cocycle.h_generator_count(); ++s) {
            for (const Element& base : window.cells()) {
                auto mid = cocycle_step(ch, s, p, base);
                if (!mid) continue;
                auto back = cocycle_step(ch, ch.cocycle.h_inverse[s], p, *mid);
                if (!back) continue;
                ++report.checks;
                if (*back != base) {
                    report.violations.push_back("generator " + ch.cocycle.h_generators[s] +
                                                " at base \"" + g.to_string(base) +
                                                "\" does not return");
                    if (report.violations.size() >= max_violations) return false;
                }
            }
        }
        return true;
    });
    return report;
}

struct FreenessViolation {
    Pattern pattern;
    std::string word;
    Element base;
};

struct FreenessReport {
    std::vector<FreenessViolation> violations;
    std::uint64_t patterns_scanned = 0;
    std::uint64_t words_checked = 0;
    int radius = 0;
    int word_length = 0;
    bool exhausted = true; // false when stopped at max_violations
    bool ok() const { return violations.empty(); }
};

/// Looks for periodic orbits at finite scale: a (pattern, word, base) with
/// evaluate_word returning base witnesses a freeness violation. Absence of
/// witnesses is NOT a proof of freeness; the report only covers (radius, L).
/// Words represent nontrivial elements of H: freely reduced, and filtered
/// through h_group's word problem when a group is supplied (generators are
/// matched to the chart's by position).
inline FreenessReport freeness_check(const Chart& ch, int radius, int max_word_length,
                                     const Group* h_group = nullptr,
                                     const std::vector<Pattern>* patterns = nullptr,
                                     EnumerationOptions opts = {}, std::size_t max_violations = 4) {
    FreenessReport report;
    report.radius = radius;
    report.word_length = max_word_length;

    // enumerate nonempty freely reduced words of length <= L, shortlex order
    std::vector<Word> words;
    std::vector<Word> frontier{Word{}};
    for (int len = 1; len <= max_word_length; ++len) {
        std::vector<Word> next;
        for (const Word& w : frontier) {
            for (int s = 0; s < ch.cocycle.h_generator_count(); ++s) {
                if (!w.empty() && ch.cocycle.h_inverse[w.back()] == s) continue;
                Word e = w;
                e.push_back(static_cast<std::int16_t>(s));
                next.push_back(std::move(e));
            }
        }
        for (const Word& w : next) {
            if (h_group != nullptr) {
                Word mapped;
                for (auto letter : w) mapped.push_back(letter);
                if (h_group->wp_decide(mapped)) continue; // trivial in H
            }
            words.push_back(w);
        }
        frontier = std::move(next);
    }

    auto scan_pattern = [&](const Pattern& p) {
        ++report.patterns_scanned;
        for (const Word& w : words) {
            for (const Element& base : p.support.cells()) {
                ++report.words_checked;
                std::optional<Element> end;
                try {
                    end = evaluate_word(ch, w, p, base);
                } catch (const pattern_not_in_table_error&) {
                    continue;
                }
                if (end && *end == base) {
                    report.violations.push_back(
                        FreenessViolation{p, ch.cocycle.h_word_to_string(w), base});
                    if (report.violations.size() >= max_violations) {
                        report.exhausted = false;
                        return false;
                    }
                }
            }
        }
        return true;
    };

    if (patterns != nullptr) {
        for (const Pattern& p : *patterns) {
            if (!scan_pattern(p)) break;
        }
        return report;
    }

    const Group& g = ch.sft.group;
    Support window(g.ball(radius).elements);
    bool single_cell_window =
        ch.cocycle.window.size() == 1 && ch.cocycle.window.cell(0).is_identity();
    if (!single_cell_window) {
        Pattern reused(window, std::vector<Symbol>(window.size(), 0));
        enumerate_locally_admissible(ch.sft, window, opts,
                                     [&](const std::vector<Symbol>& symbols) {
                                         reused.symbols = symbols;
                                         return scan_pattern(reused);
                                     });
        return report;
    }

    // Single-cell-window fast path: precompute, for every (generator, symbol,
    // cell), the index of the step target inside the window (-1 = outside,
    // -2 = symbol not in the table). The scan then walks plain integers.
    int nsym = ch.sft.alphabet.size();
    int ngen = ch.cocycle.h_generator_count();
    int ncell = static_cast<int>(window.size());
    std::vector<int> step_to(static_cast<std::size_t>(ngen) * nsym * ncell, -2);
    for (int gen = 0; gen < ngen; ++gen) {
        for (Symbol s = 0; s < nsym; ++s) {
            auto it = ch.cocycle.table[gen].find(std::vector<Symbol>{s});
            if (it == ch.cocycle.table[gen].end()) continue;
            for (int c = 0; c < ncell; ++c) {
                Element target = g.multiply(it->second, window.cell(c));
                auto idx = window.find(target);
                step_to[(static_cast<std::size_t>(gen) * nsym + s) * ncell + c] =
                    idx ? static_cast<int>(*idx) : -1;
            }
        }
    }
    Pattern reused(window, std::vector<Symbol>(window.size(), 0));
    enumerate_locally_admissible(ch.sft, window, opts, [&](const std::vector<Symbol>& symbols) {
        ++report.patterns_scanned;
        for (const Word& w : words) {
            for (int base = 0; base < ncell; ++base) {
                ++report.words_checked;
                int pos = base;
                bool defined = true;
                for (std::size_t i = w.size(); i-- > 0;) {
                    if (pos < 0) {
                        defined = false; // the next lookup escapes the window
                        break;
                    }
                    int t = step_to[(static_cast<std::size_t>(w[i]) * nsym + symbols[pos]) * ncell +
                                    pos];
                    if (t == -2) {
                        defined = false;
                        break;
                    }
                    pos = t;
                }
                if (defined && pos == base) {
                    reused.symbols = symbols;
                    report.violations.push_back(FreenessViolation{
                        reused, ch.cocycle.h_word_to_string(w), window.cell(base)});
                    if (report.violations.size() >= max_violations) {
                        report.exhausted = false;
                        return false;
                    }
                }
            }
        }
        return true;
    });
    return report;
}

} // namespace groupshift
