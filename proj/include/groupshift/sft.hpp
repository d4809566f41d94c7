#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "groupshift/pattern.hpp"

namespace groupshift {

/// A compiled constraint family: a fixed support plus a predicate that marks
/// symbol tuples (in support order) as forbidden. A rule denotes the finite
/// pattern set { p on support : forbids(p) } without materializing it; use
/// materialize_rule() to expand small families into literal patterns.
struct LocalRule {
    std::string name;
    Support support;
    std::function<bool(std::span<const Symbol>)> forbids;
};

/// A subshift of finite type: group, alphabet, and a finite forbidden pattern
/// family, stored as literal patterns plus optional compiled rules. Forbidden
/// patterns are kept translated so their shortlex-least support cell is the
/// identity, and deduplicated.
struct SftSpec {
    Group group;
    Alphabet alphabet;
    std::vector<Pattern> forbidden;
    std::vector<LocalRule> rules;

    SftSpec(Group g, Alphabet a) : group(std::move(g)), alphabet(std::move(a)) {}

    void add_forbidden(const Pattern& p) {
        for (Symbol s : p.symbols) {
            if (s < 0 || s >= alphabet.size()) throw spec_error("forbidden pattern symbol out of range");
        }
        Pattern n = normalize_anchor(group, p);
        for (const Pattern& q : forbidden) {
            if (q == n) return;
        }
        forbidden.push_back(std::move(n));
    }

    void add_rule(LocalRule r) { rules.push_back(std::move(r)); }

    bool literal_only() const { return rules.empty(); }
};

/// Expands a rule into literal patterns. Throws resource_limit_error when the
/// family would exceed max_patterns.
inline std::vector<Pattern> materialize_rule(const SftSpec& x, const LocalRule& rule,
                                             std::uint64_t max_tuples = 10'000'000) {
    std::size_t n = rule.support.size();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        total *= static_cast<std::uint64_t>(x.alphabet.size());
        if (total > max_tuples) {
            throw resource_limit_error("rule \"" + rule.name + "\" enumerates more than " +
                                       std::to_string(max_tuples) + " tuples");
        }
    }
    std::vector<Pattern> out;
    std::vector<Symbol> tuple(n, 0);
    while (true) {
        if (rule.forbids(std::span<const Symbol>(tuple.data(), tuple.size()))) {
            out.emplace_back(rule.support, tuple);
        }
        std::size_t i = 0;
        while (i < n && tuple[i] == x.alphabet.size() - 1) tuple[i++] = 0;
        if (i == n) break;
        ++tuple[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

inline SftSpec full_shift(Group group, Alphabet alphabet) {
    return SftSpec(std::move(group), std::move(alphabet));
}

/// Product SFT on the same group: alphabet is the cartesian product (left
/// symbol major), forbidden patterns are the lifts of both factors' families.
inline SftSpec product_sft(const SftSpec& x, const SftSpec& y, std::uint64_t lift_budget = 1'000'000) {
    if (!x.group.same_group(y.group)) throw spec_error("product_sft requires the same group");
    int nx = x.alphabet.size();
    int ny = y.alphabet.size();
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) names.push_back(x.alphabet.symbols[i] + "|" + y.alphabet.symbols[j]);
    }
    SftSpec out(x.group, Alphabet(std::move(names)));

    auto lift = [&](const std::vector<Pattern>& source, bool left_layer) {
        int free_count = left_layer ? ny : nx;
        for (const Pattern& p : source) {
            std::uint64_t total = 1;
            for (std::size_t i = 0; i < p.support.size(); ++i) {
                total *= static_cast<std::uint64_t>(free_count);
                if (total > lift_budget) throw resource_limit_error("product lift budget exceeded");
            }
            std::vector<Symbol> other(p.support.size(), 0);
            while (true) {
                std::vector<Symbol> symbols(p.support.size());
                for (std::size_t i = 0; i < p.support.size(); ++i) {
                    symbols[i] = left_layer ? p.symbols[i] * ny + other[i] : other[i] * ny + p.symbols[i];
                }
                out.add_forbidden(Pattern(p.support, std::move(symbols)));
                std::size_t i = 0;
                while (i < p.support.size() && other[i] == free_count - 1) other[i++] = 0;
                if (i == p.support.size()) break;
                ++other[i];
            }
        }
    };
    lift(x.forbidden, true);
    lift(y.forbidden, false);

    // Rules lift componentwise: the predicate reads one layer of the tuple.
    for (const LocalRule& r : x.rules) {
        LocalRule lifted{r.name + ".left", r.support, nullptr};
        auto inner = r.forbids;
        lifted.forbids = [inner, ny](std::span<const Symbol> t) {
            std::vector<Symbol> proj(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) proj[i] = t[i] / ny;
            return inner(std::span<const Symbol>(proj.data(), proj.size()));
        };
        out.add_rule(std::move(lifted));
    }
    for (const LocalRule& r : y.rules) {
        LocalRule lifted{r.name + ".right", r.support, nullptr};
        auto inner = r.forbids;
        lifted.forbids = [inner, ny](std::span<const Symbol> t) {
            std::vector<Symbol> proj(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) proj[i] = t[i] % ny;
            return inner(std::span<const Symbol>(proj.data(), proj.size()));
        };
        out.add_rule(std::move(lifted));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tile sets and the tiling SFT
// ---------------------------------------------------------------------------

/// A finite collection of finite identity-containing subsets of the group.
struct TileSet {
    std::vector<Support> tiles;

    explicit TileSet(std::vector<Support> t) : tiles(std::move(t)) {
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            if (!tiles[i].contains(Element{})) {
                throw spec_error("tile " + std::to_string(i) + " does not contain the identity");
            }
            for (std::size_t j = i + 1; j < tiles.size(); ++j) {
                if (tiles[i] == tiles[j]) throw spec_error("duplicate tiles in tile set");
            }
        }
        if (tiles.empty()) throw spec_error("tile set must be nonempty");
    }

    std::size_t size() const { return tiles.size(); }
};

/// Alphabet of a tiling SFT: one symbol per tile plus the empty symbol.
inline Alphabet tiling_alphabet(const TileSet& ts) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < ts.size(); ++i) names.push_back("T" + std::to_string(i));
    names.push_back("empty");
    return Alphabet(std::move(names));
}

/// The SFT of all tilings by a tile set. A configuration tau assigns to each
/// position a tile (anchored there) or the empty symbol; the forbidden family
/// is the disjointness patterns (two anchored tiles overlap) plus the covering
/// patterns (no candidate anchor covers a cell).
inline SftSpec tiling_sft(const Group& group, const TileSet& ts, int radius_hint = -1,
                          std::uint64_t covering_budget = 1'000'000) {
    if (radius_hint > 0) group.ball(radius_hint); // warm the canonical cache
    SftSpec out(group, tiling_alphabet(ts));
    Symbol empty_symbol = static_cast<Symbol>(ts.size());

    // Disjointness: for g = t2^-1 t1 != 1 with t1 in T_i, t2 in T_j, the
    // pattern {1 -> T_i, g -> T_j} makes the anchored tiles overlap at t1.
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < ts.size(); ++j) {
            for (const Element& t1 : ts.tiles[i].cells()) {
                for (const Element& t2 : ts.tiles[j].cells()) {
                    Element g = group.multiply(group.invert(t2), t1);
                    if (g.is_identity()) continue;
                    Support supp(std::vector<Element>{Element{}, g});
                    std::vector<Symbol> syms(2);
                    syms[*supp.find(Element{})] = static_cast<Symbol>(i);
                    syms[*supp.find(g)] = static_cast<Symbol>(j);
                    out.add_forbidden(Pattern(std::move(supp), std::move(syms)));
                }
            }
        }
    }

    // Covering: patterns q on W = union of T_i^-1 where no cell's value
    // anchors a tile covering the identity, i.e. q(g) never contains g^-1.
    std::vector<Element> w_cells;
    for (const Support& t : ts.tiles) {
        for (const Element& e : t.cells()) w_cells.push_back(group.invert(e));
    }
    Support w(w_cells);
    std::vector<std::vector<Symbol>> non_covering(w.size());
    std::uint64_t total = 1;
    for (std::size_t ci = 0; ci < w.size(); ++ci) {
        Element inv = group.invert(w.cell(ci));
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!ts.tiles[i].contains(inv)) non_covering[ci].push_back(static_cast<Symbol>(i));
        }
        non_covering[ci].push_back(empty_symbol);
        total *= non_covering[ci].size();
        if (total > covering_budget) {
            throw resource_limit_error("covering pattern family exceeds budget (" +
                                       std::to_string(covering_budget) + ")");
        }
    }
    std::vector<std::size_t> idx(w.size(), 0);
    while (true) {
        std::vector<Symbol> syms(w.size());
        for (std::size_t ci = 0; ci < w.size(); ++ci) syms[ci] = non_covering[ci][idx[ci]];
        out.add_forbidden(Pattern(w, std::move(syms)));
        std::size_t ci = 0;
        while (ci < w.size() && idx[ci] + 1 == non_covering[ci].size()) idx[ci++] = 0;
        if (ci == w.size()) break;
        ++idx[ci];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Free extension and higher-power shift
// ---------------------------------------------------------------------------

/// Maps each generator of H to a word over G's generators; composite words are
/// mapped letterwise and canonicalized in G.
struct GeneratorEmbedding {
    std::vector<Word> images; // indexed by H generator index, words over G

    Element map_element(const Group& g, const Element& h_elem) const {
        Word w;
        for (auto letter : h_elem.word()) {
            const Word& img = images.at(static_cast<std::size_t>(letter));
            w.insert(w.end(), img.begin(), img.end());
        }
        return g.canonicalize(w);
    }
};

inline GeneratorEmbedding make_embedding(const Group& h, const Group& g,
                                         const std::vector<std::string>& image_words) {
    if (static_cast<int>(image_words.size()) != h.generator_count()) {
        throw spec_error("embedding must map every generator of the source group");
    }
    GeneratorEmbedding emb;
    for (const auto& text : image_words) emb.images.push_back(g.parse_word(text));
    return emb;
}

/// The free G-extension of an H-SFT: same alphabet, forbidden patterns mapped
/// cellwise through the embedding. The embedding is spot-checked for
/// injectivity on ball(check_radius) of H.
inline SftSpec free_extension(const SftSpec& y, const GeneratorEmbedding& embedding,
                              const Group& g, int check_radius = 2) {
    Ball hb = y.group.ball(check_radius);
    std::set<Element> images;
    for (const Element& e : hb.elements) {
        Element img = embedding.map_element(g, e);
        if (!images.insert(img).second) {
            throw embedding_not_injective_error(
                "embedding collides on ball(" + std::to_string(check_radius) + ") of " +
                y.group.name());
        }
    }
    SftSpec out(g, y.alphabet);
    for (const Pattern& p : y.forbidden) {
        std::vector<Element> cells;
        cells.reserve(p.support.size());
        for (const Element& c : p.support.cells()) cells.push_back(embedding.map_element(g, c));
        Support supp(cells);
        if (supp.size() != p.support.size()) {
            throw embedding_not_injective_error("embedding collapses a forbidden support");
        }
        std::vector<Symbol> syms(supp.size());
        for (std::size_t i = 0; i < cells.size(); ++i) syms[*supp.find(cells[i])] = p.symbols[i];
        out.add_forbidden(Pattern(std::move(supp), std::move(syms)));
    }
    if (!y.rules.empty()) throw spec_error("free_extension requires a literal-pattern source SFT");
    return out;
}

/// Result of the higher-power recoding: the H-SFT plus the coset bookkeeping
/// used to transport patterns (kept for tests and the factor map phi).
struct HigherPowerShift {
    SftSpec sft;
    Group h_group;
    std::vector<Element> reps;                          // R, in given order
    std::map<Element, std::pair<int, Element>> decomposition; // g -> (rep index, h in H)
};

/// Recode a G-SFT along a finite-index subgroup H with coset representatives
/// R: the new alphabet is Sigma^R and phi(x)(r h) = (x(h))(r) transports
/// admissible windows to admissible windows.
inline HigherPowerShift higher_power_shift(const SftSpec& y, const std::vector<Element>& reps,
                                           const Group& h_group, const GeneratorEmbedding& h_embedding,
                                           int check_radius = 4,
                                           std::uint64_t blowup_budget = 1'000'000) {
    const Group& g = y.group;
    if (reps.empty()) throw spec_error("need at least one coset representative");

    // Enumerate the image of an H-ball and invert the map g -> (r, h).
    int h_ball_radius = 2 * check_radius + 2;
    Ball hb = h_group.ball(h_ball_radius);
    std::map<Element, Element> h_image_to_element;
    for (const Element& h : hb.elements) {
        Element img = h_embedding.map_element(g, h);
        auto [it, fresh] = h_image_to_element.emplace(img, h);
        if (!fresh) throw coset_check_failed_error("subgroup embedding is not injective");
    }
    std::map<Element, std::pair<int, Element>> decomposition;
    for (const auto& [img, h] : h_image_to_element) {
        for (std::size_t ri = 0; ri < reps.size(); ++ri) {
            Element gel = g.multiply(reps[ri], img);
            auto [it, fresh] = decomposition.emplace(gel, std::make_pair(static_cast<int>(ri), h));
            if (!fresh) {
                throw coset_check_failed_error("coset representatives collide at " + g.to_string(gel));
            }
        }
    }
    Ball gb = g.ball(check_radius);
    for (const Element& e : gb.elements) {
        if (!decomposition.count(e)) {
            throw coset_check_failed_error("coset representatives do not cover ball(" +
                                           std::to_string(check_radius) + "): missing " +
                                           g.to_string(e));
        }
    }

    int nsym = y.alphabet.size();
    int m = static_cast<int>(reps.size());
    std::vector<std::string> names;
    std::uint64_t alpha_size = 1;
    for (int i = 0; i < m; ++i) alpha_size *= static_cast<std::uint64_t>(nsym);
    if (alpha_size > blowup_budget) throw resource_limit_error("higher-power alphabet too large");
    std::vector<Symbol> tuple(m, 0);
    while (true) {
        std::string nm;
        for (int i = 0; i < m; ++i) {
            if (i) nm += "|";
            nm += y.alphabet.symbols[tuple[i]];
        }
        names.push_back(std::move(nm));
        int i = m - 1;
        while (i >= 0 && tuple[i] == nsym - 1) tuple[i--] = 0;
        if (i < 0) break;
        ++tuple[i];
    }
    // tuple index: first component major
    auto tuple_index = [&](const std::vector<Symbol>& t) {
        std::uint64_t ix = 0;
        for (int i = 0; i < m; ++i) ix = ix * nsym + static_cast<std::uint64_t>(t[i]);
        return static_cast<Symbol>(ix);
    };

    HigherPowerShift out{SftSpec(h_group, Alphabet(std::move(names))), h_group, reps, decomposition};

    if (!y.rules.empty()) throw spec_error("higher_power_shift requires a literal-pattern source SFT");

    // For each forbidden pattern and each phase r_t, collect the component
    // constraints on H-cells, then blow up the unconstrained components.
    for (const Pattern& p : y.forbidden) {
        for (int rt = 0; rt < m; ++rt) {
            std::map<Element, std::map<int, Symbol>> constraints; // h-cell -> (component -> symbol)
            bool vacuous = false;
            for (std::size_t fi = 0; fi < p.support.size() && !vacuous; ++fi) {
                Element u = g.multiply(p.support.cell(fi), reps[rt]);
                auto it = decomposition.find(u);
                if (it == decomposition.end()) {
                    throw coset_check_failed_error("pattern transport escapes the checked radius at " +
                                                   g.to_string(u));
                }
                auto [ri, h] = it->second;
                auto& slot = constraints[h];
                auto [cit, fresh] = slot.emplace(ri, p.symbols[fi]);
                if (!fresh && cit->second != p.symbols[fi]) vacuous = true;
            }
            if (vacuous) continue;
            std::vector<Element> cells;
            cells.reserve(constraints.size());
            for (auto& [h, comp] : constraints) cells.push_back(h);
            Support supp(cells);
            // free component slots
            std::vector<std::pair<std::size_t, int>> free_slots; // (cell position, component)
            std::uint64_t total = 1;
            for (std::size_t ci = 0; ci < supp.size(); ++ci) {
                const auto& comp = constraints.at(supp.cell(ci));
                for (int r = 0; r < m; ++r) {
                    if (!comp.count(r)) {
                        free_slots.emplace_back(ci, r);
                        total *= static_cast<std::uint64_t>(nsym);
                        if (total > blowup_budget) {
                            throw resource_limit_error("higher-power pattern blowup exceeds budget");
                        }
                    }
                }
            }
            std::vector<Symbol> free_vals(free_slots.size(), 0);
            while (true) {
                std::vector<std::vector<Symbol>> tuples(supp.size(), std::vector<Symbol>(m, 0));
                for (std::size_t ci = 0; ci < supp.size(); ++ci) {
                    for (auto& [r, s] : constraints.at(supp.cell(ci))) tuples[ci][r] = s;
                }
                for (std::size_t k = 0; k < free_slots.size(); ++k) {
                    tuples[free_slots[k].first][free_slots[k].second] = free_vals[k];
                }
                std::vector<Symbol> syms(supp.size());
                for (std::size_t ci = 0; ci < supp.size(); ++ci) syms[ci] = tuple_index(tuples[ci]);
                out.sft.add_forbidden(Pattern(supp, std::move(syms)));
                std::size_t k = 0;
                while (k < free_slots.size() && free_vals[k] == nsym - 1) free_vals[k++] = 0;
                if (k == free_slots.size()) break;
                ++free_vals[k];
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// The snake shift
// ---------------------------------------------------------------------------

namespace snake {

// Direction order matches the Z^2 generator order a, a^-1, b, b^-1.
enum Direction : int { East = 0, West = 1, North = 2, South = 3 };

inline int opposite(int d) { return d ^ 1; }

inline const char* direction_letter(int d) {
    static const char* letters[4] = {"E", "W", "N", "S"};
    return letters[d];
}

inline Element direction_element(const Group& z2, int d) {
    static const char* words[4] = {"a", "a^-1", "b", "b^-1"};
    return z2.element(words[d]);
}

/// Symbols are ordered pairs (tail side, arrow side) of distinct unit vectors,
/// tail-major in direction order: EW, EN, ES, WE, WN, WS, NE, NW, NS, SE, SW, SN.
inline Alphabet alphabet() {
    std::vector<std::string> names;
    for (int l = 0; l < 4; ++l) {
        for (int r = 0; r < 4; ++r) {
            if (l == r) continue;
            names.push_back(std::string(direction_letter(l)) + direction_letter(r));
        }
    }
    return Alphabet(std::move(names));
}

inline int tail_of(Symbol s) { // the side where the predecessor attaches
    int l = s / 3;
    return l;
}

inline int arrow_of(Symbol s) {
    int l = s / 3;
    int r = s % 3;
    // r indexes the three directions distinct from l, in direction order
    int count = 0;
    for (int d = 0; d < 4; ++d) {
        if (d == l) continue;
        if (count == r) return d;
        ++count;
    }
    return -1;
}

inline Symbol symbol_of(int tail, int arrow) {
    int r = 0;
    for (int d = 0; d < 4; ++d) {
        if (d == tail) continue;
        if (d == arrow) break;
        ++r;
    }
    return static_cast<Symbol>(tail * 3 + r);
}

} // namespace snake

/// The snake shift over Z^2: 12 tiles carrying a tail side and an arrow side;
/// an arrow into a neighbor forces that neighbor's tail to point back, and a
/// tail toward a neighbor forces that neighbor's arrow to point back.
inline SftSpec snake_shift() {
    Group z2 = groups::free_abelian(2, "Z^2");
    SftSpec out(z2, snake::alphabet());
    for (Symbol s = 0; s < 12; ++s) {
        int r = snake::arrow_of(s);
        int l = snake::tail_of(s);
        for (Symbol s2 = 0; s2 < 12; ++s2) {
            // successor mismatch: arrow at direction r, neighbor tail must face back
            if (snake::tail_of(s2) != snake::opposite(r)) {
                Element d = snake::direction_element(z2, r);
                Support supp(std::vector<Element>{Element{}, d});
                std::vector<Symbol> syms(2);
                syms[*supp.find(Element{})] = s;
                syms[*supp.find(d)] = s2;
                out.add_forbidden(Pattern(std::move(supp), std::move(syms)));
            }
            // predecessor mismatch: tail at direction l, neighbor arrow must point back
            if (snake::arrow_of(s2) != snake::opposite(l)) {
                Element d = snake::direction_element(z2, l);
                Support supp(std::vector<Element>{Element{}, d});
                std::vector<Symbol> syms(2);
                syms[*supp.find(Element{})] = s;
                syms[*supp.find(d)] = s2;
                out.add_forbidden(Pattern(std::move(supp), std::move(syms)));
            }
        }
    }
    return out;
}

/// SFT over-approximation of the cycle-free snake: additionally forbids every
/// snake cycle of length <= max_length. (The cycle-free snake itself is not an
/// SFT; cycles form an infinite family.)
inline SftSpec snake_shift_forbid_cycles_up_to(int max_length) {
    SftSpec out = snake_shift();
    const Group& z2 = out.group;
    // enumerate simple non-backtracking closed walks from the origin
    std::vector<int> steps;
    std::vector<Element> path{Element{}};
    std::function<void()> dfs = [&]() {
        int len = static_cast<int>(steps.size());
        if (len >= 4 && path.back() == Element{}) {
            // assemble the cycle pattern: tile at v_i has tail toward v_{i-1}
            // and arrow toward v_{i+1}
            std::vector<Element> cells(path.begin(), path.end() - 1);
            Support supp(cells);
            std::vector<Symbol> syms(supp.size());
            for (int i = 0; i < len; ++i) {
                int arrow = steps[i];
                int tail = snake::opposite(steps[(i + len - 1) % len]);
                syms[*supp.find(cells[i])] = snake::symbol_of(tail, arrow);
            }
            out.add_forbidden(Pattern(std::move(supp), std::move(syms)));
            return; // a closed walk cannot be extended without revisiting cells
        }
        if (len >= max_length) return;
        for (int d = 0; d < 4; ++d) {
            if (!steps.empty() && d == snake::opposite(steps.back())) continue;
            Element next = z2.multiply(path.back(), snake::direction_element(z2, d));
            bool revisit = false;
            for (std::size_t i = 1; i < path.size(); ++i) {
                if (path[i] == next) revisit = true;
            }
            if (revisit || (next == Element{} && static_cast<int>(steps.size()) + 1 < 4)) continue;
            steps.push_back(d);
            path.push_back(next);
            dfs();
            path.pop_back();
            steps.pop_back();
        }
    };
    dfs();
    return out;
}

} // namespace groupshift
