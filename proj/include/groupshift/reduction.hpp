#pragma once

#include <map>
#include <set>

#include "groupshift/engine.hpp"

namespace groupshift {

/// Core_K(T) = { t in T : K t subset of T }.
inline Support core(const Support& t, const Support& k, const Group& g) {
    std::vector<Element> cells;
    for (const Element& e : t.cells()) {
        bool inside = true;
        for (const Element& ke : k.cells()) {
            if (!t.contains(g.multiply(ke, e))) {
                inside = false;
                break;
            }
        }
        if (inside) cells.push_back(e);
    }
    return Support(std::move(cells));
}

/// Z = X with every D-pattern outside the sample language additionally
/// forbidden, so L_D(Z) = sample. With as_rule the complement family is kept
/// compiled instead of materialized (same subshift, no |Sigma|^|D| blowup).
inline SftSpec entropy_reducing_sft(const SftSpec& x, const Support& d,
                                    const std::vector<Pattern>& sample_language,
                                    bool as_rule = false, std::uint64_t budget = 2'000'000) {
    for (const Pattern& p : sample_language) {
        if (!(p.support == d)) {
            throw spec_error("sample language patterns must have support exactly D");
        }
    }
    SftSpec out = x;
    std::set<std::vector<Symbol>> allowed;
    for (const Pattern& p : sample_language) allowed.insert(p.symbols);

    if (as_rule) {
        LocalRule rule{"language-window", d, nullptr};
        rule.forbids = [allowed](std::span<const Symbol> t) {
            return allowed.find(std::vector<Symbol>(t.begin(), t.end())) == allowed.end();
        };
        out.add_rule(std::move(rule));
        return out;
    }

    std::uint64_t total = 1;
    for (std::size_t i = 0; i < d.size(); ++i) {
        total *= static_cast<std::uint64_t>(x.alphabet.size());
        if (total > budget) {
            throw resource_limit_error("Sigma^D enumeration exceeds budget; use the rule form");
        }
    }
    std::vector<Symbol> tuple(d.size(), 0);
    while (true) {
        if (!allowed.count(tuple)) out.add_forbidden(Pattern(d, tuple));
        std::size_t i = 0;
        while (i < d.size() && tuple[i] == x.alphabet.size() - 1) tuple[i++] = 0;
        if (i == d.size()) break;
        ++tuple[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact periodic tilings (zero-entropy witnesses)
// ---------------------------------------------------------------------------

/// A periodic tiling of Z^d given by axis periods and a tile assignment on the
/// fundamental box, validated to be pairwise-disjoint and covering on the
/// torus (hence on all of Z^d by periodicity).
struct ExactTiling {
    TileSet tileset;
    Group group;                 // free-abelian(d)
    std::vector<int> periods;    // axis periods, each >= 1
    std::vector<int> assignment; // row-major over the box; tile index or -1 = empty

    ExactTiling(TileSet ts, Group g, std::vector<int> per, std::vector<int> assign)
        : tileset(std::move(ts)), group(std::move(g)), periods(std::move(per)),
          assignment(std::move(assign)) {
        validate();
    }

    int dims() const { return static_cast<int>(periods.size()); }

    long long box_cells() const {
        long long n = 1;
        for (int p : periods) n *= p;
        return n;
    }

    static std::vector<long long> element_coords(const Group&, const Element& e, int d) {
        std::vector<long long> v(d, 0);
        for (auto letter : e.word()) {
            v[letter / 2] += (letter % 2 == 0) ? 1 : -1;
        }
        return v;
    }

    int cell_index(const std::vector<long long>& coords) const {
        long long idx = 0;
        for (int i = 0; i < dims(); ++i) {
            long long c = ((coords[i] % periods[i]) + periods[i]) % periods[i];
            idx = idx * periods[i] + c;
        }
        return static_cast<int>(idx);
    }

    std::vector<long long> coords_of_index(int idx) const {
        std::vector<long long> v(dims());
        for (int i = dims() - 1; i >= 0; --i) {
            v[i] = idx % periods[i];
            idx /= periods[i];
        }
        return v;
    }

    void validate() const {
        auto rank = group.free_abelian_rank();
        if (!rank || *rank != dims()) {
            throw spec_error("exact tiling needs a free-abelian group matching the period rank");
        }
        if (assignment.size() != static_cast<std::size_t>(box_cells())) {
            throw spec_error("tiling assignment must cover the fundamental box");
        }
        std::vector<int> covered(assignment.size(), 0);
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            int tile = assignment[i];
            if (tile < 0) continue;
            if (tile >= static_cast<int>(tileset.size())) throw spec_error("tile index out of range");
            auto base = coords_of_index(static_cast<int>(i));
            for (const Element& e : tileset.tiles[tile].cells()) {
                auto off = element_coords(group, e, dims());
                std::vector<long long> target(dims());
                for (int k = 0; k < dims(); ++k) target[k] = base[k] + off[k];
                ++covered[cell_index(target)];
            }
        }
        for (std::size_t i = 0; i < covered.size(); ++i) {
            if (covered[i] != 1) {
                throw spec_error("assignment is not an exact tiling: torus cell " +
                                 std::to_string(i) + " covered " + std::to_string(covered[i]) +
                                 " times");
            }
        }
    }

    /// Symbol of the induced tiling-SFT configuration at integer coordinates.
    Symbol symbol_at(const std::vector<long long>& coords) const {
        int tile = assignment[static_cast<std::size_t>(cell_index(coords))];
        return tile >= 0 ? static_cast<Symbol>(tile) : static_cast<Symbol>(tileset.size());
    }

    /// All distinct D-patterns of the tiling's orbit (translates over the
    /// fundamental box), as patterns over the tiling-SFT alphabet.
    std::vector<Pattern> orbit_language(const Support& d_window) const {
        std::set<std::vector<Symbol>> seen;
        std::vector<Pattern> out;
        std::vector<int> shift(dims(), 0);
        while (true) {
            std::vector<Symbol> syms;
            syms.reserve(d_window.size());
            for (const Element& e : d_window.cells()) {
                auto c = element_coords(group, e, dims());
                for (int k = 0; k < dims(); ++k) c[k] += shift[k];
                syms.push_back(symbol_at(c));
            }
            if (seen.insert(syms).second) out.emplace_back(d_window, syms);
            int i = 0;
            while (i < dims() && shift[i] + 1 == periods[i]) shift[i++] = 0;
            if (i == dims()) break;
            ++shift[i];
        }
        return out;
    }
};

/// The built-in n x n box tiler of Z^2 (single tile, periods n x n).
inline ExactTiling box_tiling_z2(int n) {
    Group z2 = groups::free_abelian(2);
    std::vector<Element> cells;
    Element b_power;
    for (int j = 0; j < n; ++j) {
        Element cell = b_power;
        for (int i = 0; i < n; ++i) {
            cells.push_back(cell);
            cell = z2.multiply(cell, z2.element("a"));
        }
        b_power = z2.multiply(b_power, z2.element("b"));
    }
    TileSet ts({Support(cells)});
    std::vector<int> assignment(static_cast<std::size_t>(n) * n, -1);
    assignment[0] = 0;
    return ExactTiling(std::move(ts), std::move(z2), {n, n}, std::move(assignment));
}

// ---------------------------------------------------------------------------
// The overlay construction
// ---------------------------------------------------------------------------

/// The deterministic factor map data: eta(T, boundary pattern) is the first
/// locally admissible completion of the boundary pattern on the full tile, in
/// canonical enumeration order. Computed on demand and memoized.
class FactorMapSpec {
public:
    FactorMapSpec(SftSpec x, TileSet tileset, std::vector<Support> cores)
        : x_(std::move(x)), tileset_(std::move(tileset)), cores_(std::move(cores)) {}

    const SftSpec& base() const { return x_; }
    const TileSet& tileset() const { return tileset_; }
    const Support& core_of(int tile) const { return cores_[tile]; }

    /// Boundary support T \ Core_K(T) of a tile.
    Support boundary_of(int tile) const {
        std::vector<Element> cells;
        for (const Element& e : tileset_.tiles[tile].cells()) {
            if (!cores_[tile].contains(e)) cells.push_back(e);
        }
        return Support(std::move(cells));
    }

    /// eta(tile, p): first locally admissible completion of p on the tile.
    /// Throws no_completion_error with a witness when none exists (the local
    /// language relaxation can make this nonempty even off the true language).
    Pattern eta(int tile, const Pattern& boundary_pattern) const {
        auto key = std::make_pair(tile, boundary_pattern.symbols);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<std::pair<Element, Symbol>> pins;
        for (std::size_t i = 0; i < boundary_pattern.support.size(); ++i) {
            pins.emplace_back(boundary_pattern.support.cell(i), boundary_pattern.symbols[i]);
        }
        auto completion = find_completion(x_, tileset_.tiles[tile], pins);
        if (!completion) {
            throw no_completion_error("no locally admissible completion for tile " +
                                      std::to_string(tile) + " with the given boundary pattern");
        }
        memo_.emplace(std::move(key), *completion);
        return *completion;
    }

private:
    SftSpec x_;
    TileSet tileset_;
    std::vector<Support> cores_;
    mutable std::map<std::pair<int, std::vector<Symbol>>, Pattern> memo_;
};

struct OverlayResult {
    SftSpec sft;            // over (tiles + empty) x (Sigma + addresses)
    Support addresses;      // U = union of all tiles
    std::vector<Support> cores;
    FactorMapSpec factor_map;
    int x_symbols = 0;      // size of Sigma (x-part address symbols follow)
    int tau_symbols = 0;    // tiles + empty

    int xpart_count() const { return x_symbols + static_cast<int>(addresses.size()); }
    Symbol pair_symbol(Symbol tau, Symbol xpart) const { return tau * xpart_count() + xpart; }
    Symbol tau_of(Symbol s) const { return s / xpart_count(); }
    Symbol xpart_of(Symbol s) const { return s % xpart_count(); }
};

/// The entropy-reduction overlay: pairs (tau, x') where tau is a tiling
/// (constrained by tiling_constraints), core cells of every placed tile carry
/// their own address, and the remaining tile cells carry a locally admissible
/// x-pattern. K must contain F F^-1 for F the union of x's forbidden supports.
inline OverlayResult overlay_sft(const SftSpec& x, const TileSet& tileset,
                                 const SftSpec& tiling_constraints, const Support& k) {
    const Group& g = x.group;
    if (!g.same_group(tiling_constraints.group)) {
        throw spec_error("overlay: tiling constraints must live on the same group");
    }
    Alphabet expected = tiling_alphabet(tileset);
    if (!(tiling_constraints.alphabet == expected)) {
        throw spec_error("overlay: tiling constraints alphabet must match the tile set");
    }
    // K must contain F F^-1
    {
        std::vector<Element> f_cells;
        for (const Pattern& p : x.forbidden) {
            for (const Element& e : p.support.cells()) f_cells.push_back(e);
        }
        Support f(f_cells);
        for (const Element& e1 : f.cells()) {
            for (const Element& e2 : f.cells()) {
                Element prod = g.multiply(e1, g.invert(e2));
                if (!k.contains(prod)) {
                    throw spec_error("overlay: K must contain F F^-1 (missing " + g.to_string(prod) +
                                     ")");
                }
            }
        }
    }

    // U and per-tile cores
    std::vector<Element> u_cells;
    for (const Support& t : tileset.tiles) {
        for (const Element& e : t.cells()) u_cells.push_back(e);
    }
    Support u(u_cells);
    std::vector<Support> cores;
    cores.reserve(tileset.size());
    for (const Support& t : tileset.tiles) cores.push_back(core(t, k, g));

    int nx = x.alphabet.size();
    int nt = static_cast<int>(tileset.size());
    int nxpart = nx + static_cast<int>(u.size());
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(nt + 1) * nxpart);
    for (int tau = 0; tau <= nt; ++tau) {
        std::string tau_name = expected.symbols[tau];
        for (int xi = 0; xi < nxpart; ++xi) {
            std::string x_name = xi < nx ? x.alphabet.symbols[xi]
                                         : "@" + g.to_string(u.cell(static_cast<std::size_t>(xi - nx)));
            names.push_back(tau_name + "|" + x_name);
        }
    }
    OverlayResult out{SftSpec(g, Alphabet(std::move(names))), u, cores,
                      FactorMapSpec(x, tileset, cores), nx, nt + 1};

    // lift the tiling constraints on the tau layer
    for (const Pattern& p : tiling_constraints.forbidden) {
        LocalRule lifted{"tiling-lift", p.support, nullptr};
        std::vector<Symbol> want = p.symbols;
        lifted.forbids = [want, nxpart](std::span<const Symbol> t) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] / nxpart != want[i]) return false;
            }
            return true;
        };
        out.sft.add_rule(std::move(lifted));
    }
    for (const LocalRule& r : tiling_constraints.rules) {
        LocalRule lifted{r.name + ".tau", r.support, nullptr};
        auto inner = r.forbids;
        lifted.forbids = [inner, nxpart](std::span<const Symbol> t) {
            std::vector<Symbol> proj(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) proj[i] = t[i] / nxpart;
            return inner(std::span<const Symbol>(proj.data(), proj.size()));
        };
        out.sft.add_rule(std::move(lifted));
    }

    // lift x's forbidden patterns on the x layer (Sigma symbols only; an
    // address cell never matches)
    for (const Pattern& p : x.forbidden) {
        LocalRule lifted{"x-lift", p.support, nullptr};
        std::vector<Symbol> want = p.symbols;
        lifted.forbids = [want, nxpart](std::span<const Symbol> t) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] % nxpart != want[i]) return false;
            }
            return true;
        };
        out.sft.add_rule(std::move(lifted));
    }
    if (!x.rules.empty()) throw spec_error("overlay: x must be a literal-pattern SFT");

    // Core/address rules, one per tile cell: a tile anchored at the identity
    // forces core cells to carry their own address and the remaining tile
    // cells to carry Sigma symbols. The admissibility of the boundary pattern
    // (the remaining condition of the construction) is exactly the x-layer
    // lift restricted to the tile, so it needs no separate rule.
    for (const Element& h : u.cells()) {
        // which tiles contain h, and whether h is in that tile's core
        std::vector<char> in_tile(tileset.size(), 0);
        std::vector<char> in_core(tileset.size(), 0);
        for (std::size_t ti = 0; ti < tileset.size(); ++ti) {
            in_tile[ti] = tileset.tiles[ti].contains(h) ? 1 : 0;
            in_core[ti] = cores[ti].contains(h) ? 1 : 0;
        }
        Symbol address = static_cast<Symbol>(nx + static_cast<int>(*u.find(h)));
        int nt_copy = nt;
        int nx_copy = nx;
        if (h.is_identity()) {
            LocalRule rule{"overlay-core@" + g.to_string(h),
                           Support(std::vector<Element>{Element{}}), nullptr};
            rule.forbids = [in_tile, in_core, address, nt_copy, nx_copy,
                            nxpart](std::span<const Symbol> t) {
                Symbol tau = t[0] / nxpart;
                Symbol xp = t[0] % nxpart;
                if (tau >= nt_copy || !in_tile[tau]) return false;
                if (in_core[tau]) return xp != address;
                return xp >= nx_copy;
            };
            out.sft.add_rule(std::move(rule));
        } else {
            Support supp(std::vector<Element>{Element{}, h});
            std::size_t anchor_pos = *supp.find(Element{});
            std::size_t cell_pos = *supp.find(h);
            LocalRule rule{"overlay-core@" + g.to_string(h), supp, nullptr};
            rule.forbids = [in_tile, in_core, address, nt_copy, nx_copy, nxpart, anchor_pos,
                            cell_pos](std::span<const Symbol> t) {
                Symbol tau = t[anchor_pos] / nxpart;
                Symbol xp = t[cell_pos] % nxpart;
                if (tau >= nt_copy || !in_tile[tau]) return false;
                if (in_core[tau]) return xp != address;
                return xp >= nx_copy;
            };
            out.sft.add_rule(std::move(rule));
        }
    }
    return out;
}

/// Evaluates the factor map on a finite overlay window: for every placed tile
/// whose footprint lies inside the window, addresses are replaced through eta;
/// cells carrying Sigma symbols pass through. Returns the x-pattern on the
/// sub-support where the map is determined.
inline Pattern evaluate_factor_map(const OverlayResult& overlay, const Pattern& window_pattern) {
    const Group& g = overlay.sft.group;
    std::vector<Element> out_cells;
    std::vector<Symbol> out_syms;
    for (std::size_t i = 0; i < window_pattern.support.size(); ++i) {
        const Element& cell = window_pattern.support.cell(i);
        Symbol s = window_pattern.symbols[i];
        Symbol xp = overlay.xpart_of(s);
        if (xp < overlay.x_symbols) {
            out_cells.push_back(cell);
            out_syms.push_back(xp);
        }
    }
    // placed tiles fully inside the window
    for (std::size_t i = 0; i < window_pattern.support.size(); ++i) {
        const Element& anchor = window_pattern.support.cell(i);
        Symbol tau = overlay.tau_of(window_pattern.symbols[i]);
        if (tau >= static_cast<Symbol>(overlay.factor_map.tileset().size())) continue;
        const Support& tile = overlay.factor_map.tileset().tiles[tau];
        bool inside = true;
        std::vector<Element> moved;
        for (const Element& h : tile.cells()) {
            Element c = g.multiply(h, anchor);
            if (!window_pattern.support.contains(c)) {
                inside = false;
                break;
            }
            moved.push_back(c);
        }
        if (!inside) continue;
        // boundary pattern in tile coordinates
        Support boundary = overlay.factor_map.boundary_of(tau);
        std::vector<Symbol> bsyms(boundary.size());
        bool well_formed = true;
        for (std::size_t bi = 0; bi < boundary.size(); ++bi) {
            Element c = g.multiply(boundary.cell(bi), anchor);
            Symbol xp = overlay.xpart_of(window_pattern.at(c));
            if (xp >= overlay.x_symbols) {
                well_formed = false;
                break;
            }
            bsyms[bi] = xp;
        }
        if (!well_formed) continue;
        Pattern completion = overlay.factor_map.eta(tau, Pattern(boundary, bsyms));
        for (std::size_t ci = 0; ci < completion.support.size(); ++ci) {
            Element c = g.multiply(completion.support.cell(ci), anchor);
            bool already = false;
            for (std::size_t oi = 0; oi < out_cells.size(); ++oi) {
                if (out_cells[oi] == c) already = true;
            }
            if (!already) {
                out_cells.push_back(c);
                out_syms.push_back(completion.symbols[ci]);
            }
        }
    }
    Support supp(out_cells);
    std::vector<Symbol> ordered(supp.size());
    for (std::size_t i = 0; i < out_cells.size(); ++i) ordered[*supp.find(out_cells[i])] = out_syms[i];
    return Pattern(supp, ordered);
}

} // namespace groupshift
