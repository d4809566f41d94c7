#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groupshift/group.hpp"

namespace groupshift {

using Symbol = std::int32_t;

/// Ordered list of distinct symbol names. Patterns store indices into an
/// Alphabet, never the names themselves.
struct Alphabet {
    std::vector<std::string> symbols;

    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> syms) : symbols(std::move(syms)) {
        if (symbols.empty()) throw spec_error("alphabet must be nonempty");
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (symbols[i].empty()) throw spec_error("alphabet symbol names must be nonempty");
            for (std::size_t j = i + 1; j < symbols.size(); ++j) {
                if (symbols[i] == symbols[j]) {
                    throw spec_error("duplicate alphabet symbol: " + symbols[i]);
                }
            }
        }
    }

    int size() const { return static_cast<int>(symbols.size()); }

    Symbol index_of(const std::string& name) const {
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (symbols[i] == name) return static_cast<Symbol>(i);
        }
        throw spec_error("symbol not in alphabet: " + name);
    }

    const std::string& name(Symbol s) const { return symbols.at(static_cast<std::size_t>(s)); }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.symbols == b.symbols; }
};

/// A finite set of group elements in shortlex order, without duplicates.
class Support {
public:
    Support() = default;
    explicit Support(std::vector<Element> cells) : cells_(std::move(cells)) {
        std::sort(cells_.begin(), cells_.end());
        cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
    }

    const std::vector<Element>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    const Element& cell(std::size_t i) const { return cells_[i]; }

    std::optional<std::size_t> find(const Element& e) const {
        auto it = std::lower_bound(cells_.begin(), cells_.end(), e);
        if (it != cells_.end() && *it == e) return static_cast<std::size_t>(it - cells_.begin());
        return std::nullopt;
    }

    bool contains(const Element& e) const { return find(e).has_value(); }

    bool subset_of(const Support& other) const {
        return std::all_of(cells_.begin(), cells_.end(),
                           [&](const Element& e) { return other.contains(e); });
    }

    friend bool operator==(const Support& a, const Support& b) { return a.cells_ == b.cells_; }
    friend bool operator!=(const Support& a, const Support& b) { return !(a == b); }

private:
    std::vector<Element> cells_;
};

inline Support support_union(const Support& a, const Support& b) {
    std::vector<Element> cells = a.cells();
    cells.insert(cells.end(), b.cells().begin(), b.cells().end());
    return Support(std::move(cells));
}

/// A finite pattern: a total assignment of alphabet symbols to the cells of a
/// support. Symbols are parallel to support.cells().
struct Pattern {
    Support support;
    std::vector<Symbol> symbols;

    Pattern() = default;
    Pattern(Support s, std::vector<Symbol> syms) : support(std::move(s)), symbols(std::move(syms)) {
        if (support.size() != symbols.size()) {
            throw spec_error("pattern assignment must be total on its support");
        }
    }

    Symbol at(const Element& cell) const {
        auto idx = support.find(cell);
        if (!idx) throw support_mismatch_error("cell not in pattern support");
        return symbols[*idx];
    }

    std::optional<Symbol> try_at(const Element& cell) const {
        auto idx = support.find(cell);
        if (!idx) return std::nullopt;
        return symbols[*idx];
    }

    friend bool operator==(const Pattern& a, const Pattern& b) {
        return a.support == b.support && a.symbols == b.symbols;
    }
    friend bool operator!=(const Pattern& a, const Pattern& b) { return !(a == b); }
    friend bool operator<(const Pattern& a, const Pattern& b) {
        if (a.support.cells() != b.support.cells()) return a.support.cells() < b.support.cells();
        return a.symbols < b.symbols;
    }
};

/// A word-level pattern presentation: finitely many (word, symbol) entries.
/// Words need not be canonical; two entries may denote the same cell.
struct PatternCoding {
    std::vector<std::pair<std::string, Symbol>> entries;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------
//
// Shift convention: the action is (g x)(h) = x(h g). "p occurs in x at t"
// means x(f t) = p(f) for every f in supp(p), and consequently
// x in t[p]  <=>  x(f t^-1) = p(f) for all f  <=>  translate(p, t) occurs
// in x at the identity. These two facts fix every sign in the library.

/// Translate a pattern: the result has support {f t^-1 : f in supp(p)} with
/// translate(p,t)(f t^-1) = p(f).
inline Pattern translate(const Group& g, const Pattern& p, const Element& t) {
    Element t_inv = g.invert(t);
    std::vector<Element> cells;
    cells.reserve(p.support.size());
    for (const Element& f : p.support.cells()) cells.push_back(g.multiply(f, t_inv));
    Support moved(cells); // re-sorts
    std::vector<Symbol> symbols(moved.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        symbols[*moved.find(cells[i])] = p.symbols[i];
    }
    return Pattern(std::move(moved), std::move(symbols));
}

inline Pattern restrict_to(const Pattern& p, const Support& a) {
    if (!a.subset_of(p.support)) {
        throw support_mismatch_error("restriction support is not contained in the pattern support");
    }
    std::vector<Symbol> symbols;
    symbols.reserve(a.size());
    for (const Element& c : a.cells()) symbols.push_back(p.at(c));
    return Pattern(a, std::move(symbols));
}

/// Translate so that the shortlex-least support cell becomes the identity.
inline Pattern normalize_anchor(const Group& g, const Pattern& p) {
    if (p.support.empty() || p.support.cell(0).is_identity()) return p;
    return translate(g, p, p.support.cell(0));
}

struct ResolvedCoding {
    bool consistent = true;
    Pattern pattern;                  // valid when consistent
    std::vector<std::string> clashes; // human-readable clash descriptions
};

/// Canonicalize every key of a coding. The entry (w, s) constrains the cell
/// invert(canonicalize(w)): x in w[s]_identity <=> x(w^-1) = s. If two words
/// with the same canonical form carry different symbols the coding denotes the
/// empty cylinder and is reported Inconsistent (a value, not an error).
inline ResolvedCoding resolve_coding(const Group& g, const PatternCoding& c) {
    ResolvedCoding out;
    std::vector<std::pair<Element, Symbol>> placed;
    for (const auto& [word_text, symbol] : c.entries) {
        Element cell = g.invert(g.canonicalize(g.parse_word(word_text)));
        bool clash = false;
        for (auto& [e, s] : placed) {
            if (e == cell && s != symbol) {
                out.consistent = false;
                out.clashes.push_back("word \"" + word_text + "\" re-colors cell \"" +
                                      g.to_string(cell) + "\"");
                clash = true;
            }
        }
        if (!clash) placed.emplace_back(std::move(cell), symbol);
    }
    if (!out.consistent) return out;
    std::vector<Element> cells;
    cells.reserve(placed.size());
    for (auto& [e, s] : placed) cells.push_back(e);
    Support support(cells);
    std::vector<Symbol> symbols(support.size());
    for (auto& [e, s] : placed) symbols[*support.find(e)] = s;
    out.pattern = Pattern(std::move(support), std::move(symbols));
    return out;
}

/// Build a coding from a pattern using canonical words as keys.
inline PatternCoding coding_from_pattern(const Group& g, const Pattern& p) {
    PatternCoding c;
    for (std::size_t i = 0; i < p.support.size(); ++i) {
        c.entries.emplace_back(g.to_string(g.invert(p.support.cell(i))), p.symbols[i]);
    }
    return c;
}

} // namespace groupshift
