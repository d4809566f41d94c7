#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "groupshift/pattern.hpp"

using namespace groupshift;

namespace {

Pattern make_pattern(const Group& g, const std::vector<std::pair<std::string, Symbol>>& cells) {
    std::vector<Element> elems;
    for (auto& [w, s] : cells) elems.push_back(g.element(w));
    Support supp(elems);
    REQUIRE(supp.size() == cells.size());
    std::vector<Symbol> syms(supp.size());
    for (std::size_t i = 0; i < cells.size(); ++i) syms[*supp.find(elems[i])] = cells[i].second;
    return Pattern(std::move(supp), std::move(syms));
}

} // namespace

TEST_CASE("translate: convention and examples") {
    Group z1 = groups::free_abelian(1);
    // single cell at the identity, translate by a: lands on a^-1
    Pattern p = make_pattern(z1, {{"", 0}});
    Pattern moved = translate(z1, p, z1.element("a"));
    CHECK(moved.support.size() == 1);
    CHECK(z1.to_string(moved.support.cell(0)) == "a^-1");
    CHECK(moved.symbols[0] == 0);

    // identity translate is the identity
    Group z2 = groups::free_abelian(2);
    Pattern q = make_pattern(z2, {{"", 0}, {"a", 1}});
    CHECK(translate(z2, q, z2.identity()) == q);

    // two-cell pattern by b: support {b^-1, a b^-1}, values preserved
    Pattern moved2 = translate(z2, q, z2.element("b"));
    CHECK(moved2.at(z2.element("b^-1")) == 0);
    CHECK(moved2.at(z2.element("a b^-1")) == 1);
    CHECK(moved2.support.size() == 2);
}

TEST_CASE("translate is a right action") {
    Group z2 = groups::free_abelian(2);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> sym(0, 2);
    std::uniform_int_distribution<int> gen(0, 3);
    for (int trial = 0; trial < 30; ++trial) {
        Pattern p = make_pattern(z2, {{"", sym(rng)}, {"a", sym(rng)}, {"b b", sym(rng)}});
        Word wt{static_cast<std::int16_t>(gen(rng)), static_cast<std::int16_t>(gen(rng))};
        Word wu{static_cast<std::int16_t>(gen(rng))};
        Element t = z2.canonicalize(wt);
        Element u = z2.canonicalize(wu);
        CHECK(translate(z2, translate(z2, p, t), u) == translate(z2, p, z2.multiply(t, u)));
    }
}

TEST_CASE("restrict") {
    Group z1 = groups::free_abelian(1);
    Pattern p = make_pattern(z1, {{"", 0}, {"a", 1}});
    CHECK(restrict_to(p, p.support) == p);

    Support single(std::vector<Element>{z1.element("a")});
    Pattern r = restrict_to(p, single);
    CHECK(r.support.size() == 1);
    CHECK(r.symbols[0] == 1);

    Pattern empty = restrict_to(p, Support{});
    CHECK(empty.support.empty());

    Support outside(std::vector<Element>{z1.element("a a")});
    CHECK_THROWS_AS(restrict_to(p, outside), support_mismatch_error);
}

TEST_CASE("resolve_coding: canonicalization, the inversion convention, inconsistency") {
    Group z1 = groups::free_abelian(1);
    // duplicate keys denoting the identity with equal symbols collapse
    PatternCoding c1;
    c1.entries = {{"a a^-1", 0}, {"", 0}};
    ResolvedCoding r1 = resolve_coding(z1, c1);
    REQUIRE(r1.consistent);
    CHECK(r1.pattern.support.size() == 1);
    CHECK(r1.pattern.support.cell(0).is_identity());
    CHECK(r1.pattern.symbols[0] == 0);

    // same cell, different symbols: inconsistent (a value, not an error)
    PatternCoding c2;
    c2.entries = {{"a a^-1", 0}, {"", 1}};
    ResolvedCoding r2 = resolve_coding(z1, c2);
    CHECK_FALSE(r2.consistent);
    CHECK_FALSE(r2.clashes.empty());

    // the entry (w, s) constrains the cell invert(canonicalize(w))
    Group z2 = groups::free_abelian(2);
    PatternCoding c3;
    c3.entries = {{"a b", 2}};
    ResolvedCoding r3 = resolve_coding(z2, c3);
    REQUIRE(r3.consistent);
    CHECK(z2.to_string(r3.pattern.support.cell(0)) == "a^-1 b^-1");
    CHECK(r3.pattern.symbols[0] == 2);
}

TEST_CASE("resolve_coding round-trips codings built from patterns") {
    Group z2 = groups::free_abelian(2);
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> sym(0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Pattern p = make_pattern(
            z2, {{"", sym(rng)}, {"a", sym(rng)}, {"b", sym(rng)}, {"a a b", sym(rng)}});
        ResolvedCoding r = resolve_coding(z2, coding_from_pattern(z2, p));
        REQUIRE(r.consistent);
        CHECK(r.pattern == p);
    }
}

TEST_CASE("normalize_anchor moves the least cell to the identity") {
    Group z1 = groups::free_abelian(1);
    Pattern p = make_pattern(z1, {{"a", 0}, {"a a", 1}});
    Pattern n = normalize_anchor(z1, p);
    CHECK(n.support.cell(0).is_identity());
    CHECK(n.at(z1.identity()) == 0);
    CHECK(n.at(z1.element("a")) == 1);
    // anchored patterns are fixed points
    CHECK(normalize_anchor(z1, n) == n);
}
