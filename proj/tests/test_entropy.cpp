#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "groupshift/entropy.hpp"

using namespace groupshift;

namespace {

SftSpec golden_mean_z() {
    Group z1 = groups::free_abelian(1);
    SftSpec x(z1, Alphabet({"0", "1"}));
    x.add_forbidden(
        Pattern(Support(std::vector<Element>{z1.identity(), z1.element("a")}), {1, 1}));
    return x;
}

SftSpec hard_square_z2() {
    Group z2 = groups::free_abelian(2);
    SftSpec x(z2, Alphabet({"0", "1"}));
    x.add_forbidden(
        Pattern(Support(std::vector<Element>{z2.identity(), z2.element("a")}), {1, 1}));
    x.add_forbidden(
        Pattern(Support(std::vector<Element>{z2.identity(), z2.element("b")}), {1, 1}));
    return x;
}

const double kGoldenEntropy = std::log((1.0 + std::sqrt(5.0)) / 2.0);

} // namespace

TEST_CASE("exact_z: full shifts and the golden mean") {
    Group z1 = groups::free_abelian(1);
    for (int k = 2; k <= 5; ++k) {
        std::vector<std::string> syms;
        for (int i = 0; i < k; ++i) syms.push_back(std::to_string(i));
        SftSpec full(z1, Alphabet(syms));
        ExactZResult r = exact_z(full, 1);
        CHECK(std::abs(r.entropy - std::log(static_cast<double>(k))) <= 1e-12);
        CHECK(r.states == static_cast<std::size_t>(k));
    }

    SftSpec gm = golden_mean_z();
    ExactZResult r = exact_z(gm, 1);
    // oracle: the dominant root of x^2 = x + 1
    CHECK(std::abs(r.entropy - kGoldenEntropy) <= 1e-9);
    CHECK(std::abs(r.lambda - (1.0 + std::sqrt(5.0)) / 2.0) <= 1e-9);
    CHECK(r.states == 2);
    CHECK_FALSE(r.degenerate);

    // memory 2 recodes to 3 blocks and gives the same entropy
    ExactZResult r2 = exact_z(gm, 2);
    CHECK(r2.states == 3);
    CHECK(std::abs(r2.entropy - kGoldenEntropy) <= 1e-9);
}

TEST_CASE("exact_z: degenerate and error cases") {
    Group z1 = groups::free_abelian(1);
    // forbidding a symbol entirely leaves one configuration: entropy 0
    SftSpec one(z1, Alphabet({"0", "1"}));
    one.add_forbidden(Pattern(Support(std::vector<Element>{z1.identity()}), {1}));
    ExactZResult r = exact_z(one, 1);
    CHECK(r.entropy == 0.0);
    CHECK(r.lambda == doctest::Approx(1.0));

    // empty shift: both symbols forbidden
    SftSpec empty(z1, Alphabet({"0", "1"}));
    empty.add_forbidden(Pattern(Support(std::vector<Element>{z1.identity()}), {0}));
    empty.add_forbidden(Pattern(Support(std::vector<Element>{z1.identity()}), {1}));
    ExactZResult re = exact_z(empty, 1);
    CHECK(re.degenerate);
    CHECK(re.states == 0);

    // span-2 forbidden pattern needs memory >= 2
    SftSpec wide(z1, Alphabet({"0", "1"}));
    wide.add_forbidden(
        Pattern(Support(std::vector<Element>{z1.identity(), z1.element("a a")}), {1, 1}));
    CHECK_THROWS_AS(exact_z(wide, 1), memory_too_small_error);
    CHECK_NOTHROW(exact_z(wide, 2));

    SftSpec z2sft(groups::free_abelian(2), Alphabet({"0"}));
    CHECK_THROWS_AS(exact_z(z2sft, 1), spec_error);
}

TEST_CASE("strip_lower_bound: full shift, hard square fixtures") {
    SftSpec hs = hard_square_z2();
    // w = 1 with the cyclic boundary pairs the cell with itself: only the
    // 0-column survives and the bound is ln 1 = 0
    StripBoundResult w1 = strip_lower_bound(hs, 1);
    CHECK(w1.states == 1);
    CHECK(w1.bound == doctest::Approx(0.0).epsilon(1e-12));

    // frozen at build time: width-4 cyclic transfer matrix (7 states)
    StripBoundResult w4 = strip_lower_bound(hs, 4);
    CHECK(w4.states == 7);
    CHECK(w4.lambda == doctest::Approx(5.156325174659).epsilon(1e-9));
    CHECK(w4.bound == doctest::Approx(0.410056037581).epsilon(1e-9));

    // the full shift gives ln|Sigma| at any width
    SftSpec full(groups::free_abelian(2), Alphabet({"0", "1"}));
    for (int w = 1; w <= 4; ++w) {
        CHECK(strip_lower_bound(full, w).bound == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    SftSpec z1sft(groups::free_abelian(1), Alphabet({"0"}));
    CHECK_THROWS_AS(strip_lower_bound(z1sft, 2), spec_error);
}

TEST_CASE("estimate: full shift rows sit at ln k") {
    Group z1 = groups::free_abelian(1);
    SftSpec full(z1, Alphabet({"0", "1", "2"}));
    EntropyTrace tr = estimate(full, 4);
    for (const TraceRow& row : tr.rows) {
        CHECK(row.raw_bound == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        // h_n lands in (ln k, ln k + 2^-n]
        CHECK(row.h_value() > std::log(3.0));
        CHECK(row.h_value() <= std::log(3.0) + std::pow(2.0, -row.n) + 1e-12);
        CHECK_FALSE(row.empty_local_language);
    }
    CHECK(tr.nonincreasing());
}

TEST_CASE("estimate: golden mean is monotone, dominant, and on the dyadic grid") {
    SftSpec gm = golden_mean_z();
    EntropyTrace tr = estimate(gm, 6);
    REQUIRE(tr.rows.size() == 7);
    CHECK(tr.nonincreasing());
    for (const TraceRow& row : tr.rows) {
        // dominance: h_n > h_top (strict, with float tolerance)
        CHECK(row.h_value() >= kGoldenEntropy - 1e-9);
        // grid: h_n * 2^n integral by construction; raw bound below h with gap < 2^-n
        CHECK(row.h_value() > row.raw_bound);
        CHECK(row.h_value() - row.raw_bound < std::pow(2.0, -row.n) + 1e-12);
        CHECK(row.raw_bound >= 0.0);
    }
}

TEST_CASE("estimate: projection mode agrees with materialized mode") {
    SftSpec gm = golden_mean_z();
    EstimateOptions materialized;
    EstimateOptions projected;
    projected.force_projection_mode = true;
    EntropyTrace a = estimate(gm, 4, SubsetFamily{}, materialized);
    EntropyTrace b = estimate(gm, 4, SubsetFamily{}, projected);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        // identical dyadic bounds whenever the window family coincides; the
        // lean family is a subfamily, so projected bounds can only be larger
        CHECK(b.rows[i].h_num >= a.rows[i].h_num);
    }
    // with an explicit fixed family both modes agree exactly
    Group z1 = gm.group;
    std::vector<Support> windows;
    windows.push_back(Support(std::vector<Element>{z1.identity(), z1.element("a")}));
    windows.push_back(Support(z1.ball(2).elements));
    SubsetFamily fixed = SubsetFamily::for_windows(windows);
    EntropyTrace c = estimate(gm, 4, fixed, materialized);
    EntropyTrace d = estimate(gm, 4, fixed, projected);
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        CHECK(c.rows[i].no_window == d.rows[i].no_window);
        if (c.rows[i].no_window) continue;
        CHECK(c.rows[i].h_num == d.rows[i].h_num);
        CHECK(c.rows[i].raw_bound == doctest::Approx(d.rows[i].raw_bound).epsilon(1e-12));
    }
}

TEST_CASE("estimate: empty local language is flagged") {
    Group z1 = groups::free_abelian(1);
    SftSpec empty(z1, Alphabet({"0", "1"}));
    empty.add_forbidden(Pattern(Support(std::vector<Element>{z1.identity()}), {0}));
    empty.add_forbidden(Pattern(Support(std::vector<Element>{z1.identity()}), {1}));
    EntropyTrace tr = estimate(empty, 2);
    for (const TraceRow& row : tr.rows) {
        CHECK(row.empty_local_language);
        CHECK(row.h_value() == -std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("restriction_count vs local_count expose the projection gap") {
    // constant shift: forbid 01 and 10
    Group z1 = groups::free_abelian(1);
    SftSpec x(z1, Alphabet({"0", "1"}));
    Support adj(std::vector<Element>{z1.identity(), z1.element("a")});
    x.add_forbidden(Pattern(adj, {0, 1}));
    x.add_forbidden(Pattern(adj, {1, 0}));
    Support a(std::vector<Element>{z1.identity(), z1.element("a a")});
    Support b2(z1.ball(2).elements);
    CHECK(local_count(x, a).as_u64() == 4);
    CHECK(restriction_count(x, a, b2).as_u64() == 2);
}

TEST_CASE("estimate on a lamplighter full shift exercises a nonabelian oracle") {
    Group ll = groups::lamplighter();
    SftSpec full(ll, Alphabet({"0", "1"}));
    EntropyTrace tr = estimate(full, 2);
    CHECK(tr.nonincreasing());
    for (const TraceRow& row : tr.rows) {
        CHECK(row.raw_bound == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("entropy_reducing inequality at the window itself") {
    // Z = full 2-shift restricted on D = {0,1} to the sample {00, 01, 10}:
    // the estimator at A = D must sit within 2^-n of (1/|D|) ln |sample|
    Group z1 = groups::free_abelian(1);
    SftSpec full(z1, Alphabet({"0", "1"}));
    Support d(std::vector<Element>{z1.identity(), z1.element("a")});
    // golden mean via the D-window restriction
    SftSpec z = full;
    z.add_forbidden(Pattern(d, {1, 1}));
    std::vector<Support> windows{d};
    EntropyTrace tr = estimate(z, 5, SubsetFamily::for_windows(windows));
    double target = std::log(3.0) / 2.0;
    int bounded_rows = 0;
    for (const TraceRow& row : tr.rows) {
        if (row.no_window) continue;
        CHECK(row.h_value() >= target);
        CHECK(row.h_value() <= target + std::pow(2.0, -row.n) + 1e-12);
        ++bounded_rows;
    }
    CHECK(bounded_rows >= 4);
}
