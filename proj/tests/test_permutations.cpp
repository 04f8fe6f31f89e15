#include <rauzy/permutation.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace rauzy;

namespace {

std::vector<Permutation> all_perms(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i + 1;
    std::vector<Permutation> out;
    do out.emplace_back(v);
    while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace

TEST(Permutation, ParsesCompactAndCommaForms) {
    EXPECT_EQ(Permutation::parse("(4321)").str(), "(4321)");
    EXPECT_EQ(Permutation::parse("(4,3,2,1)"), Permutation::parse("(4321)"));
    const auto p = Permutation::parse("(10,9,8,7,6,5,4,3,2,1,11)");
    EXPECT_EQ(p.size(), 11);
    EXPECT_EQ(Permutation::parse(p.str()), p);
    EXPECT_THROW(Permutation::parse("(4421)"), std::invalid_argument);
    EXPECT_THROW(Permutation::parse("4321"), std::invalid_argument);
    EXPECT_THROW(Permutation::parse("(0123)"), std::invalid_argument);
}

TEST(Permutation, PositionsInvertTheList) {
    for (const auto& p : all_perms(5))
        for (int k = 1; k <= 5; ++k) EXPECT_EQ(p.pi(p.at(k)), k);
}

TEST(Permutation, Irreducibility) {
    EXPECT_TRUE(is_irreducible(Permutation::parse("(4321)")));
    EXPECT_FALSE(is_irreducible(Permutation::parse("(1234)")));
    EXPECT_FALSE(is_irreducible(Permutation::parse("(2143)")));
    EXPECT_TRUE(is_irreducible(Permutation::parse("(21)")));
    int count = 0;
    for (const auto& p : all_perms(4)) count += is_irreducible(p);
    EXPECT_EQ(count, 13);
}

TEST(Permutation, MovesOnTheSymmetricFour) {
    const auto p = Permutation::parse("(4321)");
    EXPECT_EQ(rauzy_move(p, Step::a), Permutation::parse("(2431)"));
    EXPECT_EQ(rauzy_move(p, Step::b), Permutation::parse("(4132)"));
}

TEST(Permutation, MovesPreserveIrreducibilityAndAreInvertibleWithinClass) {
    for (int n = 3; n <= 6; ++n)
        for (const auto& p : all_perms(n)) {
            if (!is_irreducible(p)) continue;
            for (Step s : {Step::a, Step::b}) {
                const auto q = rauzy_move(p, s);
                EXPECT_TRUE(is_irreducible(q)) << p.str();
                // moves are bijections on the class: some iterate returns to p
                auto r = q;
                int k = 0;
                while (r != p && k < 1000) r = rauzy_move(r, s), ++k;
                EXPECT_EQ(r, p) << p.str() << ' ' << to_char(s);
            }
        }
}

TEST(Permutation, ClassOfReversalHasSevenMembers) {
    const std::set<std::string> printed{"(4321)", "(4132)", "(4213)", "(3142)", "(2431)", "(3241)", "(2413)"};
    const auto& cls = class_4321();
    std::set<std::string> got;
    for (const auto& v : cls.vertices) got.insert(v.str());
    EXPECT_EQ(got, printed);
    for (const auto& v : cls.vertices) EXPECT_FALSE(is_degenerate(v)) << v.str();
    EXPECT_EQ(cls.edges.size(), 14u);
}

TEST(Permutation, DegenerateFourPermsAreExactlyThoseOutsideTheClass) {
    for (const auto& p : all_perms(4)) {
        if (!is_irreducible(p)) continue;
        EXPECT_EQ(is_degenerate(p), !class_4321().contains(p)) << p.str();
    }
}

TEST(Permutation, RestrictionKeepsRelativeOrder) {
    const auto p = Permutation::parse("(25314)");
    EXPECT_EQ(restrict_to(p, {1, 2}), Permutation::parse("(21)"));
    EXPECT_EQ(restrict_to(p, {1, 2, 3, 4, 5}), p);
    EXPECT_EQ(restrict_to(p, {3, 4}), Permutation::parse("(12)"));
    EXPECT_THROW(restrict_to(p, {2, 1}), std::invalid_argument);
    EXPECT_THROW(restrict_to(p, {1, 9}), std::invalid_argument);
}

TEST(Permutation, RestrictionComposes) {
    std::mt19937 rng(11);
    for (const auto& p : all_perms(6)) {
        if (rng() % 7) continue;
        const auto big = restrict_to(p, {1, 2, 4, 5, 6});
        // symbols 2,4,6 of p are the 2nd, 3rd and 5th symbols of {1,2,4,5,6}
        EXPECT_EQ(restrict_to(big, {2, 3, 5}), restrict_to(p, {2, 4, 6}));
    }
}

TEST(FourTuple, ParseAndValidity) {
    const auto t = FourTuple::parse("1,2,3,4");
    EXPECT_EQ(t[0], 1);
    EXPECT_EQ(t.str(), "(1,2,3,4)");
    EXPECT_THROW(FourTuple::parse("1,1,2,3"), std::invalid_argument);
    EXPECT_THROW(FourTuple::parse("4,3,2,1"), std::invalid_argument);
    EXPECT_TRUE(is_valid_tuple(Permutation::parse("(4321)"), t));
    EXPECT_FALSE(is_valid_tuple(Permutation::parse("(3412)"), t));
}

TEST(Accessibility, RejectsInvalidTuples) {
    const auto p = Permutation::parse("(25431)");
    EXPECT_THROW(is_accessible_pair(p, FourTuple::parse("1,2,3,4"), FourTuple::parse("2,3,4,5")), std::invalid_argument);
}

TEST(Accessibility, WitnessesRestrictToRotations) {
    for (const auto& p : all_perms(5)) {
        if (!is_irreducible(p) || is_degenerate(p)) continue;
        const auto ts = valid_tuples(p);
        for (const auto& a : ts)
            for (const auto& b : ts)
                for (const auto& w : accessible_witnesses(p, a, b)) {
                    EXPECT_EQ(restrict_to(p, {a[w.r.first - 1], a[w.r.second - 1]}), Permutation::parse("(21)"));
                    EXPECT_EQ(restrict_to(p, {b[w.s.first - 1], b[w.s.second - 1]}), Permutation::parse("(21)"));
                    EXPECT_TRUE(is_irreducible(w.merged));
                    EXPECT_NE(w.merged, Permutation::parse("(4231)"));
                    EXPECT_EQ(restrict_to(p, w.merged_symbols), w.merged);
                }
    }
}

TEST(Accessibility, ChainOfSingleTupleAndLinks) {
    const auto p4 = Permutation::parse("(4321)");
    EXPECT_EQ(accessible_chain(p4, FourTuple::parse("1,2,3,4"), FourTuple::parse("1,2,3,4")).size(), 1u);
    const auto p = Permutation::parse("(246135)");
    const auto ts = valid_tuples(p);
    ASSERT_GE(ts.size(), 2u);
    const auto chain = accessible_chain(p, ts.front(), ts.back());
    EXPECT_EQ(chain.front(), ts.front());
    EXPECT_EQ(chain.back(), ts.back());
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) EXPECT_TRUE(is_accessible_pair(p, chain[i], chain[i + 1]));
    EXPECT_THROW(accessible_chain(Permutation::parse("(12354)"), ts.front(), ts.back()), std::invalid_argument);
}
