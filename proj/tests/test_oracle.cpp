#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "proxid/linalg.hpp"
#include "proxid/rng.hpp"
#include "proxid/scm.hpp"

using namespace proxid;

TEST_CASE("table broadcasting and marginalization") {
    Table a(VarList{Var("A"), Var("B")}, {2, 3});
    for (size_t i = 0; i < a.size(); i++) a.data()[i] = static_cast<double>(i + 1);
    Table b(VarList{Var("B")}, {3}, {1.0, 2.0, 4.0});
    Table prod = multiply(a, b);
    CHECK(prod.at({0, 2}) == 12.0);
    CHECK(prod.at({1, 1}) == 10.0);

    Table m = marginalize(a, {Var("A")});
    CHECK(m.at({0}) == 1 + 2 + 3);
    CHECK(m.at({1}) == 4 + 5 + 6);

    Table s = slice(a, Var("B"), 1);
    CHECK(s.at({0}) == 2.0);
    CHECK(s.at({1}) == 5.0);

    Table r = relabel(a, {{Var("A"), Var("A", 1)}});
    CHECK(r.has_axis(Var("A", 1)));
    CHECK(r.at({0, 2}) == 3.0);
}

TEST_CASE("division reports the zero stratum") {
    Table num(VarList{Var("A")}, {2}, {0.5, 0.5});
    Table den(VarList{Var("A")}, {2}, {0.5, 0.0});
    CHECK_THROWS_WITH_AS(divide(num, den), doctest::Contains("zero-mass"), TableError);
    Table zero_num(VarList{Var("A")}, {2}, {0.5, 0.0});
    Table q = divide(zero_num, den);  // 0/0 treated as 0
    CHECK(q.at({1}) == 0.0);
}

TEST_CASE("svd and min-norm least squares") {
    Matrix m(3, 2);
    m.at(0, 0) = 1; m.at(0, 1) = 0;
    m.at(1, 0) = 0; m.at(1, 1) = 2;
    m.at(2, 0) = 0; m.at(2, 1) = 0;
    Svd d = svd(m);
    CHECK(d.s[0] == doctest::Approx(2.0));
    CHECK(d.s[1] == doctest::Approx(1.0));

    // underdetermined: x + y = 2 has min-norm solution (1, 1)
    Matrix a(1, 2);
    a.at(0, 0) = 1; a.at(0, 1) = 1;
    auto x = lstsq_min_norm(a, {2.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    Matrix r(2, 2);
    r.at(0, 0) = 1; r.at(0, 1) = 2;
    r.at(1, 0) = 2; r.at(1, 1) = 4;
    CHECK(numeric_rank(r) == 1);
    CHECK(numeric_rank(a) == 1);
    CHECK(numeric_rank(m) == 2);
}

TEST_CASE("random scm determinism and flooring") {
    Admg g = fixtures::graph(fixtures::kFig1a);
    std::map<VertexId, int> cards{{"A", 2}, {"C", 3}, {"Y", 2}};
    DiscreteScm s1 = random_scm(g, cards, 42, 0.05);
    DiscreteScm s2 = random_scm(g, cards, 42, 0.05);
    for (const auto& [v, t] : s1.cpt) CHECK(t.data() == s2.cpt.at(v).data());
    DiscreteScm s3 = random_scm(g, cards, 43, 0.05);
    CHECK(s3.cpt.at("A").data() != s1.cpt.at("A").data());
    for (const auto& [v, t] : s1.cpt)
        for (double p : t.data()) CHECK(p >= 0.05 - 1e-12);

    // floor = 1/k forces uniform cpts
    DiscreteScm u = random_scm(g, {{"A", 2}, {"C", 2}, {"Y", 2}}, 7, 0.5);
    for (double p : u.cpt.at("A").data()) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("interventional distribution: adjustment on the backdoor graph") {
    Admg g = fixtures::graph(fixtures::kFig1a);
    DiscreteScm scm = random_scm(g, {{"A", 2}, {"C", 3}, {"Y", 2}}, 11, 0.05);
    // p(Y(a)) = sum_c p(Y | a, c) p(c)
    Table joint = scm_joint(scm);
    Table p_c = marginalize(joint, {Var("C")});
    Table p_y_ac = conditional_from_joint(joint, {Var("Y")}, {Var("A"), Var("C")});
    Table adj = marginalize(multiply(p_y_ac, p_c), {Var("Y"), Var("A")});
    Table truth = interventional_margin_all(scm, {"Y"}, {"A"});
    CHECK(max_abs_diff(adj, truth) < 1e-12);

    // do() with no targets is the plain joint
    Table j2 = interventional(scm, {});
    CHECK(max_abs_diff(j2, joint) < 1e-15);
}

TEST_CASE("interventional agrees with forward monte carlo") {
    Admg g = fixtures::graph(fixtures::kFig2b);
    DiscreteScm scm =
        random_scm(g, {{"A", 2}, {"C", 2}, {"M", 2}, {"U", 2}, {"Y", 2}}, 19, 0.05);
    auto rows = sample_rows(scm, 200000, 5);
    Table joint = scm_joint(scm);
    // check a handful of joint cells within 4 sigma binomial bands
    const auto& order = scm.topo_order();
    std::vector<int> counts(1 << order.size(), 0);
    int n = static_cast<int>(rows.begin()->second.size());
    for (int i = 0; i < n; i++) {
        int code = 0;
        for (const auto& v : order) code = code * 2 + rows.at(v)[i];
        counts[code]++;
    }
    for (int code = 0; code < (1 << order.size()); code++) {
        std::vector<int> idx;
        // joint axes are sorted; map from topo order code
        std::map<VertexId, int> assign;
        int c = code;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            assign[*it] = c % 2;
            c /= 2;
        }
        std::vector<int> jidx;
        for (const auto& ax : joint.axes()) jidx.push_back(assign.at(ax.vertex));
        double p = joint.at(jidx);
        double phat = static_cast<double>(counts[code]) / n;
        double sigma = std::sqrt(p * (1 - p) / n);
        CHECK(std::fabs(phat - p) < 4.5 * sigma + 1e-9);
    }
}

TEST_CASE("bridge solve on the proximal baseline graph") {
    Admg g = fixtures::graph(fixtures::kFig1c);
    std::map<VertexId, int> cards{{"A", 2}, {"C", 2}, {"U", 2}, {"W", 2}, {"Y", 2}, {"Z", 2}};
    int solved = 0;
    for (uint64_t seed = 1; seed <= 30; seed++) {
        DiscreteScm scm = random_scm(g, cards, seed, 0.05);
        Table joint = observed_joint(scm);
        Table full = scm_joint(scm);
        // completeness surrogates
        Table p_w_given = conditional_from_joint(full, {Var("W")}, {Var("Z"), Var("A"), Var("C")});
        if (!rank_completeness_check(p_w_given, {Var("W")}, {Var("Z")})) continue;
        Table p_u_given = conditional_from_joint(full, {Var("U")}, {Var("Z"), Var("A"), Var("C")});
        if (!rank_completeness_check(p_u_given, {Var("U")}, {Var("Z")})) continue;
        solved++;

        Table lhs = conditional_from_joint(joint, {Var("Y")}, {Var("A"), Var("Z"), Var("C")});
        Table rhs = conditional_from_joint(joint, {Var("W")}, {Var("A"), Var("Z"), Var("C")});
        auto out = solve_bridge_tables(lhs, rhs, {Var("W")}, {Var("Z")});
        CHECK(out.max_residual < 1e-8);

        // proximal g-formula: sum_{c,w} b(y,w,a,c) p(w,c) equals oracle p(Y(a))
        Table p_wc = marginalize(joint, {Var("W"), Var("C")});
        Table est = marginalize(multiply(out.bridge, p_wc), {Var("Y"), Var("A")});
        Table truth = interventional_margin_all(scm, {"Y"}, {"A"});
        CHECK(max_abs_diff(est, truth) < 1e-7);
    }
    CHECK(solved >= 25);  // floored cpts make degeneracy rare
}

TEST_CASE("bridge solve with identity kernel returns the lhs") {
    // rhs p(w | z) = identity matrix: bridge must equal lhs directly
    Table lhs(VarList{Var("Y"), Var("Z")}, {2, 2}, {0.3, 0.7, 0.6, 0.4});
    Table rhs(VarList{Var("W"), Var("Z")}, {2, 2}, {1.0, 0.0, 0.0, 1.0});
    auto out = solve_bridge_tables(lhs, rhs, {Var("W")}, {Var("Z")});
    CHECK(out.max_residual < 1e-12);
    // b(w, y) = lhs(y, z=w)
    CHECK(out.bridge.at({0, 0}) == doctest::Approx(0.3));  // w=0, y=0 -> lhs(y=0,z=0)
    CHECK(out.bridge.at({1, 0}) == doctest::Approx(0.7));
    CHECK(out.bridge.at({0, 1}) == doctest::Approx(0.6));
    CHECK(out.bridge.at({1, 1}) == doctest::Approx(0.4));
}

TEST_CASE("rank check fails when the proxy is too coarse or independent") {
    // d_w = 1-like: constant kernel columns -> rank deficient
    Table indep(VarList{Var("W"), Var("Z")}, {2, 2}, {0.5, 0.5, 0.5, 0.5});
    CHECK_FALSE(rank_completeness_check(indep, {Var("W")}, {Var("Z")}));

    // severed U -> W edge: p(w | z strata) constant in z
    Admg g = fixtures::graph(fixtures::kFig1c);
    std::map<VertexId, int> cards{{"A", 2}, {"C", 2}, {"U", 2}, {"W", 2}, {"Y", 2}, {"Z", 2}};
    DiscreteScm scm = random_scm(g, cards, 3, 0.05);
    // rebuild W's cpt without the U parent dependence
    Table wc = scm.cpt.at("W");
    Table collapsed = wc;
    for_each_index(wc.cards(), [&](const std::vector<int>& idx) {
        std::vector<int> base = idx;
        for (size_t i = 0; i < wc.axes().size(); i++)
            if (wc.axes()[i].vertex == VertexId("U")) base[i] = 0;
        collapsed.at(idx) = wc.at(base);
    });
    scm.cpt.at("W") = collapsed;
    scm.validate();
    Table full = scm_joint(scm);
    Table p_u = conditional_from_joint(full, {Var("U")}, {Var("W"), Var("C")});
    // W carries no information about U given C anymore
    Table p_w_u = conditional_from_joint(full, {Var("W")}, {Var("U"), Var("C")});
    CHECK_FALSE(rank_completeness_check(p_w_u, {Var("W")}, {Var("U")}));
    (void)p_u;
}

TEST_CASE("cardinality monotonicity of the rank check") {
    // embedding an scm into a larger proxy cardinality keeps the check true
    Rng rng(99);
    for (int trial = 0; trial < 20; trial++) {
        // p(w | z): 2x2 full rank, then embed w into 3 categories by splitting mass
        Table k2(VarList{Var("W"), Var("Z")}, {2, 2});
        for (int z = 0; z < 2; z++) {
            double p = 0.2 + 0.6 * rng.uniform();
            if (z == 1) p = 0.2 + 0.6 * rng.uniform();
            k2.at({0, z}) = p;
            k2.at({1, z}) = 1 - p;
        }
        bool ok2 = rank_completeness_check(k2, {Var("W")}, {Var("Z")});
        Table k3(VarList{Var("W"), Var("Z")}, {3, 2});
        for (int z = 0; z < 2; z++) {
            k3.at({0, z}) = k2.at({0, z});
            k3.at({1, z}) = k2.at({1, z}) * 0.5;
            k3.at({2, z}) = k2.at({1, z}) * 0.5;
        }
        // the z space must still cover the enlarged w space: use 3 z values
        Table k33(VarList{Var("W"), Var("Z")}, {3, 3});
        for (int z = 0; z < 2; z++)
            for (int w = 0; w < 3; w++) k33.at({w, z}) = k3.at({w, z});
        for (int w = 0; w < 3; w++) k33.at({w, 2}) = (w == 0) ? 0.1 : (w == 1 ? 0.3 : 0.6);
        if (ok2) CHECK(rank_completeness_check(k33, {Var("W")}, {Var("Z")}, 1e-6) ==
                       (numeric_rank([&] {
                            Matrix m(3, 3);
                            for (int z = 0; z < 3; z++)
                                for (int w = 0; w < 3; w++) m.at(z, w) = k33.at({w, z});
                            return m;
                        }(), 1e-6) == 3));
    }
}

TEST_CASE("scm json round trip") {
    Admg g = fixtures::graph(fixtures::kFig2b);
    DiscreteScm scm = random_scm(g, {{"A", 2}, {"C", 3}, {"M", 2}, {"U", 2}, {"Y", 2}}, 8, 0.03);
    // round trip via the io header lives in test_cli; here check validate passes
    scm.validate();
    CHECK(scm.topo_order().size() == 5);
}
