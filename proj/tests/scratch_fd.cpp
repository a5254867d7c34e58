#include <cstdio>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "proxid/proximal.hpp"

using namespace proxid;

// hand-built proximal front-door: solve b(y,w,a,c,m) per (a,c,m,y) stratum from
// p(y|m,a,z,c) = sum_w b p(w|m,a,z,c), then
// p(Y(a)) = sum_{m,c,z} [sum_w b sum_a~ p(w|m,a~,c,z) p(a~|c,z)] p(m|a,c,z) p(c,z)
static Table hand_formula(const Table& joint) {
    Table lhs = conditional_from_joint(joint, {Var("Y")}, {Var("A"), Var("C"), Var("M"), Var("Z")});
    Table rhs = conditional_from_joint(joint, {Var("W")}, {Var("A"), Var("C"), Var("M"), Var("Z")});
    auto solved = solve_bridge_tables(lhs, rhs, {Var("W")}, {Var("Z")});
    printf("  hand bridge residual %.2e\n", solved.max_residual);
    // bracket: sum_w b(w,y,a,c,m) sum_a~ p(w|m,a~,c,z) p(a~|c,z)
    Table p_w_maz = conditional_from_joint(joint, {Var("W")}, {Var("A"), Var("C"), Var("M"), Var("Z")});
    Table p_a_cz = conditional_from_joint(joint, {Var("A")}, {Var("C"), Var("Z")});
    Table mix = marginalize(multiply(p_w_maz, p_a_cz), {Var("W"), Var("C"), Var("M"), Var("Z")});
    Table bracket = marginalize(multiply(solved.bridge, mix),
                                {Var("Y"), Var("A"), Var("C"), Var("M"), Var("Z")});
    Table p_m = conditional_from_joint(joint, {Var("M")}, {Var("A"), Var("C"), Var("Z")});
    Table p_cz = marginalize(joint, {Var("C"), Var("Z")});
    Table total = marginalize(multiply(multiply(bracket, p_m), p_cz), {Var("Y"), Var("A")});
    return total;
}

int main() {
    Admg g = fixtures::graph(fixtures::kFig2d);
    std::map<VertexId, int> cards{{"A", 2}, {"C", 2}, {"M", 2}, {"U", 2}, {"W", 2}, {"Y", 2}, {"Z", 2}};
    CausalQuery q;
    q.outcomes = {"Y"};
    q.treatments = {{VertexId("A"), "a"}};
    q.proxies = {"W"};
    IdVerdict v = proximal_identify(g, q);
    if (!v.identified) {
        printf("not identified\n");
        return 1;
    }
    for (uint64_t seed = 1; seed <= 6; seed++) {
        DiscreteScm scm = random_scm(canonical_dag(g), cards, seed, 0.05);
        Table joint = observed_joint(scm);
        Table truth = interventional_margin_all(scm, {"Y"}, {"A"});
        Table hand = hand_formula(joint);
        EvalEnv env{joint, {}, 1e-6};
        Table mine = evaluate(v.success.estimand, env);
        printf("seed %llu: |hand-truth|=%.3e  |mine-truth|=%.3e  |mine-hand|=%.3e\n",
               (unsigned long long)seed, max_abs_diff(hand, truth), max_abs_diff(mine, truth),
               max_abs_diff(mine, hand));
    }
    return 0;
}
