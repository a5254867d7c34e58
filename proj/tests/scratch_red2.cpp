#include <cstdio>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "proxid/proximal.hpp"
#include "proxid/verify.hpp"

using namespace proxid;

int main() {
    Admg g = parse_graph_text(R"(
vertex H0 l
vertex V0
vertex V1
vertex V2
vertex V3
vertex V4
vertex V5
H0 -> V0
H0 -> V5
V0 -> V1
V0 -> V4
V1 -> V5
V2 -> V3
V2 -> V5
V3 -> V4
V3 -> V5
V4 -> V5
)");
    Admg gp = latent_project(g, g.hidden_vertices());
    VertexSet ystar = ancestral_set(gp, {"V4"}, {"V0"});
    printf("ystar = {%s}\n", join_names(ystar).c_str());
    for (const auto& d : districts(gp, ystar)) {
        auto seq = find_valid_sequence(gp, set_minus(gp.random_vertices(), d));
        std::string order;
        for (auto& v : seq.sequence) order += v.str() + " ";
        printf("district {%s}: classical seq = %s\n", join_names(d).c_str(), order.c_str());
        ExprPtr term = derive_district(gp, d, seq.sequence);
        printf("  classical term: %s\n", render_text(term).c_str());

        AdmissibleSearchResult res =
            search_admissible_sequence(gp, gp.random_vertices(), d, {}, ProximalOptions{});
        std::string order2;
        for (auto& s : res.steps) order2 += s.target.str() + " ";
        printf("  proximal  seq = %s\n", order2.c_str());
        printf("  proximal  term: %s\n", render_text(res.term).c_str());
    }
    return 0;
}
