#include "proxid/scm.hpp"

#include <algorithm>
#include <cmath>

#include "proxid/linalg.hpp"

namespace proxid {

std::vector<VertexId> DiscreteScm::topo_order() const {
    std::vector<VertexId> order;
    VertexSet placed;
    VertexSet all = graph.vertex_set();
    while (placed.size() < all.size()) {
        bool advanced = false;
        for (const auto& v : all) {
            if (placed.count(v)) continue;
            if (is_subset(parents(graph, v), placed)) {
                order.push_back(v);
                placed.insert(v);
                advanced = true;
            }
        }
        if (!advanced) throw GraphError("scm graph has a cycle");
    }
    return order;
}

void DiscreteScm::validate() const {
    if (!graph.bidirected().empty()) throw GraphError("scm graph must be a DAG");
    for (const auto& [v, k] : graph.vertices()) {
        if (!card.count(v)) throw GraphError("missing cardinality for " + v.str());
        if (card.at(v) < 2) throw GraphError("cardinality must be >= 2 for " + v.str());
        if (!cpt.count(v)) throw GraphError("missing cpt for " + v.str());
        const Table& t = cpt.at(v);
        VarList want = to_vars(set_union(parents(graph, v), VertexSet{v}));
        if (t.axes() != want) throw GraphError("cpt axes mismatch for " + v.str());
        Table col_sums = marginalize(t, to_vars(parents(graph, v)));
        for (double s : col_sums.data())
            if (std::fabs(s - 1.0) > 1e-12) throw GraphError("cpt column does not sum to 1 for " + v.str());
    }
}

Table scm_joint(const DiscreteScm& scm) {
    Table out(1.0);
    for (const auto& [v, t] : scm.cpt) out = multiply(out, t);
    return out;
}

Table interventional(const DiscreteScm& scm, const std::map<VertexId, int>& do_values) {
    Table out(1.0);
    for (const auto& [v, t] : scm.cpt) {
        auto it = do_values.find(v);
        if (it == do_values.end()) {
            out = multiply(out, t);
        } else {
            Table point(VarList{Var(v)}, {scm.card.at(v)});
            point.data()[it->second] = 1.0;
            out = multiply(out, point);
        }
    }
    return out;
}

Table observed_joint(const DiscreteScm& scm) {
    return marginalize(scm_joint(scm), to_vars(scm.graph.observed_vertices()));
}

Table interventional_margin_all(const DiscreteScm& scm, const VertexSet& outcomes,
                                const VertexSet& treatments) {
    VarList out_axes = to_vars(set_union(outcomes, treatments));
    std::vector<int> cards;
    for (const auto& v : out_axes) cards.push_back(scm.card.at(v.vertex));
    Table out(out_axes, cards);

    std::vector<VertexId> tr(treatments.begin(), treatments.end());
    std::vector<int> tr_cards;
    for (const auto& v : tr) tr_cards.push_back(scm.card.at(v));
    for_each_index(tr_cards, [&](const std::vector<int>& tidx) {
        std::map<VertexId, int> assign;
        for (size_t i = 0; i < tr.size(); i++) assign[tr[i]] = tidx[i];
        Table m = marginalize(interventional(scm, assign), to_vars(outcomes));
        // write the slice at this treatment combination
        std::vector<int> oidx(out_axes.size(), 0);
        for_each_index(m.cards(), [&](const std::vector<int>& midx) {
            size_t mi = 0;
            for (size_t k = 0; k < out_axes.size(); k++) {
                auto it = std::find(tr.begin(), tr.end(), out_axes[k].vertex);
                if (it != tr.end())
                    oidx[k] = tidx[it - tr.begin()];
                else
                    oidx[k] = midx[mi++];
            }
            out.at(oidx) = m.at(midx);
        });
    });
    return out;
}

DiscreteScm random_scm(const Admg& graph, const std::map<VertexId, int>& cards, uint64_t seed,
                       double floor) {
    DiscreteScm scm;
    scm.graph = graph;
    scm.card = cards;
    int vi = 0;
    for (const auto& [v, kind] : graph.vertices()) {
        (void)kind;
        int k = cards.at(v);
        if (floor < 0 || floor > 1.0 / k) throw GraphError("cpt floor out of range");
        VertexSet pa = parents(graph, v);
        VarList axes = to_vars(set_union(pa, VertexSet{v}));
        std::vector<int> ax_cards;
        for (const auto& a : axes) ax_cards.push_back(cards.at(a.vertex));
        Table t(axes, ax_cards);

        Rng rng(derive_seed(seed, 0x5c, vi++));
        VarList pa_axes = to_vars(pa);
        std::vector<int> pa_cards;
        for (const auto& a : pa_axes) pa_cards.push_back(cards.at(a.vertex));
        for_each_index(pa_cards, [&](const std::vector<int>& pidx) {
            // uniform on the simplex via normalized exponentials, then floored
            std::vector<double> p(k);
            double total = 0;
            for (int i = 0; i < k; i++) {
                p[i] = -std::log(1.0 - rng.uniform());
                total += p[i];
            }
            for (int i = 0; i < k; i++) p[i] = floor + (1.0 - k * floor) * (p[i] / total);
            // scatter into the table
            std::vector<int> idx(axes.size(), 0);
            size_t pi = 0;
            for (size_t a = 0; a < axes.size(); a++)
                if (axes[a].vertex != v) idx[a] = pidx[pi++];
            for (int i = 0; i < k; i++) {
                for (size_t a = 0; a < axes.size(); a++)
                    if (axes[a].vertex == v) idx[a] = i;
                t.at(idx) = p[i];
            }
        });
        scm.cpt.emplace(v, std::move(t));
    }
    scm.validate();
    return scm;
}

Admg canonical_dag(const Admg& g) {
    std::map<VertexId, VertexKind> vs = g.vertices();
    std::set<Admg::Edge> dir = g.directed();
    for (const auto& [a, b] : g.bidirected()) {
        VertexId latent("L_" + a.str() + "_" + b.str());
        if (vs.count(latent)) throw GraphError("latent name collision: " + latent.str());
        vs.emplace(latent, VertexKind::UnresolvableHidden);
        dir.insert({latent, a});
        dir.insert({latent, b});
    }
    return Admg(std::move(vs), std::move(dir), {});
}

std::map<VertexId, std::vector<int>> sample_rows(const DiscreteScm& scm, int n, uint64_t seed) {
    auto order = scm.topo_order();
    std::map<VertexId, std::vector<int>> cols;
    for (const auto& v : order) cols[v].resize(n);
    Rng rng(derive_seed(seed, 0xa11));
    std::map<VertexId, int> row;
    for (int i = 0; i < n; i++) {
        for (const auto& v : order) {
            const Table& t = scm.cpt.at(v);
            std::vector<int> idx(t.axes().size(), 0);
            for (size_t a = 0; a < t.axes().size(); a++)
                if (t.axes()[a].vertex != v) idx[a] = row[t.axes()[a].vertex];
            double u = rng.uniform();
            int k = scm.card.at(v);
            int pick = k - 1;
            double acc = 0;
            for (int c = 0; c < k; c++) {
                for (size_t a = 0; a < t.axes().size(); a++)
                    if (t.axes()[a].vertex == v) idx[a] = c;
                acc += t.at(idx);
                if (u < acc) {
                    pick = c;
                    break;
                }
            }
            row[v] = pick;
            cols[v][i] = pick;
        }
    }
    return cols;
}

// ---------------------------------------------------------------------------

BridgeSolveOutcome solve_bridge_tables(const Table& lhs, const Table& rhs, const VarList& unknowns,
                                       const VarList& instruments) {
    // classify axes
    VarList shared, lhs_only;
    for (const auto& a : lhs.axes()) {
        if (rhs.has_axis(a))
            shared.push_back(a);
        else
            lhs_only.push_back(a);
    }
    for (const auto& u : unknowns)
        if (!rhs.has_axis(u)) throw BridgeError("unknown axis " + u.str() + " missing from rhs kernel");
    for (const auto& z : instruments) {
        if (std::find(shared.begin(), shared.end(), z) == shared.end())
            throw BridgeError("instrument axis " + z.str() + " must be shared by lhs and rhs");
    }
    VarList strata;  // (lhs_only ∪ shared) \ instruments
    for (const auto& a : lhs.axes())
        if (std::find(instruments.begin(), instruments.end(), a) == instruments.end())
            strata.push_back(a);

    // bridge axes: unknowns ∪ strata
    VarList bridge_axes = unknowns;
    bridge_axes.insert(bridge_axes.end(), strata.begin(), strata.end());
    std::sort(bridge_axes.begin(), bridge_axes.end());
    std::vector<int> bridge_cards;
    for (const auto& a : bridge_axes)
        bridge_cards.push_back(rhs.has_axis(a) ? rhs.card_of(a) : lhs.card_of(a));
    Table bridge(bridge_axes, bridge_cards);

    std::vector<int> z_cards, m_cards, s_cards;
    for (const auto& z : instruments) z_cards.push_back(lhs.card_of(z));
    for (const auto& m : unknowns) m_cards.push_back(rhs.card_of(m));
    for (const auto& s : strata) s_cards.push_back(lhs.card_of(s));

    size_t z_space = 1, m_space = 1;
    for (int c : z_cards) z_space *= c;
    for (int c : m_cards) m_space *= c;

    double max_residual = 0;
    for_each_index(s_cards, [&](const std::vector<int>& sidx) {
        // rows: instrument combos; cols: unknown combos
        Matrix A(static_cast<int>(z_space), static_cast<int>(m_space));
        std::vector<double> b(z_space, 0.0);
        std::vector<int> zidx(z_cards.size(), 0);
        size_t zrow = 0;
        for_each_index(z_cards, [&](const std::vector<int>& zi) {
            (void)zidx;
            // lhs value at (strata, z)
            std::vector<int> lidx(lhs.axes().size(), 0);
            for (size_t a = 0; a < lhs.axes().size(); a++) {
                const Var& ax = lhs.axes()[a];
                auto si = std::find(strata.begin(), strata.end(), ax);
                if (si != strata.end()) {
                    lidx[a] = sidx[si - strata.begin()];
                    continue;
                }
                auto zi2 = std::find(instruments.begin(), instruments.end(), ax);
                lidx[a] = zi[zi2 - instruments.begin()];
            }
            b[zrow] = lhs.at(lidx);

            std::vector<int> midx(m_cards.size(), 0);
            size_t mcol = 0;
            for_each_index(m_cards, [&](const std::vector<int>& mi) {
                (void)midx;
                std::vector<int> ridx(rhs.axes().size(), 0);
                for (size_t a = 0; a < rhs.axes().size(); a++) {
                    const Var& ax = rhs.axes()[a];
                    auto ui = std::find(unknowns.begin(), unknowns.end(), ax);
                    if (ui != unknowns.end()) {
                        ridx[a] = mi[ui - unknowns.begin()];
                        continue;
                    }
                    auto si = std::find(strata.begin(), strata.end(), ax);
                    if (si != strata.end()) {
                        ridx[a] = sidx[si - strata.begin()];
                        continue;
                    }
                    auto zi2 = std::find(instruments.begin(), instruments.end(), ax);
                    ridx[a] = zi[zi2 - instruments.begin()];
                }
                A.at(static_cast<int>(zrow), static_cast<int>(mcol)) = rhs.at(ridx);
                mcol++;
            });
            zrow++;
        });

        std::vector<double> x = lstsq_min_norm(A, b, 1e-12);
        std::vector<double> fit = mat_vec(A, x);
        for (size_t i = 0; i < z_space; i++)
            max_residual = std::max(max_residual, std::fabs(fit[i] - b[i]));

        // scatter solution
        size_t mcol = 0;
        for_each_index(m_cards, [&](const std::vector<int>& mi) {
            std::vector<int> bidx(bridge_axes.size(), 0);
            for (size_t a = 0; a < bridge_axes.size(); a++) {
                const Var& ax = bridge_axes[a];
                auto ui = std::find(unknowns.begin(), unknowns.end(), ax);
                if (ui != unknowns.end()) {
                    bidx[a] = mi[ui - unknowns.begin()];
                    continue;
                }
                auto si = std::find(strata.begin(), strata.end(), ax);
                bidx[a] = sidx[si - strata.begin()];
            }
            bridge.at(bidx) = x[mcol++];
        });
    });
    return BridgeSolveOutcome{std::move(bridge), max_residual};
}

bool rank_completeness_check(const Table& kernel, const VarList& targets, const VarList& instruments,
                             double rel_tol) {
    std::vector<int> t_cards, z_cards, s_cards;
    VarList strata;
    for (const auto& a : kernel.axes()) {
        if (std::find(targets.begin(), targets.end(), a) != targets.end())
            continue;
        if (std::find(instruments.begin(), instruments.end(), a) != instruments.end())
            continue;
        strata.push_back(a);
        s_cards.push_back(kernel.card_of(a));
    }
    for (const auto& t : targets) t_cards.push_back(kernel.card_of(t));
    for (const auto& z : instruments) z_cards.push_back(kernel.card_of(z));
    size_t t_space = 1, z_space = 1;
    for (int c : t_cards) t_space *= c;
    for (int c : z_cards) z_space *= c;
    if (z_space < t_space) return false;

    bool ok = true;
    for_each_index(s_cards, [&](const std::vector<int>& sidx) {
        if (!ok) return;
        Matrix M(static_cast<int>(z_space), static_cast<int>(t_space));
        size_t row = 0;
        for_each_index(z_cards, [&](const std::vector<int>& zi) {
            size_t col = 0;
            for_each_index(t_cards, [&](const std::vector<int>& ti) {
                std::vector<int> idx(kernel.axes().size(), 0);
                for (size_t a = 0; a < kernel.axes().size(); a++) {
                    const Var& ax = kernel.axes()[a];
                    auto tt = std::find(targets.begin(), targets.end(), ax);
                    if (tt != targets.end()) {
                        idx[a] = ti[tt - targets.begin()];
                        continue;
                    }
                    auto zz = std::find(instruments.begin(), instruments.end(), ax);
                    if (zz != instruments.end()) {
                        idx[a] = zi[zz - instruments.begin()];
                        continue;
                    }
                    auto ss = std::find(strata.begin(), strata.end(), ax);
                    idx[a] = sidx[ss - strata.begin()];
                }
                M.at(static_cast<int>(row), static_cast<int>(col)) = kernel.at(idx);
                col++;
            });
            row++;
        });
        Svd d = svd(M);
        if (d.s.empty() || d.s[0] == 0.0 || d.s.back() <= rel_tol * d.s[0]) ok = false;
    });
    return ok;
}

}  // namespace proxid
