#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "proxid/var.hpp"

namespace proxid {

struct EstimandError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MarginTag { Observed, Interventional, InductiveMargin, ReusingMargin };

// Which kernel a density node refers to. Emitted estimands only contain
// Observed refs (derivations are inlined down to the observed joint); the
// other tags appear in derivation traces.
struct KernelRef {
    MarginTag tag = MarginTag::Observed;
    VarList do_vars;

    bool operator==(const KernelRef& o) const { return tag == o.tag && do_vars == o.do_vars; }
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Defining data of a bridge-solve binder: lhs(r,a,t,..) = Σ_{m*} b(..) rhs(m*,..)
// must hold for every value of the instrument variables.
struct BridgeSpec {
    std::string id;
    VarList sum_vars;     // m*: the axes summed against the unknown
    VarList args;         // full unknown signature (m*, r, a, t\z) for display
    VarList instruments;  // z
    ExprPtr lhs;
    ExprPtr rhs;
    // provenance of the step, used by verification harnesses
    VarList target;   // the fixed treatment (single var)
    VarList r_vars;   // outcome side
    VarList t_vars;   // conditioning side (includes instruments)
    VarList u_star;   // hidden set the completeness assumption addresses
    VarList do_ctx;   // previously fixed variables at this step
};

enum class ExprKind { One, Density, Sum, Product, Quotient, Plug, BridgeSolve, BridgeApply };

class Expr {
  public:
    ExprKind kind = ExprKind::One;

    // Density
    VarList vars, given;
    KernelRef ref;

    // Sum
    VarList bound;

    // Plug
    std::optional<Var> plug_var;
    std::string plug_label;

    // structure
    ExprPtr child;  // Sum / Plug / BridgeSolve body
    ExprPtr num, den;
    std::vector<ExprPtr> children;  // Product

    // bridges
    std::shared_ptr<const BridgeSpec> bridge;  // BridgeSolve
    std::string apply_id;                      // BridgeApply
    VarList apply_args;
};

// --- constructors ------------------------------------------------------------

ExprPtr one();
ExprPtr density(VarList vars, VarList given, KernelRef ref = {});
ExprPtr sum(VarList bound, ExprPtr child);
ExprPtr product(std::vector<ExprPtr> children);
ExprPtr quotient(ExprPtr num, ExprPtr den);
ExprPtr plug(Var v, std::string value_label, ExprPtr child);
ExprPtr bridge_solve(std::shared_ptr<const BridgeSpec> spec, ExprPtr body);
ExprPtr bridge_apply(std::string id, VarList args);

// --- queries -----------------------------------------------------------------

std::set<Var> free_vars(const ExprPtr& e);
// capture-aware renaming of free occurrences
ExprPtr substitute(const ExprPtr& e, const std::map<Var, Var>& renames);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);  // structural, alpha-invariant
std::string canonical_key(const ExprPtr& e);

// --- simplification ----------------------------------------------------------

// Evaluation-preserving rewrites only: marginal-sum collapse on densities,
// cancellation of identical quotient factors, chain-rule splits of density
// quotients, plug propagation, sum/product housekeeping. Fixpoint.
ExprPtr simplify(const ExprPtr& e);

// --- rendering ---------------------------------------------------------------

std::string render_text(const ExprPtr& e);
std::string render_latex(const ExprPtr& e);

// --- assumption ledger ---------------------------------------------------------

struct AssumptionRecord {
    enum class Kind { Completeness, BridgeExistence, CounterfactualIndependence };
    Kind kind;
    std::string bridge_id;  // set for Completeness / BridgeExistence
    std::string statement;
    bool checked_graphically = false;  // only meaningful for independences
};

using AssumptionLedger = std::vector<AssumptionRecord>;

// --- derivation-facing kernel algebra ----------------------------------------

// Fresh bound-variable supply; one per derivation.
class FreshVars {
  public:
    Var fresh(const VertexId& v) { return Var(v, ++next_[v]); }
    // continue numbering above every copy already present in e
    void seed_above(const ExprPtr& e);

  private:
    std::map<VertexId, int> next_;
};

// Renumbers bound variables per vertex in traversal order (a~, a~2, ...),
// keeping clear of the expression's free variables. Purely cosmetic;
// evaluation-equivalent.
ExprPtr canonicalize_bound(const ExprPtr& e);

// Conditional of the kernel `e` whose free value axes are `scope`:
// (Σ_{scope \ (vars ∪ given)} e) / (Σ_{scope \ given} e), with bound
// variables freshened, then simplified.
ExprPtr kernel_conditional(const ExprPtr& e, const VertexSet& scope, const VertexSet& vars,
                           const VertexSet& given, FreshVars& fresh);
// Σ over `vars` of e, simplified.
ExprPtr kernel_marginal(const ExprPtr& e, const VertexSet& scope, const VertexSet& keep,
                        FreshVars& fresh);

}  // namespace proxid
