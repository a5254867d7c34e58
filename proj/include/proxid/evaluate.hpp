#pragma once

#include <map>
#include <string>

#include "proxid/estimand.hpp"
#include "proxid/scm.hpp"
#include "proxid/table.hpp"

namespace proxid {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalEnv {
    Table joint;  // observed joint over canonical (copy 0) vars
    // plug label -> category index; labels absent here keep their axis free
    std::map<std::string, int> assignments;
    double bridge_residual_tol = 1e-8;
};

struct BridgeDiagnostic {
    std::string id;
    Table solution;
    Table lhs_kernel, rhs_kernel;
    double residual = 0;
    VarList sum_vars;
    VarList instruments;
};

struct EvalDiagnostics {
    std::vector<BridgeDiagnostic> bridges;
};

// Evaluates the estimand to a table over its unassigned free variables.
// Density nodes must carry Observed kernel refs; bridge-solve nodes call the
// discrete linear solver and fail when the residual exceeds the tolerance.
Table evaluate(const ExprPtr& e, const EvalEnv& env, EvalDiagnostics* diag = nullptr);

}  // namespace proxid
