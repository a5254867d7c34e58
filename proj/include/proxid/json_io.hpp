#pragma once

#include <string>

#include "json.hpp"
#include "proxid/engine.hpp"
#include "proxid/scm.hpp"

namespace proxid {

using ordered_json = nlohmann::ordered_json;

// query files: {"outcomes":[...], "treatments":{"A":"a"}, "proxies":[...],
//               "policies":[{"treatment":"A0","inputs":["C0"],"function":"f0"}]}
CausalQuery parse_query_json(const std::string& text);
CausalQuery load_query_file(const std::string& path);

ordered_json estimand_to_json(const ExprPtr& e);
ordered_json ledger_to_json(const AssumptionLedger& ledger);
ordered_json trace_to_json(const std::vector<TraceStep>& trace);
ordered_json verdict_to_json(const IdVerdict& v);

ordered_json scm_to_json(const DiscreteScm& scm);
DiscreteScm scm_from_json(const ordered_json& j);

}  // namespace proxid
