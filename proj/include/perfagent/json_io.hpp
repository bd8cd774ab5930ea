// JSON renderings of result types shared by traces and reports.
#pragma once

#include <nlohmann/json.hpp>

#include "perfagent/llm_gateway.hpp"
#include "perfagent/profile.hpp"
#include "perfagent/provider.hpp"
#include "perfagent/toolchain.hpp"

namespace perfagent {

nlohmann::json to_json(const RunSample& s);
nlohmann::json to_json(const SpeedupStat& s);
nlohmann::json to_json(const ModelResponse& r);
nlohmann::json to_json(const ExtractionResult& e);
nlohmann::json to_json(const OptimizationLabel& l);
nlohmann::json to_json(const MetricDelta& d);
nlohmann::json to_json(const BuildOutcome& b);

SpeedupStat speedup_from_json(const nlohmann::json& j);
OptimizationLabel label_from_json(const nlohmann::json& j);

}  // namespace perfagent
