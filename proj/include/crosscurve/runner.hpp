#pragma once

#include <map>
#include <string>

namespace crosscurve {

/// Outcome of one dispatched request: a JSON report, optional named CSV
/// artifacts, and the aggregate verdict.
struct RunOutput {
  std::string json;
  std::map<std::string, std::string> artifacts;
  bool passed = false;
};

/// Dispatch a JSON request, e.g.
///   {"cmd":"verify","check":"nncc","family":{"family":"sphere","n":2},
///    "trials":200,"seed":42}
/// Commands: verify, counterexample, mtw, lift, gw, gh, cone.
/// Malformed requests raise UsageError; module failures propagate their own
/// error types.
RunOutput run_request(const std::string& request_json);

}  // namespace crosscurve
