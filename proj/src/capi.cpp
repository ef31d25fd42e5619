#include "crosscurve.h"

#include <string>
#include <utility>
#include <vector>

#include "crosscurve/errors.hpp"
#include "crosscurve/runner.hpp"

struct cc_report {
  std::string json;
  std::vector<std::pair<std::string, std::string>> artifacts;
  bool passed = false;
};

namespace {

thread_local std::string g_last_error;

}  // namespace

extern "C" {

cc_status cc_run(const char* request_json, cc_report** out) {
  g_last_error.clear();
  if (out) *out = nullptr;
  if (!request_json) {
    g_last_error = "null request";
    return CC_USAGE_ERROR;
  }
  try {
    crosscurve::RunOutput run = crosscurve::run_request(request_json);
    if (out) {
      auto* rep = new cc_report;
      rep->json = std::move(run.json);
      rep->passed = run.passed;
      for (auto& [name, data] : run.artifacts) rep->artifacts.emplace_back(name, data);
      *out = rep;
    }
    return run.passed ? CC_OK : CC_CHECK_FAILED;
  } catch (const crosscurve::UsageError& e) {
    g_last_error = e.what();
    return CC_USAGE_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CC_CHECK_FAILED;
  }
}

const char* cc_report_json(const cc_report* report) {
  return report ? report->json.c_str() : "";
}

int cc_report_passed(const cc_report* report) { return report && report->passed ? 1 : 0; }

int cc_report_artifact_count(const cc_report* report) {
  return report ? static_cast<int>(report->artifacts.size()) : 0;
}

const char* cc_report_artifact_name(const cc_report* report, int index) {
  if (!report || index < 0 || index >= static_cast<int>(report->artifacts.size())) return nullptr;
  return report->artifacts[static_cast<std::size_t>(index)].first.c_str();
}

const char* cc_report_artifact_data(const cc_report* report, int index) {
  if (!report || index < 0 || index >= static_cast<int>(report->artifacts.size())) return nullptr;
  return report->artifacts[static_cast<std::size_t>(index)].second.c_str();
}

const char* cc_report_artifact(const cc_report* report, const char* name) {
  if (!report || !name) return nullptr;
  for (const auto& [n, d] : report->artifacts)
    if (n == name) return d.c_str();
  return nullptr;
}

void cc_report_free(cc_report* report) { delete report; }

const char* cc_last_error(void) { return g_last_error.c_str(); }

const char* cc_version(void) { return "1.0.0"; }

}  // extern "C"
