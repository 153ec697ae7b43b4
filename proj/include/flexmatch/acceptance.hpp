#pragma once

// The end-to-end acceptance checks, shared by the acceptance test binary and
// the `validate` subcommand.

#include <functional>
#include <string>
#include <vector>

namespace flexmatch {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<int> only;  // empty = all
    int jobs = 1;
    std::function<void(const CriterionResult&)> on_result;  // called as each criterion finishes
};

std::vector<std::string> acceptance_names();

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "PASS  3  name  detail  (1.2s)"
std::string format_result(const CriterionResult& r);

}  // namespace flexmatch
