// Runs the acceptance criteria and prints one PASS/FAIL line each.
//
//   acceptance [--allow-fail ID]... [ID]...
//
// Criteria named by --allow-fail still print FAIL but do not change the exit code.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "flexmatch/acceptance.hpp"

int main(int argc, char** argv) {
    flexmatch::AcceptanceOptions options;
    std::vector<int> allowed;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--allow-fail" && i + 1 < argc) {
            allowed.push_back(std::atoi(argv[++i]));
        } else {
            options.only.push_back(std::atoi(argv[i]));
        }
    }
    options.on_result = [](const flexmatch::CriterionResult& r) {
        std::printf("%s\n", flexmatch::format_result(r).c_str());
        std::fflush(stdout);
    };
    int failed = 0, blocking = 0;
    for (const auto& r : flexmatch::run_acceptance(options)) {
        if (r.passed) continue;
        ++failed;
        if (std::find(allowed.begin(), allowed.end(), r.id) == allowed.end()) ++blocking;
    }
    std::printf("%d criteria failed, %d not in the allowed-failure list\n", failed, blocking);
    return blocking == 0 ? 0 : 1;
}
