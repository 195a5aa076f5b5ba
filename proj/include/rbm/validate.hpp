#pragma once

#include <string>
#include <vector>

namespace rbm {

// One acceptance check: id matches the numbered criteria in the test plan,
// ran=false marks a slow check skipped on request.
struct CheckResult {
    int id = 0;
    std::string name;
    bool ran = false;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the full acceptance suite in order. include_slow gates the two
// minutes-scale Monte Carlo checks; when false they are reported as skipped.
std::vector<CheckResult> run_acceptance_checks(bool include_slow);

// "PASS|FAIL|SKIP <id> <name> (<seconds>s): <detail>"
std::string format_check_line(const CheckResult& r);

}  // namespace rbm
