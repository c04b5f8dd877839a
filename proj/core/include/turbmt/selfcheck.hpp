#pragma once

#include <string>
#include <vector>

namespace turbmt::check {

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;  // measured value vs bound, for the report
};

std::vector<std::string> suite_names();

// Runs one property suite. If `mutate` equals the suite name, a deliberate
// fault is injected so the suite must fail — a sensitivity check of the
// oracle itself. Unknown suite names throw std::invalid_argument.
std::vector<CheckResult> run_suite(const std::string& suite, const std::string& mutate = "");

std::vector<CheckResult> run_all(const std::string& mutate = "");

}  // namespace turbmt::check
