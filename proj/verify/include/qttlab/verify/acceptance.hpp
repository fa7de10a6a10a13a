#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qttlab::verify {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Criterion {
    int id;
    std::string title;
    std::function<CriterionResult()> run;
};

const std::vector<Criterion>& acceptance_criteria();

// Runs one criterion; exceptions are reported as a failure.
CriterionResult run_criterion(const Criterion& c);

// "PASS [3] coincidence width: ..." style line.
std::string format_result(const CriterionResult& r);

}  // namespace qttlab::verify
