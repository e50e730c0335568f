#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stablelab/grid.hpp"

namespace stablelab {

// exit statuses outside the check categories
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

struct CheckCategory {
    const char* name;
    int exit_code;
};
// in report order
const std::vector<CheckCategory>& check_categories();
int category_exit_code(const std::string& category);

// pass = measured <= bound + slack
struct VerifyCheck {
    std::string category;
    std::string name;
    double lambda;  // NaN when the check has no stable index
    double at;      // n, t, k or eps as the check needs; NaN otherwise
    double measured;
    double bound;
    double slack;
    bool pass;
};

// default tolerances, overridable by name
const std::map<std::string, double>& default_tolerances();

struct VerifyOptions {
    std::vector<double> lambdas{1.2, 1.5, 1.8};
    Grid grid{1 << 16, 200.0};
    std::vector<double> times{0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    int n_max = 64;
    std::map<std::string, double> tolerances;
    std::filesystem::path out;  // data files go here; empty for none
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    std::vector<std::string> data_files;

    bool all_pass() const;
    const VerifyCheck* first_failure() const;
    int exit_code() const;
    std::string to_json() const;
};

VerifyReport verify_all(const VerifyOptions& opt);

}  // namespace stablelab
