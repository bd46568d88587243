#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parex {

/// Named residual checks with tolerances.
struct VerificationReport {
    struct Check {
        std::string name;
        double value = 0.0;  // residual or statistic
        double tol = 0.0;
        bool pass = false;
        std::string note;
    };

    std::vector<Check> checks;

    void add(std::string name, double value, double tol, std::string note = {});
    void add_flag(std::string name, bool pass, double value, double tol, std::string note = {});
    void append(const VerificationReport& other);
    bool pass() const;
    std::size_t failures() const;
    void print(std::ostream& os) const;
};

}  // namespace parex
