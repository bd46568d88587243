#pragma once

#include "parex/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace parex {

struct VerifyOptions {
    std::optional<double> tol;  // replaces every tolerance of the suite when set
};

/// Psi identities: key identity, partial integration, series, leading term.
VerificationReport verify_identities(const VerifyOptions& opt = {});

/// Heat-kernel pairs, nu_n -> N1^n, g -> G and the closed form of F for
/// alpha <= 0, all against forward quadrature.
VerificationReport verify_pairs(const VerifyOptions& opt = {});

/// Fixed-Talbot round trips and the Case I inversion cross-check.
VerificationReport verify_inversion(const VerifyOptions& opt = {});

/// Geometric-series resolution of 1/Psi and the growth of the numerators.
VerificationReport verify_series(const VerifyOptions& opt = {});

const std::vector<std::string>& suite_names();

/// "all" runs every suite. Throws DomainError for an unknown name.
VerificationReport run_suite(const std::string& name, const VerifyOptions& opt = {});

}  // namespace parex
