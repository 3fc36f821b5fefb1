#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace ttsa {

/// Polynomial two-timescale step sizes: the fast chain uses
/// gamma_k = c0_gamma*(k+k0)^{-a_exp}, the slow chain
/// beta_k = c0_beta*(k+k0)^{-b_exp}, with 1/2 < a_exp < b_exp < 1.
struct StepSchedule {
    double a_exp = 0.0;
    double b_exp = 0.0;
    double c0_gamma = 1.0;
    double c0_beta = 1.0;
    std::int64_t k0 = 1;
};

/// Validates exponent ranges and positivity. Pure formula evaluation
/// tolerates k0 = 0 for k >= 1; runs require k+k0 >= 1 throughout.
StepSchedule make_schedule(double a_exp, double b_exp, double c0_gamma, double c0_beta,
                           std::int64_t k0);

/// Named rate-optimizing exponent choices parameterized by the planned
/// horizon: "pr-martingale" (a = 1/2+1/log n, b = a+1/log n),
/// "last-martingale" (a = 1/2+1/log n, b = 1-1/log n),
/// "pr-markov" (a = 2/3, b = 2/3+1/log n), "last-markov" (a = 2/3,
/// b = 1-1/log n).
StepSchedule make_preset_schedule(const std::string& preset, std::int64_t horizon,
                                  double c0_gamma, double c0_beta, std::int64_t k0);

double beta(const StepSchedule& s, std::int64_t k);
double gamma(const StepSchedule& s, std::int64_t k);

struct ScheduleCheck {
    std::string name;
    bool checked = false;  // false: condition depends on constants left unspecified
    bool passed = false;
    std::string detail;
};

struct ScheduleReport {
    std::vector<ScheduleCheck> checks;
    double min_k0_for_moment_order = 0.0;
    bool all_checked_passed() const;
};

/// Diagnostic checks of the step-size conditions against the stability
/// certificates of a22 and delta: initial steps within the certificate
/// limits, step-ratio smallness, per-step ratio growth bounds, and the
/// k0 >= C*p^{4/b} guideline for moment order p (C configurable; the
/// constant is a modeling choice, so the implied minimum k0 is reported).
ScheduleReport check_schedule(const StepSchedule& s, const LyapunovCertificate& cert22,
                              const LyapunovCertificate& cert_delta, double moment_order,
                              double c_k0 = 1.0);

}  // namespace ttsa
