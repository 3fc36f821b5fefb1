#include "schedule.hpp"

#include <cmath>

#include "errors.hpp"

namespace ttsa {

namespace {

double power_step(double c0, double exp, std::int64_t k, std::int64_t k0) {
    const double base = static_cast<double>(k + k0);
    if (base <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "step size undefined at k + k0 <= 0");
    return c0 * std::pow(base, -exp);
}

}  // namespace

StepSchedule make_schedule(double a_exp, double b_exp, double c0_gamma, double c0_beta,
                           std::int64_t k0) {
    if (!(a_exp > 0.5 && a_exp < 1.0))
        throw Error(ErrorCode::ConfigError, "fast exponent a must lie in (1/2, 1)");
    if (!(b_exp > 0.5 && b_exp < 1.0))
        throw Error(ErrorCode::ConfigError, "slow exponent b must lie in (1/2, 1)");
    if (!(a_exp < b_exp))
        throw Error(ErrorCode::ConfigError, "timescale separation requires a < b");
    if (!(c0_gamma > 0.0 && c0_beta > 0.0))
        throw Error(ErrorCode::ConfigError, "step constants must be positive");
    if (k0 < 0) throw Error(ErrorCode::ConfigError, "k0 must be nonnegative");
    return StepSchedule{a_exp, b_exp, c0_gamma, c0_beta, k0};
}

StepSchedule make_preset_schedule(const std::string& preset, std::int64_t horizon,
                                  double c0_gamma, double c0_beta, std::int64_t k0) {
    if (horizon < 8) throw Error(ErrorCode::ConfigError, "preset schedules need horizon >= 8");
    const double inv_log_n = 1.0 / std::log(static_cast<double>(horizon));
    double a = 0.0, b = 0.0;
    if (preset == "pr-martingale") {
        a = 0.5 + inv_log_n;
        b = a + inv_log_n;
    } else if (preset == "last-martingale") {
        a = 0.5 + inv_log_n;
        b = 1.0 - inv_log_n;
    } else if (preset == "pr-markov") {
        a = 2.0 / 3.0;
        b = a + inv_log_n;
    } else if (preset == "last-markov") {
        a = 2.0 / 3.0;
        b = 1.0 - inv_log_n;
    } else {
        throw Error(ErrorCode::ConfigError, "unknown schedule preset '" + preset + "'");
    }
    if (!(a < b))
        throw Error(ErrorCode::ConfigError,
                    "preset '" + preset + "' collapses at horizon " + std::to_string(horizon) +
                        " (a >= b)");
    return make_schedule(a, b, c0_gamma, c0_beta, k0);
}

double beta(const StepSchedule& s, std::int64_t k) {
    return power_step(s.c0_beta, s.b_exp, k, s.k0);
}

double gamma(const StepSchedule& s, std::int64_t k) {
    return power_step(s.c0_gamma, s.a_exp, k, s.k0);
}

bool ScheduleReport::all_checked_passed() const {
    for (const auto& c : checks)
        if (c.checked && !c.passed) return false;
    return true;
}

ScheduleReport check_schedule(const StepSchedule& s, const LyapunovCertificate& cert22,
                              const LyapunovCertificate& cert_delta, double moment_order,
                              double c_k0) {
    ScheduleReport rep;
    const double gamma0 = gamma(s, std::max<std::int64_t>(0, 1 - s.k0));
    const double beta0 = beta(s, std::max<std::int64_t>(0, 1 - s.k0));
    const double a22 = cert22.contraction_rate;
    const double a_delta = cert_delta.contraction_rate;

    {
        ScheduleCheck c;
        c.name = "gamma_0 within the fast-chain certificate step limit";
        c.checked = true;
        c.passed = gamma0 <= cert22.max_step;
        c.detail = "gamma_0 = " + std::to_string(gamma0) + ", limit " +
                   std::to_string(cert22.max_step);
        rep.checks.push_back(std::move(c));
    }
    {
        ScheduleCheck c;
        c.name = "beta_0 within the slow-chain certificate step limit";
        c.checked = true;
        c.passed = beta0 <= cert_delta.max_step;
        c.detail =
            "beta_0 = " + std::to_string(beta0) + ", limit " + std::to_string(cert_delta.max_step);
        rep.checks.push_back(std::move(c));
    }
    {
        ScheduleCheck c;
        c.name = "step-ratio smallness r <= a22/(2 a_delta)";
        c.checked = true;
        const double r = s.c0_beta / s.c0_gamma;
        c.passed = r <= a22 / (2.0 * a_delta);
        c.detail = "r = " + std::to_string(r) + ", bound " + std::to_string(a22 / (2.0 * a_delta));
        rep.checks.push_back(std::move(c));
    }
    {
        // Per-step growth: gamma_k/gamma_{k+1} <= 1 + (a22/8) gamma_{k+1} on a grid.
        ScheduleCheck c;
        c.name = "fast-step ratio growth bound";
        c.checked = true;
        c.passed = true;
        for (std::int64_t k = std::max<std::int64_t>(0, 1 - s.k0); k < 100000; k += 37) {
            const double g0 = gamma(s, k), g1 = gamma(s, k + 1);
            if (g0 / g1 > 1.0 + (a22 / 8.0) * g1) {
                c.passed = false;
                c.detail = "violated at k = " + std::to_string(k);
                break;
            }
        }
        if (c.passed) c.detail = "holds on the sampled grid";
        rep.checks.push_back(std::move(c));
    }
    {
        ScheduleCheck c;
        c.name = "k0 >= C * p^(4/b) for the requested moment order";
        c.checked = true;
        rep.min_k0_for_moment_order = c_k0 * std::pow(moment_order, 4.0 / s.b_exp);
        c.passed = static_cast<double>(s.k0) >= rep.min_k0_for_moment_order;
        c.detail = "implied minimum k0 = " + std::to_string(rep.min_k0_for_moment_order) +
                   " (C = " + std::to_string(c_k0) + ")";
        rep.checks.push_back(std::move(c));
    }
    {
        // Conditions involving constants the analysis leaves unspecified are
        // listed but not evaluated.
        ScheduleCheck c;
        c.name = "step-ratio smallness against the decoupling gain bound";
        c.checked = false;
        c.detail = "depends on an unspecified uniform bound for the decoupling gain";
        rep.checks.push_back(std::move(c));
    }
    return rep;
}

}  // namespace ttsa
