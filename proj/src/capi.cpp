#include "ttsa/ttsa.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "errors.hpp"
#include "experiment.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** slot, const std::string& text) {
    if (slot) *slot = dup_string(text);
}

ttsa_status status_of(const ttsa::Error& e) {
    switch (ttsa::exit_class(e.code())) {
    case 2: return TTSA_CONFIG_ERROR;
    case 4: return TTSA_CHECK_FAILED;
    default: return TTSA_NUMERICAL_ERROR;
    }
}

template <typename F>
ttsa_status guarded(char** error_message, F&& f) {
    try {
        return f();
    } catch (const ttsa::Error& e) {
        set_out(error_message, e.what());
        return status_of(e);
    } catch (const std::exception& e) {
        set_out(error_message, e.what());
        return TTSA_INTERNAL_ERROR;
    } catch (...) {
        set_out(error_message, "unknown error");
        return TTSA_INTERNAL_ERROR;
    }
}

ttsa::Mat mat_from(std::size_t rows, std::size_t cols, const double* data) {
    if (!data) throw ttsa::Error(ttsa::ErrorCode::InvalidArgument, "null matrix pointer");
    ttsa::Mat m(rows, cols);
    std::memcpy(m.data(), data, rows * cols * sizeof(double));
    return m;
}

ttsa::Vec vec_from(std::size_t n, const double* data) {
    if (!data) throw ttsa::Error(ttsa::ErrorCode::InvalidArgument, "null vector pointer");
    return ttsa::Vec(data, data + n);
}

void mat_to(const ttsa::Mat& m, double* out) {
    std::memcpy(out, m.data(), m.rows() * m.cols() * sizeof(double));
}

}  // namespace

struct ttsa_problem {
    ttsa::TtsaProblem impl;
};

extern "C" {

const char* ttsa_version(void) { return "0.1.0"; }

void ttsa_string_free(char* s) { std::free(s); }

ttsa_status ttsa_run_command(const char* command, const char* config_path, const char* out_dir,
                             const ttsa_run_options* options, char** summary_json,
                             char** error_message) {
    if (summary_json) *summary_json = nullptr;
    if (error_message) *error_message = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        if (!command || !config_path || !out_dir)
            throw ttsa::Error(ttsa::ErrorCode::InvalidArgument,
                              "command, config_path and out_dir must be non-null");
        ttsa::RunSettings settings;
        if (options) {
            settings.seed = options->seed;
            settings.threads = options->threads;
            settings.strict = options->strict != 0;
            settings.dry_run = options->dry_run != 0;
        }
        const std::string text = ttsa::run_command(command, config_path, out_dir, settings);
        set_out(summary_json, text);
        return TTSA_OK;
    });
}

ttsa_status ttsa_problem_create(size_t d_theta, size_t d_w, const double* a11, const double* a12,
                                const double* a21, const double* a22, const double* b1,
                                const double* b2, ttsa_problem** out_problem,
                                char** error_message) {
    if (error_message) *error_message = nullptr;
    if (!out_problem) return TTSA_CONFIG_ERROR;
    *out_problem = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        ttsa::TtsaProblem p = ttsa::make_problem(
            mat_from(d_theta, d_theta, a11), mat_from(d_theta, d_w, a12),
            mat_from(d_w, d_theta, a21), mat_from(d_w, d_w, a22), vec_from(d_theta, b1),
            vec_from(d_w, b2));
        *out_problem = new ttsa_problem{std::move(p)};
        return TTSA_OK;
    });
}

void ttsa_problem_free(ttsa_problem* p) { delete p; }

ttsa_status ttsa_problem_solution(const ttsa_problem* p, double* theta_star, double* w_star,
                                  char** error_message) {
    if (error_message) *error_message = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        if (!p || !theta_star || !w_star)
            throw ttsa::Error(ttsa::ErrorCode::InvalidArgument, "null argument");
        std::memcpy(theta_star, p->impl.theta_star.data(),
                    p->impl.theta_star.size() * sizeof(double));
        std::memcpy(w_star, p->impl.w_star.data(), p->impl.w_star.size() * sizeof(double));
        return TTSA_OK;
    });
}

ttsa_status ttsa_problem_delta(const ttsa_problem* p, double* delta, char** error_message) {
    if (error_message) *error_message = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        if (!p || !delta) throw ttsa::Error(ttsa::ErrorCode::InvalidArgument, "null argument");
        mat_to(p->impl.delta, delta);
        return TTSA_OK;
    });
}

ttsa_status ttsa_lyapunov_certificate(size_t n, const double* a, double* q,
                                      double* contraction_rate, double* max_step,
                                      char** error_message) {
    if (error_message) *error_message = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        const ttsa::LyapunovCertificate cert = ttsa::solve_lyapunov(mat_from(n, n, a));
        if (q) mat_to(cert.q, q);
        if (contraction_rate) *contraction_rate = cert.contraction_rate;
        if (max_step) *max_step = cert.max_step;
        return TTSA_OK;
    });
}

ttsa_status ttsa_mixing_time(size_t n, const double* kernel, int* t_mix, char** error_message) {
    if (error_message) *error_message = nullptr;
    return guarded(error_message, [&]() -> ttsa_status {
        if (!t_mix) throw ttsa::Error(ttsa::ErrorCode::InvalidArgument, "null t_mix pointer");
        *t_mix = ttsa::mixing_time(mat_from(n, n, kernel));
        return TTSA_OK;
    });
}

}  // extern "C"
