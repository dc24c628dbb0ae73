#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "multibang/grid.hpp"
#include "multibang/penalty.hpp"
#include "multibang/ssn.hpp"

namespace multibang {

/// Exact data y = K u computed at solver tolerance 1e-12.
ScalarField forward_data(const ScalarField& u);

struct NoisyData {
    ScalarField y_delta;
    /// ||y_delta - y_true|| in the weighted discrete L^2 norm.
    double delta_eff;
    /// Same difference in the unweighted coefficient norm.
    double delta_raw;
};

/// y_delta = y_true + (delta_rel * max|y_true|) xi with xi i.i.d. standard normal, drawn from
/// CounterNormal(seed) at counter = node index.
NoisyData make_noisy_data(const ScalarField& y_true, double delta_rel, std::uint64_t seed);

struct DiscrepancyConfig {
    double tau = 1.1;
    double alpha0 = 1e-2;
    double alpha_factor = 0.5;
    double alpha_min = 1e-12;
    /// Start each alpha from the previous alpha's (y, p).
    bool warm_start = true;

    void validate() const;
};

/// Row flags; several may be set at once.
enum RowFlag : unsigned {
    kRowClean = 0,
    /// Accepted residual was <= delta (the lower half of the sandwich failed).
    kRowOverResolved = 1u << 0,
    /// alpha_min reached without meeting the discrepancy bound.
    kRowExhausted = 1u << 1,
    /// Continuation stopped early (a stage exceeded max_newton).
    kRowIncomplete = 1u << 2,
    /// A linear solve failed; numeric columns are NaN.
    kRowSolverError = 1u << 3,
};

/// "ok", or '|'-joined names: over_resolved, exhausted, incomplete, solver_error.
std::string format_flags(unsigned flags);
unsigned parse_flags(const std::string& text);

struct AlphaTrial {
    double alpha;
    double discrepancy;
    int newton_iters;
    bool converged;
};

struct MorozovResult {
    double alpha;
    ContinuationResult solution;
    double discrepancy;
    unsigned flags;
    int newton_total;
    std::vector<AlphaTrial> trials;
};

/// ||K u - y_delta||.
double data_discrepancy(const ScalarField& u, const ScalarField& y_delta);

/// Morozov discrepancy principle over alpha_k = alpha0 * alpha_factor^k: returns the first
/// alpha with ||K u_alpha - y_delta|| <= tau * delta_eff.
MorozovResult select_alpha_morozov(const ScalarField& y_delta, double delta_eff,
                                   const AdmissibleSet& U, const DiscrepancyConfig& dcfg,
                                   const SolverConfig& scfg);

/// Single solve at a prescribed alpha, packaged like a selection result. Only the
/// incomplete flag can be set.
MorozovResult solve_fixed_alpha(const ScalarField& y_delta, double alpha, const AdmissibleSet& U,
                                const SolverConfig& scfg);

struct ErrorPair {
    double e2;
    double einf;
    double e2_raw;
};

ErrorPair errors_against_truth(const ScalarField& u, const ScalarField& u_true);

struct NoiseModel {
    std::vector<double> rel_levels;
    std::uint64_t seed = 0;

    /// 2^-first, ..., 2^-last.
    static NoiseModel dyadic(int first, int last, std::uint64_t seed = 0);
    void validate() const;
};

struct StudyRow {
    double delta_rel = 0.0;
    double delta_eff = 0.0;
    double delta_raw = 0.0;
    double alpha = 0.0;
    double e2 = 0.0;
    double e2_raw = 0.0;
    double einf = 0.0;
    std::size_t singular_nodes = 0;
    int newton_total = 0;
    unsigned flags = kRowClean;

    // diagnostics, not part of the CSV table
    double discrepancy = 0.0;
    /// Fraction of nodes with u(x) != u_true(x).
    double mismatch_fraction = 0.0;
    /// Bregman distance of u to u_true for the strict subgradient of u_true.
    double bregman = 0.0;
};

/// Table row for one reconstruction against the truth. u_true must take values in [u_1, u_d].
StudyRow make_study_row(double delta_rel, const NoisyData& data, const MorozovResult& sel,
                        const ScalarField& u_true, const AdmissibleSet& U);
/// Row for a level whose solve failed: NaN columns, solver_error flag.
StudyRow failed_study_row(double delta_rel, const NoisyData& data);

using StudyCallback =
    std::function<void(std::size_t index, const StudyRow& row, const MorozovResult& result)>;

/// One row per noise level, in ladder order. All levels reuse the same noise realization
/// (same seed), scaled by the level.
std::vector<StudyRow> run_noise_study(const ScalarField& u_true, const AdmissibleSet& U,
                                      const NoiseModel& noise, const DiscrepancyConfig& dcfg,
                                      const SolverConfig& scfg,
                                      const StudyCallback& on_row = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace multibang
