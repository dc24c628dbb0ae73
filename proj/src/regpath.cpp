#include "multibang/regpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "multibang/errors.hpp"
#include "multibang/noise.hpp"
#include "multibang/poisson.hpp"

namespace multibang {

namespace {

LinearSolveOptions tight_solve() {
    LinearSolveOptions opts;
    opts.rel_tol = 1e-12;
    return opts;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ScalarField forward_data(const ScalarField& u) { return poisson_solve(u, tight_solve()); }

NoisyData make_noisy_data(const ScalarField& y_true, double delta_rel, std::uint64_t seed) {
    if (!(delta_rel > 0.0)) throw DomainError("relative noise level must be positive");
    const CounterNormal rng(seed);
    const double scale = delta_rel * norm_max(y_true);
    ScalarField y_delta = y_true;
    for (std::size_t k = 0; k < y_delta.size(); ++k) y_delta[k] += scale * rng.normal(k);
    const ScalarField diff = y_delta - y_true;
    return {std::move(y_delta), norm_l2(diff), norm_raw(diff)};
}

void DiscrepancyConfig::validate() const {
    if (!(tau > 1.0)) throw DomainError("tau must exceed 1");
    if (!(alpha_min > 0.0 && alpha0 > alpha_min)) {
        throw DomainError("need alpha0 > alpha_min > 0");
    }
    if (!(alpha_factor > 0.0 && alpha_factor < 1.0)) {
        throw DomainError("alpha_factor must lie in (0, 1)");
    }
}

std::string format_flags(unsigned flags) {
    if (flags == kRowClean) return "ok";
    static constexpr std::pair<unsigned, const char*> names[] = {
        {kRowOverResolved, "over_resolved"},
        {kRowExhausted, "exhausted"},
        {kRowIncomplete, "incomplete"},
        {kRowSolverError, "solver_error"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (flags & bit) {
            if (!out.empty()) out += '|';
            out += name;
        }
    }
    return out;
}

unsigned parse_flags(const std::string& text) {
    if (text == "ok") return kRowClean;
    unsigned flags = 0;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, '|')) {
        if (token == "over_resolved") flags |= kRowOverResolved;
        else if (token == "exhausted") flags |= kRowExhausted;
        else if (token == "incomplete") flags |= kRowIncomplete;
        else if (token == "solver_error") flags |= kRowSolverError;
        else throw DomainError("unknown row flag '" + token + "'");
    }
    return flags;
}

double data_discrepancy(const ScalarField& u, const ScalarField& y_delta) {
    return norm_l2(forward_data(u) - y_delta);
}

MorozovResult select_alpha_morozov(const ScalarField& y_delta, double delta_eff,
                                   const AdmissibleSet& U, const DiscrepancyConfig& dcfg,
                                   const SolverConfig& scfg) {
    dcfg.validate();
    if (!(delta_eff > 0.0)) throw DomainError("effective noise level must be positive");
    SchurSolver schur(y_delta.grid());
    std::optional<WarmStart> warm;
    std::vector<AlphaTrial> trials;
    int newton_total = 0;
    const double bound = dcfg.tau * delta_eff;
    for (int k = 0;; ++k) {
        const double alpha = dcfg.alpha0 * std::pow(dcfg.alpha_factor, k);
        ContinuationResult sol = solve_with_continuation(y_delta, alpha, U, scfg, warm, schur);
        const double disc = data_discrepancy(sol.u, y_delta);
        const bool converged = sol.report.termination != Termination::MaxNewtonExceeded;
        newton_total += sol.report.total_newton();
        trials.push_back({alpha, disc, sol.report.total_newton(), converged});

        const bool accept = disc <= bound;
        const bool last = alpha * dcfg.alpha_factor < dcfg.alpha_min;
        if (accept || last) {
            unsigned flags = kRowClean;
            if (accept && !(disc > delta_eff)) flags |= kRowOverResolved;
            if (!accept) flags |= kRowExhausted;
            if (!converged) flags |= kRowIncomplete;
            return {alpha, std::move(sol), disc, flags, newton_total, std::move(trials)};
        }
        if (dcfg.warm_start) warm = WarmStart{sol.state.y, sol.state.p};
    }
}

MorozovResult solve_fixed_alpha(const ScalarField& y_delta, double alpha, const AdmissibleSet& U,
                                const SolverConfig& scfg) {
    ContinuationResult sol = solve_with_continuation(y_delta, alpha, U, scfg);
    const double disc = data_discrepancy(sol.u, y_delta);
    const bool converged = sol.report.termination != Termination::MaxNewtonExceeded;
    const int iters = sol.report.total_newton();
    std::vector<AlphaTrial> trials{{alpha, disc, iters, converged}};
    const unsigned flags = converged ? kRowClean : kRowIncomplete;
    return {alpha, std::move(sol), disc, flags, iters, std::move(trials)};
}

ErrorPair errors_against_truth(const ScalarField& u, const ScalarField& u_true) {
    const ScalarField diff = u - u_true;
    return {norm_l2(diff), norm_max(diff), norm_raw(diff)};
}

NoiseModel NoiseModel::dyadic(int first, int last, std::uint64_t seed) {
    NoiseModel model;
    model.seed = seed;
    for (int e = first; e <= last; ++e) model.rel_levels.push_back(std::ldexp(1.0, -e));
    return model;
}

void NoiseModel::validate() const {
    if (rel_levels.empty()) throw DomainError("noise ladder is empty");
    for (std::size_t k = 0; k < rel_levels.size(); ++k) {
        if (!(rel_levels[k] > 0.0)) throw DomainError("noise levels must be positive");
        if (k > 0 && !(rel_levels[k] < rel_levels[k - 1])) {
            throw DomainError("noise levels must be strictly decreasing");
        }
    }
}

StudyRow make_study_row(double delta_rel, const NoisyData& data, const MorozovResult& sel,
                        const ScalarField& u_true, const AdmissibleSet& U) {
    StudyRow row;
    row.delta_rel = delta_rel;
    row.delta_eff = data.delta_eff;
    row.delta_raw = data.delta_raw;
    const ErrorPair err = errors_against_truth(sel.solution.u, u_true);
    row.alpha = sel.alpha;
    row.e2 = err.e2;
    row.e2_raw = err.e2_raw;
    row.einf = err.einf;
    row.singular_nodes = sel.solution.report.singular_nodes;
    row.newton_total = sel.newton_total;
    row.flags = sel.flags;
    row.discrepancy = sel.discrepancy;

    ScalarField p_true(u_true.grid());
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < u_true.size(); ++k) {
        p_true[k] = strict_subgradient(u_true[k], U);
        if (sel.solution.u[k] != u_true[k]) ++mismatched;
    }
    row.mismatch_fraction = static_cast<double>(mismatched) / static_cast<double>(u_true.size());
    row.bregman = bregman_G(sel.solution.u, u_true, p_true, U);
    return row;
}

StudyRow failed_study_row(double delta_rel, const NoisyData& data) {
    StudyRow row;
    row.delta_rel = delta_rel;
    row.delta_eff = data.delta_eff;
    row.delta_raw = data.delta_raw;
    row.alpha = row.e2 = row.e2_raw = row.einf = kNaN;
    row.discrepancy = row.mismatch_fraction = row.bregman = kNaN;
    row.flags = kRowSolverError;
    return row;
}

std::vector<StudyRow> run_noise_study(const ScalarField& u_true, const AdmissibleSet& U,
                                      const NoiseModel& noise, const DiscrepancyConfig& dcfg,
                                      const SolverConfig& scfg, const StudyCallback& on_row) {
    noise.validate();
    dcfg.validate();
    scfg.validate();
    const ScalarField y_true = forward_data(u_true);

    std::vector<StudyRow> rows;
    rows.reserve(noise.rel_levels.size());
    for (std::size_t level = 0; level < noise.rel_levels.size(); ++level) {
        const double delta_rel = noise.rel_levels[level];
        const NoisyData data = make_noisy_data(y_true, delta_rel, noise.seed);
        try {
            const MorozovResult sel = select_alpha_morozov(data.y_delta, data.delta_eff, U, dcfg, scfg);
            rows.push_back(make_study_row(delta_rel, data, sel, u_true, U));
            if (on_row) on_row(level, rows.back(), sel);
        } catch (const SolverFailure&) {
            rows.push_back(failed_study_row(delta_rel, data));
        }
    }
    return rows;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DimensionError("Spearman correlation needs two samples of equal length >= 2");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k) {
        sab += (ra[k] - ma) * (rb[k] - mb);
        saa += (ra[k] - ma) * (ra[k] - ma);
        sbb += (rb[k] - mb) * (rb[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace multibang
