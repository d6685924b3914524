#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metrolab/errors.hpp"
#include "metrolab/generators.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/measurement.hpp"
#include "metrolab/metrology.hpp"
#include "metrolab/types.hpp"

namespace metrolab {

enum class ScenarioKind {
    GhzRamsey,
    ZeroNSuperposition,
    KerrCoherent,
    NetworkGlm,
    NetworkBfcg,
    NetworkRb,
};

struct ScenarioParams {
    std::optional<Index> n;
    std::optional<double> alpha;
    std::optional<double> phi;
    std::optional<Index> cutoff;
};

struct ScenarioInfo {
    std::string name;
    std::string params;
    std::string summary;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> catalog = {
        {"ghz-ramsey", "--n <qubits, default 4>",
         "maximally entangled register under one counting query per qubit, "
         "parity readout"},
        {"zero-n-superposition", "--n <level, default 4>",
         "(|0>+|N>)/sqrt(2) under the squared number operator, interference "
         "readout"},
        {"kerr-coherent", "--alpha <amplitude, default 10>",
         "coherent probe under the squared number operator; reports the "
         "variance bound instead of a fringe"},
        {"network-glm", "--n <systems, default 4>",
         "single-query network on an entangled register, one query per "
         "system"},
        {"network-bfcg", "--n <systems, default 4>",
         "pairwise-interaction network on an entangled register, one query "
         "per unordered pair"},
        {"network-rb", "--n <systems, default 4>",
         "subset network on an entangled register, one query per nonempty "
         "subset"},
    };
    return catalog;
}

/// A named experiment with validated parameters. Unknown names and
/// parameters that do not apply to the chosen experiment are rejected up
/// front rather than silently ignored.
class Scenario {
  public:
    Scenario(std::string name, ScenarioParams params = {})
        : name_(std::move(name)), params_(params) {
        kind_ = parse_kind(name_);
        const bool uses_n = kind_ != ScenarioKind::KerrCoherent;
        if (!uses_n && params_.n)
            throw SchemaError("--n does not apply to " + name_);
        if (kind_ != ScenarioKind::KerrCoherent && params_.alpha)
            throw SchemaError("--alpha does not apply to " + name_);
        const bool uses_cutoff = kind_ == ScenarioKind::ZeroNSuperposition ||
                                 kind_ == ScenarioKind::KerrCoherent;
        if (!uses_cutoff && params_.cutoff)
            throw SchemaError("a truncation override does not apply to " +
                              name_);

        switch (kind_) {
        case ScenarioKind::GhzRamsey:
        case ScenarioKind::NetworkGlm:
        case ScenarioKind::NetworkRb:
            n_ = checked_n(1, 16);
            break;
        case ScenarioKind::NetworkBfcg:
            n_ = checked_n(2, 16);
            break;
        case ScenarioKind::ZeroNSuperposition: {
            n_ = checked_n(1, kProductDimLimit - 1);
            cutoff_ = params_.cutoff.value_or(n_);
            if (cutoff_ < n_)
                throw SchemaError("cutoff " + std::to_string(cutoff_) +
                                  " cannot hold level " + std::to_string(n_));
            if (cutoff_ + 1 > kProductDimLimit)
                throw SchemaError("cutoff " + std::to_string(cutoff_) +
                                  " exceeds the register cap");
            break;
        }
        case ScenarioKind::KerrCoherent: {
            alpha_ = params_.alpha.value_or(10.0);
            if (!(alpha_ >= 0) || !std::isfinite(alpha_))
                throw SchemaError("--alpha must be a finite non-negative "
                                  "amplitude");
            cutoff_ = params_.cutoff.value_or(
                FockTruncation::auto_for(alpha_ * alpha_).cutoff);
            if (cutoff_ < 1 || cutoff_ + 1 > kDenseDimLimit)
                throw SchemaError("cutoff " + std::to_string(cutoff_) +
                                  " is outside the workable range");
            break;
        }
        }
        if (params_.phi && !std::isfinite(*params_.phi))
            throw SchemaError("--phi must be finite");
    }

    const std::string& name() const { return name_; }
    ScenarioKind kind() const { return kind_; }
    Index n() const { return n_; }
    double alpha() const { return alpha_; }
    Index cutoff() const { return cutoff_; }
    std::optional<double> phi() const { return params_.phi; }

    /// N for the discrete experiments, the mean photon number for the
    /// coherent one.
    double size() const {
        return kind_ == ScenarioKind::KerrCoherent
                   ? alpha_ * alpha_
                   : static_cast<double>(n_);
    }

    /// Same scenario at a different size; the sweep driver uses this.
    Scenario with_size(double size) const {
        ScenarioParams p = params_;
        if (kind_ == ScenarioKind::KerrCoherent) {
            if (!(size > 0))
                throw SchemaError("mean photon number must be positive, got " +
                                  std::to_string(size));
            p.alpha = std::sqrt(size);
        } else {
            if (!(size > 0) || size != std::floor(size))
                throw SchemaError("size must be a positive integer for " +
                                  name_ + ", got " + std::to_string(size));
            p.n = static_cast<Index>(size);
        }
        return Scenario(name_, p);
    }

  private:
    static ScenarioKind parse_kind(const std::string& name) {
        if (name == "ghz-ramsey")
            return ScenarioKind::GhzRamsey;
        if (name == "zero-n-superposition")
            return ScenarioKind::ZeroNSuperposition;
        if (name == "kerr-coherent")
            return ScenarioKind::KerrCoherent;
        if (name == "network-glm")
            return ScenarioKind::NetworkGlm;
        if (name == "network-bfcg")
            return ScenarioKind::NetworkBfcg;
        if (name == "network-rb")
            return ScenarioKind::NetworkRb;
        std::string known;
        for (const auto& info : scenario_catalog())
            known += (known.empty() ? "" : ", ") + info.name;
        throw SchemaError("unknown scenario '" + name + "'; expected one of " +
                          known);
    }

    Index checked_n(Index lo, Index hi) const {
        const Index value = params_.n.value_or(4);
        if (value < lo || value > hi)
            throw SchemaError("--n must lie in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] for " + name_ +
                              ", got " + std::to_string(value));
        return value;
    }

    std::string name_;
    ScenarioParams params_;
    ScenarioKind kind_;
    Index n_ = 0;
    double alpha_ = 0;
    Index cutoff_ = 0;
};

namespace detail {

// (|lo> ± |hi>)/sqrt(2) projectors plus the complement of their span.
inline Povm<double> fringe_povm(Index dim, Index lo, Index hi) {
    const double r = 1.0 / std::sqrt(2.0);
    ComplexVector<double> plus = ComplexVector<double>::Zero(dim);
    ComplexVector<double> minus = ComplexVector<double>::Zero(dim);
    plus(lo) = r;
    plus(hi) = r;
    minus(lo) = r;
    minus(hi) = -r;
    return Povm<double>::projectors_with_complement(
        {StateVector<double>({dim}, plus), StateVector<double>({dim}, minus)},
        {"plus", "minus"}, "rest");
}

// |lo><hi| + |hi><lo| via its ±1 eigenvectors.
inline HermitianOperator<double> exchange_observable(Index dim, Index lo,
                                                     Index hi) {
    const double r = 1.0 / std::sqrt(2.0);
    ComplexMatrix<double> cols = ComplexMatrix<double>::Zero(dim, 2);
    cols(lo, 0) = r;
    cols(hi, 0) = r;
    cols(lo, 1) = r;
    cols(hi, 1) = -r;
    RealVector<double> weights(2);
    weights << 1.0, -1.0;
    return HermitianOperator<double>::from_low_rank(std::move(cols),
                                                    std::move(weights));
}

} // namespace detail

/// Everything a scenario run needs: the probe, the ground-normalized
/// generator, the measurement, the optional signal observable, and the
/// fringe metadata used for phase defaults and estimator windows.
struct ScenarioBuild {
    StateVector<double> probe;
    NormalizedGenerator<double> generator;
    Povm<double> povm;
    std::optional<HermitianOperator<double>> observable;
    std::optional<Index> queries;
    double size;
    double phase_rate;
    double default_phi;
    bool supports_mle;
};

inline ScenarioBuild build_scenario(const Scenario& s) {
    switch (s.kind()) {
    case ScenarioKind::GhzRamsey:
    case ScenarioKind::NetworkGlm:
    case ScenarioKind::NetworkBfcg:
    case ScenarioKind::NetworkRb: {
        const Index n = s.n();
        RealVector<double> counting(2);
        counting << 0.0, 1.0;
        auto atom = AtomicGenerator<double>::from_diagonal(counting);
        auto net = s.kind() == ScenarioKind::NetworkBfcg ? build_bfcg(atom, n)
                   : s.kind() == ScenarioKind::NetworkRb ? build_rb(atom, n)
                                                         : build_glm(atom, n);
        const Index dim = net.product_dim();
        // The register's extreme levels carry the whole fringe: the all-ground
        // state sits at energy 0 and the all-excited one at the query count.
        const double rate = static_cast<double>(net.query_count());
        return ScenarioBuild{
            ghz_state<double>(n),
            normalize_ground_energy(net.total()),
            detail::fringe_povm(dim, 0, dim - 1),
            detail::exchange_observable(dim, 0, dim - 1),
            net.query_count(),
            static_cast<double>(n),
            rate,
            std::numbers::pi / (8 * rate),
            true,
        };
    }
    case ScenarioKind::ZeroNSuperposition: {
        const Index n = s.n();
        const Index cutoff = s.cutoff();
        const double rate = static_cast<double>(n) * static_cast<double>(n);
        return ScenarioBuild{
            zero_n_superposition<double>(n, cutoff),
            normalize_ground_energy(number_squared_operator<double>(cutoff)),
            detail::fringe_povm(cutoff + 1, 0, n),
            detail::exchange_observable(cutoff + 1, 0, n),
            std::nullopt,
            static_cast<double>(n),
            rate,
            std::numbers::pi / (8 * rate),
            true,
        };
    }
    case ScenarioKind::KerrCoherent: {
        const Index cutoff = s.cutoff();
        auto probe = coherent_state<double>(Complex<double>(s.alpha(), 0),
                                            FockTruncation::with_cutoff(cutoff));
        // A number-basis readout of a number-diagonal evolution carries no
        // phase information; this scenario is about the variance bound, so
        // that outcome is reported honestly rather than replaced.
        return ScenarioBuild{
            std::move(probe),
            normalize_ground_energy(number_squared_operator<double>(cutoff)),
            Povm<double>::computational_basis(cutoff + 1),
            std::nullopt,
            std::nullopt,
            s.size(),
            0.0,
            0.0,
            false,
        };
    }
    }
    throw SchemaError("unhandled scenario kind");
}

/// One bound report plus the identity columns it is emitted under.
struct ReportRow {
    std::string scenario;
    double size;
    std::optional<Index> queries;
    BoundReport<double> report;
};

struct SweepResult {
    std::vector<ReportRow> rows;
    double fitted_slope;
};

struct MonteCarloResult {
    std::string scenario;
    double phi_true;
    std::vector<double> estimates;
    double mse;
    std::int64_t t_shots;
    std::uint64_t seed;
    double crb_at_t;
};

inline ReportRow run_scenario(const Scenario& s, std::int64_t t_repeats) {
    if (t_repeats < 1)
        throw ArityError("repetition count must be at least 1");
    const ScenarioBuild build = build_scenario(s);
    const double phi = s.phi().value_or(build.default_phi);
    return ReportRow{s.name(), build.size, build.queries,
                     bound_report(build.probe, build.generator, phi,
                                  build.povm, build.observable, t_repeats)};
}

/// The identifiable estimator window (0, π/(2·rate)): one monotonic branch
/// of the fringe.
inline std::pair<double, double> mle_window(const ScenarioBuild& build) {
    if (!build.supports_mle)
        throw SchemaError("scenario has no single-branch estimator model");
    return {0.0, std::numbers::pi / (2 * build.phase_rate)};
}

inline SweepResult sweep_scaling(const Scenario& s,
                                 const std::vector<double>& sizes,
                                 std::int64_t t_repeats) {
    if (sizes.size() < 3)
        throw ArityError("a sweep needs at least 3 sizes, got " +
                         std::to_string(sizes.size()));
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] > 0))
            throw SchemaError("sweep sizes must be positive");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw SchemaError("sweep sizes must be strictly increasing");
    }

    SweepResult result;
    for (double size : sizes)
        result.rows.push_back(run_scenario(s.with_size(size), t_repeats));

    // Least-squares slope of the designated error column against size, both
    // on log scales. Error-marked rows drop out; at least 3 must survive.
    std::vector<double> xs, ys;
    for (const auto& row : result.rows) {
        const BoundValue<double>& value =
            s.kind() == ScenarioKind::KerrCoherent
                ? row.report.uncertainty_eq9
                : row.report.delta_phi_ep;
        if (value.ok() && value.value > 0) {
            xs.push_back(std::log(row.size));
            ys.push_back(std::log(value.value));
        }
    }
    if (xs.size() < 3)
        throw NumericalError("fewer than 3 sweep points carry the fitted "
                             "column; cannot fit a slope");
    const double n_pts = static_cast<double>(xs.size());
    double x_mean = 0, y_mean = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        x_mean += xs[i];
        y_mean += ys[i];
    }
    x_mean /= n_pts;
    y_mean /= n_pts;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - x_mean) * (ys[i] - y_mean);
        den += (xs[i] - x_mean) * (xs[i] - x_mean);
    }
    result.fitted_slope = num / den;
    return result;
}

/// Maximum-likelihood phase from observed counts: a fixed 1000-point scan of
/// the window followed by golden-section refinement to 1e-10 width. The
/// estimate must land strictly inside the window; a maximum at either edge
/// means the data does not identify the phase there.
inline double
mle_estimate(const std::vector<std::int64_t>& counts,
             const std::function<RealVector<double>(double)>& model,
             double window_lo, double window_hi) {
    if (!(window_hi > window_lo))
        throw SchemaError("estimator window is empty");
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0)
            throw ArityError("negative outcome count");
        total += c;
    }
    if (total < 1)
        throw ArityError("estimator needs at least one observed outcome");

    auto log_likelihood = [&](double phi) {
        const RealVector<double> probs = model(phi);
        if (probs.size() != static_cast<Index>(counts.size()))
            throw DimensionError("model returned " +
                                 std::to_string(probs.size()) +
                                 " probabilities for " +
                                 std::to_string(counts.size()) + " outcomes");
        double ll = 0;
        for (Index x = 0; x < probs.size(); ++x) {
            const std::int64_t c = counts[static_cast<std::size_t>(x)];
            if (c == 0)
                continue;
            if (probs(x) <= 0)
                return -std::numeric_limits<double>::infinity();
            ll += static_cast<double>(c) * std::log(probs(x));
        }
        return ll;
    };

    constexpr int grid_points = 1000;
    const double step = (window_hi - window_lo) / (grid_points - 1);
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double ll = log_likelihood(window_lo + step * i);
        if (ll > best_ll) {
            best_ll = ll;
            best = i;
        }
    }
    if (best == 0 || best == grid_points - 1)
        throw WindowError("likelihood is maximized at the window edge " +
                          std::to_string(window_lo + step * best));

    double a = window_lo + step * (best - 1);
    double b = window_lo + step * (best + 1);
    const double ratio = (std::sqrt(5.0) - 1) / 2;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = log_likelihood(c);
    double fd = log_likelihood(d);
    while (b - a > 1e-10) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = log_likelihood(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = log_likelihood(d);
        }
    }
    return (a + b) / 2;
}

namespace detail {

// Stateless per-trial seed derivation (splitmix64 finalizer), so trials are
// independent of execution order and thread count.
inline std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
    std::uint64_t x =
        seed + (static_cast<std::uint64_t>(trial) + 1) * 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline unsigned resolve_worker_count() {
    const char* env = std::getenv("METROLAB_THREADS");
    if (!env || !*env)
        return 1;
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 0)
        throw SchemaError("METROLAB_THREADS must be a non-negative integer, "
                          "got '" + std::string(env) + "'");
    if (value == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }
    return static_cast<unsigned>(value);
}

} // namespace detail

/// Repeated T-shot experiments at a fixed true phase: sample, estimate,
/// accumulate the mean squared error. Trial k draws its RNG stream from
/// (seed, k) alone and results merge in trial order, so the outcome is
/// identical for any worker count.
inline MonteCarloResult monte_carlo_mse(const Scenario& s, double phi_true,
                                        std::int64_t t_shots, Index trials,
                                        std::uint64_t seed) {
    if (t_shots < 1)
        throw ArityError("shot count must be at least 1");
    if (trials < 1)
        throw ArityError("trial count must be at least 1");
    const ScenarioBuild build = build_scenario(s);
    const auto [window_lo, window_hi] = mle_window(build);
    if (!(phi_true > window_lo) || !(phi_true < window_hi))
        throw SchemaError("phi_true " + std::to_string(phi_true) +
                          " lies outside the identifiable window (" +
                          std::to_string(window_lo) + ", " +
                          std::to_string(window_hi) + ")");

    const OutcomeDistribution<double> dist = born_derivative(
        build.probe, build.generator.op(), phi_true, build.povm);
    const double fisher = fisher_information(dist);
    const double crb_at_t = cramer_rao(fisher, t_shots);

    auto model = [&build](double phi) {
        return born_probabilities(evolve(build.probe, build.generator.op(), phi),
                                  build.povm)
            .probs;
    };

    std::vector<double> estimates(static_cast<std::size_t>(trials), 0.0);
    auto run_range = [&](Index first, Index stride) {
        for (Index k = first; k < trials; k += stride) {
            const auto counts =
                sample_outcomes(dist, t_shots, detail::trial_seed(seed, k));
            estimates[static_cast<std::size_t>(k)] =
                mle_estimate(counts, model, window_lo, window_hi);
        }
    };

    const unsigned workers = std::min<unsigned>(
        detail::resolve_worker_count(), static_cast<unsigned>(trials));
    if (workers <= 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> failures(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    run_range(static_cast<Index>(w),
                              static_cast<Index>(workers));
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        for (auto& t : pool)
            t.join();
        for (const auto& failure : failures)
            if (failure)
                std::rethrow_exception(failure);
    }

    double mse = 0;
    for (double e : estimates)
        mse += (e - phi_true) * (e - phi_true);
    mse /= static_cast<double>(trials);
    return MonteCarloResult{s.name(), phi_true, std::move(estimates),
                            mse,      t_shots,  seed,
                            crb_at_t};
}

enum class OutputFormat { Csv, Json };

inline constexpr const char* kBoundsCsvHeader =
    "scenario,size,resource,q,fisher,qfi,delta_phi_ep,heisenberg_eq8,"
    "uncertainty_eq9,ml_phase_eq10,ratio_eq8";

inline constexpr const char* kMonteCarloCsvHeader =
    "scenario,phi_true,t_shots,trials,seed,mse,crb_at_t";

namespace detail {

// 17 significant digits round-trips doubles exactly; the C locale keeps the
// decimal point a '.'.
inline std::string format_float(double value) {
    if (std::isnan(value))
        return "nan";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline std::string csv_bound(const BoundValue<double>& value) {
    return value.ok() ? format_float(value.value) : "nan";
}

inline void csv_row(std::ostream& os, const ReportRow& row) {
    os << row.scenario << ',' << format_float(row.size) << ','
       << format_float(row.report.resource) << ','
       << (row.queries ? std::to_string(*row.queries) : "nan") << ','
       << csv_bound(row.report.fisher_classical) << ','
       << format_float(row.report.qfi) << ','
       << csv_bound(row.report.delta_phi_ep) << ','
       << csv_bound(row.report.heisenberg_eq8) << ','
       << csv_bound(row.report.uncertainty_eq9) << ','
       << csv_bound(row.report.ml_phase_eq10) << ','
       << csv_bound(row.report.ratio_eq8) << '\n';
}

inline void json_put(nlohmann::ordered_json& object, const std::string& key,
                     const BoundValue<double>& value) {
    if (value.ok()) {
        object[key] = value.value;
    } else {
        object[key] = "nan";
        object[key + "_err"] = value.error;
    }
}

inline nlohmann::ordered_json json_row(const ReportRow& row) {
    nlohmann::ordered_json object;
    object["scenario"] = row.scenario;
    object["size"] = row.size;
    object["resource"] = row.report.resource;
    if (row.queries)
        object["q"] = *row.queries;
    else
        object["q"] = "nan";
    json_put(object, "fisher", row.report.fisher_classical);
    object["qfi"] = row.report.qfi;
    json_put(object, "delta_phi_ep", row.report.delta_phi_ep);
    json_put(object, "heisenberg_eq8", row.report.heisenberg_eq8);
    json_put(object, "uncertainty_eq9", row.report.uncertainty_eq9);
    json_put(object, "ml_phase_eq10", row.report.ml_phase_eq10);
    json_put(object, "ratio_eq8", row.report.ratio_eq8);
    return object;
}

inline nlohmann::ordered_json json_row(const MonteCarloResult& mc) {
    nlohmann::ordered_json object;
    object["scenario"] = mc.scenario;
    object["phi_true"] = mc.phi_true;
    object["t_shots"] = mc.t_shots;
    object["trials"] = mc.estimates.size();
    object["seed"] = mc.seed;
    object["mse"] = mc.mse;
    object["crb_at_t"] = mc.crb_at_t;
    return object;
}

} // namespace detail

inline void emit_results(const ReportRow& row, OutputFormat format,
                         std::ostream& os) {
    if (format == OutputFormat::Csv) {
        os << kBoundsCsvHeader << '\n';
        detail::csv_row(os, row);
    } else {
        nlohmann::ordered_json object;
        object["rows"] = nlohmann::ordered_json::array({detail::json_row(row)});
        os << object.dump(2) << '\n';
    }
    if (!os)
        throw IoError("failed to write results");
}

inline void emit_results(const SweepResult& sweep, OutputFormat format,
                         std::ostream& os) {
    if (format == OutputFormat::Csv) {
        os << kBoundsCsvHeader << '\n';
        for (const auto& row : sweep.rows)
            detail::csv_row(os, row);
        os << "# slope=" << detail::format_float(sweep.fitted_slope) << '\n';
    } else {
        nlohmann::ordered_json object;
        object["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : sweep.rows)
            object["rows"].push_back(detail::json_row(row));
        object["fitted_slope"] = sweep.fitted_slope;
        os << object.dump(2) << '\n';
    }
    if (!os)
        throw IoError("failed to write results");
}

inline void emit_results(const MonteCarloResult& mc, OutputFormat format,
                         std::ostream& os) {
    if (format == OutputFormat::Csv) {
        os << kMonteCarloCsvHeader << '\n'
           << mc.scenario << ',' << detail::format_float(mc.phi_true) << ','
           << mc.t_shots << ',' << mc.estimates.size() << ',' << mc.seed << ','
           << detail::format_float(mc.mse) << ','
           << detail::format_float(mc.crb_at_t) << '\n';
    } else {
        nlohmann::ordered_json object;
        object["rows"] =
            nlohmann::ordered_json::array({detail::json_row(mc)});
        object["seed"] = mc.seed;
        object["estimates"] = mc.estimates;
        os << object.dump(2) << '\n';
    }
    if (!os)
        throw IoError("failed to write results");
}

template <typename Result>
void emit_results(const Result& result, OutputFormat format,
                  const std::string& path) {
    std::ofstream file(path);
    if (!file)
        throw IoError("cannot open '" + path + "' for writing");
    emit_results(result, format, file);
    file.flush();
    if (!file)
        throw IoError("failed to write '" + path + "'");
}

} // namespace metrolab
