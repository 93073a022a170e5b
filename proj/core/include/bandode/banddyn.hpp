#pragma once

// Dynamics between two ordered periodic solutions: classify which endpoint
// receives asymptotic trajectories (via the sign of the return-solution
// derivative gaps), detect degeneracy (an increasing family of periodic
// solutions joining the endpoints), trace perturbations through a
// degenerate family in the conservative case, and issue stability verdicts.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bandode/asymptotic.hpp"
#include "bandode/curve.hpp"
#include "bandode/field.hpp"
#include "bandode/periodic.hpp"

namespace bandode {

enum class FamilySign { AllPositive, AllNegative, Mixed, Incomplete };

struct ReturnSolution {
    double v0 = 0.0;     // u'(0)
    double v_end = 0.0;  // u'(T)
    double gap = 0.0;    // u'(0) - u'(T)
};

struct ReturnEntry {
    double u0 = 0.0;
    std::vector<ReturnSolution> solutions;
};

struct ReturnFamily {
    double epsilon = 0.0;
    std::vector<ReturnEntry> entries;
    FamilySign sign = FamilySign::Incomplete;
};

enum class ClassifyVerdict { AlphaReceives, BetaReceives, MixedInconclusive };

struct ClassifyResult {
    std::vector<ReturnFamily> families;
    ClassifyVerdict verdict = ClassifyVerdict::MixedInconclusive;
    std::vector<std::string> notes;
};

struct BandDynOptions {
    double v_bound = 0.0;  // required
    double h = 0.0;        // 0 -> T/2048
    int n_scan = 256;
    int threads = 0;
    int neighboring_grid = 33;  // find_periodic grid for the precheck
};

// Positive derivative gaps make the periodic extensions corner lower
// barriers, which push asymptotics up to beta; negative gaps mirror to
// alpha.  Mixed sign tables are reported, not forced into the dichotomy.
// Throws when the band between the orbits is not neighboring.
ClassifyResult classify_neighboring(const Field& field, const PeriodicOrbit& alpha_orbit,
                                    const PeriodicOrbit& beta_orbit,
                                    std::vector<double> eps_list, int grid,
                                    const BandDynOptions& opts);

enum class DegeneracyVerdict { Degenerate, GapFound, Inconclusive };

struct PsiSample {
    double s = 0.0;
    PeriodicOrbit orbit;
};

struct DegeneracyReport {
    DegeneracyVerdict verdict = DegeneracyVerdict::Inconclusive;
    std::vector<PsiSample> psi;  // filled when Degenerate
    std::pair<double, double> bracket{0.0, 0.0};  // initial positions, GapFound
    std::optional<PeriodicOrbit> bracket_lo, bracket_hi;
    std::vector<std::string> notes;

    double psi_value(double t, double s) const;  // interpolated Psi(t, s)
};

// Seeks a periodic orbit through every initial position on an s-grid between
// alpha(0) and beta(0).  All positions succeed with a strictly s-increasing
// family -> Degenerate; a failing stretch whose 64-point refinement stays
// empty -> GapFound with the bracketing orbits.
DegeneracyReport detect_degeneracy(const Field& field, const PeriodicOrbit& alpha_orbit,
                                   const PeriodicOrbit& beta_orbit, int grid_s,
                                   const BandDynOptions& opts);

enum class StabilityTag { UnstableCertified, FloquetUnstable, NumericallyStable, Inconclusive };

struct StabilityVerdict {
    StabilityTag tag = StabilityTag::Inconclusive;
    double orbit_u0 = 0.0, orbit_v0 = 0.0;
    double max_multiplier = 0.0;
    std::string witness;  // description of the certifying run/trace, if any
    std::string detail;
};

struct ConservativeTrace {
    double epsilon = 0.0;
    std::vector<std::pair<double, double>> s_of_t;  // decimated (t, s) samples
    std::optional<double> plateau;    // interior limit l, when reached
    std::optional<double> exit_time;  // time the orbit left the family range
};

enum class StartOrbit { Alpha, Beta };

struct ConservativeResult {
    ConservativeTrace trace;
    StabilityVerdict verdict;
};

struct ConservativeOptions {
    double h = 0.0;
    int max_periods = 2000;
    double plateau_tol = 1e-4;
    int threads = 0;
    double v_bound = 0.0;  // for re-solving the orbit at the plateau
    int n_scan = 256;
};

// Follows the solution started epsilon above alpha (below beta) through the
// degenerate family Psi: s(t) derived by inverting the monotone family must
// be monotone; it either stabilises at an interior level l (then Psi(., l)
// is unstable-certified) or escapes, which certifies the start orbit.
ConservativeResult conservative_locator(const Field& field, const DegeneracyReport& report,
                                        StartOrbit start, double epsilon,
                                        const ConservativeOptions& opts = {});

struct StabilityOptions {
    double h = 0.0;
    int perturbed_runs = 100;
    double perturbation = 1e-4;
    double horizon_periods = 20.0;
    int threads = 0;
};

// Verdict preference: a converged asymptotic run whose limit starts at least
// 1e-3 away from the orbit certifies instability outright; otherwise the
// Floquet multipliers decide, with the "numerically-stable" tag additionally
// gated on perturbed orbits staying within 10x the perturbation for 20
// periods.
StabilityVerdict stability_verdict(const Field& field, const PeriodicOrbit& orbit,
                                   const std::vector<const AsymptoticRun*>& witnesses,
                                   const StabilityOptions& opts = {});

// Corollary-2 style witness: a converged asymptotic run from the band
// midpoint toward the endpoint named by the classification verdict.
AsymptoticRun corollary2_witness(const Field& field, const PeriodicOrbit& alpha_orbit,
                                 const PeriodicOrbit& beta_orbit, ClassifyVerdict verdict,
                                 const AsymptoticOptions& opts);

}  // namespace bandode
