// Monte-Carlo machinery: scenario generation, trial execution against the
// proposed cross-frame estimator and the whole-frame baseline, NMSE metrics,
// SNR sweeps with CSV output, and the analytic two-framework report.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/dd.hpp"
#include "otfs/estimator.hpp"
#include "otfs/frames.hpp"

namespace otfs::sim {

class DegenerateTruthVarianceError : public std::domain_error {
public:
    explicit DegenerateTruthVarianceError(const std::string& what) : std::domain_error(what) {}
};

// Which tap axes carry sub-bin fractional offsets.
enum class TapCase { IntegerTaps = 1, FractionalDoppler = 2, FractionalBoth = 3 };

// Ground truth for one trial; taps are normalized to the layout's references
// (delay-pair bandwidth, doppler-pair duration).
struct Scenario {
    frames::DetectionType type = frames::DetectionType::BothOutOfRange;
    double delay_tap = 0.0;
    double doppler_tap = 0.0;
    cplx gain{1.0, 0.0};
};

// Uniform draw over the type's design ranges: Type 1 spans the full co-prime
// unambiguous region, Type 2 keeps |doppler| within the guard sizing, Type 3
// keeps delay within the guard sizing. Fractional cases add uniform sub-bin
// offsets in (-0.5, 0.5) on the designated axes.
Scenario draw_scenario(frames::DetectionType type, const frames::FrameLayout& layout,
                       TapCase tap_case, std::mt19937_64& rng);

// Classic-baseline grid occupying the same total resources: first subframe's
// subcarriers and spacing, slot count scaled by the number of subframes.
dd::SubframeConfig whole_frame_config(const frames::FrameLayout& layout);

struct TrialResult {
    est::CombinedEstimate combined;
    est::SubframeEstimate baseline;   // raw residues on the whole-frame grid
    long long baseline_delay = 0;     // baseline delay answer (residue, >= 0)
    long long baseline_doppler = 0;   // baseline Doppler answer, centered signed
    double truth_delay = 0.0;         // layout-referenced truth taps
    double truth_doppler = 0.0;
    double truth_whole_delay = 0.0;   // truth re-normalized to the whole frame
    double truth_whole_doppler = 0.0;
    bool exact = false;               // combined equals nearest-integer truth on both axes
};

// One synthesize->estimate round trip. The trial SNR is referenced to the
// average transmit power per cell of each grid (the pilot concentrates the
// frame's energy, so a lone pilot enjoys the full slots*subcarriers
// processing gain); the per-sample noise primitive is driven with the
// equivalent pilot-referenced value. Draw order per trial is fixed: data
// symbols, per-subframe noise, baseline noise.
TrialResult run_trial(const frames::FrameLayout& layout, const dd::SubframeConfig& whole,
                      const Scenario& scenario, double snr_db, double carrier_hz,
                      std::mt19937_64& rng);

// Normalized error variance Var(est - truth)/Var(truth), population variances
// over trials. A constant bias vanishes here by construction; see
// normalized_mse for the bias-sensitive companion metric.
double nmse(std::span<const double> estimates, std::span<const double> truths);

// Mean square error over Var(truth); reported alongside nmse.
double normalized_mse(std::span<const double> estimates, std::span<const double> truths);

struct SweepRow {
    double snr_db = 0.0;
    double nmse_delay = 0.0;
    double nmse_doppler = 0.0;
    double nmse_mean = 0.0;       // (nmse_delay + nmse_doppler)/2
    double mse_norm = 0.0;        // same average of the bias-sensitive metric
    double recovery_rate = 0.0;   // fraction of trials recovering both integer taps
    double baseline_nmse_mean = 0.0;
    long long trials = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string to_csv() const;
};

// Monte-Carlo SNR sweep. Trial t always seeds its generator from (seed, t),
// independent of the SNR point, so scenarios and noise shapes are common
// random numbers across the sweep and results are schedule-independent.
SweepResult sweep_snr(const frames::FrameLayout& layout, frames::DetectionType type,
                      TapCase tap_case, std::span<const double> snr_list_db, long long trials,
                      std::uint64_t seed, double carrier_hz);

struct FrameworkRow {
    double range_res_m = 0.0;
    double velocity_res_mps = 0.0;
    long long delay_taps = 0;
    long long doppler_taps = 0;
    double max_range_m = 0.0;
    double max_velocity_mps = 0.0;  // one-sided span
};

struct AnalyticReport {
    FrameworkRow proposed;
    FrameworkRow whole_frame;
};

// Resolution and unambiguous limits for the cross-frame method vs the
// whole-frame classic baseline, each computed from its own grid parameters.
AnalyticReport analytic_report(const frames::FrameLayout& layout,
                               const dd::SubframeConfig& whole, double carrier_hz);

}  // namespace otfs::sim
