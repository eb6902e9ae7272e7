#include "otfs/harness.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "otfs/crt.hpp"

namespace otfs::sim {

namespace {

constexpr double kPi = std::numbers::pi;

long long centered_span(const frames::FrameLayout& layout) {
    auto nm = layout.doppler_moduli();
    long long l = crt::lcm_all(std::span<const long long>(nm));
    return (l - 1) / 2;  // integer draws stay strictly inside the signed interval
}

long long delay_span(const frames::FrameLayout& layout) {
    auto dm = layout.delay_moduli();
    return crt::lcm_all(std::span<const long long>(dm)) - 1;
}

// Trial SNR is referenced to the grid's average transmit power per cell; the
// noise primitive is pilot-referenced, so shift by the (positive) ratio.
dd::DDGrid add_trial_noise(const dd::DDGrid& rx, const dd::DDGrid& tx, double snr_db,
                           std::mt19937_64& rng) {
    if (std::isinf(snr_db) && snr_db > 0.0) return rx;
    double total = 0.0;
    for (const cplx& s : tx.samples) total += std::norm(s);
    double avg = total / static_cast<double>(tx.samples.size());
    double shift_db = 10.0 * std::log10(std::norm(tx.cfg.pilot_amp) / avg);
    return dd::add_awgn(rx, snr_db + shift_db, rng);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_var(std::span<const double> v) {
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double truth_variance_checked(std::span<const double> truths, const char* who) {
    double v = population_var(truths);
    if (!(v > 0.0)) {
        throw DegenerateTruthVarianceError(std::string(who) +
                                           ": truth draws have zero variance, NMSE undefined");
    }
    return v;
}

}  // namespace

Scenario draw_scenario(frames::DetectionType type, const frames::FrameLayout& layout,
                       TapCase tap_case, std::mt19937_64& rng) {
    if (type != layout.type) {
        throw std::invalid_argument("draw_scenario: type disagrees with layout");
    }
    long long l_max = 0, k_max = 0;
    switch (type) {
        case frames::DetectionType::BothOutOfRange:
            l_max = delay_span(layout);
            k_max = centered_span(layout);
            break;
        case frames::DetectionType::DelayOutOfRange:
            l_max = delay_span(layout);
            k_max = layout.guard.max_doppler_tap;
            break;
        case frames::DetectionType::DopplerOutOfRange:
            l_max = layout.guard.max_delay_tap;
            k_max = centered_span(layout);
            break;
    }
    Scenario s;
    s.type = type;
    std::uniform_int_distribution<long long> dl(0, l_max);
    std::uniform_int_distribution<long long> dk(-k_max, k_max);
    s.delay_tap = static_cast<double>(dl(rng));
    s.doppler_tap = static_cast<double>(dk(rng));
    if (tap_case == TapCase::FractionalDoppler || tap_case == TapCase::FractionalBoth) {
        std::uniform_real_distribution<double> frac(-0.5, 0.5);
        s.doppler_tap += frac(rng);
        if (tap_case == TapCase::FractionalBoth) {
            s.delay_tap += frac(rng);
            if (s.delay_tap < 0.0) s.delay_tap = -s.delay_tap;  // delays stay non-negative
        }
    }
    return s;
}

dd::SubframeConfig whole_frame_config(const frames::FrameLayout& layout) {
    const dd::SubframeConfig& first = layout.subframes.front();
    dd::SubframeConfig whole;
    whole.subcarriers = first.subcarriers;
    whole.slots = first.slots * static_cast<int>(layout.subframes.size());
    whole.spacing_hz = first.spacing_hz;
    whole.pilot_doppler = whole.slots / 2;
    whole.pilot_delay = whole.subcarriers / 2;
    whole.pilot_amp = cplx{1.0, 0.0};
    whole.validate();
    return whole;
}

TrialResult run_trial(const frames::FrameLayout& layout, const dd::SubframeConfig& whole,
                      const Scenario& scenario, double snr_db, double carrier_hz,
                      std::mt19937_64& rng) {
    dd::TargetParams target;
    target.gain = scenario.gain;
    target.delay_tap = scenario.delay_tap;
    target.doppler_tap = scenario.doppler_tap;
    target.ref_bandwidth_hz = layout.ref_bandwidth_hz();
    target.ref_duration_s = layout.ref_duration_s();

    long long data_cells = 0;
    for (const auto& m : layout.masks) data_cells += m.count(frames::CellKind::Data);
    std::vector<cplx> symbols;
    symbols.reserve(static_cast<size_t>(data_cells));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (long long i = 0; i < data_cells; ++i) {
        double ph = phase(rng);
        symbols.emplace_back(std::cos(ph), std::sin(ph));
    }

    std::vector<dd::DDGrid> tx = frames::assemble_tx(layout, symbols);
    std::vector<est::SubframeEstimate> estimates;
    for (size_t i = 0; i < tx.size(); ++i) {
        dd::DDGrid rx = dd::dd_response(tx[i], target);
        rx = add_trial_noise(rx, tx[i], snr_db, rng);
        estimates.push_back(est::estimate_subframe(rx, layout.masks[i]));
    }

    TrialResult res;
    res.combined = est::combine(layout, estimates, carrier_hz);

    // Baseline: one pilot-only frame over the same total resources.
    dd::DDGrid whole_tx = dd::DDGrid::zeros(whole);
    whole_tx.at(whole.pilot_doppler, whole.pilot_delay) = whole.pilot_amp;
    dd::DDGrid whole_rx = dd::dd_response(whole_tx, target);
    whole_rx = add_trial_noise(whole_rx, whole_tx, snr_db, rng);
    res.baseline = est::whole_frame_estimate(whole_rx);
    res.baseline_delay = res.baseline.delay_residue;
    res.baseline_doppler = crt::to_centered(res.baseline.doppler_residue, whole.slots);

    res.truth_delay = scenario.delay_tap;
    res.truth_doppler = scenario.doppler_tap;
    res.truth_whole_delay =
        scenario.delay_tap * (whole.bandwidth_hz() / layout.ref_bandwidth_hz());
    res.truth_whole_doppler =
        scenario.doppler_tap * (whole.duration_s() / layout.ref_duration_s());
    res.exact = res.combined.delay_tap == std::llround(scenario.delay_tap) &&
                res.combined.doppler_tap == std::llround(scenario.doppler_tap);
    return res;
}

double nmse(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size() || estimates.empty()) {
        throw std::invalid_argument("nmse: estimate/truth length mismatch or empty");
    }
    std::vector<double> err(estimates.size());
    for (size_t i = 0; i < estimates.size(); ++i) err[i] = estimates[i] - truths[i];
    return population_var(err) / truth_variance_checked(truths, "nmse");
}

double normalized_mse(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size() || estimates.empty()) {
        throw std::invalid_argument("normalized_mse: estimate/truth length mismatch or empty");
    }
    double mse = 0.0;
    for (size_t i = 0; i < estimates.size(); ++i) {
        double e = estimates[i] - truths[i];
        mse += e * e;
    }
    mse /= static_cast<double>(estimates.size());
    return mse / truth_variance_checked(truths, "normalized_mse");
}

std::string SweepResult::to_csv() const {
    std::string out =
        "snr_db,nmse_delay,nmse_doppler,nmse_mean,mse_norm,recovery_rate,baseline_nmse_mean,"
        "trials\n";
    char buf[256];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.5e,%.5e,%.5e,%.5e,%.5e,%.5e,%.5e,%lld\n", r.snr_db,
                      r.nmse_delay, r.nmse_doppler, r.nmse_mean, r.mse_norm, r.recovery_rate,
                      r.baseline_nmse_mean, r.trials);
        out += buf;
    }
    return out;
}

SweepResult sweep_snr(const frames::FrameLayout& layout, frames::DetectionType type,
                      TapCase tap_case, std::span<const double> snr_list_db, long long trials,
                      std::uint64_t seed, double carrier_hz) {
    if (type != layout.type) {
        throw std::invalid_argument("sweep_snr: type disagrees with layout");
    }
    if (trials < 1) throw std::invalid_argument("sweep_snr: need at least one trial");
    if (snr_list_db.empty()) throw std::invalid_argument("sweep_snr: empty SNR list");

    dd::SubframeConfig whole = whole_frame_config(layout);
    SweepResult result;
    size_t n = static_cast<size_t>(trials);
    for (double snr : snr_list_db) {
        std::vector<double> el(n), tl(n), ek(n), tk(n), bl(n), btl(n), bk(n), btk(n);
        long long exact_count = 0;
        for (size_t t = 0; t < n; ++t) {
            std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t))));
            Scenario scen = draw_scenario(type, layout, tap_case, rng);
            TrialResult r = run_trial(layout, whole, scen, snr, carrier_hz, rng);
            el[t] = static_cast<double>(r.combined.delay_tap);
            ek[t] = static_cast<double>(r.combined.doppler_tap);
            tl[t] = r.truth_delay;
            tk[t] = r.truth_doppler;
            bl[t] = static_cast<double>(r.baseline_delay);
            bk[t] = static_cast<double>(r.baseline_doppler);
            btl[t] = r.truth_whole_delay;
            btk[t] = r.truth_whole_doppler;
            if (r.exact) ++exact_count;
        }
        SweepRow row;
        row.snr_db = snr;
        row.nmse_delay = nmse(el, tl);
        row.nmse_doppler = nmse(ek, tk);
        row.nmse_mean = 0.5 * (row.nmse_delay + row.nmse_doppler);
        row.mse_norm = 0.5 * (normalized_mse(el, tl) + normalized_mse(ek, tk));
        row.recovery_rate = static_cast<double>(exact_count) / static_cast<double>(trials);
        row.baseline_nmse_mean = 0.5 * (nmse(bl, btl) + nmse(bk, btk));
        row.trials = trials;
        result.rows.push_back(row);
    }
    return result;
}

AnalyticReport analytic_report(const frames::FrameLayout& layout,
                               const dd::SubframeConfig& whole, double carrier_hz) {
    whole.validate();
    AnalyticReport rep;

    frames::UnambiguousLimits lim = frames::unambiguous_limits(layout, carrier_hz);
    rep.proposed.range_res_m = kSpeedOfLight / (2.0 * layout.ref_bandwidth_hz());
    rep.proposed.velocity_res_mps =
        kSpeedOfLight / (2.0 * carrier_hz * layout.ref_duration_s());
    rep.proposed.delay_taps = lim.delay_taps;
    rep.proposed.doppler_taps = lim.doppler_taps;
    rep.proposed.max_range_m = lim.range_m;
    rep.proposed.max_velocity_mps = lim.velocity_mps;

    double b0 = whole.bandwidth_hz();
    double d0 = whole.duration_s();
    rep.whole_frame.range_res_m = kSpeedOfLight / (2.0 * b0);
    rep.whole_frame.velocity_res_mps = kSpeedOfLight / (2.0 * carrier_hz * d0);
    rep.whole_frame.delay_taps = whole.subcarriers;
    rep.whole_frame.doppler_taps = whole.slots;
    rep.whole_frame.max_range_m =
        kSpeedOfLight * static_cast<double>(whole.subcarriers) / (2.0 * b0);
    rep.whole_frame.max_velocity_mps =
        kSpeedOfLight * static_cast<double>(whole.slots) / (4.0 * carrier_hz * d0);
    return rep;
}

}  // namespace otfs::sim
