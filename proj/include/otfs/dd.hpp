// Delay-Doppler domain signal math: grid types, periodic sampling kernels,
// channel response synthesis (ideal pulses), unit conversions, noise injection.
#pragma once

#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

namespace dd {

class GridMismatchError : public std::invalid_argument {
public:
    explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// One OTFS subframe: a critically sampled delay-Doppler grid. The slot
// duration is 1/spacing_hz by construction, so duration * bandwidth = N * M.
struct SubframeConfig {
    int subcarriers = 0;        // delay bins (M)
    int slots = 0;              // Doppler bins (N)
    double spacing_hz = 0.0;    // subcarrier spacing
    int pilot_doppler = 0;      // pilot slot index, in [0, slots)
    int pilot_delay = 0;        // pilot subcarrier index, in [0, subcarriers)
    cplx pilot_amp{1.0, 0.0};

    double slot_s() const { return 1.0 / spacing_hz; }
    double bandwidth_hz() const { return subcarriers * spacing_hz; }
    double duration_s() const { return slots * slot_s(); }
    void validate() const;  // throws std::invalid_argument on bad dimensions/indices
};

// Single point target. Taps are dimensionless: physical delay/Doppler scaled
// by a reference bandwidth/duration (the grid they were measured against).
struct TargetParams {
    cplx gain{1.0, 0.0};
    double delay_tap = 0.0;    // tau * ref_bandwidth_hz, >= 0
    double doppler_tap = 0.0;  // nu * ref_duration_s, signed
    double ref_bandwidth_hz = 0.0;
    double ref_duration_s = 0.0;

    double delay_s() const { return delay_tap / ref_bandwidth_hz; }
    double doppler_hz() const { return doppler_tap / ref_duration_s; }
};

// Split of a physical delay/Doppler into whole grid periods plus an in-range
// remainder: tau = wraps*T + rem, rem in [0, T); same for Doppler vs spacing.
struct TapDecomposition {
    long long delay_wraps = 0;
    double delay_rem_s = 0.0;
    long long doppler_wraps = 0;
    double doppler_rem_hz = 0.0;
};

// Complex samples over one subframe, row-major: slot index k outer,
// subcarrier index l inner.
struct DDGrid {
    SubframeConfig cfg;
    std::vector<cplx> samples;

    static DDGrid zeros(const SubframeConfig& cfg);
    int slots() const { return cfg.slots; }
    int subcarriers() const { return cfg.subcarriers; }
    cplx& at(int k, int l) { return samples[static_cast<size_t>(k) * cfg.subcarriers + l]; }
    const cplx& at(int k, int l) const {
        return samples[static_cast<size_t>(k) * cfg.subcarriers + l];
    }
    void validate() const;  // GridMismatchError if samples do not match cfg dims
};

// Doppler-axis sampling kernel: (1/N) e^{-j pi x (N-1)/N} sin(pi x)/sin(pi x/N).
// Exact at integer x: +-1 when x is a multiple of N, 0 at other integers;
// near-singular arguments fall back to the direct geometric sum.
cplx sample_w_nu(int n, double x);

// Delay-axis twin with the opposite phase sign: conj(sample_w_nu(m, x)).
cplx sample_w_tau(int m, double x);

// Floor-convention split of physical (tau, nu) against one subframe's grid.
TapDecomposition decompose_taps(double tau_s, double nu_hz, const SubframeConfig& cfg);

// Channel gain as seen on this subframe's grid: the raw gain rotated by
// the phase exp(-j 2 pi k_hat * l_hat / (N M)), where k_hat and l_hat are
// the target taps re-normalized to this subframe and reduced into one grid
// period — reducing both keeps the full response exactly periodic in the
// true taps, not just in magnitude.
cplx effective_gain(const TargetParams& target, const SubframeConfig& cfg);

// Noiseless received grid: circular two-axis convolution of the tx grid with
// the target's sampling-kernel response. Taps are re-normalized to this
// subframe's bandwidth/duration and wrap periodically. Runs over nonzero tx
// entries and nonzero kernel taps only.
DDGrid dd_response(const DDGrid& tx, const TargetParams& target);

struct NormalizedTaps {
    double delay_tap = 0.0;
    double doppler_tap = 0.0;
};

// Mono-static round trip: tau = 2r/c, nu = 2 v f_c / c, scaled by (B, D).
NormalizedTaps taps_from_physical(double range_m, double speed_mps, double carrier_hz,
                                  double bandwidth_hz, double duration_s);

// Adds circular complex AWGN per sample with variance |pilot|^2 / 10^(snr/10).
// snr_db = +infinity returns the grid unchanged. Deterministic for a fixed
// generator state; draws unit normals and scales, so the same generator state
// yields the same noise shape at every SNR.
DDGrid add_awgn(const DDGrid& grid, double snr_db, std::mt19937_64& rng);

}  // namespace dd
}  // namespace otfs
