#include "otfs/dd.hpp"

#include <cmath>
#include <numbers>

namespace otfs::dd {

namespace {

constexpr double kPi = std::numbers::pi;

// Reduce x into [0, n) preserving the congruence class on a single bit
// pattern: the fractional part is split off exactly, so x and x + a*n reduce
// to identical doubles whenever both are exactly representable.
double reduce_mod(double x, int n) {
    double f = std::floor(x);
    double frac = x - f;  // exact for |x| within integer-representable range
    long long i = static_cast<long long>(f) % n;
    if (i < 0) i += n;
    return static_cast<double>(i) + frac;
}

bool is_integral(double x) { return x == std::floor(x) && std::abs(x) < 9.0e15; }

}  // namespace

void SubframeConfig::validate() const {
    if (subcarriers < 2 || slots < 2) {
        throw std::invalid_argument("subframe needs at least 2 subcarriers and 2 slots, got " +
                                    std::to_string(subcarriers) + "x" + std::to_string(slots));
    }
    if (!(spacing_hz > 0.0)) {
        throw std::invalid_argument("subcarrier spacing must be positive");
    }
    if (pilot_doppler < 0 || pilot_doppler >= slots || pilot_delay < 0 ||
        pilot_delay >= subcarriers) {
        throw std::invalid_argument("pilot index (" + std::to_string(pilot_doppler) + "," +
                                    std::to_string(pilot_delay) + ") outside grid");
    }
}

DDGrid DDGrid::zeros(const SubframeConfig& cfg) {
    cfg.validate();
    DDGrid g;
    g.cfg = cfg;
    g.samples.assign(static_cast<size_t>(cfg.slots) * cfg.subcarriers, cplx{0.0, 0.0});
    return g;
}

void DDGrid::validate() const {
    cfg.validate();
    if (samples.size() != static_cast<size_t>(cfg.slots) * cfg.subcarriers) {
        throw GridMismatchError("grid holds " + std::to_string(samples.size()) +
                                " samples but config says " + std::to_string(cfg.slots) + "x" +
                                std::to_string(cfg.subcarriers));
    }
}

cplx sample_w_nu(int n, double x) {
    if (n < 1) throw std::invalid_argument("sample_w_nu: n must be >= 1");
    if (is_integral(x)) {
        long long xi = static_cast<long long>(x);
        if (xi % n != 0) return {0.0, 0.0};
        // x = a*n: phase collapses to (-1)^(a*(n-1)), exactly unit magnitude
        long long a = xi / n;
        bool odd = (a % 2 != 0) && ((n - 1) % 2 != 0);
        return {odd ? -1.0 : 1.0, 0.0};
    }
    double s = std::sin(kPi * x / n);
    if (std::abs(s) < 1e-9) {
        // near a multiple of n: closed form is 0/0-unstable, sum directly
        cplx acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            double ph = -2.0 * kPi * i * x / n;
            acc += cplx{std::cos(ph), std::sin(ph)};
        }
        return acc / static_cast<double>(n);
    }
    double mag = std::sin(kPi * x) / (n * s);  // signed
    double ph = -kPi * x * (n - 1) / n;
    return cplx{mag * std::cos(ph), mag * std::sin(ph)};
}

cplx sample_w_tau(int m, double x) { return std::conj(sample_w_nu(m, x)); }

TapDecomposition decompose_taps(double tau_s, double nu_hz, const SubframeConfig& cfg) {
    cfg.validate();
    if (tau_s < 0.0) throw std::invalid_argument("decompose_taps: delay must be >= 0");
    TapDecomposition d;
    double t = cfg.slot_s();
    d.delay_wraps = static_cast<long long>(std::floor(tau_s / t));
    d.delay_rem_s = tau_s - static_cast<double>(d.delay_wraps) * t;
    if (d.delay_rem_s >= t) {  // 1-ulp rescue at exact-multiple boundaries
        d.delay_rem_s -= t;
        ++d.delay_wraps;
    }
    if (d.delay_rem_s < 0.0) {
        d.delay_rem_s += t;
        --d.delay_wraps;
    }
    double df = cfg.spacing_hz;
    d.doppler_wraps = static_cast<long long>(std::floor(nu_hz / df));
    d.doppler_rem_hz = nu_hz - static_cast<double>(d.doppler_wraps) * df;
    if (d.doppler_rem_hz >= df) {
        d.doppler_rem_hz -= df;
        ++d.doppler_wraps;
    }
    if (d.doppler_rem_hz < 0.0) {
        d.doppler_rem_hz += df;
        --d.doppler_wraps;
    }
    return d;
}

cplx effective_gain(const TargetParams& target, const SubframeConfig& cfg) {
    cfg.validate();
    // Both taps go through the same exact reduction as the response kernels:
    // shifting the true taps by whole periods must leave the phase (and thus
    // the received grid) unchanged, not merely the magnitude.
    double k_hat =
        reduce_mod(target.doppler_tap * (cfg.duration_s() / target.ref_duration_s), cfg.slots);
    double l_hat = reduce_mod(target.delay_tap * (cfg.bandwidth_hz() / target.ref_bandwidth_hz),
                              cfg.subcarriers);
    double ph = -2.0 * kPi * k_hat * l_hat / (static_cast<double>(cfg.slots) * cfg.subcarriers);
    return target.gain * cplx{std::cos(ph), std::sin(ph)};
}

DDGrid dd_response(const DDGrid& tx, const TargetParams& target) {
    tx.validate();
    if (!(target.ref_bandwidth_hz > 0.0) || !(target.ref_duration_s > 0.0)) {
        throw std::invalid_argument("dd_response: target reference bandwidth/duration unset");
    }
    const SubframeConfig& cfg = tx.cfg;
    const int n = cfg.slots;
    const int m = cfg.subcarriers;

    // Re-normalize taps to this subframe via the grid-scale ratio (exactly 1
    // for the reference subframe itself), then reduce into one period.
    double k_nu = reduce_mod(target.doppler_tap * (cfg.duration_s() / target.ref_duration_s), n);
    double l_tau = reduce_mod(target.delay_tap * (cfg.bandwidth_hz() / target.ref_bandwidth_hz), m);

    // One kernel sample per circular offset; exact zeros (integer taps) are
    // skipped in the convolution below.
    std::vector<cplx> kern_nu(n), kern_tau(m);
    std::vector<int> nz_nu, nz_tau;
    for (int d = 0; d < n; ++d) {
        kern_nu[d] = sample_w_nu(n, static_cast<double>(d) - k_nu);
        if (kern_nu[d] != cplx{0.0, 0.0}) nz_nu.push_back(d);
    }
    for (int e = 0; e < m; ++e) {
        kern_tau[e] = sample_w_tau(m, static_cast<double>(e) - l_tau);
        if (kern_tau[e] != cplx{0.0, 0.0}) nz_tau.push_back(e);
    }

    // Separable circular convolution: delay axis first, then Doppler axis.
    std::vector<std::vector<cplx>> rows(n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < m; ++l) {
            cplx v = tx.at(k, l);
            if (v == cplx{0.0, 0.0}) continue;
            if (rows[k].empty()) rows[k].assign(m, cplx{0.0, 0.0});
            for (int e : nz_tau) {
                int lo = l + e;
                if (lo >= m) lo -= m;
                rows[k][lo] += v * kern_tau[e];
            }
        }
    }
    DDGrid out = DDGrid::zeros(cfg);
    cplx h_eff = effective_gain(target, cfg);
    for (int k = 0; k < n; ++k) {
        if (rows[k].empty()) continue;
        for (int d : nz_nu) {
            int ko = k + d;
            if (ko >= n) ko -= n;
            cplx w = h_eff * kern_nu[d];
            for (int l = 0; l < m; ++l) {
                out.at(ko, l) += w * rows[k][l];
            }
        }
    }
    return out;
}

NormalizedTaps taps_from_physical(double range_m, double speed_mps, double carrier_hz,
                                  double bandwidth_hz, double duration_s) {
    if (range_m < 0.0) throw std::invalid_argument("taps_from_physical: range must be >= 0");
    NormalizedTaps t;
    t.delay_tap = (2.0 * range_m / kSpeedOfLight) * bandwidth_hz;
    t.doppler_tap = (2.0 * speed_mps * carrier_hz / kSpeedOfLight) * duration_s;
    return t;
}

DDGrid add_awgn(const DDGrid& grid, double snr_db, std::mt19937_64& rng) {
    grid.validate();
    if (std::isinf(snr_db) && snr_db > 0.0) return grid;
    double pilot_pow = std::norm(grid.cfg.pilot_amp);
    if (!(pilot_pow > 0.0)) {
        throw std::invalid_argument("add_awgn: pilot amplitude must be nonzero");
    }
    double var = pilot_pow / std::pow(10.0, snr_db / 10.0);
    double sigma = std::sqrt(var / 2.0);  // per real component
    std::normal_distribution<double> unit(0.0, 1.0);
    DDGrid out = grid;
    for (cplx& s : out.samples) {
        double re = unit(rng);
        double im = unit(rng);
        s += cplx{sigma * re, sigma * im};
    }
    return out;
}

}  // namespace otfs::dd
