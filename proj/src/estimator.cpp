#include "otfs/estimator.hpp"

#include <cmath>
#include <span>

#include "otfs/crt.hpp"

namespace otfs::est {

namespace {

SubframeEstimate peak_search(const dd::DDGrid& rx, const frames::CellMask* mask) {
    if (rx.samples.empty()) {
        throw EmptyGridError("estimate: received grid holds no samples");
    }
    rx.validate();
    if (mask != nullptr &&
        (mask->slots != rx.cfg.slots || mask->subcarriers != rx.cfg.subcarriers)) {
        throw dd::GridMismatchError("estimate: mask dimensions disagree with grid");
    }
    int best_k = -1, best_l = -1;
    double best = -1.0;
    for (int k = 0; k < rx.cfg.slots; ++k) {
        for (int l = 0; l < rx.cfg.subcarriers; ++l) {
            if (mask != nullptr && mask->at(k, l) == frames::CellKind::Data) continue;
            double p = std::norm(rx.at(k, l));
            if (p > best) {  // strict: first hit wins ties (smallest k, then l)
                best = p;
                best_k = k;
                best_l = l;
            }
        }
    }
    SubframeEstimate e;
    e.doppler_residue = ((best_k - rx.cfg.pilot_doppler) % rx.cfg.slots + rx.cfg.slots) %
                        rx.cfg.slots;
    e.delay_residue = ((best_l - rx.cfg.pilot_delay) % rx.cfg.subcarriers + rx.cfg.subcarriers) %
                      rx.cfg.subcarriers;
    e.peak_mag = std::sqrt(best);
    return e;
}

crt::ResidueSystem residue_system(const std::vector<long long>& values,
                                  const std::vector<long long>& moduli) {
    crt::ResidueSystem sys;
    for (size_t i = 0; i < values.size(); ++i) {
        sys.entries.push_back({values[i], moduli[i]});
    }
    return sys;
}

}  // namespace

SubframeEstimate estimate_subframe(const dd::DDGrid& rx) { return peak_search(rx, nullptr); }

SubframeEstimate estimate_subframe(const dd::DDGrid& rx, const frames::CellMask& mask) {
    return peak_search(rx, &mask);
}

SubframeEstimate whole_frame_estimate(const dd::DDGrid& rx) { return peak_search(rx, nullptr); }

long long combine_delay(const std::vector<SubframeEstimate>& estimates,
                        const std::vector<long long>& moduli) {
    if (estimates.size() != moduli.size() || estimates.empty()) {
        throw std::invalid_argument("combine_delay: estimate/modulus count mismatch");
    }
    std::vector<long long> residues;
    for (const auto& e : estimates) residues.push_back(e.delay_residue);
    return crt::crt_solve(residue_system(residues, moduli));
}

long long combine_doppler(const std::vector<SubframeEstimate>& estimates,
                          const std::vector<long long>& moduli) {
    if (estimates.size() != moduli.size() || estimates.empty()) {
        throw std::invalid_argument("combine_doppler: estimate/modulus count mismatch");
    }
    std::vector<long long> residues;
    for (const auto& e : estimates) residues.push_back(e.doppler_residue);
    long long wrapped = crt::crt_solve(residue_system(residues, moduli));
    return crt::to_centered(wrapped, crt::lcm_all(std::span<const long long>(moduli)));
}

PhysicalEstimate to_physical(long long delay_tap, long long doppler_tap, double bandwidth_hz,
                             double duration_s, double carrier_hz) {
    PhysicalEstimate p;
    p.range_m = kSpeedOfLight * static_cast<double>(delay_tap) / (2.0 * bandwidth_hz);
    p.velocity_mps =
        kSpeedOfLight * static_cast<double>(doppler_tap) / (2.0 * carrier_hz * duration_s);
    return p;
}

CombinedEstimate combine(const frames::FrameLayout& layout,
                         const std::vector<SubframeEstimate>& per_subframe, double carrier_hz) {
    if (per_subframe.size() != layout.subframes.size()) {
        throw std::invalid_argument("combine: need one estimate per subframe");
    }
    std::vector<SubframeEstimate> delay_est, doppler_est;
    for (size_t i : layout.delay_pair) delay_est.push_back(per_subframe[i]);
    for (size_t i : layout.doppler_pair) doppler_est.push_back(per_subframe[i]);

    CombinedEstimate c;
    c.delay_tap = combine_delay(delay_est, layout.delay_moduli());
    c.doppler_tap = combine_doppler(doppler_est, layout.doppler_moduli());
    auto phys = to_physical(c.delay_tap, c.doppler_tap, layout.ref_bandwidth_hz(),
                            layout.ref_duration_s(), carrier_hz);
    c.range_m = phys.range_m;
    c.velocity_mps = phys.velocity_mps;
    return c;
}

}  // namespace otfs::est
