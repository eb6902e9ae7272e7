#include "otfs/frames.hpp"

#include <cmath>
#include <numeric>
#include <span>

#include "otfs/crt.hpp"

namespace otfs::frames {

namespace {

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= kPairMatchTol * std::max(std::abs(a), std::abs(b));
}

int cyclic_dist(int a, int b, int n) {
    int d = (a - b) % n;
    if (d < 0) d += n;
    return std::min(d, n - d);
}

void validate_subframes(const std::vector<dd::SubframeConfig>& subs, size_t min_count) {
    if (subs.size() < min_count) {
        throw std::invalid_argument("layout needs at least " + std::to_string(min_count) +
                                    " subframes, got " + std::to_string(subs.size()));
    }
    for (const auto& s : subs) s.validate();
}

CellMask guard_only_mask(const dd::SubframeConfig& c) {
    CellMask m;
    m.slots = c.slots;
    m.subcarriers = c.subcarriers;
    m.cells.assign(static_cast<size_t>(c.slots) * c.subcarriers, CellKind::Guard);
    m.at(c.pilot_doppler, c.pilot_delay) = CellKind::Pilot;
    return m;
}

void require_coprime_subcarriers(const std::vector<dd::SubframeConfig>& subs) {
    for (size_t i = 0; i < subs.size(); ++i) {
        for (size_t j = i + 1; j < subs.size(); ++j) {
            if (!nearly_equal(subs[i].bandwidth_hz(), subs[j].bandwidth_hz())) {
                throw BandwidthMismatchError(
                    "subframes " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                    " differ in bandwidth (" + std::to_string(subs[i].bandwidth_hz()) + " vs " +
                    std::to_string(subs[j].bandwidth_hz()) + " Hz)");
            }
            long long g = std::gcd(subs[i].subcarriers, subs[j].subcarriers);
            if (g != 1) {
                throw CoprimeViolationError("subcarrier counts " +
                                            std::to_string(subs[i].subcarriers) + " and " +
                                            std::to_string(subs[j].subcarriers) +
                                            " are not co-prime (gcd " + std::to_string(g) + ")");
            }
        }
    }
}

void require_coprime_slots(const std::vector<dd::SubframeConfig>& subs) {
    for (size_t i = 0; i < subs.size(); ++i) {
        for (size_t j = i + 1; j < subs.size(); ++j) {
            if (!nearly_equal(subs[i].duration_s(), subs[j].duration_s())) {
                throw DurationMismatchError(
                    "subframes " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                    " differ in duration (" + std::to_string(subs[i].duration_s()) + " vs " +
                    std::to_string(subs[j].duration_s()) + " s)");
            }
            long long g = std::gcd(subs[i].slots, subs[j].slots);
            if (g != 1) {
                throw CoprimeViolationError("slot counts " + std::to_string(subs[i].slots) +
                                            " and " + std::to_string(subs[j].slots) +
                                            " are not co-prime (gcd " + std::to_string(g) + ")");
            }
        }
    }
}

}  // namespace

long long CellMask::count(CellKind kind) const {
    long long n = 0;
    for (CellKind c : cells) {
        if (c == kind) ++n;
    }
    return n;
}

std::vector<long long> FrameLayout::delay_moduli() const {
    std::vector<long long> m;
    for (size_t i : delay_pair) m.push_back(subframes[i].subcarriers);
    return m;
}

std::vector<long long> FrameLayout::doppler_moduli() const {
    std::vector<long long> m;
    for (size_t i : doppler_pair) m.push_back(subframes[i].slots);
    return m;
}

double FrameLayout::ref_bandwidth_hz() const {
    return subframes[delay_pair.front()].bandwidth_hz();
}

double FrameLayout::ref_duration_s() const {
    return subframes[doppler_pair.front()].duration_s();
}

FrameLayout build_type1(const std::vector<dd::SubframeConfig>& subframes) {
    validate_subframes(subframes, 2);

    // First pair (index order) sharing a bandwidth with co-prime subcarrier
    // counts; remember the first bandwidth match for the error diagnostic.
    std::vector<std::size_t> delay_pair;
    int bw_match_a = -1, bw_match_b = -1;
    for (size_t i = 0; i < subframes.size() && delay_pair.empty(); ++i) {
        for (size_t j = i + 1; j < subframes.size(); ++j) {
            if (!nearly_equal(subframes[i].bandwidth_hz(), subframes[j].bandwidth_hz())) continue;
            if (bw_match_a < 0) {
                bw_match_a = subframes[i].subcarriers;
                bw_match_b = subframes[j].subcarriers;
            }
            if (std::gcd(subframes[i].subcarriers, subframes[j].subcarriers) == 1) {
                delay_pair = {i, j};
                break;
            }
        }
    }
    if (delay_pair.empty()) {
        if (bw_match_a < 0) {
            throw BandwidthMismatchError("no two subframes share a bandwidth for delay pairing");
        }
        throw CoprimeViolationError("subcarrier counts " + std::to_string(bw_match_a) + " and " +
                                    std::to_string(bw_match_b) + " are not co-prime");
    }

    std::vector<std::size_t> doppler_pair;
    int dur_match_a = -1, dur_match_b = -1;
    for (size_t i = 0; i < subframes.size() && doppler_pair.empty(); ++i) {
        for (size_t j = i + 1; j < subframes.size(); ++j) {
            if (!nearly_equal(subframes[i].duration_s(), subframes[j].duration_s())) continue;
            if (dur_match_a < 0) {
                dur_match_a = subframes[i].slots;
                dur_match_b = subframes[j].slots;
            }
            if (std::gcd(subframes[i].slots, subframes[j].slots) == 1) {
                doppler_pair = {i, j};
                break;
            }
        }
    }
    if (doppler_pair.empty()) {
        if (dur_match_a < 0) {
            throw DurationMismatchError("no two subframes share a duration for Doppler pairing");
        }
        throw CoprimeViolationError("slot counts " + std::to_string(dur_match_a) + " and " +
                                    std::to_string(dur_match_b) + " are not co-prime");
    }

    FrameLayout layout;
    layout.subframes = subframes;
    layout.type = DetectionType::BothOutOfRange;
    layout.delay_pair = delay_pair;
    layout.doppler_pair = doppler_pair;
    for (const auto& s : subframes) layout.masks.push_back(guard_only_mask(s));
    return layout;
}

FrameLayout build_type2(const std::vector<dd::SubframeConfig>& subframes, int max_doppler_tap) {
    validate_subframes(subframes, 1);
    require_coprime_subcarriers(subframes);
    if (max_doppler_tap < 0) {
        throw std::invalid_argument("max_doppler_tap must be >= 0");
    }
    int min_slots = subframes.front().slots;
    for (const auto& s : subframes) min_slots = std::min(min_slots, s.slots);
    if (4LL * max_doppler_tap >= min_slots) {
        throw GuardTooWideError("Doppler guard needs 4*max_doppler_tap < min slot count (" +
                                std::to_string(4 * max_doppler_tap) + " >= " +
                                std::to_string(min_slots) + ")");
    }

    FrameLayout layout;
    layout.subframes = subframes;
    layout.type = DetectionType::DelayOutOfRange;
    layout.delay_pair.resize(subframes.size());
    for (size_t i = 0; i < subframes.size(); ++i) layout.delay_pair[i] = i;
    layout.doppler_pair = {0};  // Doppler is in range; one frame's residue suffices
    layout.guard.max_doppler_tap = max_doppler_tap;
    for (const auto& s : subframes) {
        CellMask m;
        m.slots = s.slots;
        m.subcarriers = s.subcarriers;
        m.cells.assign(static_cast<size_t>(s.slots) * s.subcarriers, CellKind::Data);
        for (int k = 0; k < s.slots; ++k) {
            if (cyclic_dist(k, s.pilot_doppler, s.slots) > 2 * max_doppler_tap) continue;
            for (int l = 0; l < s.subcarriers; ++l) m.at(k, l) = CellKind::Guard;
        }
        m.at(s.pilot_doppler, s.pilot_delay) = CellKind::Pilot;
        layout.masks.push_back(std::move(m));
    }
    return layout;
}

FrameLayout build_type3(const std::vector<dd::SubframeConfig>& subframes, int max_delay_tap) {
    validate_subframes(subframes, 1);
    require_coprime_slots(subframes);
    if (max_delay_tap < 0) {
        throw std::invalid_argument("max_delay_tap must be >= 0");
    }
    int min_sub = subframes.front().subcarriers;
    for (const auto& s : subframes) min_sub = std::min(min_sub, s.subcarriers);
    if (2LL * max_delay_tap >= min_sub) {
        throw GuardTooWideError("delay guard needs 2*max_delay_tap < min subcarrier count (" +
                                std::to_string(2 * max_delay_tap) + " >= " +
                                std::to_string(min_sub) + ")");
    }

    FrameLayout layout;
    layout.subframes = subframes;
    layout.type = DetectionType::DopplerOutOfRange;
    layout.delay_pair = {0};  // delay is in range
    layout.doppler_pair.resize(subframes.size());
    for (size_t i = 0; i < subframes.size(); ++i) layout.doppler_pair[i] = i;
    layout.guard.max_delay_tap = max_delay_tap;
    for (const auto& s : subframes) {
        CellMask m;
        m.slots = s.slots;
        m.subcarriers = s.subcarriers;
        m.cells.assign(static_cast<size_t>(s.slots) * s.subcarriers, CellKind::Data);
        for (int l = 0; l < s.subcarriers; ++l) {
            if (cyclic_dist(l, s.pilot_delay, s.subcarriers) > max_delay_tap) continue;
            for (int k = 0; k < s.slots; ++k) m.at(k, l) = CellKind::Guard;
        }
        m.at(s.pilot_doppler, s.pilot_delay) = CellKind::Pilot;
        layout.masks.push_back(std::move(m));
    }
    return layout;
}

std::vector<dd::DDGrid> assemble_tx(const FrameLayout& layout,
                                    const std::vector<cplx>& data_symbols) {
    for (const cplx& s : data_symbols) {
        if (std::abs(std::abs(s) - 1.0) > 1e-6) {
            throw std::invalid_argument("assemble_tx: data symbols must be unit-modulus");
        }
    }
    std::vector<dd::DDGrid> grids;
    size_t next = 0;
    for (size_t i = 0; i < layout.subframes.size(); ++i) {
        const auto& cfg = layout.subframes[i];
        const auto& mask = layout.masks[i];
        dd::DDGrid g = dd::DDGrid::zeros(cfg);
        for (int k = 0; k < cfg.slots; ++k) {
            for (int l = 0; l < cfg.subcarriers; ++l) {
                switch (mask.at(k, l)) {
                    case CellKind::Pilot:
                        g.at(k, l) = cfg.pilot_amp;
                        break;
                    case CellKind::Data:
                        if (next >= data_symbols.size()) {
                            throw InsufficientDataError(
                                "assemble_tx: ran out of data symbols at subframe " +
                                std::to_string(i + 1) + " cell (" + std::to_string(k) + "," +
                                std::to_string(l) + ")");
                        }
                        g.at(k, l) = data_symbols[next++];
                        break;
                    case CellKind::Guard:
                        break;
                }
            }
        }
        grids.push_back(std::move(g));
    }
    return grids;
}

UnambiguousLimits unambiguous_limits(const FrameLayout& layout, double carrier_hz) {
    if (!(carrier_hz > 0.0)) {
        throw std::invalid_argument("unambiguous_limits: carrier frequency must be positive");
    }
    auto dm = layout.delay_moduli();
    auto nm = layout.doppler_moduli();
    UnambiguousLimits lim;
    lim.delay_taps = crt::lcm_all(std::span<const long long>(dm));
    lim.doppler_taps = crt::lcm_all(std::span<const long long>(nm));
    lim.range_m = kSpeedOfLight * static_cast<double>(lim.delay_taps) /
                  (2.0 * layout.ref_bandwidth_hz());
    lim.velocity_mps = kSpeedOfLight * static_cast<double>(lim.doppler_taps) /
                       (4.0 * carrier_hz * layout.ref_duration_s());
    return lim;
}

}  // namespace otfs::frames
