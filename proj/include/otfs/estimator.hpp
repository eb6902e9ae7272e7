// Peak-based per-subframe residue estimation and cross-frame CRT combination.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/dd.hpp"
#include "otfs/frames.hpp"

namespace otfs::est {

class EmptyGridError : public std::invalid_argument {
public:
    explicit EmptyGridError(const std::string& what) : std::invalid_argument(what) {}
};

// Pilot-relative residues of the strongest cell: doppler_residue in
// [0, slots), delay_residue in [0, subcarriers).
struct SubframeEstimate {
    long long doppler_residue = 0;
    long long delay_residue = 0;
    double peak_mag = 0.0;
};

// Cross-frame result: delay_tap in [0, LCM(delay moduli)), doppler_tap
// centered into the signed unambiguous interval.
struct CombinedEstimate {
    long long delay_tap = 0;
    long long doppler_tap = 0;
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

// Argmax of |rx| over the full grid; ties resolve to the smallest slot index,
// then the smallest subcarrier index. Residues are relative to the config's
// pilot cell. Throws EmptyGridError on a sample-less grid.
SubframeEstimate estimate_subframe(const dd::DDGrid& rx);

// Same, but cells the mask classifies as Data are excluded from the search.
SubframeEstimate estimate_subframe(const dd::DDGrid& rx, const frames::CellMask& mask);

// Classic single-frame baseline: identical mechanics on the whole-frame grid;
// residues are inherently modulo that grid's dimensions.
SubframeEstimate whole_frame_estimate(const dd::DDGrid& rx);

// CRT over the delay residues; result in [0, LCM(moduli)).
long long combine_delay(const std::vector<SubframeEstimate>& estimates,
                        const std::vector<long long>& moduli);

// CRT over the Doppler residues, mapped to the centered signed interval.
long long combine_doppler(const std::vector<SubframeEstimate>& estimates,
                          const std::vector<long long>& moduli);

struct PhysicalEstimate {
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

// Mono-static round-trip conversion: range = c*l/(2B), velocity = c*k/(2 f_c D).
PhysicalEstimate to_physical(long long delay_tap, long long doppler_tap, double bandwidth_hz,
                             double duration_s, double carrier_hz);

// Full combination for a layout: delay CRT over its delay pair, Doppler CRT
// over its Doppler pair, plus physical conversion at the layout's references.
CombinedEstimate combine(const frames::FrameLayout& layout,
                         const std::vector<SubframeEstimate>& per_subframe, double carrier_hz);

}  // namespace otfs::est
