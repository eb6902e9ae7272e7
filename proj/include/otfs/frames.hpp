// Co-prime multi-subframe layouts for the three detection types, with
// pilot/guard/data cell masks and unambiguous-limit computation.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/dd.hpp"

namespace otfs::frames {

class CoprimeViolationError : public std::invalid_argument {
public:
    explicit CoprimeViolationError(const std::string& what) : std::invalid_argument(what) {}
};
class BandwidthMismatchError : public std::invalid_argument {
public:
    explicit BandwidthMismatchError(const std::string& what) : std::invalid_argument(what) {}
};
class DurationMismatchError : public std::invalid_argument {
public:
    explicit DurationMismatchError(const std::string& what) : std::invalid_argument(what) {}
};
class GuardTooWideError : public std::invalid_argument {
public:
    explicit GuardTooWideError(const std::string& what) : std::invalid_argument(what) {}
};
class InsufficientDataError : public std::invalid_argument {
public:
    explicit InsufficientDataError(const std::string& what) : std::invalid_argument(what) {}
};

// Which single-frame limit the targets exceed.
enum class DetectionType { BothOutOfRange = 1, DelayOutOfRange = 2, DopplerOutOfRange = 3 };

enum class CellKind : std::uint8_t { Pilot, Guard, Data };

struct CellMask {
    int slots = 0;
    int subcarriers = 0;
    std::vector<CellKind> cells;

    CellKind at(int k, int l) const { return cells[static_cast<size_t>(k) * subcarriers + l]; }
    CellKind& at(int k, int l) { return cells[static_cast<size_t>(k) * subcarriers + l]; }
    long long count(CellKind kind) const;
};

// Largest in-range tap magnitudes the guard bands are sized for.
struct GuardSpec {
    int max_doppler_tap = 0;  // Doppler guard sizing (types 2); taps satisfy |k| <= this
    int max_delay_tap = 0;    // delay guard sizing (type 3); taps satisfy 0 <= l <= this
};

struct FrameLayout {
    std::vector<dd::SubframeConfig> subframes;
    DetectionType type = DetectionType::BothOutOfRange;
    std::vector<std::size_t> delay_pair;    // subframes whose delay residues are combined
    std::vector<std::size_t> doppler_pair;  // subframes whose Doppler residues are combined
    GuardSpec guard;
    std::vector<CellMask> masks;  // one per subframe

    std::vector<long long> delay_moduli() const;    // subcarrier counts over delay_pair
    std::vector<long long> doppler_moduli() const;  // slot counts over doppler_pair
    double ref_bandwidth_hz() const;  // bandwidth the combined delay tap is normalized to
    double ref_duration_s() const;    // duration the combined Doppler tap is normalized to
};

// Relative tolerance for treating two subframe bandwidths/durations as equal
// (absorbs rounding of hand-entered subcarrier spacings).
inline constexpr double kPairMatchTol = 1e-4;

// Both axes out of range: pilot-only subframes, everything else guard.
// Needs >= 2 subframes, an equal-bandwidth pair with co-prime subcarrier
// counts and an equal-duration pair with co-prime slot counts; the first
// valid pair (index order) is selected for each axis.
FrameLayout build_type1(const std::vector<dd::SubframeConfig>& subframes);

// Delay out of range, Doppler in range: equal bandwidth and pairwise
// co-prime subcarrier counts across all subframes; a cyclic Doppler guard
// band of half-width 2*max_doppler_tap around the pilot row keeps data and
// pilot responses separated. Requires max_doppler_tap < min(slots)/4.
FrameLayout build_type2(const std::vector<dd::SubframeConfig>& subframes, int max_doppler_tap);

// Doppler out of range, delay in range: equal duration and pairwise co-prime
// slot counts; a cyclic delay guard band of half-width max_delay_tap around
// the pilot column. Requires max_delay_tap < min(subcarriers)/2.
FrameLayout build_type3(const std::vector<dd::SubframeConfig>& subframes, int max_delay_tap);

// Per-subframe transmit grids: pilot symbol at the pilot cell, zeros in
// guard cells, the supplied unit-modulus symbols filling data cells in
// row-major order (slot outer, subcarrier inner), consumed across subframes
// in layout order. Throws InsufficientDataError if the stream runs dry.
std::vector<dd::DDGrid> assemble_tx(const FrameLayout& layout,
                                    const std::vector<cplx>& data_symbols);

struct UnambiguousLimits {
    long long delay_taps = 0;    // LCM of delay-pair subcarrier counts
    long long doppler_taps = 0;  // LCM of doppler-pair slot counts
    double range_m = 0.0;        // c * delay_taps / (2B)
    double velocity_mps = 0.0;   // one-sided: c * doppler_taps / (4 f_c D)
};

UnambiguousLimits unambiguous_limits(const FrameLayout& layout, double carrier_hz);

}  // namespace otfs::frames
