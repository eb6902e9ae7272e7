#include "otfs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otfs/harness.hpp"

namespace otfs::cfg {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const std::string& v, int line, const std::string& key) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(line, key, "expected a number, got '" + v + "'");
}

// Number with an optional unit suffix; scales to SI (Hz or seconds).
double parse_quantity(const std::string& v, int line, const std::string& key) {
    size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, key, "expected a quantity, got '" + v + "'");
    }
    std::string unit = lower(trim(v.substr(pos)));
    if (unit.empty() || unit == "hz") return x;
    if (unit == "khz") return x * 1e3;
    if (unit == "mhz") return x * 1e6;
    if (unit == "ghz") return x * 1e9;
    if (unit == "s") return x;
    if (unit == "ms") return x * 1e-3;
    if (unit == "us") return x * 1e-6;
    throw ConfigError(line, key, "unknown unit '" + unit + "'");
}

long long parse_int(const std::string& v, int line, const std::string& key) {
    try {
        size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(line, key, "expected an integer, got '" + v + "'");
}

std::uint64_t parse_seed(const std::string& v, int line, const std::string& key) {
    std::string t = trim(v);
    if (!t.empty() && t[0] != '-') {
        try {
            size_t pos = 0;
            unsigned long long x = std::stoull(t, &pos);
            if (trim(t.substr(pos)).empty()) return x;
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(line, key, "expected an unsigned 64-bit integer, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(line, key, "empty list entry");
        out.push_back(parse_number(item, line, key));
    }
    if (out.empty()) throw ConfigError(line, key, "empty list");
    return out;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    c.snr_db.clear();
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    int section = -1;  // -1: globals; otherwise index into c.subframes
    bool have_type = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (lower(s) != "[subframe]") {
                throw ConfigError(line, "", "unknown section '" + s + "'");
            }
            c.subframes.emplace_back();
            section = static_cast<int>(c.subframes.size()) - 1;
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line, "", "expected 'key = value', got '" + s + "'");
        }
        std::string key = lower(trim(s.substr(0, eq)));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "", "missing key before '='");
        if (val.empty()) throw ConfigError(line, key, "missing value");

        if (section < 0) {
            if (key == "type") {
                long long t = parse_int(val, line, key);
                if (t < 1 || t > 3) throw ConfigError(line, key, "type must be 1, 2 or 3");
                c.type = static_cast<int>(t);
                have_type = true;
            } else if (key == "case") {
                long long t = parse_int(val, line, key);
                if (t < 1 || t > 3) throw ConfigError(line, key, "case must be 1, 2 or 3");
                c.tap_case = static_cast<int>(t);
            } else if (key == "carrier") {
                c.carrier_hz = parse_quantity(val, line, key);
                if (!(c.carrier_hz > 0)) throw ConfigError(line, key, "carrier must be positive");
            } else if (key == "trials") {
                c.trials = parse_int(val, line, key);
                if (c.trials < 1) throw ConfigError(line, key, "trials must be >= 1");
            } else if (key == "seed") {
                c.seed = parse_seed(val, line, key);
            } else if (key == "snr_db") {
                c.snr_db = parse_list(val, line, key);
            } else if (key == "out") {
                c.out_path = val;
            } else if (key == "guard_doppler") {
                long long g = parse_int(val, line, key);
                if (g < 0) throw ConfigError(line, key, "guard sizing must be >= 0");
                c.guard_doppler = static_cast<int>(g);
            } else if (key == "guard_delay") {
                long long g = parse_int(val, line, key);
                if (g < 0) throw ConfigError(line, key, "guard sizing must be >= 0");
                c.guard_delay = static_cast<int>(g);
            } else if (key == "reference_max_range_km") {
                c.reference_max_range_km = parse_number(val, line, key);
            } else {
                throw ConfigError(line, key, "unknown field");
            }
        } else {
            SubframeSpec& sub = c.subframes[static_cast<size_t>(section)];
            if (key == "subcarriers") {
                long long m = parse_int(val, line, key);
                if (m < 2) throw ConfigError(line, key, "need at least 2 subcarriers");
                sub.subcarriers = static_cast<int>(m);
            } else if (key == "slots") {
                long long n = parse_int(val, line, key);
                if (n < 2) throw ConfigError(line, key, "need at least 2 slots");
                sub.slots = static_cast<int>(n);
            } else if (key == "spacing") {
                sub.spacing_hz = parse_quantity(val, line, key);
                if (!(sub.spacing_hz > 0)) {
                    throw ConfigError(line, key, "spacing must be positive");
                }
            } else if (key == "pilot_amp") {
                double a = parse_number(val, line, key);
                if (!(a > 0)) throw ConfigError(line, key, "pilot amplitude must be positive");
                sub.pilot_amp = a;
            } else {
                throw ConfigError(line, key, "unknown subframe field");
            }
        }
    }
    if (!have_type) throw ConfigError(line, "type", "missing detection type");
    if (c.subframes.empty()) throw ConfigError(line, "subframe", "no [subframe] sections");
    for (size_t i = 0; i < c.subframes.size(); ++i) {
        const SubframeSpec& sub = c.subframes[i];
        if (sub.subcarriers == 0 || sub.slots == 0 || sub.spacing_hz == 0.0) {
            throw ConfigError(line, "subframe",
                              "subframe " + std::to_string(i + 1) +
                                  " is missing subcarriers, slots or spacing");
        }
    }
    if (c.snr_db.empty()) throw ConfigError(line, "snr_db", "missing SNR list");
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_config_text(const RunConfig& c) {
    std::string out;
    out += "type = " + std::to_string(c.type) + "\n";
    out += "case = " + std::to_string(c.tap_case) + "\n";
    out += "carrier = " + fmt_double(c.carrier_hz) + " hz\n";
    out += "trials = " + std::to_string(c.trials) + "\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "snr_db = ";
    for (size_t i = 0; i < c.snr_db.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(c.snr_db[i]);
    }
    out += "\n";
    out += "out = " + c.out_path + "\n";
    out += "guard_doppler = " + std::to_string(c.guard_doppler) + "\n";
    out += "guard_delay = " + std::to_string(c.guard_delay) + "\n";
    if (c.reference_max_range_km) {
        out += "reference_max_range_km = " + fmt_double(*c.reference_max_range_km) + "\n";
    }
    for (const SubframeSpec& s : c.subframes) {
        out += "\n[subframe]\n";
        out += "subcarriers = " + std::to_string(s.subcarriers) + "\n";
        out += "slots = " + std::to_string(s.slots) + "\n";
        out += "spacing = " + fmt_double(s.spacing_hz) + " hz\n";
        if (s.pilot_amp) out += "pilot_amp = " + fmt_double(*s.pilot_amp) + "\n";
    }
    return out;
}

RunConfig preset(const std::string& name, int type) {
    if (type < 1 || type > 3) {
        throw std::invalid_argument("preset: type must be 1, 2 or 3");
    }
    RunConfig c;
    c.type = type;
    c.tap_case = 1;
    c.trials = 1000;
    c.seed = 1;
    c.out_path = "sweep.csv";
    c.carrier_hz = 24.0e9;
    if (name == "desk") {
        c.snr_db = {-30, -25, -20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30};
        // Type 1: equal-bandwidth pair (8,7 subcarriers) and equal-duration
        // pair (8,7 slots) around an 8x8 anchor at 30 kHz spacing.
        SubframeSpec f1{8, 8, 30000.0, {}};
        SubframeSpec f2{7, 9, 240000.0 / 7.0, {}};
        SubframeSpec f3{9, 7, 26250.0, {}};
        // Types 2/3: the balanced pair 8x7 / 7x8 shares bandwidth AND
        // duration (equal slot-subcarrier products), so integer reference
        // taps stay integer on every subframe and the guard bands contain
        // the pilot response exactly.
        SubframeSpec g1{8, 7, 30000.0, {}};
        SubframeSpec g2{7, 8, 240000.0 / 7.0, {}};
        switch (type) {
            case 1:
                c.subframes = {f1, f2, f3};
                break;
            case 2:
                c.subframes = {g1, g2};
                c.guard_doppler = 1;
                break;
            case 3:
                c.subframes = {g1, g2};
                c.guard_delay = 3;
                break;
        }
        return c;
    }
    if (name == "table3") {
        c.snr_db = {-40, -35, -30, -25, -20, -15, -10, -5, 0};
        // 7.68 MHz total bandwidth at 24 GHz; co-prime 256/255 subcarriers
        // for the delay axis, 32/31 slots for the Doppler axis.
        SubframeSpec f1{256, 32, 30000.0, {}};
        SubframeSpec f2{255, 32, 7.68e6 / 255.0, {}};
        SubframeSpec f3{264, 31, 29062.5, {}};
        switch (type) {
            case 1:
                c.subframes = {f1, f2, f3};
                c.reference_max_range_km = 127.5;
                break;
            case 2:
                c.subframes = {f1, f2};
                c.guard_doppler = 7;
                break;
            case 3:
                c.subframes = {f1, f3};
                c.guard_delay = 64;
                break;
        }
        return c;
    }
    throw std::invalid_argument("preset: unknown preset '" + name + "'");
}

BuiltLayout build_layout(const RunConfig& c) {
    if (c.subframes.empty()) {
        throw std::invalid_argument("build_layout: no subframes configured");
    }
    std::vector<dd::SubframeConfig> subs;
    for (const SubframeSpec& spec : c.subframes) {
        dd::SubframeConfig s;
        s.subcarriers = spec.subcarriers;
        s.slots = spec.slots;
        s.spacing_hz = spec.spacing_hz;
        s.pilot_doppler = s.slots / 2;
        s.pilot_delay = s.subcarriers / 2;
        s.pilot_amp = cplx{1.0, 0.0};
        s.validate();
        subs.push_back(s);
    }
    frames::FrameLayout layout;
    switch (c.type) {
        case 1:
            layout = frames::build_type1(subs);
            break;
        case 2:
            layout = frames::build_type2(subs, c.guard_doppler);
            break;
        case 3:
            layout = frames::build_type3(subs, c.guard_delay);
            break;
        default:
            throw std::invalid_argument("build_layout: type must be 1, 2 or 3");
    }
    // Default pilot amplitude: equal pilot/data power split per subframe
    // (pilot-only frames keep a unit pilot).
    for (size_t i = 0; i < layout.subframes.size(); ++i) {
        double amp;
        if (c.subframes[i].pilot_amp) {
            amp = *c.subframes[i].pilot_amp;
        } else {
            long long data = layout.masks[i].count(frames::CellKind::Data);
            amp = std::sqrt(static_cast<double>(std::max(1LL, data)));
        }
        layout.subframes[i].pilot_amp = cplx{amp, 0.0};
    }
    dd::SubframeConfig whole = sim::whole_frame_config(layout);
    return BuiltLayout{std::move(layout), whole};
}

}  // namespace otfs::cfg
