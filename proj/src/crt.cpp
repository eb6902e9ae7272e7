#include "otfs/crt.hpp"

#include <numeric>

namespace otfs::crt {

ExtGcdResult ext_gcd(long long a, long long b) {
    if (a == 0 && b == 0) {
        throw std::domain_error("ext_gcd: gcd(0, 0) is undefined");
    }
    // Iterative extended Euclid on |a|, |b|; signs restored at the end.
    long long old_r = a < 0 ? -a : a, r = b < 0 ? -b : b;
    long long old_x = 1, x = 0;
    long long old_y = 0, y = 1;
    while (r != 0) {
        long long q = old_r / r;
        long long t = old_r - q * r; old_r = r; r = t;
        t = old_x - q * x; old_x = x; x = t;
        t = old_y - q * y; old_y = y; y = t;
    }
    if (a < 0) old_x = -old_x;
    if (b < 0) old_y = -old_y;
    return ExtGcdResult{old_r, old_x, old_y};
}

long long mod_inverse(long long a, long long m) {
    if (m < 2) {
        throw std::domain_error("mod_inverse: modulus must be >= 2");
    }
    long long r = a % m;
    if (r < 0) r += m;
    auto g = ext_gcd(r, m);
    if (g.gcd != 1) {
        throw NotCoprimeError("mod_inverse: " + std::to_string(a) + " and " +
                              std::to_string(m) + " are not co-prime (gcd " +
                              std::to_string(g.gcd) + ")");
    }
    long long inv = g.x % m;
    if (inv < 0) inv += m;
    return inv;  // in [1, m) since r != 0 when gcd(r, m) == 1 and m >= 2
}

long long crt_solve(const ResidueSystem& system) {
    if (system.entries.empty()) {
        throw std::invalid_argument("crt_solve: empty residue system");
    }
    for (const auto& e : system.entries) {
        if (e.modulus < 2) {
            throw std::invalid_argument("crt_solve: modulus " + std::to_string(e.modulus) +
                                        " must be >= 2");
        }
        if (e.value < 0 || e.value >= e.modulus) {
            throw std::invalid_argument("crt_solve: residue " + std::to_string(e.value) +
                                        " out of range for modulus " + std::to_string(e.modulus));
        }
    }
    // Fold congruences pairwise: maintain x ≡ acc (mod prod).
    __int128 acc = system.entries[0].value;
    __int128 prod = system.entries[0].modulus;
    for (size_t i = 1; i < system.entries.size(); ++i) {
        long long mi = system.entries[i].modulus;
        long long ri = system.entries[i].value;
        long long prod_mod_mi = static_cast<long long>(prod % mi);
        if (std::gcd(prod_mod_mi, mi) != 1) {
            // Identify an offending earlier modulus for the diagnostic.
            long long other = system.entries[0].modulus;
            for (size_t j = 0; j < i; ++j) {
                long long mj = system.entries[j].modulus;
                if (std::gcd(mj, mi) != 1) { other = mj; break; }
            }
            throw NotCoprimeError("crt_solve: moduli " + std::to_string(other) + " and " +
                                  std::to_string(mi) + " are not co-prime");
        }
        long long inv = mod_inverse(prod_mod_mi, mi);
        long long diff = (ri - static_cast<long long>(acc % mi)) % mi;
        if (diff < 0) diff += mi;
        __int128 t = (static_cast<__int128>(diff) * inv) % mi;
        acc = acc + prod * t;
        prod = prod * mi;
        if (prod > static_cast<__int128>(__LONG_LONG_MAX__)) {
            throw std::overflow_error("crt_solve: modulus product overflows 64 bits");
        }
    }
    return static_cast<long long>(acc);
}

long long to_centered(long long value, long long modulus_product) {
    if (modulus_product < 2 || value < 0 || value >= modulus_product) {
        throw std::invalid_argument("to_centered: value " + std::to_string(value) +
                                    " out of range for product " +
                                    std::to_string(modulus_product));
    }
    return 2 * value >= modulus_product ? value - modulus_product : value;
}

long long lcm_all(std::span<const long long> moduli) {
    if (moduli.empty()) {
        throw std::invalid_argument("lcm_all: empty modulus list");
    }
    __int128 acc = 1;
    for (long long m : moduli) {
        if (m < 1) {
            throw std::invalid_argument("lcm_all: modulus " + std::to_string(m) + " must be >= 1");
        }
        long long g = std::gcd(static_cast<long long>(acc % m), m);  // gcd(0, m) == m
        acc = acc / g * m;
        if (acc > static_cast<__int128>(__LONG_LONG_MAX__)) {
            throw std::overflow_error("lcm_all: result overflows 64 bits");
        }
    }
    return static_cast<long long>(acc);
}

}  // namespace otfs::crt
