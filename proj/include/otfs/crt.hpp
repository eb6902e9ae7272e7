// Modular arithmetic and Chinese-remainder reconstruction over co-prime moduli.
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs::crt {

// Thrown when an operation requires co-prime arguments and they are not.
class NotCoprimeError : public std::domain_error {
public:
    explicit NotCoprimeError(const std::string& what) : std::domain_error(what) {}
};

// One congruence: x ≡ value (mod modulus), 0 <= value < modulus, modulus >= 2.
struct Residue {
    long long value = 0;
    long long modulus = 1;
};

struct ResidueSystem {
    std::vector<Residue> entries;
};

struct ExtGcdResult {
    long long gcd = 0;  // always > 0 for nonzero inputs
    long long x = 0;    // a*x + b*y == gcd
    long long y = 0;
};

// Extended Euclid. Accepts any signed inputs, not both zero; gcd returned positive.
ExtGcdResult ext_gcd(long long a, long long b);

// Multiplicative inverse of a modulo m, in [1, m). Throws NotCoprimeError if gcd(a, m) != 1.
long long mod_inverse(long long a, long long m);

// Solve a system of congruences with pairwise co-prime moduli; the unique
// solution in [0, prod(moduli)). Throws NotCoprimeError naming the offending
// moduli if any pair shares a factor. 128-bit intermediates internally.
long long crt_solve(const ResidueSystem& system);

// Map a value in [0, modulus_product) to the centered interval
// [-floor(L/2), ceil(L/2) - 1]; for even L the boundary value maps negative.
long long to_centered(long long value, long long modulus_product);

// Least common multiple of a list of moduli (each >= 1). Throws
// std::overflow_error if the result does not fit in long long.
long long lcm_all(std::span<const long long> moduli);

}  // namespace otfs::crt
