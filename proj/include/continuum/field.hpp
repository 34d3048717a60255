#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace continuum {

// Prime-field arithmetic on single words with 128-bit intermediates.
template <uint64_t P>
struct PrimeField {
  static constexpr uint64_t modulus = P;

  static uint64_t add(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return s >= P ? s - P : s;
  }
  static uint64_t sub(uint64_t a, uint64_t b) { return a >= b ? a - b : a + P - b; }
  static uint64_t neg(uint64_t a) { return a == 0 ? 0 : P - a; }
  static uint64_t mul(uint64_t a, uint64_t b) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % P);
  }
  static uint64_t pow(uint64_t base, uint64_t e) {
    uint64_t r = 1;
    while (e > 0) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  // P is prime, so a^(P-2) inverts a.
  static uint64_t inv(uint64_t a) {
    if (a == 0) throw std::domain_error("field inverse of zero");
    return pow(a, P - 2);
  }
};

// Production modulus: the Mersenne prime 2^61 - 1.
using Fp61 = PrimeField<(1ULL << 61) - 1>;

// Signed fixed-point embedding into the field, scale 2^16, centered:
// negative x maps to p - |x|*scale. Aggregating n_summands encodings must
// stay below p/2 so sums never wrap into the negative half.
class FixedPointCodec {
 public:
  static constexpr double kScale = 65536.0;  // 2^16

  explicit FixedPointCodec(uint32_t n_summands) : n_summands_(n_summands) {
    if (n_summands_ < 1) throw std::invalid_argument("need >= 1 summand");
  }

  double max_abs() const {
    return static_cast<double>(Fp61::modulus / 2) / (kScale * n_summands_);
  }

  uint64_t encode(double x) const;
  double decode(uint64_t v) const;

  std::vector<uint64_t> encode_vector(const std::vector<double>& xs) const;
  std::vector<double> decode_vector(const std::vector<uint64_t>& vs) const;

 private:
  uint32_t n_summands_;
};

}  // namespace continuum
