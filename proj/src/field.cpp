#include "continuum/field.hpp"

#include <cmath>

namespace continuum {

uint64_t FixedPointCodec::encode(double x) const {
  if (!std::isfinite(x)) throw std::domain_error("cannot encode non-finite");
  if (std::abs(x) > max_abs())
    throw std::domain_error("value out of fixed-point range: " +
                            std::to_string(x));
  const double scaled = std::round(x * kScale);
  if (scaled >= 0.0) return static_cast<uint64_t>(scaled);
  return Fp61::modulus - static_cast<uint64_t>(-scaled);
}

double FixedPointCodec::decode(uint64_t v) const {
  if (v >= Fp61::modulus) throw std::domain_error("not a field element");
  if (v <= Fp61::modulus / 2) return static_cast<double>(v) / kScale;
  return -static_cast<double>(Fp61::modulus - v) / kScale;
}

std::vector<uint64_t> FixedPointCodec::encode_vector(
    const std::vector<double>& xs) const {
  std::vector<uint64_t> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(encode(x));
  return out;
}

std::vector<double> FixedPointCodec::decode_vector(
    const std::vector<uint64_t>& vs) const {
  std::vector<double> out;
  out.reserve(vs.size());
  for (uint64_t v : vs) out.push_back(decode(v));
  return out;
}

}  // namespace continuum
