#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "continuum/field.hpp"

namespace continuum {

struct BadThreshold : std::runtime_error {
  BadThreshold(uint32_t t, uint32_t n)
      : std::runtime_error("threshold t=" + std::to_string(t) +
                           " must satisfy 1 < t <= n=" + std::to_string(n)) {}
};

struct WrongSubsetSize : std::runtime_error {
  WrongSubsetSize(size_t got, size_t want)
      : std::runtime_error("decryption subset has " + std::to_string(got) +
                           " members, threshold needs exactly " +
                           std::to_string(want)) {}
};

namespace shamir {

template <class Field>
uint64_t eval_poly(const std::vector<uint64_t>& coeffs, uint64_t x) {
  // coeffs[0] is the constant term (the secret).
  uint64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = Field::add(Field::mul(acc, x), *it);
  return acc;
}

// Shares one value with an explicit polynomial: coeffs[0] must already hold
// the secret. Returns evaluations at x = 1..n.
template <class Field>
std::vector<uint64_t> share_with_poly(const std::vector<uint64_t>& coeffs,
                                      uint32_t n) {
  std::vector<uint64_t> shares(n);
  for (uint32_t i = 0; i < n; ++i)
    shares[i] = eval_poly<Field>(coeffs, i + 1);
  return shares;
}

// Random degree-(t-1) polynomial with constant term = secret.
template <class Field>
std::vector<uint64_t> share_value(uint64_t secret, uint32_t n, uint32_t t,
                                  std::mt19937_64& rng) {
  if (t <= 1 || t > n) throw BadThreshold(t, n);
  std::uniform_int_distribution<uint64_t> dist(0, Field::modulus - 1);
  std::vector<uint64_t> coeffs(t);
  coeffs[0] = secret % Field::modulus;
  for (uint32_t i = 1; i < t; ++i) coeffs[i] = dist(rng);
  return share_with_poly<Field>(coeffs, n);
}

// Lagrange coefficients at x = 0 for the evaluation points xs (1-based,
// distinct).
template <class Field>
std::vector<uint64_t> lagrange_basis_at_zero(const std::vector<uint32_t>& xs) {
  std::vector<uint64_t> lambda(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    uint64_t num = 1, den = 1;
    const uint64_t xi = xs[i];
    for (size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      const uint64_t xj = xs[j];
      num = Field::mul(num, xj);
      den = Field::mul(den, Field::sub(xj, xi));
    }
    lambda[i] = Field::mul(num, Field::inv(den));
  }
  return lambda;
}

template <class Field>
uint64_t reconstruct(const std::vector<uint32_t>& xs,
                     const std::vector<uint64_t>& ys) {
  auto lambda = lagrange_basis_at_zero<Field>(xs);
  uint64_t acc = 0;
  for (size_t i = 0; i < xs.size(); ++i)
    acc = Field::add(acc, Field::mul(lambda[i], ys[i]));
  return acc;
}

}  // namespace shamir
}  // namespace continuum
