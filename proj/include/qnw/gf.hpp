#pragma once

#include <cstdint>
#include <vector>

namespace qnw::gf {

/// Description of a finite field: GF(2^n) in polynomial basis (n <= 8, fixed
/// published modulus per degree unless overridden) or GF(p) for an odd prime p.
struct FieldSpec {
    uint32_t characteristic = 2;
    uint32_t degree = 1;
    uint32_t modulus = 0;  // irreducible polynomial as a bit vector; char-2 only

    uint32_t order() const;

    static FieldSpec binary(uint32_t degree);
    static FieldSpec binary_with_modulus(uint32_t degree, uint32_t modulus);
    static FieldSpec prime(uint32_t p);

    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Field element by value. Enumeration order is the integer value of the
/// representation (polynomial-basis bits for char 2, residue otherwise);
/// element(spec, i).value() == i.
class Element {
  public:
    Element() = default;
    Element(const FieldSpec& spec, uint32_t value);

    uint32_t value() const { return value_; }
    const FieldSpec& spec() const { return spec_; }
    bool is_zero() const { return value_ == 0; }

    friend Element operator+(const Element& a, const Element& b);
    friend Element operator-(const Element& a, const Element& b);
    friend Element operator-(const Element& a);
    friend Element operator*(const Element& a, const Element& b);
    friend bool operator==(const Element& a, const Element& b) = default;

  private:
    uint32_t value_ = 0;
    FieldSpec spec_;
};

inline Element element(const FieldSpec& spec, uint32_t value) { return Element(spec, value); }
Element zero(const FieldSpec& spec);
Element one(const FieldSpec& spec);

Element pow(const Element& a, uint64_t k);
Element inverse(const Element& a);  // a != 0; via a^(q-2)

/// Absolute trace GF(2^n) -> GF(2), Tr(z) = sum_{i<n} z^(2^i). Char 2 only.
int trace(const Element& a);

/// Multiplicative order of a nonzero element.
uint32_t multiplicative_order(const Element& a);

/// Enumeration-smallest element of multiplicative order q-1.
Element find_generator(const FieldSpec& spec);

/// k with base^k == z (base a generator, z != 0).
uint32_t discrete_log(const Element& base, const Element& z);

}  // namespace qnw::gf
