#include "qnw/gf.hpp"

#include <stdexcept>
#include <string>

namespace qnw::gf {

namespace {

// One published irreducible polynomial per degree n <= 8 (see docs/determinism.md).
// n=1: x+1, n=2: x^2+x+1, n=3: x^3+x+1, n=4: x^4+x+1,
// n=5: x^5+x^2+1, n=6: x^6+x+1, n=7: x^7+x+1, n=8: x^8+x^4+x^3+x+1.
constexpr uint32_t kModulusTable[9] = {0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0b100011011};

int poly_degree(uint32_t p) {
    int d = -1;
    for (int i = 0; i < 32; ++i)
        if (p >> i & 1) d = i;
    return d;
}

// Remainder of a by m over GF(2)[x].
uint32_t poly_mod(uint32_t a, uint32_t m) {
    const int dm = poly_degree(m);
    for (int d = poly_degree(a); d >= dm; d = poly_degree(a)) a ^= m << (d - dm);
    return a;
}

bool poly_divides(uint32_t f, uint32_t g) { return poly_mod(g, f) == 0; }

// Exhaustive factor search; fine for degree <= 8.
bool is_irreducible(uint32_t m) {
    const int n = poly_degree(m);
    if (n < 1) return false;
    for (int d = 1; 2 * d <= n; ++d)
        for (uint32_t f = (1u << d); f < (2u << d); ++f)
            if (poly_divides(f, m)) return false;
    return true;
}

bool is_odd_prime(uint32_t p) {
    if (p < 3 || p % 2 == 0) return false;
    for (uint32_t d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

uint32_t mul_binary(uint32_t a, uint32_t b, uint32_t modulus) {
    uint32_t r = 0;
    while (b) {
        if (b & 1) r ^= a;
        b >>= 1;
        a <<= 1;
        if (a >> poly_degree(modulus) & 1) a ^= modulus;
    }
    return r;
}

void require_same_spec(const Element& a, const Element& b) {
    if (!(a.spec() == b.spec())) throw std::invalid_argument("gf: operands from different fields");
}

}  // namespace

uint32_t FieldSpec::order() const {
    uint32_t q = 1;
    for (uint32_t i = 0; i < degree; ++i) q *= characteristic;
    return q;
}

FieldSpec FieldSpec::binary(uint32_t degree) {
    if (degree < 1 || degree > 8) throw std::invalid_argument("gf: binary field degree must be in [1,8]");
    return binary_with_modulus(degree, kModulusTable[degree]);
}

FieldSpec FieldSpec::binary_with_modulus(uint32_t degree, uint32_t modulus) {
    if (degree < 1 || degree > 8) throw std::invalid_argument("gf: binary field degree must be in [1,8]");
    if (poly_degree(modulus) != static_cast<int>(degree))
        throw std::invalid_argument("gf: modulus degree mismatch");
    if (!is_irreducible(modulus)) throw std::invalid_argument("gf: modulus is reducible");
    return FieldSpec{2, degree, modulus};
}

FieldSpec FieldSpec::prime(uint32_t p) {
    if (!is_odd_prime(p) || p > 257) throw std::invalid_argument("gf: need an odd prime p <= 257");
    return FieldSpec{p, 1, 0};
}

Element::Element(const FieldSpec& spec, uint32_t value) : spec_(spec) {
    if (spec.characteristic == 2) {
        if (value >> spec.degree) throw std::invalid_argument("gf: value out of range");
        value_ = value;
    } else {
        value_ = value % spec.characteristic;
    }
}

Element zero(const FieldSpec& spec) { return Element(spec, 0); }
Element one(const FieldSpec& spec) { return Element(spec, 1); }

Element operator+(const Element& a, const Element& b) {
    require_same_spec(a, b);
    if (a.spec().characteristic == 2) return Element(a.spec(), a.value() ^ b.value());
    return Element(a.spec(), (a.value() + b.value()) % a.spec().characteristic);
}

Element operator-(const Element& a) {
    if (a.spec().characteristic == 2) return a;
    return Element(a.spec(), (a.spec().characteristic - a.value()) % a.spec().characteristic);
}

Element operator-(const Element& a, const Element& b) { return a + (-b); }

Element operator*(const Element& a, const Element& b) {
    require_same_spec(a, b);
    if (a.spec().characteristic == 2)
        return Element(a.spec(), mul_binary(a.value(), b.value(), a.spec().modulus));
    return Element(a.spec(), (a.value() * b.value()) % a.spec().characteristic);
}

Element pow(const Element& a, uint64_t k) {
    Element r = one(a.spec());
    Element base = a;
    while (k) {
        if (k & 1) r = r * base;
        base = base * base;
        k >>= 1;
    }
    return r;
}

Element inverse(const Element& a) {
    if (a.is_zero()) throw std::invalid_argument("gf: zero has no inverse");
    return pow(a, a.spec().order() - 2);
}

int trace(const Element& a) {
    if (a.spec().characteristic != 2) throw std::invalid_argument("gf: trace requires characteristic 2");
    Element t = zero(a.spec());
    Element w = a;
    for (uint32_t i = 0; i < a.spec().degree; ++i) {
        t = t + w;
        w = w * w;
    }
    if (t.value() > 1) throw std::logic_error("gf: trace escaped GF(2)");
    return static_cast<int>(t.value());
}

uint32_t multiplicative_order(const Element& a) {
    if (a.is_zero()) throw std::invalid_argument("gf: zero has no multiplicative order");
    uint32_t o = 1;
    Element x = a;
    while (!(x == one(a.spec()))) {
        x = x * a;
        ++o;
        if (o > a.spec().order()) throw std::logic_error("gf: order search overran the group");
    }
    return o;
}

Element find_generator(const FieldSpec& spec) {
    const uint32_t q = spec.order();
    for (uint32_t v = 1; v < q; ++v) {
        Element g(spec, v);
        if (multiplicative_order(g) == q - 1) return g;
    }
    throw std::logic_error("gf: no generator found");
}

uint32_t discrete_log(const Element& base, const Element& z) {
    require_same_spec(base, z);
    if (z.is_zero()) throw std::invalid_argument("gf: discrete log of zero");
    Element x = one(base.spec());
    for (uint32_t k = 0; k < base.spec().order(); ++k) {
        if (x == z) return k;
        x = x * base;
    }
    throw std::invalid_argument("gf: element not in the subgroup generated by base");
}

}  // namespace qnw::gf
