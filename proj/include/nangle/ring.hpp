#pragma once

// Exact arithmetic in the two families of finite commutative local rings
// used throughout the workbench:
//
//   Z/p^2         integers modulo p^2
//   F_p[eps]      dual numbers a + b*eps over the prime field, eps^2 = 0
//
// Both carriers have p^2 elements, the maximal ideal is generated by a
// single uniformizer (p, resp. eps) and squares to zero.  Elements are
// stored as canonical integers in [0, p^2): for Z/p^2 the least
// non-negative residue, for dual numbers the packing a + b*p.

#include <stdexcept>
#include <string>

namespace nangle {

struct RingSpec {
    enum class Kind { ZModPSquared, DualNumbers };

    Kind kind;
    int p;

    static RingSpec z_mod_p2(int p) { return make(Kind::ZModPSquared, p); }
    static RingSpec dual_numbers(int p) { return make(Kind::DualNumbers, p); }

    static RingSpec make(Kind kind, int p)
    {
        if (p != 2 && p != 3 && p != 5 && p != 7)
            throw std::invalid_argument("RingSpec: p must be a prime <= 7, got " + std::to_string(p));
        return RingSpec{kind, p};
    }

    int size() const { return p * p; }

    bool operator==(const RingSpec&) const = default;

    // ----- canonical-value arithmetic -------------------------------------

    int zero() const { return 0; }
    int one() const { return 1; }

    int add(int x, int y) const
    {
        if (kind == Kind::ZModPSquared)
            return (x + y) % size();
        return pack((unit_part(x) + unit_part(y)) % p, (eps_part(x) + eps_part(y)) % p);
    }

    int neg(int x) const
    {
        if (kind == Kind::ZModPSquared)
            return (size() - x) % size();
        return pack((p - unit_part(x)) % p, (p - eps_part(x)) % p);
    }

    int sub(int x, int y) const { return add(x, neg(y)); }

    int mul(int x, int y) const
    {
        if (kind == Kind::ZModPSquared)
            return (x * y) % size();
        const int a = unit_part(x), b = eps_part(x);
        const int c = unit_part(y), d = eps_part(y);
        return pack((a * c) % p, (a * d + b * c) % p);
    }

    // Generator of the maximal ideal.  Both encodings place it at value p.
    int uniformizer() const { return p; }

    // Image in the residue field k = R/(p), an integer in [0, p).
    int residue(int x) const { return kind == Kind::ZModPSquared ? x % p : unit_part(x); }

    // Canonical lift k -> R; residue(lift(r)) == r.
    int lift(int r) const { return r % p; }

    bool is_unit(int x) const { return residue(x) != 0; }
    bool in_max_ideal(int x) const { return residue(x) == 0; }

    int invert(int x) const
    {
        if (!is_unit(x))
            throw std::invalid_argument("RingSpec::invert: element " + std::to_string(x) + " is not a unit");
        for (int y = 1; y < size(); ++y)
            if (mul(x, y) == 1)
                return y;
        throw std::logic_error("RingSpec::invert: no inverse found for unit");
    }

    // For x = p*t in (p), the residue t in [0, p) with p*lift(t) == x.
    int divide_by_p(int x) const
    {
        if (!in_max_ideal(x))
            throw std::invalid_argument("RingSpec::divide_by_p: element " + std::to_string(x) + " is not in (p)");
        return kind == Kind::ZModPSquared ? x / p : eps_part(x);
    }

    bool two_p_is_zero() const { return add(uniformizer(), uniformizer()) == 0; }

    bool valid_value(int x) const { return 0 <= x && x < size(); }

    std::string name() const
    {
        if (kind == Kind::ZModPSquared)
            return "Z/" + std::to_string(size());
        return "F_" + std::to_string(p) + "[eps]";
    }

private:
    int unit_part(int x) const { return x % p; }
    int eps_part(int x) const { return x / p; }
    int pack(int a, int b) const { return a + b * p; }
};

// Thin value wrapper; all binary operations require matching specs.
struct RingElement {
    RingSpec spec;
    int value = 0;

    RingElement(RingSpec s, int v) : spec(s), value(v)
    {
        if (!s.valid_value(v))
            throw std::invalid_argument("RingElement: value out of canonical range");
    }

    friend RingElement operator+(const RingElement& a, const RingElement& b)
    {
        check(a, b);
        return {a.spec, a.spec.add(a.value, b.value)};
    }
    friend RingElement operator*(const RingElement& a, const RingElement& b)
    {
        check(a, b);
        return {a.spec, a.spec.mul(a.value, b.value)};
    }
    RingElement operator-() const { return {spec, spec.neg(value)}; }

    bool operator==(const RingElement&) const = default;

    bool is_unit() const { return spec.is_unit(value); }
    RingElement invert() const { return {spec, spec.invert(value)}; }
    int residue() const { return spec.residue(value); }

private:
    static void check(const RingElement& a, const RingElement& b)
    {
        if (!(a.spec == b.spec))
            throw std::invalid_argument("RingElement: mismatched ring specs");
    }
};

// n >= 3 always; odd n additionally requires 2p = 0 in R.
inline bool validate_parity(int n, const RingSpec& spec)
{
    if (n < 3)
        throw std::invalid_argument("validate_parity: n must be >= 3");
    return n % 2 == 0 || spec.two_p_is_zero();
}

} // namespace nangle
