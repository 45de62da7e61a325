#ifndef ORDINALVM_DIOPHANTINE_HPP
#define ORDINALVM_DIOPHANTINE_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ordinalvm/machine.hpp"

namespace ovm {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct DiophantineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bit strings are nonnegative integers read least-significant-bit first.
BigInt stretch(const BigInt& g, std::uint64_t n);  // bit i -> bit n*i
bool dominates(const BigInt& a, const BigInt& b);  // every set bit of a set in b
int bit_select(const BigInt& x, std::uint64_t i);  // mask 2^i and test

/// The unique g with g < 2^a*r < g+1; throws DiophantineError when
/// 2^a*r is an integer (the strict inequalities are unsatisfiable).
BigInt truncation_witness(const Rational& r, std::uint64_t a);

Rational parse_rational(const std::string& text);  // "p/q" or "p"
std::string rational_str(const Rational& r);

// ---------------------------------------------------------------------------
// Constraint language over integer witnesses
// ---------------------------------------------------------------------------

struct Monomial {
    BigInt coeff;
    std::map<std::string, std::uint32_t> powers;
};
using Poly = std::vector<Monomial>;

struct PolyEq {
    Poly poly;  // poly = 0
};
struct DominatesAtom {
    Poly lhs, rhs;  // lhs bitwise dominated by rhs
};
struct IntervalAtom {
    std::string g, a;  // variables: g < 2^a * r < g + 1
    Rational r;        // used when r_var is empty
    std::string r_var; // names a real variable bound at evaluation time
};
struct ExpAtom {
    // operands are variable names or decimal integer literals
    std::string base, exponent, result;  // base^exponent = result
};
using Atom = std::variant<PolyEq, DominatesAtom, IntervalAtom, ExpAtom>;

struct ConstraintSystem {
    std::vector<Atom> atoms;
};

using WitnessTuple = std::map<std::string, BigInt>;

BigInt eval_poly(const Poly& p, const WitnessTuple& w);
bool eval_system(const ConstraintSystem& s, const WitnessTuple& w,
                 const std::map<std::string, Rational>& reals);

std::string system_to_json(const ConstraintSystem& s);
ConstraintSystem system_from_json(const std::string& text);
std::string witness_to_json(const WitnessTuple& w);
WitnessTuple witness_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Interface transform: finite machines on truncated real inputs
// ---------------------------------------------------------------------------

enum class TruncationResult { NormalHalt, Abnormal };

/// Runs a finite machine (INC/BEQ/HALT plus BBZ bit branches) on the
/// first-n-bit truncations of the fractional inputs x and r.  Addressing
/// a bit index >= n, or exceeding budget_factor*n steps, is Abnormal.
TruncationResult run_truncated(const Program& b, const Rational& x, const Rational& r,
                               std::uint64_t n, std::uint64_t budget_factor = 64);

/// Bit i of the binary expansion of the fractional part of q.
int fraction_bit(const Rational& q, std::uint64_t i);

}  // namespace ovm

#endif
