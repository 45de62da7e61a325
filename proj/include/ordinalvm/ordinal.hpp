#ifndef ORDINALVM_ORDINAL_HPP
#define ORDINALVM_ORDINAL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ovm {

struct OrdinalParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordinal below w^w in Cantor normal form: sum of w^exp * coeff terms
/// with strictly decreasing exponents and coefficients >= 1.  The empty
/// term list is 0.  Canonical form is unique, so operator== on the term
/// list is ordinal equality.
class Ordinal {
public:
    struct Term {
        std::uint64_t exp;
        std::uint64_t coeff;
        bool operator==(const Term&) const = default;
    };

    Ordinal() = default;  // zero

    static Ordinal nat(std::uint64_t n);
    static Ordinal omega();
    /// w^exp * coeff (coeff 0 gives 0).
    static Ordinal term(std::uint64_t exp, std::uint64_t coeff);
    /// Builds from an arbitrary (possibly unnormalized) term sum, read
    /// left to right with ordinal addition.
    static Ordinal from_terms(const std::vector<Term>& terms);

    /// Grammar: sum := term ("+" term)*;
    ///          term := "w" "^" nat ["*" nat] | "w" ["*" nat] | nat
    /// Non-canonical sums (e.g. "w+w", "1+w") are normalized, not rejected.
    static Ordinal parse(std::string_view text);
    std::string str() const;

    /// -1, 0, 1 for <, =, >.
    static int compare(const Ordinal& a, const Ordinal& b);

    bool operator==(const Ordinal&) const = default;
    bool operator<(const Ordinal& o) const { return compare(*this, o) < 0; }
    bool operator<=(const Ordinal& o) const { return compare(*this, o) <= 0; }
    bool operator>(const Ordinal& o) const { return compare(*this, o) > 0; }
    bool operator>=(const Ordinal& o) const { return compare(*this, o) >= 0; }

    bool is_zero() const { return terms_.empty(); }
    /// Nonzero with zero finite part.
    bool is_limit() const;
    bool is_finite() const;

    Ordinal succ() const;
    /// Ordinal addition (non-commutative; left terms below b's leading
    /// exponent are absorbed).
    friend Ordinal operator+(const Ordinal& a, const Ordinal& b);
    Ordinal operator+(std::uint64_t n) const { return *this + Ordinal::nat(n); }

    /// a = limit_part + finite_part with limit_part zero or a limit.
    std::pair<Ordinal, std::uint64_t> split() const;
    Ordinal limit_part() const { return split().first; }
    std::uint64_t finite_part() const;

    /// sup over n < w of base + n*delta: base itself when delta is 0,
    /// otherwise limit_part(base) + w.
    static Ordinal sup_progression(const Ordinal& base, std::uint64_t delta);

    /// hi - lo for hi >= lo with equal limit parts; throws otherwise.
    static std::uint64_t finite_diff(const Ordinal& hi, const Ordinal& lo);

    const std::vector<Term>& terms() const { return terms_; }
    /// Coefficient of w^exp (0 when the term is absent).
    std::uint64_t coeff_of(std::uint64_t exp) const;

private:
    std::vector<Term> terms_;
};

}  // namespace ovm

#endif
