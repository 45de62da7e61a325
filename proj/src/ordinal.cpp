#include "ordinalvm/ordinal.hpp"

#include <cctype>

namespace ovm {

Ordinal Ordinal::nat(std::uint64_t n) {
    Ordinal o;
    if (n > 0) o.terms_.push_back({0, n});
    return o;
}

Ordinal Ordinal::omega() { return term(1, 1); }

Ordinal Ordinal::term(std::uint64_t exp, std::uint64_t coeff) {
    Ordinal o;
    if (coeff > 0) o.terms_.push_back({exp, coeff});
    return o;
}

Ordinal Ordinal::from_terms(const std::vector<Term>& terms) {
    Ordinal acc;
    for (const Term& t : terms) acc = acc + term(t.exp, t.coeff);
    return acc;
}

int Ordinal::compare(const Ordinal& a, const Ordinal& b) {
    // CNF lexicographic: leading terms dominate.
    std::size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Term& ta = a.terms_[i];
        const Term& tb = b.terms_[i];
        if (ta.exp != tb.exp) return ta.exp < tb.exp ? -1 : 1;
        if (ta.coeff != tb.coeff) return ta.coeff < tb.coeff ? -1 : 1;
    }
    if (a.terms_.size() != b.terms_.size())
        return a.terms_.size() < b.terms_.size() ? -1 : 1;
    return 0;
}

bool Ordinal::is_limit() const {
    return !terms_.empty() && terms_.back().exp != 0;
}

bool Ordinal::is_finite() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].exp == 0);
}

std::uint64_t Ordinal::finite_part() const {
    if (!terms_.empty() && terms_.back().exp == 0) return terms_.back().coeff;
    return 0;
}

Ordinal Ordinal::succ() const { return *this + Ordinal::nat(1); }

Ordinal operator+(const Ordinal& a, const Ordinal& b) {
    if (b.is_zero()) return a;
    Ordinal r;
    std::uint64_t lead = b.terms_[0].exp;
    // terms of a with exponent < lead are absorbed
    for (const Ordinal::Term& t : a.terms_) {
        if (t.exp > lead) {
            r.terms_.push_back(t);
        } else if (t.exp == lead) {
            r.terms_.push_back({lead, t.coeff + b.terms_[0].coeff});
        } else {
            break;
        }
    }
    if (r.terms_.empty() || r.terms_.back().exp > lead)
        r.terms_.push_back(b.terms_[0]);
    for (std::size_t i = 1; i < b.terms_.size(); ++i)
        r.terms_.push_back(b.terms_[i]);
    return r;
}

std::pair<Ordinal, std::uint64_t> Ordinal::split() const {
    Ordinal lim = *this;
    std::uint64_t fin = 0;
    if (!lim.terms_.empty() && lim.terms_.back().exp == 0) {
        fin = lim.terms_.back().coeff;
        lim.terms_.pop_back();
    }
    return {lim, fin};
}

Ordinal Ordinal::sup_progression(const Ordinal& base, std::uint64_t delta) {
    if (delta == 0) return base;
    return base.limit_part() + Ordinal::omega();
}

std::uint64_t Ordinal::finite_diff(const Ordinal& hi, const Ordinal& lo) {
    auto [hl, hf] = hi.split();
    auto [ll, lf] = lo.split();
    if (hl != ll || hf < lf)
        throw std::invalid_argument("finite_diff: " + hi.str() + " - " + lo.str());
    return hf - lf;
}

std::uint64_t Ordinal::coeff_of(std::uint64_t exp) const {
    for (const Term& t : terms_)
        if (t.exp == exp) return t.coeff;
    return 0;
}

std::string Ordinal::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const Term& t = terms_[i];
        if (i) out += "+";
        if (t.exp == 0) {
            out += std::to_string(t.coeff);
        } else {
            out += "w";
            if (t.exp != 1) out += "^" + std::to_string(t.exp);
            if (t.coeff != 1) out += "*" + std::to_string(t.coeff);
        }
    }
    return out;
}

namespace {

struct Parser {
    std::string_view s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    std::uint64_t nat() {
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            throw OrdinalParseError("expected number at position " + std::to_string(pos));
        std::uint64_t v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
            ++pos;
        }
        return v;
    }
    Ordinal::Term term() {
        skip_ws();
        if (eat('w')) {
            std::uint64_t exp = 1;
            if (eat('^')) exp = nat();
            std::uint64_t coeff = 1;
            if (eat('*')) coeff = nat();
            return {exp, coeff};
        }
        return {0, nat()};
    }
};

}  // namespace

Ordinal Ordinal::parse(std::string_view text) {
    Parser p{text};
    std::vector<Term> terms;
    terms.push_back(p.term());
    while (p.eat('+')) terms.push_back(p.term());
    p.skip_ws();
    if (p.pos != text.size())
        throw OrdinalParseError("trailing input at position " + std::to_string(p.pos) +
                                " in ordinal literal '" + std::string(text) + "'");
    return from_terms(terms);
}

}  // namespace ovm
