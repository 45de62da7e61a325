#include "ordinalvm/diophantine.hpp"

#include <json.hpp>

namespace ovm {

using nlohmann::json;

BigInt stretch(const BigInt& g, std::uint64_t n) {
    if (n == 0) throw DiophantineError("stretch factor must be positive");
    BigInt out = 0;
    BigInt rest = g;
    std::uint64_t i = 0;
    while (rest != 0) {
        if (boost::multiprecision::bit_test(rest, 0)) boost::multiprecision::bit_set(out, n * i);
        rest >>= 1;
        ++i;
    }
    return out;
}

bool dominates(const BigInt& a, const BigInt& b) { return (a & b) == a; }

int bit_select(const BigInt& x, std::uint64_t i) {
    // compute 2^i, bitwise multiply by x, test for zero -- as in the
    // register-machine construction this mirrors
    BigInt mask = BigInt(1) << i;
    BigInt y = x & mask;
    return y == 0 ? 0 : 1;
}

BigInt truncation_witness(const Rational& r, std::uint64_t a) {
    Rational v = r * Rational(BigInt(1) << a);
    if (boost::multiprecision::denominator(v) == 1)
        throw DiophantineError("2^" + std::to_string(a) + " * " + rational_str(r) +
                               " is an integer; no strict truncation witness");
    BigInt num = boost::multiprecision::numerator(v);
    BigInt den = boost::multiprecision::denominator(v);
    BigInt g = num / den;
    if (num < 0 && num % den != 0) --g;  // floor for negatives
    return g;
}

Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(text));
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw DiophantineError("zero denominator in '" + text + "'");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw DiophantineError("bad rational literal '" + text + "'");
    }
}

std::string rational_str(const Rational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

BigInt eval_poly(const Poly& p, const WitnessTuple& w) {
    BigInt total = 0;
    for (const Monomial& m : p) {
        BigInt term = m.coeff;
        for (const auto& [var, exp] : m.powers) {
            auto it = w.find(var);
            if (it == w.end()) throw DiophantineError("unbound variable '" + var + "'");
            for (std::uint32_t k = 0; k < exp; ++k) term *= it->second;
        }
        total += term;
    }
    return total;
}

namespace {

BigInt eval_operand(const std::string& op, const WitnessTuple& w) {
    if (!op.empty() && (std::isdigit(static_cast<unsigned char>(op[0])) || op[0] == '-'))
        return BigInt(op);
    auto it = w.find(op);
    if (it == w.end()) throw DiophantineError("unbound variable '" + op + "'");
    return it->second;
}

}  // namespace

bool eval_system(const ConstraintSystem& s, const WitnessTuple& w,
                 const std::map<std::string, Rational>& reals) {
    for (const Atom& atom : s.atoms) {
        bool ok = std::visit(
            [&](const auto& a) -> bool {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, PolyEq>) {
                    return eval_poly(a.poly, w) == 0;
                } else if constexpr (std::is_same_v<T, DominatesAtom>) {
                    return dominates(eval_poly(a.lhs, w), eval_poly(a.rhs, w));
                } else if constexpr (std::is_same_v<T, IntervalAtom>) {
                    auto git = w.find(a.g);
                    auto ait = w.find(a.a);
                    if (git == w.end()) throw DiophantineError("unbound variable '" + a.g + "'");
                    if (ait == w.end()) throw DiophantineError("unbound variable '" + a.a + "'");
                    if (ait->second < 0) return false;
                    Rational r = a.r;
                    if (!a.r_var.empty()) {
                        auto rit = reals.find(a.r_var);
                        if (rit == reals.end())
                            throw DiophantineError("unbound real variable '" + a.r_var + "'");
                        r = rit->second;
                    }
                    Rational scaled =
                        r * Rational(BigInt(1) << static_cast<std::uint64_t>(ait->second));
                    Rational g(git->second);
                    return g < scaled && scaled < g + 1;
                } else {
                    static_assert(std::is_same_v<T, ExpAtom>);
                    BigInt base = eval_operand(a.base, w);
                    BigInt e = eval_operand(a.exponent, w);
                    BigInt res = eval_operand(a.result, w);
                    if (e < 0) return false;
                    BigInt acc = 1;
                    for (BigInt k = 0; k < e; ++k) {
                        acc *= base;
                        if (boost::multiprecision::abs(acc) > boost::multiprecision::abs(res) &&
                            res != 0 && base != 0 && boost::multiprecision::abs(base) > 1)
                            return false;  // already past the target
                    }
                    return acc == res;
                }
            },
            atom);
        if (!ok) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

namespace {

json poly_to_json(const Poly& p) {
    json arr = json::array();
    for (const Monomial& m : p) {
        json jm;
        jm["coeff"] = m.coeff.str();
        json pow = json::object();
        for (const auto& [var, exp] : m.powers) pow[var] = exp;
        jm["powers"] = pow;
        arr.push_back(jm);
    }
    return arr;
}

Poly poly_from_json(const json& arr) {
    Poly p;
    for (const json& jm : arr) {
        Monomial m;
        m.coeff = BigInt(jm.at("coeff").get<std::string>());
        if (jm.contains("powers"))
            for (auto it = jm["powers"].begin(); it != jm["powers"].end(); ++it)
                m.powers[it.key()] = it.value().get<std::uint32_t>();
        p.push_back(std::move(m));
    }
    return p;
}

}  // namespace

std::string system_to_json(const ConstraintSystem& s) {
    json atoms = json::array();
    for (const Atom& atom : s.atoms) {
        json ja;
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, PolyEq>) {
                    ja["type"] = "polyeq";
                    ja["poly"] = poly_to_json(a.poly);
                } else if constexpr (std::is_same_v<T, DominatesAtom>) {
                    ja["type"] = "dominates";
                    ja["lhs"] = poly_to_json(a.lhs);
                    ja["rhs"] = poly_to_json(a.rhs);
                } else if constexpr (std::is_same_v<T, IntervalAtom>) {
                    ja["type"] = "interval";
                    ja["g"] = a.g;
                    ja["a"] = a.a;
                    if (a.r_var.empty())
                        ja["r"] = rational_str(a.r);
                    else
                        ja["r_var"] = a.r_var;
                } else {
                    ja["type"] = "exp";
                    ja["base"] = a.base;
                    ja["exponent"] = a.exponent;
                    ja["result"] = a.result;
                }
            },
            atom);
        atoms.push_back(ja);
    }
    json out;
    out["atoms"] = atoms;
    return out.dump(2);
}

ConstraintSystem system_from_json(const std::string& text) {
    ConstraintSystem s;
    json j;
    try {
        j = json::parse(text);
        for (const json& ja : j.at("atoms")) {
            std::string type = ja.at("type").get<std::string>();
            if (type == "polyeq") {
                s.atoms.push_back(PolyEq{poly_from_json(ja.at("poly"))});
            } else if (type == "dominates") {
                s.atoms.push_back(
                    DominatesAtom{poly_from_json(ja.at("lhs")), poly_from_json(ja.at("rhs"))});
            } else if (type == "interval") {
                IntervalAtom ia;
                ia.g = ja.at("g").get<std::string>();
                ia.a = ja.at("a").get<std::string>();
                if (ja.contains("r_var"))
                    ia.r_var = ja["r_var"].get<std::string>();
                else
                    ia.r = parse_rational(ja.at("r").get<std::string>());
                s.atoms.push_back(std::move(ia));
            } else if (type == "exp") {
                s.atoms.push_back(ExpAtom{ja.at("base").get<std::string>(),
                                          ja.at("exponent").get<std::string>(),
                                          ja.at("result").get<std::string>()});
            } else {
                throw DiophantineError("unknown atom type '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DiophantineError(std::string("bad constraint system JSON: ") + e.what());
    }
    return s;
}

std::string witness_to_json(const WitnessTuple& w) {
    json out = json::object();
    for (const auto& [name, value] : w) out[name] = value.str();
    return out.dump(2);
}

WitnessTuple witness_from_json(const std::string& text) {
    WitnessTuple w;
    try {
        json j = json::parse(text);
        for (auto it = j.begin(); it != j.end(); ++it)
            w[it.key()] = BigInt(it.value().get<std::string>());
    } catch (const json::exception& e) {
        throw DiophantineError(std::string("bad witness JSON: ") + e.what());
    }
    return w;
}

// ---------------------------------------------------------------------------
// Truncated simulation
// ---------------------------------------------------------------------------

int fraction_bit(const Rational& q, std::uint64_t i) {
    // bit i of 0.b0 b1 b2 ... is floor(frac(q) * 2^(i+1)) mod 2
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    BigInt frac_num = num % den;
    if (frac_num < 0) frac_num += den;
    BigInt shifted = (frac_num << (i + 1)) / den;
    return static_cast<int>(shifted & 1);
}

TruncationResult run_truncated(const Program& b, const Rational& x, const Rational& r,
                               std::uint64_t n, std::uint64_t budget_factor) {
    if (n == 0) return TruncationResult::Abnormal;
    std::vector<const Rational*> inputs;
    for (std::size_t i = 0; i < b.inputs.size(); ++i)
        inputs.push_back(i == 0 ? &x : &r);
    std::vector<std::uint64_t> regs(b.regs.size(), 0);
    std::uint64_t budget = budget_factor * n;
    std::size_t ip = 0;
    for (std::uint64_t step = 0; step < budget; ++step) {
        if (ip >= b.code.size()) return TruncationResult::Abnormal;
        const Instruction& ins = b.code[ip];
        switch (ins.op) {
            case Instruction::Op::Halt:
                return TruncationResult::NormalHalt;
            case Instruction::Op::Inc:
                ++regs[static_cast<std::size_t>(ins.r1)];
                ++ip;
                break;
            case Instruction::Op::BranchEq:
                ip = (regs[static_cast<std::size_t>(ins.r1)] ==
                      regs[static_cast<std::size_t>(ins.r2)])
                         ? static_cast<std::size_t>(ins.target)
                         : ip + 1;
                break;
            case Instruction::Op::BitBranch: {
                std::uint64_t idx = regs[static_cast<std::size_t>(ins.r1)];
                if (idx >= n) return TruncationResult::Abnormal;  // past the truncation
                const Rational* input =
                    inputs.empty() ? &x : inputs[static_cast<std::size_t>(ins.input)];
                if (fraction_bit(*input, idx) == 0)
                    ip = static_cast<std::size_t>(ins.target);
                else
                    ++ip;
                break;
            }
        }
    }
    return TruncationResult::Abnormal;  // storing a bit took longer than the budget
}

}  // namespace ovm
