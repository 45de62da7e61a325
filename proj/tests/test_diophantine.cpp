#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "ordinalvm/diophantine.hpp"

using namespace ovm;

namespace {

std::uint64_t suite_seed() {
    if (const char* env = std::getenv("ORDINALVM_SEED")) return std::strtoull(env, nullptr, 10);
    return 0xabad1dea;
}

BigInt stretch_oracle(BigInt g, std::uint64_t n) {
    // independent bit loop
    BigInt out = 0;
    for (std::uint64_t i = 0; g != 0; ++i, g >>= 1)
        if ((g & 1) == 1) out += BigInt(1) << (n * i);
    return out;
}

bool lucas_odd_binomial(std::uint64_t b, std::uint64_t a) {
    // binomial(b, a) odd iff a's bits dominate... Lucas mod 2: C(b,a) odd
    // iff every base-2 digit of a is <= the digit of b
    return (a & b) == a;
}

// C(b, a) mod 2 computed honestly, as a second-level oracle for small inputs
std::uint64_t binom_mod2(std::uint64_t b, std::uint64_t a) {
    if (a > b) return 0;
    BigInt num = 1, den = 1;
    for (std::uint64_t i = 0; i < a; ++i) {
        num *= b - i;
        den *= i + 1;
    }
    return static_cast<std::uint64_t>((num / den) & 1);
}

}  // namespace

TEST_CASE("stretch examples") {
    CHECK(stretch(BigInt(0b11), 2) == 5);
    CHECK(stretch(BigInt(0b1011), 2) == 69);
    CHECK(stretch(BigInt(0xdead), 1) == 0xdead);
    CHECK(stretch(BigInt(0), 7) == 0);
    CHECK_THROWS_AS(stretch(BigInt(3), 0), DiophantineError);
}

TEST_CASE("stretch vs bit-loop oracle") {
    std::mt19937_64 rng(suite_seed());
    std::uniform_int_distribution<std::uint64_t> g(0, (1u << 16) - 1), n(1, 8);
    for (int i = 0; i < 5000; ++i) {
        BigInt v(g(rng));
        std::uint64_t k = n(rng);
        CHECK(stretch(v, k) == stretch_oracle(v, k));
    }
}

TEST_CASE("stretch composes multiplicatively") {
    std::mt19937_64 rng(suite_seed() + 1);
    std::uniform_int_distribution<std::uint64_t> g(0, 1u << 20), n(1, 5);
    for (int i = 0; i < 2000; ++i) {
        BigInt v(g(rng));
        std::uint64_t a = n(rng), b = n(rng);
        CHECK(stretch(stretch(v, a), b) == stretch(v, a * b));
    }
}

TEST_CASE("dominates") {
    CHECK(dominates(BigInt(0), BigInt(12345)));
    CHECK(dominates(BigInt(5), BigInt(7)));
    CHECK_FALSE(dominates(BigInt(2), BigInt(5)));
    CHECK(dominates(BigInt(0b1010), BigInt(0b1110)));
}

TEST_CASE("dominates vs Lucas oracle") {
    // exhaustive over a modest window, plus a direct binomial cross-check
    for (std::uint64_t a = 0; a < 64; ++a)
        for (std::uint64_t b = 0; b < 64; ++b) {
            CHECK(dominates(BigInt(a), BigInt(b)) == lucas_odd_binomial(b, a));
            CHECK((binom_mod2(b, a) == 1) == lucas_odd_binomial(b, a));
        }
    std::mt19937_64 rng(suite_seed() + 2);
    std::uniform_int_distribution<std::uint64_t> d(0, (1u << 12) - 1);
    for (int i = 0; i < 20000; ++i) {
        std::uint64_t a = d(rng), b = d(rng);
        CHECK(dominates(BigInt(a), BigInt(b)) == lucas_odd_binomial(b, a));
    }
}

TEST_CASE("bit_select") {
    CHECK(bit_select(BigInt(0), 3) == 0);
    CHECK(bit_select(BigInt(0b100), 2) == 1);
    CHECK(bit_select(BigInt(0b100), 1) == 0);
    std::mt19937_64 rng(suite_seed() + 3);
    std::uniform_int_distribution<std::uint64_t> x(0, ~0ull), i(0, 80);
    for (int k = 0; k < 10000; ++k) {
        BigInt v(x(rng));
        std::uint64_t bit = i(rng);
        // arithmetic oracle: floor(x / 2^i) mod 2
        int oracle = static_cast<int>((v >> bit) & 1);
        CHECK(bit_select(v, bit) == oracle);
    }
}

TEST_CASE("bit_select sees through stretch") {
    std::mt19937_64 rng(suite_seed() + 4);
    std::uniform_int_distribution<std::uint64_t> g(0, 1u << 16), n(1, 6);
    for (int k = 0; k < 500; ++k) {
        BigInt v(g(rng));
        std::uint64_t f = n(rng);
        BigInt sv = stretch(v, f);
        for (std::uint64_t i = 0; i < 18; ++i) {
            CHECK(bit_select(sv, f * i) == bit_select(v, i));
            for (std::uint64_t off = 1; off < f; ++off)
                CHECK(bit_select(sv, f * i + off) == 0);
        }
    }
}

TEST_CASE("truncation witness examples") {
    CHECK(truncation_witness(Rational(1, 3), 4) == 5);  // 16/3
    CHECK(truncation_witness(Rational(1, 3), 0) == 0);
    CHECK_THROWS_AS(truncation_witness(Rational(1, 2), 1), DiophantineError);
    CHECK_THROWS_AS(truncation_witness(Rational(3), 5), DiophantineError);
}

TEST_CASE("truncation witness strict and unique") {
    std::mt19937_64 rng(suite_seed() + 5);
    std::uniform_int_distribution<std::uint64_t> num(1, 999), den(2, 997), a(0, 20);
    int tested = 0;
    while (tested < 100) {
        Rational r(num(rng), den(rng));
        BigInt d = boost::multiprecision::denominator(r);
        if ((d & (d - 1)) == 0) continue;  // dyadic: every 2^a r can go integral
        std::uint64_t e = a(rng);
        Rational scaled = r * Rational(BigInt(1) << e);
        if (boost::multiprecision::denominator(scaled) == 1) continue;
        ++tested;
        BigInt g = truncation_witness(r, e);
        CHECK(Rational(g) < scaled);
        CHECK(scaled < Rational(g + 1));
        // neighbors fail at least one strict inequality
        bool lo = Rational(g - 1) < scaled && scaled < Rational(g);
        bool hi = Rational(g + 1) < scaled && scaled < Rational(g + 2);
        CHECK_FALSE(lo);
        CHECK_FALSE(hi);
    }
}

TEST_CASE("rational literals") {
    CHECK(parse_rational("1/3") == Rational(1, 3));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(rational_str(Rational(22, 7)) == "22/7");
    CHECK(rational_str(Rational(4, 2)) == "2");
    CHECK_THROWS_AS(parse_rational("1/0"), DiophantineError);
    CHECK_THROWS_AS(parse_rational("x/y"), DiophantineError);
}

TEST_CASE("eval_system basics") {
    ConstraintSystem empty;
    CHECK(eval_system(empty, {}, {}));

    // a - 3 = 0  and  a dominated by 7
    ConstraintSystem s;
    s.atoms.push_back(PolyEq{Poly{{BigInt(1), {{"a", 1}}}, {BigInt(-3), {}}}});
    s.atoms.push_back(DominatesAtom{Poly{{BigInt(1), {{"a", 1}}}}, Poly{{BigInt(7), {}}}});
    CHECK(eval_system(s, {{"a", 3}}, {}));
    CHECK_FALSE(eval_system(s, {{"a", 4}}, {}));
    CHECK_THROWS_AS(eval_system(s, {}, {}), DiophantineError);
}

TEST_CASE("interval and exp atoms") {
    ConstraintSystem s;
    IntervalAtom ia;
    ia.g = "g";
    ia.a = "a";
    ia.r = Rational(1, 3);
    s.atoms.push_back(ia);
    s.atoms.push_back(ExpAtom{"2", "a", "p"});
    CHECK(eval_system(s, {{"g", 5}, {"a", 4}, {"p", 16}}, {}));
    CHECK_FALSE(eval_system(s, {{"g", 4}, {"a", 4}, {"p", 16}}, {}));
    CHECK_FALSE(eval_system(s, {{"g", 5}, {"a", 4}, {"p", 15}}, {}));

    // bound real variable
    ConstraintSystem sv;
    IntervalAtom iv;
    iv.g = "g";
    iv.a = "a";
    iv.r_var = "x";
    sv.atoms.push_back(iv);
    CHECK(eval_system(sv, {{"g", 5}, {"a", 4}}, {{"x", Rational(1, 3)}}));
    CHECK_THROWS_AS(eval_system(sv, {{"g", 5}, {"a", 4}}, {}), DiophantineError);
}

TEST_CASE("brute-force minimal witness agrees") {
    // g < 2^a * (1/3) < g+1 with a + g = 9: exhaustive search over small tuples
    ConstraintSystem s;
    IntervalAtom ia;
    ia.g = "g";
    ia.a = "a";
    ia.r = Rational(1, 3);
    s.atoms.push_back(ia);
    s.atoms.push_back(PolyEq{Poly{{BigInt(1), {{"a", 1}}}, {BigInt(1), {{"g", 1}}}, {BigInt(-9), {}}}});

    std::vector<std::pair<std::uint64_t, std::uint64_t>> sat;
    for (std::uint64_t g = 0; g < 256; ++g)
        for (std::uint64_t a = 0; a < 256; ++a)
            if (eval_system(s, {{"g", BigInt(g)}, {"a", BigInt(a)}}, {})) sat.push_back({g, a});
    // oracle: 2^a/3 in (g, g+1) and a+g=9 → a=4, g=5... check by direct arithmetic
    std::vector<std::pair<std::uint64_t, std::uint64_t>> expect;
    for (std::uint64_t g = 0; g < 256; ++g)
        for (std::uint64_t a = 0; a < 256; ++a) {
            if (g + a != 9 || a >= 63) continue;
            // g < 2^a/3 < g+1  ⟺  3g < 2^a < 3g+3 (2^a is never divisible by 3)
            unsigned long long pow = 1ull << a;
            if (3 * g < pow && pow < 3 * g + 3) expect.push_back({g, a});
        }
    CHECK(sat == expect);
    REQUIRE(sat.size() == 1);
    CHECK(sat[0] == std::pair<std::uint64_t, std::uint64_t>{5, 4});
}

TEST_CASE("json round trips") {
    ConstraintSystem s;
    s.atoms.push_back(PolyEq{Poly{{BigInt("123456789012345678901234567890"), {{"x", 2}, {"y", 1}}},
                                  {BigInt(-1), {}}}});
    s.atoms.push_back(DominatesAtom{Poly{{BigInt(1), {{"a", 1}}}}, Poly{{BigInt(7), {}}}});
    IntervalAtom ia;
    ia.g = "g";
    ia.a = "a";
    ia.r = Rational(1, 3);
    s.atoms.push_back(ia);
    s.atoms.push_back(ExpAtom{"2", "n", "p"});

    ConstraintSystem back = system_from_json(system_to_json(s));
    REQUIRE(back.atoms.size() == s.atoms.size());
    WitnessTuple w{{"x", 1}, {"y", 1}, {"a", 3}, {"g", 2}, {"n", 3}, {"p", 8}};
    CHECK(eval_system(back, w, {}) == eval_system(s, w, {}));

    WitnessTuple w2 = witness_from_json(witness_to_json(w));
    CHECK(w2 == w);

    CHECK_THROWS_AS(system_from_json("{"), DiophantineError);
    CHECK_THROWS_AS(system_from_json(R"({"atoms":[{"type":"nope"}]})"), DiophantineError);
}

TEST_CASE("fraction_bit") {
    // 1/3 = 0.010101...
    CHECK(fraction_bit(Rational(1, 3), 0) == 0);
    CHECK(fraction_bit(Rational(1, 3), 1) == 1);
    CHECK(fraction_bit(Rational(1, 3), 2) == 0);
    // 5/8 = 0.101
    CHECK(fraction_bit(Rational(5, 8), 0) == 1);
    CHECK(fraction_bit(Rational(5, 8), 1) == 0);
    CHECK(fraction_bit(Rational(5, 8), 2) == 1);
    CHECK(fraction_bit(Rational(5, 8), 3) == 0);
}

TEST_CASE("run_truncated basics") {
    Program halts = assemble("HALT\n");
    for (std::uint64_t n = 1; n <= 8; ++n)
        CHECK(run_truncated(halts, Rational(1, 3), Rational(1, 2), n) ==
              TruncationResult::NormalHalt);

    // reads bit 5 of x then halts; INC i five times to aim the index register
    Program bit5 = assemble(
        "INC i\nINC i\nINC i\nINC i\nINC i\n"
        "BBZ x i done\n"
        "done: HALT\n");
    for (std::uint64_t n = 1; n <= 5; ++n)
        CHECK(run_truncated(bit5, Rational(1, 3), Rational(1, 2), n) ==
              TruncationResult::Abnormal);
    for (std::uint64_t n = 6; n <= 16; ++n)
        CHECK(run_truncated(bit5, Rational(1, 3), Rational(1, 2), n) ==
              TruncationResult::NormalHalt);
}

TEST_CASE("run_truncated budget") {
    // diverges without touching bits: budget cuts it off
    Program spin = assemble("L: BEQ a a L\nHALT\n");
    CHECK(run_truncated(spin, Rational(1, 3), Rational(1, 2), 4) ==
          TruncationResult::Abnormal);
    CHECK(run_truncated(spin, Rational(1, 3), Rational(1, 2), 4, 10) ==
          TruncationResult::Abnormal);
}

TEST_CASE("run_truncated monotone convergence") {
    // branch chain over the first bits of x = 1/3 and r = 5/8
    Program p = assemble(
        "BBZ x i zero\n"
        "INC i\n"
        "zero: BBZ r i other\n"
        "INC i\n"
        "other: INC i\nINC i\n"
        "BBZ x i done\n"
        "done: HALT\n");
    bool halted = false;
    for (std::uint64_t n = 1; n <= 64; ++n) {
        TruncationResult res = run_truncated(p, Rational(1, 3), Rational(5, 8), n);
        if (halted) CHECK(res == TruncationResult::NormalHalt);
        if (res == TruncationResult::NormalHalt) halted = true;
    }
    CHECK(halted);
}
