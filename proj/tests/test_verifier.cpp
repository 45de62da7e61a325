#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "ordinalvm/verifier.hpp"

using namespace ovm;

namespace {

const char* kWaiter =
    "loop: BEQ x y done\n"
    "INC x\n"
    "BEQ x x loop\n"
    "done: HALT\n";

struct Fixture {
    Program p;
    RunSummary s;
    std::vector<Record> cert;
    Fixture() {
        p = assemble(kWaiter);
        s = run(p, {{"y", Ordinal::omega()}}, 100000, 16);
        cert = make_certificate(p, s, 100000);
    }
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

Record zr(const ZStatement& st) { return Record::z(st); }

}  // namespace

TEST_CASE("empty stream accepts vacuously") {
    Verdict v = verify(fx().p, {}, 0);
    CHECK(v.accepted);
    CHECK(v.consumed == 0);
}

TEST_CASE("final must be first") {
    Verdict v = verify(fx().p, {zr(ZStatement::less(1, 2))}, 10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.position == 0);
    CHECK(v.rule == "R1");

    Verdict ok = verify(fx().p, {zr(ZStatement::final(0))}, 10);
    CHECK(ok.accepted);

    // a second Final contradicts the first
    Verdict dup = verify(
        fx().p, {zr(ZStatement::final(0)), zr(ZStatement::final(1))}, 10);
    REQUIRE_FALSE(dup.accepted);
    CHECK(dup.rule == "R1");

    // nothing sits above the final element
    Verdict above = verify(
        fx().p, {zr(ZStatement::final(0)), zr(ZStatement::less(0, 1))}, 10);
    REQUIRE_FALSE(above.accepted);
    CHECK(above.rule == "R1");
    CHECK(above.position == 1);
}

TEST_CASE("antisymmetry R4") {
    Verdict v = verify(fx().p,
                       {zr(ZStatement::final(0)), zr(ZStatement::less(3, 5)),
                        zr(ZStatement::less(5, 3))},
                       10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.position == 2);
    CHECK(v.rule == "R4");

    // transitive cycle: 5<6, 6<7, 7<5 (high indices keep R5 deadlines away)
    Verdict t = verify(fx().p,
                       {zr(ZStatement::final(0)), zr(ZStatement::less(5, 6)),
                        zr(ZStatement::less(6, 7)), zr(ZStatement::less(7, 5))},
                       10);
    REQUIRE_FALSE(t.accepted);
    CHECK(t.position == 3);
    CHECK(t.rule == "R4");
}

TEST_CASE("discreteness R6") {
    // l strictly between a successor pair; indices kept high so no R5
    // deadline expires inside these short streams
    Verdict v = verify(fx().p,
                       {zr(ZStatement::final(0)), zr(ZStatement::succ(6, 5)),
                        zr(ZStatement::less(5, 7)), zr(ZStatement::less(7, 6))},
                       10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R6");
    CHECK(v.position == 3);

    // same, with the succ fact arriving last (retroactive check)
    Verdict late = verify(fx().p,
                          {zr(ZStatement::final(0)), zr(ZStatement::less(5, 7)),
                           zr(ZStatement::less(7, 6)), zr(ZStatement::succ(6, 5))},
                          10);
    REQUIRE_FALSE(late.accepted);
    CHECK(late.rule == "R6");
    CHECK(late.position == 3);

    // a successor is never a limit
    Verdict lim = verify(fx().p,
                         {zr(ZStatement::final(0)), zr(ZStatement::succ(6, 5)),
                          zr(ZStatement::limit(6))},
                         10);
    REQUIRE_FALSE(lim.accepted);
    CHECK(lim.rule == "R6");

    // successors are unique
    Verdict uniq = verify(fx().p,
                          {zr(ZStatement::final(0)), zr(ZStatement::succ(6, 5)),
                           zr(ZStatement::succ(7, 5))},
                          10);
    REQUIRE_FALSE(uniq.accepted);
    CHECK(uniq.rule == "R6");

    // succ contradicting an existing less
    Verdict contra = verify(fx().p,
                            {zr(ZStatement::final(0)), zr(ZStatement::less(6, 5)),
                             zr(ZStatement::succ(6, 5))},
                            10);
    REQUIRE_FALSE(contra.accepted);
    CHECK(contra.rule == "R6");
}

TEST_CASE("order deadline R5") {
    // mention pair (1,2) via unrelated facts, never order it; deadline is
    // z-position 2*(1+2)^2 = 18
    std::vector<Record> recs{zr(ZStatement::final(0))};
    recs.push_back(zr(ZStatement::less(1, 0)));
    recs.push_back(zr(ZStatement::less(2, 0)));
    for (std::uint64_t i = 3; i < 40; ++i) recs.push_back(zr(ZStatement::less(i, 0)));
    Verdict v = verify(fx().p, recs, recs.size());
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R5");
    CHECK(v.position == 18);  // first record whose z-position hits the bound
}

TEST_CASE("control rules R2/R3") {
    // control at the final index must be the stop command
    Verdict v = verify(fx().p,
                       {zr(ZStatement::final(0)), Record{Record::Tag::Control, {0, 1}}},
                       10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R2");

    // control elsewhere must not be the stop command: 0 < index 1 known,
    // so index 1 is non-final
    Verdict v3 = verify(fx().p,
                        {zr(ZStatement::final(0)), zr(ZStatement::less(1, 0)),
                         Record{Record::Tag::Control, {1, 3}}},
                        10);
    REQUIRE_FALSE(v3.accepted);
    CHECK(v3.rule == "R3");

    // out-of-range control line
    Verdict oor = verify(fx().p,
                         {zr(ZStatement::final(0)), Record{Record::Tag::Control, {0, 9}}},
                         10);
    CHECK_FALSE(oor.accepted);
}

TEST_CASE("limit control R8") {
    Verdict v = verify(fx().p,
                       {zr(ZStatement::final(0)), zr(ZStatement::limit(2)),
                        Record{Record::Tag::Control, {2, 1}}},
                       10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R8");
}

TEST_CASE("malformed records reject with FRAME") {
    Record bad{Record::Tag::Value, {99, 0, 0}};  // register id out of range
    Verdict v = verify(fx().p, {zr(ZStatement::final(0)), bad}, 10);
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "FRAME");
}

TEST_CASE("clean waiter certificate accepts 1e5 records") {
    Verdict v = verify(fx().p, fx().cert, 100000);
    CHECK(v.accepted);
    CHECK(v.consumed == 100000);
}

TEST_CASE("every prefix of a clean certificate accepts") {
    Verifier ver(fx().p);
    std::size_t fed = 0;
    for (const Record& r : fx().cert) {
        if (fed >= 20000) break;
        auto verdict = ver.ingest(r);
        ++fed;
        REQUIRE_FALSE(verdict.has_value());
    }
    // and verify() agrees on sampled prefixes
    for (std::size_t n : {0u, 1u, 2u, 17u, 100u, 4097u}) {
        Verdict v = verify(fx().p, fx().cert, n);
        CHECK(v.accepted);
        CHECK(v.consumed == n);
    }
}

TEST_CASE("mutation kill with documented rules and stable positions") {
    // positions are part of the determinism contract: frozen from the
    // record-level trace of the waiter certificate
    std::map<MutationKind, std::size_t> expect_pos{
        {MutationKind::FinalNotFirst, 0},      {MutationKind::ReverseLess, 76},
        {MutationKind::DropSucc, 36995},       {MutationKind::InsertCycle, 5},
        {MutationKind::WrongControlAtLimit, 16},
        {MutationKind::WrongSuccessorControl, 36},
        {MutationKind::NonMonotoneValue, 116}, {MutationKind::BreakInverse, 3},
        {MutationKind::LateOrderFact, 11},
    };
    for (MutationKind k : all_mutations()) {
        CAPTURE(mutation_name(k));
        auto bad = mutate(fx().cert, k, fx().p, fx().s);
        Verdict v = verify(fx().p, bad, bad.size());
        REQUIRE_FALSE(v.accepted);
        CHECK(v.rule == expected_rule(k));
        CHECK(v.position == expect_pos.at(k));
        // prefix monotonicity: a longer budget rejects identically, a
        // budget short of the position accepts
        Verdict again = verify(fx().p, bad, bad.size() + 500);
        CHECK(again.position == v.position);
        CHECK(again.rule == v.rule);
        if (v.position > 0) {
            Verdict shorter = verify(fx().p, bad, v.position);
            CHECK(shorter.accepted);
        }
    }
}

TEST_CASE("R7: inc must step the control line") {
    // waiter: element(1)=0 (line 0), element(3)=1; line at timestep 1 is 1
    // (INC path taken since x=0 != y=w). claim line 3 instead.
    std::vector<Record> recs{
        zr(ZStatement::final(0)),
        zr(ZStatement::less(1, 0)),
        zr(ZStatement::less(1, 3)),
        zr(ZStatement::succ(3, 1)),
        Record{Record::Tag::Control, {1, 1}},  // timestep 0 runs line... the BEQ
        Record{Record::Tag::Control, {3, 3}},  // successor control: HALT, wrong
    };
    Verdict v = verify(fx().p, recs, recs.size());
    REQUIRE_FALSE(v.accepted);
    // line 1 is INC, so successor control must be 2; R3 may fire first for
    // the halt line at a non-final index
    CHECK((v.rule == "R7" || v.rule == "R3"));
}

TEST_CASE("R9: values must be monotone along the order") {
    // two indices with known order and values that decrease
    std::vector<Record> recs{
        zr(ZStatement::final(0)),
        zr(ZStatement::less(1, 2)),
        zr(ZStatement::less(1, 0)),
        zr(ZStatement::less(2, 0)),
        zr(ZStatement::less(3, 1)),   // value codes: el(3) < el(1) < el(2)
        zr(ZStatement::less(3, 2)),
        zr(ZStatement::less(3, 0)),
        Record{Record::Tag::Value, {0, 1, 2}},  // x at el(1) = el(2)
        Record{Record::Tag::Value, {0, 2, 3}},  // x at el(2) = el(3): decreased
    };
    Verdict v = verify(fx().p, recs, recs.size());
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R9");
    CHECK(v.position == 8);
}

TEST_CASE("R10: inverse facts bind values to earliest attainment") {
    // inverse says value el(2) first attained at index 1, but a value
    // record puts a different value there
    std::vector<Record> recs{
        zr(ZStatement::final(0)),
        zr(ZStatement::less(1, 2)),
        Record{Record::Tag::Inverse, {0, 2, 1}},
        Record{Record::Tag::Value, {0, 1, 3}},
    };
    Verdict v = verify(fx().p, recs, recs.size());
    REQUIRE_FALSE(v.accepted);
    CHECK(v.rule == "R10");

    // conflicting duplicate inverse
    std::vector<Record> dup{
        zr(ZStatement::final(0)),
        Record{Record::Tag::Inverse, {0, 2, 1}},
        Record{Record::Tag::Inverse, {0, 2, 3}},
    };
    Verdict d = verify(fx().p, dup, dup.size());
    REQUIRE_FALSE(d.accepted);
    CHECK(d.rule == "R10");
}

TEST_CASE("verdicts are deterministic") {
    for (int rep = 0; rep < 3; ++rep) {
        Verdict v = verify(fx().p, fx().cert, 5000);
        CHECK(v.accepted);
        CHECK(v.consumed == 5000);
    }
    auto bad = mutate(fx().cert, MutationKind::InsertCycle, fx().p, fx().s);
    Verdict a = verify(fx().p, bad, bad.size());
    Verdict b = verify(fx().p, bad, bad.size());
    CHECK(a.rule == b.rule);
    CHECK(a.position == b.position);
}
