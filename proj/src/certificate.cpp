#include "ordinalvm/certificate.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace ovm {

// ---------------------------------------------------------------------------
// Record payload helpers
// ---------------------------------------------------------------------------

Record Record::z(const ZStatement& st) {
    Record r;
    r.tag = Tag::Z;
    r.payload.push_back(static_cast<std::uint64_t>(st.kind));
    r.payload.push_back(st.a);
    if (st.kind == ZStatement::Kind::Less || st.kind == ZStatement::Kind::Succ)
        r.payload.push_back(st.b);
    return r;
}

ZStatement Record::as_z() const {
    if (tag != Tag::Z || payload.empty())
        throw CertificateError("record is not a Z statement");
    auto kind = static_cast<ZStatement::Kind>(payload[0]);
    switch (kind) {
        case ZStatement::Kind::Final:
        case ZStatement::Kind::Limit:
            if (payload.size() != 2) throw CertificateError("bad Z payload arity");
            return {kind, payload[1], 0};
        case ZStatement::Kind::Less:
        case ZStatement::Kind::Succ:
            if (payload.size() != 3) throw CertificateError("bad Z payload arity");
            return {kind, payload[1], payload[2]};
    }
    throw CertificateError("bad Z statement kind " + std::to_string(payload[0]));
}

// ---------------------------------------------------------------------------
// Bijection
// ---------------------------------------------------------------------------

Bijection::Bijection(const Ordinal& alpha) : alpha_(alpha) {
    for (const Ordinal::Term& t : alpha.terms())
        if (t.exp > 1)
            throw CertificateError("order type " + alpha.str() +
                                   " not supported (>= w^2)");
    std::uint64_t n = alpha.coeff_of(0);
    if (n == 0)
        throw CertificateError("order type " + alpha.str() +
                               " has no final element; certificates describe halting runs");
    blocks_ = alpha.coeff_of(1);
    tail_ = n - 1;
}

std::uint64_t Bijection::count() const {
    if (!finite()) throw CertificateError("infinite bijection has no count");
    return tail_ + 1;
}

Ordinal Bijection::element(std::uint64_t index) const {
    const std::uint64_t k = blocks_;
    const std::uint64_t m = tail_;
    if (index == 0) return Ordinal::term(1, k) + Ordinal::nat(m);  // final element
    std::uint64_t i = index - 1;
    if (k == 0) {
        if (i >= m) throw CertificateError("bijection index out of range");
        return Ordinal::nat(i);
    }
    if (i < m * (k + 1)) {
        std::uint64_t round = i / (k + 1);
        std::uint64_t j = i % (k + 1);
        if (j < k) return Ordinal::term(1, j) + Ordinal::nat(round);
        return Ordinal::term(1, k) + Ordinal::nat(round);  // tail chain
    }
    std::uint64_t i2 = i - m * (k + 1);
    std::uint64_t j = i2 % k;
    std::uint64_t round = m + i2 / k;
    return Ordinal::term(1, j) + Ordinal::nat(round);
}

std::uint64_t Bijection::index_of(const Ordinal& e) const {
    if (e >= alpha_) throw CertificateError("element " + e.str() + " not below " + alpha_.str());
    const std::uint64_t k = blocks_;
    const std::uint64_t m = tail_;
    std::uint64_t j = e.coeff_of(1);
    std::uint64_t r = e.coeff_of(0);
    if (j == k && r == m) return 0;  // final
    if (j == k) return r * (k + 1) + k + 1;  // tail (r < m)
    if (r < m) return r * (k + 1) + j + 1;
    return m * (k + 1) + (r - m) * k + j + 1;
}

Ordinal order_type(const RunSummary& s) {
    if (s.outcome != RunSummary::Outcome::Halted)
        throw CertificateError("certificates exist only for halted runs");
    return s.halt_time().succ();
}

// ---------------------------------------------------------------------------
// Z stream
// ---------------------------------------------------------------------------

ZGen::ZGen(const Bijection& b) : b_(&b) {
    queue_.push_back(ZStatement::final(0));
    if (b_->element(0).is_limit()) queue_.push_back(ZStatement::limit(0));
    sum_ = 1;
}

void ZGen::refill() {
    // One index sum per refill: all pair facts (by smaller index), then
    // the unary limit fact for the sum itself.
    const std::uint64_t s = sum_;
    const bool finite = b_->finite();
    const std::uint64_t cnt = finite ? b_->count() : 0;
    if (finite && s > 2 * cnt) { done_ = true; return; }
    for (std::uint64_t a = 0; 2 * a < s; ++a) {
        std::uint64_t bidx = s - a;
        if (finite && (bidx >= cnt || a >= cnt)) continue;
        Ordinal ea = b_->element(a);
        Ordinal eb = b_->element(bidx);
        if (ea < eb)
            queue_.push_back(ZStatement::less(a, bidx));
        else
            queue_.push_back(ZStatement::less(bidx, a));
        if (eb == ea.succ()) queue_.push_back(ZStatement::succ(bidx, a));
        if (ea == eb.succ()) queue_.push_back(ZStatement::succ(a, bidx));
    }
    if (!finite || s < cnt)
        if (b_->element(s).is_limit()) queue_.push_back(ZStatement::limit(s));
    ++sum_;
}

std::optional<ZStatement> ZGen::next() {
    while (queue_.empty() && !done_) refill();
    if (queue_.empty()) return std::nullopt;
    ZStatement st = queue_.front();
    queue_.pop_front();
    return st;
}

// ---------------------------------------------------------------------------
// Control stream
// ---------------------------------------------------------------------------

ControlGen::ControlGen(const RunSummary& s, const Bijection& b) : s_(&s), b_(&b) {}

std::optional<Record> ControlGen::next() {
    if (b_->finite() && i_ >= b_->count()) return std::nullopt;
    Configuration c = config_at(*s_, b_->element(i_));
    Record r;
    r.tag = Record::Tag::Control;
    r.payload = {i_, static_cast<std::uint64_t>(c.ip)};
    ++i_;
    return r;
}

// ---------------------------------------------------------------------------
// Value stream
// ---------------------------------------------------------------------------

ValueGen::ValueGen(const RunSummary& s, const Bijection& b, std::size_t num_regs)
    : s_(&s), b_(&b), num_regs_(num_regs) {}

std::optional<Record> ValueGen::next() {
    if (num_regs_ == 0) return std::nullopt;
    if (b_->finite() && i_ >= b_->count()) return std::nullopt;
    Configuration c = config_at(*s_, b_->element(i_));
    const Ordinal& val = c.regs[reg_];
    if (val >= b_->order_type())
        throw CertificateError("register value " + val.str() +
                               " exceeds the halt time; run not certifiable");
    Record r;
    r.tag = Record::Tag::Value;
    r.payload = {static_cast<std::uint64_t>(reg_), i_, b_->index_of(val)};
    ++reg_;
    if (reg_ == num_regs_) { reg_ = 0; ++i_; }
    return r;
}

// ---------------------------------------------------------------------------
// Inverse stream
// ---------------------------------------------------------------------------

Ordinal earliest_attainment(const RunSummary& s, std::size_t reg, const Ordinal& value) {
    for (const RunSummary::Phase& ph : s.phases) {
        if (const auto* seg = std::get_if<RunSummary::ConcreteSegment>(&ph)) {
            for (const Configuration& c : *seg) {
                if (c.regs[reg] == value) return c.time;
                if (c.regs[reg] > value)
                    throw CertificateError("value " + value.str() + " never attained");
            }
        } else {
            const auto& j = std::get<RunSummary::LimitJump>(ph);
            const Ordinal& base = j.pre.regs[reg];
            std::uint64_t d = j.loop.deltas[reg];
            if (d == 0) {
                if (base == value) return j.pre.time;
                if (base > value)
                    throw CertificateError("value " + value.str() + " never attained");
                continue;
            }
            if (value.limit_part() != base.limit_part()) {
                if (value < base)
                    throw CertificateError("value " + value.str() + " never attained");
                continue;  // attained at or after the limit, next phases cover it
            }
            std::uint64_t fb = base.finite_part();
            std::uint64_t fv = value.finite_part();
            if (fv < fb) throw CertificateError("value " + value.str() + " never attained");
            const std::uint64_t p = j.loop.period;
            std::vector<std::uint64_t> partial(p, 0);
            std::uint64_t acc = 0;
            for (std::uint64_t o = 0; o < p; ++o) {
                partial[o] = acc;
                if (j.loop.inc_slot[o] == static_cast<int>(reg)) ++acc;
            }
            std::uint64_t q0 = (fv - fb) / d;
            for (std::uint64_t q = (q0 > 0 ? q0 - 1 : 0); q <= q0 + 1; ++q)
                for (std::uint64_t o = 0; o < p; ++o)
                    if (fb + q * d + partial[o] == fv)
                        return j.pre.time + (q * p + o);
        }
    }
    throw CertificateError("value " + value.str() + " never attained");
}

InverseGen::InverseGen(const RunSummary& s, const Bijection& b, std::size_t num_regs)
    : s_(&s), b_(&b) {
    Configuration first = config_at(s, Ordinal{});
    const std::uint64_t k = b.blocks();
    const std::uint64_t m = b.tail_len();
    for (std::size_t r = 0; r < num_regs; ++r) {
        RegState st;
        st.lo = first.regs[r];
        st.hi = s.final_config.regs[r];
        st.infinite = false;
        for (std::uint64_t j = 0; j < k && !st.infinite; ++j) {
            Ordinal block_end = Ordinal::term(1, j + 1);
            if (st.hi >= block_end && st.lo < block_end) st.infinite = true;
        }
        if (!st.infinite) {
            // materialize the (finite) attained index set, sorted
            auto push_range = [&](std::uint64_t chain_exp_coeff, std::uint64_t chain_len) {
                Ordinal base = Ordinal::term(1, chain_exp_coeff);
                for (std::uint64_t r2 = 0; r2 < chain_len; ++r2) {
                    Ordinal e = base + Ordinal::nat(r2);
                    if (e >= st.lo && e <= st.hi)
                        st.finite_indices.push_back(b.index_of(e));
                }
            };
            for (std::uint64_t j = 0; j < k; ++j) {
                // block j qualifies only finitely: up to hi when hi sits in it
                Ordinal bstart = Ordinal::term(1, j);
                Ordinal bend = Ordinal::term(1, j + 1);
                if (st.hi < bstart || st.lo >= bend) continue;
                std::uint64_t hi_fin = (st.hi < bend) ? st.hi.finite_part() : 0;
                std::uint64_t lo_fin = (st.lo > bstart && st.lo.limit_part() == bstart.limit_part()
                                        && st.lo.coeff_of(1) == j) ? st.lo.finite_part() : 0;
                Ordinal base = bstart;
                for (std::uint64_t r2 = lo_fin; r2 <= hi_fin; ++r2) {
                    Ordinal e = base + Ordinal::nat(r2);
                    if (e >= st.lo && e <= st.hi) st.finite_indices.push_back(b.index_of(e));
                }
            }
            push_range(k, m);  // tail chain
            {
                Ordinal fin_el = Ordinal::term(1, k) + Ordinal::nat(m);
                if (fin_el >= st.lo && fin_el <= st.hi) st.finite_indices.push_back(0);
            }
            std::sort(st.finite_indices.begin(), st.finite_indices.end());
        }
        regs_.push_back(std::move(st));
    }
}

std::optional<Record> InverseGen::advance(std::size_t reg) {
    RegState& st = regs_[reg];
    std::uint64_t v;
    if (st.infinite) {
        // candidate indices for a register spanning whole blocks recur
        // with bounded gaps; scan forward until the next one
        for (;;) {
            v = st.next_v++;
            Ordinal e = b_->element(v);
            if (e >= st.lo && e <= st.hi) break;
        }
    } else {
        if (st.finite_pos >= st.finite_indices.size()) { st.exhausted = true; return std::nullopt; }
        v = st.finite_indices[st.finite_pos++];
    }
    Ordinal t = earliest_attainment(*s_, reg, b_->element(v));
    Record r;
    r.tag = Record::Tag::Inverse;
    r.payload = {static_cast<std::uint64_t>(reg), v, b_->index_of(t)};
    return r;
}

std::optional<Record> InverseGen::next() {
    for (std::size_t tries = 0; tries < regs_.size(); ++tries) {
        std::size_t reg = cursor_;
        cursor_ = (cursor_ + 1) % regs_.size();
        if (regs_[reg].exhausted) continue;
        if (auto r = advance(reg)) return r;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Multiplexed certificate stream
// ---------------------------------------------------------------------------

CertificateStream::CertificateStream(const Program& p, const RunSummary& s)
    : bij_(order_type(s)),
      z_(bij_),
      control_(s, bij_),
      value_(s, bij_, p.regs.size()),
      inverse_(s, bij_, p.regs.size()) {
    for (std::size_t r = 0; r < p.regs.size(); ++r)
        if (s.final_config.regs[r] >= bij_.order_type())
            throw CertificateError("register " + p.regs[r] + " exceeds the halt time; run not certifiable");
}

std::optional<Record> CertificateStream::next() {
    for (int tries = 0; tries < 4; ++tries) {
        int t = turn_;
        turn_ = (turn_ + 1) % 4;
        switch (t) {
            case 0:
                if (z_done_) break;
                if (auto st = z_.next()) return Record::z(*st);
                z_done_ = true;
                break;
            case 1:
                if (c_done_) break;
                if (auto r = control_.next()) return r;
                c_done_ = true;
                break;
            case 2:
                if (v_done_) break;
                if (auto r = value_.next()) return r;
                v_done_ = true;
                break;
            case 3:
                if (i_done_) break;
                if (auto r = inverse_.next()) return r;
                i_done_ = true;
                break;
        }
    }
    return std::nullopt;
}

std::vector<Record> make_certificate(const Program& p, const RunSummary& s,
                                     std::size_t max_records) {
    CertificateStream cs(p, s);
    std::vector<Record> out;
    out.reserve(std::min<std::size_t>(max_records, 1 << 20));
    while (out.size() < max_records) {
        auto r = cs.next();
        if (!r) break;
        out.push_back(std::move(*r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bit encoding
// ---------------------------------------------------------------------------

std::string encode_bits(const std::vector<Record>& records) {
    std::string bits;
    auto put = [&bits](std::uint64_t v) {
        bits.append(v + 1, '1');
        bits.push_back('0');
    };
    for (const Record& r : records) {
        put(static_cast<std::uint64_t>(r.tag));
        for (std::uint64_t v : r.payload) put(v);
        bits.push_back('0');  // record terminator
    }
    return bits;
}

std::vector<Record> decode_bits(std::string_view bits) {
    std::vector<Record> out;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < bits.size() && std::isspace(static_cast<unsigned char>(bits[i]))) ++i;
    };
    skip_ws();
    while (i < bits.size()) {
        std::vector<std::uint64_t> nums;
        for (;;) {
            skip_ws();
            std::size_t start = i;
            std::uint64_t ones = 0;
            while (i < bits.size() && bits[i] == '1') { ++ones; ++i; skip_ws(); }
            if (i >= bits.size())
                throw FramingError(start, "truncated record at bit " + std::to_string(start));
            if (bits[i] != '0')
                throw FramingError(i, "unexpected character '" + std::string(1, bits[i]) +
                                          "' at bit " + std::to_string(i));
            ++i;  // number/record separator
            if (ones == 0) {
                if (nums.empty())
                    throw FramingError(start, "empty record at bit " + std::to_string(start));
                break;  // double zero: record terminator
            }
            nums.push_back(ones - 1);
        }
        Record r;
        if (nums[0] < 1 || nums[0] > 4)
            throw FramingError(i, "bad record tag " + std::to_string(nums[0]));
        r.tag = static_cast<Record::Tag>(nums[0]);
        r.payload.assign(nums.begin() + 1, nums.end());
        std::size_t want = 0;
        switch (r.tag) {
            case Record::Tag::Z: {
                try { (void)r.as_z(); } catch (const CertificateError& e) {
                    throw FramingError(i, e.what());
                }
                want = r.payload.size();
                break;
            }
            case Record::Tag::Control: want = 2; break;
            case Record::Tag::Value:
            case Record::Tag::Inverse: want = 3; break;
        }
        if (r.payload.size() != want)
            throw FramingError(i, "bad payload arity for tag " + std::to_string(nums[0]));
        out.push_back(std::move(r));
        skip_ws();
    }
    return out;
}

std::string pack_bits(std::string_view bits) {
    std::string out(4, '\0');
    std::uint32_t n = static_cast<std::uint32_t>(bits.size());
    for (int i = 0; i < 4; ++i) out[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
    out.resize(4 + (bits.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] == '1') out[4 + i / 8] |= static_cast<char>(1 << (i % 8));
    return out;
}

std::string unpack_bits(std::string_view packed) {
    if (packed.size() < 4) throw FramingError(0, "packed stream shorter than its header");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i)
        n |= static_cast<std::uint32_t>(static_cast<unsigned char>(packed[i])) << (8 * i);
    if (packed.size() < 4 + (n + 7) / 8)
        throw FramingError(4, "packed stream shorter than its header claims");
    std::string bits(n, '0');
    for (std::uint32_t i = 0; i < n; ++i)
        if (static_cast<unsigned char>(packed[4 + i / 8]) & (1 << (i % 8))) bits[i] = '1';
    return bits;
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

std::string record_to_text(const Record& r, const Program& p) {
    std::ostringstream os;
    switch (r.tag) {
        case Record::Tag::Z: {
            ZStatement st = r.as_z();
            os << "Z ";
            switch (st.kind) {
                case ZStatement::Kind::Final: os << "FINAL " << st.a; break;
                case ZStatement::Kind::Less: os << "LESS " << st.a << " " << st.b; break;
                case ZStatement::Kind::Succ: os << "SUCC " << st.a << " " << st.b; break;
                case ZStatement::Kind::Limit: os << "LIMIT " << st.a; break;
            }
            break;
        }
        case Record::Tag::Control:
            os << "CONTROL " << r.payload[0] << " " << r.payload[1];
            break;
        case Record::Tag::Value:
            os << "VALUE " << p.regs.at(r.payload[0]) << " " << r.payload[1] << " "
               << r.payload[2];
            break;
        case Record::Tag::Inverse:
            os << "INVERSE " << p.regs.at(r.payload[0]) << " " << r.payload[1] << " "
               << r.payload[2];
            break;
    }
    return os.str();
}

Record record_from_text(std::string_view line, const Program& p) {
    std::istringstream is{std::string(line)};
    std::string head;
    is >> head;
    auto num = [&is, &line]() -> std::uint64_t {
        std::uint64_t v;
        if (!(is >> v)) throw CertificateError("bad record line: " + std::string(line));
        return v;
    };
    auto reg = [&is, &p, &line]() -> std::uint64_t {
        std::string name;
        if (!(is >> name)) throw CertificateError("bad record line: " + std::string(line));
        int slot = p.reg_slot(name);
        if (slot < 0) throw CertificateError("unknown register '" + name + "'");
        return static_cast<std::uint64_t>(slot);
    };
    if (head == "Z") {
        std::string kind;
        is >> kind;
        if (kind == "FINAL") return Record::z(ZStatement::final(num()));
        if (kind == "LIMIT") return Record::z(ZStatement::limit(num()));
        if (kind == "LESS") { auto a = num(); auto b = num(); return Record::z(ZStatement::less(a, b)); }
        if (kind == "SUCC") { auto a = num(); auto b = num(); return Record::z(ZStatement::succ(a, b)); }
        throw CertificateError("bad Z statement kind '" + kind + "'");
    }
    Record r;
    if (head == "CONTROL") {
        r.tag = Record::Tag::Control;
        auto a = num(); auto b = num();
        r.payload = {a, b};
        return r;
    }
    if (head == "VALUE" || head == "INVERSE") {
        r.tag = head == "VALUE" ? Record::Tag::Value : Record::Tag::Inverse;
        auto rg = reg(); auto a = num(); auto b = num();
        r.payload = {rg, a, b};
        return r;
    }
    throw CertificateError("bad record line: " + std::string(line));
}

std::string records_to_text(const std::vector<Record>& records, const Program& p) {
    std::string out;
    for (const Record& r : records) {
        out += record_to_text(r, p);
        out += "\n";
    }
    return out;
}

std::vector<Record> records_from_text(std::string_view text, const Program& p) {
    std::vector<Record> out;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(record_from_text(line, p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mutation catalog
// ---------------------------------------------------------------------------

namespace {

const struct {
    MutationKind kind;
    const char* name;
    const char* rule;
} kMutationTable[] = {
    {MutationKind::FinalNotFirst, "FinalNotFirst", "R1"},
    {MutationKind::ReverseLess, "ReverseLess", "R6"},
    {MutationKind::DropSucc, "DropSucc", "R5"},
    {MutationKind::InsertCycle, "InsertCycle", "R4"},
    {MutationKind::WrongControlAtLimit, "WrongControlAtLimit", "R8"},
    {MutationKind::WrongSuccessorControl, "WrongSuccessorControl", "R7"},
    {MutationKind::NonMonotoneValue, "NonMonotoneValue", "R9"},
    {MutationKind::BreakInverse, "BreakInverse", "R10"},
    {MutationKind::LateOrderFact, "LateOrderFact", "R5"},
};

bool is_z_kind(const Record& r, ZStatement::Kind k) {
    return r.tag == Record::Tag::Z && !r.payload.empty() &&
           r.payload[0] == static_cast<std::uint64_t>(k);
}

[[noreturn]] void no_site(const char* what) {
    throw CertificateError(std::string("mutation site not found: ") + what);
}

}  // namespace

const char* mutation_name(MutationKind k) {
    for (const auto& e : kMutationTable)
        if (e.kind == k) return e.name;
    return "?";
}

const char* expected_rule(MutationKind k) {
    for (const auto& e : kMutationTable)
        if (e.kind == k) return e.rule;
    return "?";
}

std::optional<MutationKind> mutation_from_name(std::string_view name) {
    for (const auto& e : kMutationTable)
        if (name == e.name) return e.kind;
    return std::nullopt;
}

std::vector<MutationKind> all_mutations() {
    std::vector<MutationKind> out;
    for (const auto& e : kMutationTable) out.push_back(e.kind);
    return out;
}

std::vector<Record> mutate(const std::vector<Record>& records, MutationKind kind,
                           const Program& p, const RunSummary& s) {
    std::vector<Record> out = records;
    auto find_if_rec = [&](auto pred, std::size_t from = 0) -> std::size_t {
        for (std::size_t i = from; i < out.size(); ++i)
            if (pred(out[i])) return i;
        return out.size();
    };

    switch (kind) {
        case MutationKind::FinalNotFirst: {
            // swap the leading Final with the following Z statement
            std::size_t z0 = find_if_rec([](const Record& r) { return r.tag == Record::Tag::Z; });
            if (z0 >= out.size() || !is_z_kind(out[z0], ZStatement::Kind::Final))
                no_site("leading Final statement");
            std::size_t z1 = find_if_rec(
                [](const Record& r) { return r.tag == Record::Tag::Z; }, z0 + 1);
            if (z1 >= out.size()) no_site("second Z statement");
            std::swap(out[z0], out[z1]);
            return out;
        }
        case MutationKind::ReverseLess: {
            // reverse the order fact of a successor pair whose predecessor
            // already has its own successor fact on record: the reversal
            // then squeezes an element between that earlier pair
            std::set<std::uint64_t> have_pred;
            std::size_t sp = out.size();
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (!is_z_kind(out[i], ZStatement::Kind::Succ)) continue;
                std::uint64_t mm = out[i].payload[1], nn = out[i].payload[2];
                if (mm != 0 && nn != 0 && have_pred.count(nn)) { sp = i; break; }
                have_pred.insert(mm);
            }
            if (sp >= out.size()) no_site("successor pair with a charted predecessor");
            std::uint64_t m = out[sp].payload[1], n = out[sp].payload[2];
            std::size_t lp = find_if_rec([&](const Record& r) {
                return is_z_kind(r, ZStatement::Kind::Less) &&
                       ((r.payload[1] == n && r.payload[2] == m) ||
                        (r.payload[1] == m && r.payload[2] == n));
            });
            if (lp >= out.size()) no_site("order fact for the successor pair");
            std::swap(out[lp].payload[1], out[lp].payload[2]);
            return out;
        }
        case MutationKind::DropSucc: {
            std::size_t sp = find_if_rec(
                [](const Record& r) { return is_z_kind(r, ZStatement::Kind::Succ); });
            if (sp >= out.size()) no_site("successor statement");
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(sp));
            return out;
        }
        case MutationKind::InsertCycle: {
            std::size_t lp = find_if_rec(
                [](const Record& r) { return is_z_kind(r, ZStatement::Kind::Less); });
            if (lp >= out.size()) no_site("order fact");
            Record rev = out[lp];
            std::swap(rev.payload[1], rev.payload[2]);
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(lp) + 1, rev);
            return out;
        }
        case MutationKind::WrongControlAtLimit: {
            std::size_t lim = find_if_rec(
                [](const Record& r) { return is_z_kind(r, ZStatement::Kind::Limit); });
            if (lim >= out.size()) no_site("limit statement");
            std::uint64_t m = out[lim].payload[1];
            std::size_t cp = find_if_rec([&](const Record& r) {
                return r.tag == Record::Tag::Control && r.payload[0] == m;
            });
            if (cp >= out.size()) no_site("control record at the limit index");
            std::uint64_t wrong = out[cp].payload[1] == 2 ? 1 : 2;
            if (wrong >= p.code.size()) wrong = out[cp].payload[1] == 1 ? 0 : 1;
            out[cp].payload[1] = wrong;
            return out;
        }
        case MutationKind::WrongSuccessorControl: {
            std::size_t sp = find_if_rec([](const Record& r) {
                return is_z_kind(r, ZStatement::Kind::Succ) && r.payload[1] != 0 &&
                       r.payload[2] != 0;
            });
            if (sp >= out.size()) no_site("successor pair away from the final index");
            std::uint64_t m = out[sp].payload[1];
            std::size_t cp = find_if_rec([&](const Record& r) {
                return r.tag == Record::Tag::Control && r.payload[0] == m;
            });
            if (cp >= out.size()) no_site("control record at the successor index");
            std::uint64_t old = out[cp].payload[1];
            std::uint64_t wrong = 0;
            while (wrong == old || p.is_halt(static_cast<int>(wrong))) ++wrong;
            if (wrong >= p.code.size()) no_site("non-halt replacement line");
            out[cp].payload[1] = wrong;
            return out;
        }
        case MutationKind::NonMonotoneValue: {
            // lower a later value to an earlier, smaller one; the site is
            // chosen so no inverse record cites the tampered timestep and
            // the drop is visible against the adjacent timestep, letting
            // the monotonicity contradiction complete first
            Bijection bij(order_type(s));
            std::set<std::uint64_t> cited;
            for (const Record& r : out)
                if (r.tag == Record::Tag::Inverse) cited.insert(r.payload[2]);
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (out[j].tag != Record::Tag::Value) continue;
                if (cited.count(out[j].payload[1])) continue;
                for (std::size_t i = 0; i < j; ++i) {
                    if (out[i].tag != Record::Tag::Value) continue;
                    if (out[i].payload[0] != out[j].payload[0]) continue;
                    std::uint64_t u = out[i].payload[2], v = out[j].payload[2];
                    if (u == v || bij.element(u) >= bij.element(v)) continue;
                    out[j].payload[2] = u;
                    return out;
                }
            }
            no_site("late value with a smaller earlier value");
        }
        case MutationKind::BreakInverse: {
            std::size_t ip = find_if_rec(
                [](const Record& r) { return r.tag == Record::Tag::Inverse; });
            if (ip >= out.size()) no_site("inverse record");
            std::uint64_t rg = out[ip].payload[0];
            std::uint64_t v = out[ip].payload[1];
            std::size_t vp = find_if_rec([&](const Record& r) {
                return r.tag == Record::Tag::Value && r.payload[0] == rg &&
                       r.payload[2] != v;
            });
            if (vp >= out.size()) no_site("timestep holding a different value");
            out[ip].payload[2] = out[vp].payload[1];
            return out;
        }
        case MutationKind::LateOrderFact: {
            std::size_t lp = find_if_rec(
                [](const Record& r) { return is_z_kind(r, ZStatement::Kind::Less); });
            if (lp >= out.size()) no_site("order fact");
            Record moved = out[lp];
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(lp));
            // reinsert after a dozen further Z statements, past its deadline
            std::size_t zseen = 0, at = out.size();
            for (std::size_t i = lp; i < out.size(); ++i) {
                if (out[i].tag == Record::Tag::Z && ++zseen == 12) { at = i + 1; break; }
            }
            if (at > out.size()) no_site("later position for the order fact");
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), moved);
            return out;
        }
    }
    (void)s;
    throw CertificateError("unknown mutation kind");
}

}  // namespace ovm
