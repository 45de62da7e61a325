#ifndef ORDINALVM_CERTIFICATE_HPP
#define ORDINALVM_CERTIFICATE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordinalvm/machine.hpp"
#include "ordinalvm/ordinal.hpp"

namespace ovm {

struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FramingError : std::runtime_error {
    std::size_t position;
    FramingError(std::size_t pos, const std::string& msg)
        : std::runtime_error(msg), position(pos) {}
};

// ---------------------------------------------------------------------------
// Stream atoms
// ---------------------------------------------------------------------------

struct ZStatement {
    enum class Kind : std::uint64_t { Final = 1, Less = 2, Succ = 3, Limit = 4 };
    Kind kind;
    std::uint64_t a = 0;  // Final(a) | Less(a,b) | Succ(a,b): a = b+1 | Limit(a)
    std::uint64_t b = 0;
    bool operator==(const ZStatement&) const = default;

    static ZStatement final(std::uint64_t m) { return {Kind::Final, m, 0}; }
    static ZStatement less(std::uint64_t n, std::uint64_t m) { return {Kind::Less, n, m}; }
    static ZStatement succ(std::uint64_t m, std::uint64_t n) { return {Kind::Succ, m, n}; }
    static ZStatement limit(std::uint64_t m) { return {Kind::Limit, m}; }
};

struct Record {
    enum class Tag : std::uint64_t { Z = 1, Control = 2, Value = 3, Inverse = 4 };
    Tag tag;
    std::vector<std::uint64_t> payload;
    // Z: [kind, indices...]; Control: [i, line];
    // Value: [reg, i, v]; Inverse: [reg, v, i]
    bool operator==(const Record&) const = default;

    static Record z(const ZStatement& st);
    ZStatement as_z() const;  // throws CertificateError if not a well-formed Z payload
};

// ---------------------------------------------------------------------------
// Bijection omega -> timesteps
// ---------------------------------------------------------------------------

/// Enumeration of the ordinals below alpha = w*k + n (n >= 1).  Index 0
/// is the final element w*k + n - 1; indices >= 1 round-robin over the k
/// omega-blocks and the finite tail, skipping exhausted chains.
class Bijection {
public:
    explicit Bijection(const Ordinal& alpha);

    Ordinal element(std::uint64_t index) const;
    std::uint64_t index_of(const Ordinal& e) const;  // throws if e >= alpha
    const Ordinal& order_type() const { return alpha_; }
    bool finite() const { return blocks_ == 0; }
    /// Number of indices when finite().
    std::uint64_t count() const;
    std::uint64_t blocks() const { return blocks_; }
    std::uint64_t tail_len() const { return tail_; }

private:
    Ordinal alpha_;
    std::uint64_t blocks_;  // k
    std::uint64_t tail_;    // n - 1 non-final tail elements
};

Ordinal order_type(const RunSummary& s);

// ---------------------------------------------------------------------------
// Component stream generators (lazy, resumable, single-consumer)
// ---------------------------------------------------------------------------

/// Order facts: Final first; per index sum, Less (and Succ, when the
/// elements are adjacent) for each pair, then the Limit fact, keeping
/// every statement about indices < k before z-position 2k^2.
class ZGen {
public:
    explicit ZGen(const Bijection& b);
    std::optional<ZStatement> next();

private:
    void refill();
    const Bijection* b_;
    std::uint64_t sum_ = 0;
    std::deque<ZStatement> queue_;
    bool done_ = false;
};

class ControlGen {
public:
    ControlGen(const RunSummary& s, const Bijection& b);
    std::optional<Record> next();

private:
    const RunSummary* s_;
    const Bijection* b_;
    std::uint64_t i_ = 0;
};

class ValueGen {
public:
    ValueGen(const RunSummary& s, const Bijection& b, std::size_t num_regs);
    std::optional<Record> next();

private:
    const RunSummary* s_;
    const Bijection* b_;
    std::size_t num_regs_;
    std::uint64_t i_ = 0;
    std::size_t reg_ = 0;
};

/// One record per attained value per register: the z-index of the
/// earliest timestep holding that value.  Registers move in lock step
/// over candidate value indices; attained value sets are ordinal
/// intervals [input, final], so candidates are filtered per register.
class InverseGen {
public:
    InverseGen(const RunSummary& s, const Bijection& b, std::size_t num_regs);
    std::optional<Record> next();

private:
    struct RegState {
        Ordinal lo, hi;        // attained interval
        std::uint64_t next_v = 0;
        bool exhausted = false;
        bool infinite;         // infinitely many candidate indices
        std::vector<std::uint64_t> finite_indices;  // sorted, when !infinite
        std::size_t finite_pos = 0;
    };
    std::optional<Record> advance(std::size_t reg);
    const RunSummary* s_;
    const Bijection* b_;
    std::vector<RegState> regs_;
    std::size_t cursor_ = 0;
};

Ordinal earliest_attainment(const RunSummary& s, std::size_t reg, const Ordinal& value);

// ---------------------------------------------------------------------------
// Whole-certificate stream
// ---------------------------------------------------------------------------

/// Round-robin multiplex of the z / control / value / inverse streams
/// (skipping exhausted ones) for a halted run.
class CertificateStream {
public:
    CertificateStream(const Program& p, const RunSummary& s);
    std::optional<Record> next();
    const Bijection& bijection() const { return bij_; }

private:
    Bijection bij_;
    ZGen z_;
    ControlGen control_;
    ValueGen value_;
    InverseGen inverse_;
    bool z_done_ = false, c_done_ = false, v_done_ = false, i_done_ = false;
    int turn_ = 0;
};

std::vector<Record> make_certificate(const Program& p, const RunSummary& s,
                                     std::size_t max_records);

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

/// Unary framing: each number n as n+1 ones and a zero; a record is
/// tag, payload numbers, then one extra zero (so records end in "00").
std::string encode_bits(const std::vector<Record>& records);
std::vector<Record> decode_bits(std::string_view bits);

/// 8-bits-per-byte packing with a 4 byte little-endian bit-count header.
std::string pack_bits(std::string_view bits);
std::string unpack_bits(std::string_view packed);

std::string record_to_text(const Record& r, const Program& p);
Record record_from_text(std::string_view line, const Program& p);
std::string records_to_text(const std::vector<Record>& records, const Program& p);
std::vector<Record> records_from_text(std::string_view text, const Program& p);

// ---------------------------------------------------------------------------
// Mutation catalog
// ---------------------------------------------------------------------------

enum class MutationKind {
    FinalNotFirst,
    ReverseLess,
    DropSucc,
    InsertCycle,
    WrongControlAtLimit,
    WrongSuccessorControl,
    NonMonotoneValue,
    BreakInverse,
    LateOrderFact,
};

const char* mutation_name(MutationKind k);
std::optional<MutationKind> mutation_from_name(std::string_view name);
std::vector<MutationKind> all_mutations();
/// Verifier rule each kind is documented to trip.
const char* expected_rule(MutationKind k);

/// Applies the mutation at its default site; throws CertificateError
/// when the prefix contains no suitable site.
std::vector<Record> mutate(const std::vector<Record>& records, MutationKind kind,
                           const Program& p, const RunSummary& s);

}  // namespace ovm

#endif
