#ifndef ORDINALVM_VERIFIER_HPP
#define ORDINALVM_VERIFIER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "ordinalvm/certificate.hpp"
#include "ordinalvm/machine.hpp"

namespace ovm {

struct Verdict {
    bool accepted = true;
    std::size_t consumed = 0;
    std::size_t position = 0;  // record index of the violation when rejected
    std::string rule;          // R1..R10 or FRAME
    std::string detail;

    static Verdict accept(std::size_t n) { return {true, n, 0, "", ""}; }
    static Verdict reject(std::size_t pos, std::string rule, std::string detail) {
        return {false, pos, pos, std::move(rule), std::move(detail)};
    }
};

/// Streaming checker for certificate records.  Accumulates order,
/// control, value and inverse facts; every rule is evaluated as soon as
/// it becomes decidable, retroactively when late facts complete an
/// earlier obligation.  Rules:
///   R1 final statement first (and the final element is greatest)
///   R2 control at the final index is the stop command
///   R3 control at a non-final index is not the stop command
///   R4 order antisymmetry / no cycles
///   R5 deadlines: order facts by z-position 2(n+m)^2, successor facts
///      by a fixed quadratic budget per index
///   R6 discreteness: nothing between a successor pair, successors are
///      unique and not limits, succ implies less
///   R7 control/value succession follows the program
///   R8 control at limit indices is instruction 0
///   R9 register values are monotone in time
///   R10 inverse records name the earliest attaining timestep
class Verifier {
public:
    explicit Verifier(const Program& p);

    /// Feeds one record; returns the (sticky) rejection if any rule fires.
    std::optional<Verdict> ingest(const Record& r);

    std::size_t consumed() const { return pos_; }
    std::size_t z_position() const { return zpos_; }

private:
    using Bits = boost::dynamic_bitset<>;
    struct SuccPair {
        std::uint64_t m, n;  // element(m) = succ(element(n))
        bool done = false;
    };
    struct Tripwire {
        std::string rule, detail;
    };

    void fire(std::string rule, std::string detail);
    bool rejected() const { return verdict_.has_value(); }

    std::uint32_t ensure_id(std::uint64_t index);
    std::optional<std::uint32_t> id_of(std::uint64_t index) const;
    bool reaches(std::uint64_t a, std::uint64_t b) const;  // el(a) < el(b) derivable
    bool ordered(std::uint64_t a, std::uint64_t b) const;

    void mention(std::uint64_t index);
    void add_edge(std::uint64_t n, std::uint64_t m);  // direct fact el(n) < el(m)
    void check_monotone(std::uint64_t n, std::uint64_t m);
    void run_succ_check(std::size_t idx);
    void on_z(const ZStatement& st);
    void on_control(std::uint64_t i, std::uint64_t line);
    void on_value(std::uint64_t reg, std::uint64_t i, std::uint64_t v);
    void on_inverse(std::uint64_t reg, std::uint64_t v, std::uint64_t i);
    void sweep_deadlines();

    Program program_;
    std::optional<Verdict> verdict_;
    std::size_t pos_ = 0;   // records consumed
    std::size_t zpos_ = 0;  // Z records consumed

    std::optional<std::uint64_t> final_;
    std::unordered_map<std::uint64_t, std::uint32_t> ids_;
    std::vector<std::uint64_t> id_index_;  // id -> certificate index
    std::vector<Bits> reach_, rreach_;     // transitive closure + reverse

    std::unordered_map<std::uint64_t, std::uint64_t> succ_of_;  // pred -> succ
    std::unordered_map<std::uint64_t, std::uint64_t> pred_of_;  // succ -> pred
    std::set<std::uint64_t> limits_;
    std::unordered_map<std::uint64_t, std::uint64_t> controls_;
    std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> values_;   // reg: i -> v
    std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> inverses_; // reg: v -> i
    std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> cited_;    // reg: i -> v
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint64_t>>> attainers_;

    std::vector<SuccPair> succ_pairs_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> succ_by_index_;
    std::unordered_map<std::uint64_t, std::uint64_t> expected_succ_;  // value vn -> vm
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<Tripwire>> tripwires_;

    std::set<std::uint64_t> mentioned_;
    std::uint64_t pair_sum_due_ = 1;  // next pair index-sum to audit
    std::uint64_t succ_due_ = 0;      // next index audited for a successor fact
};

/// Quadratic budget by which index n must have received a successor
/// fact, measured in z-positions; generated streams for order types up
/// to w*126 meet it.
inline std::uint64_t succ_deadline(std::uint64_t n) {
    return 2 * (2 * n + 64) * (2 * n + 64);
}

Verdict verify(const Program& p, const std::vector<Record>& records,
               std::size_t max_records);

}  // namespace ovm

#endif
