#ifndef ORDINALVM_MACHINE_HPP
#define ORDINALVM_MACHINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ordinalvm/ordinal.hpp"

namespace ovm {

struct AssembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MachineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Instruction {
    enum class Op { Inc, BranchEq, Halt, BitBranch };
    Op op = Op::Halt;
    int r1 = -1;      // Inc: register; BranchEq: left register; BitBranch: index register
    int r2 = -1;      // BranchEq: right register
    int target = -1;  // BranchEq / BitBranch
    int input = -1;   // BitBranch: which real input (index into Program::inputs)
};

/// Assembled machine code.  Registers are "physical" slots; macro
/// expansion (DEC) rebinds source-level names to fresh slots, so the
/// same user name can refer to different slots before and after a DEC.
struct Program {
    std::vector<Instruction> code;
    std::vector<std::string> regs;  // physical register names, slot order
    std::vector<std::string> inputs;  // real-input names for BitBranch
    std::unordered_map<std::string, int> initial_binding;  // user name -> slot at entry
    std::unordered_map<std::string, int> final_binding;    // user name -> slot at exit
    std::vector<std::string> user_names;  // user-visible names, first-appearance order

    int reg_slot(std::string_view name) const;
    bool is_halt(int line) const {
        return line >= 0 && line < static_cast<int>(code.size()) &&
               code[line].op == Instruction::Op::Halt;
    }
};

struct Configuration {
    Ordinal time;
    int ip = 0;
    std::vector<Ordinal> regs;
    bool operator==(const Configuration&) const = default;
};

/// One pass of an accelerable loop: control re-enters entry_ip every
/// `period` steps, each register grows by a constant finite delta, and
/// every branch outcome along the pass holds for all later passes.
struct LoopDescriptor {
    int entry_ip = 0;
    int period = 0;
    std::vector<std::uint64_t> deltas;  // per register slot, full pass
    std::vector<int> path;              // ip at each offset in the pass
    std::vector<int> inc_slot;          // register incremented at offset, -1 if none
    std::vector<bool> branch_signature; // outcome of each BranchEq along the pass
};

struct RunSummary {
    struct LimitJump {
        LoopDescriptor loop;
        Configuration pre;   // loop entry, covers times [pre.time, post.time)
        Configuration post;  // limit configuration: ip 0, limit time
    };
    using ConcreteSegment = std::vector<Configuration>;
    using Phase = std::variant<ConcreteSegment, LimitJump>;

    enum class Outcome { Halted, OutOfFuel, OutOfJumps };

    std::vector<Phase> phases;
    Outcome outcome = Outcome::OutOfFuel;
    Configuration final_config;  // halt / exhaustion configuration
    Ordinal halt_time() const { return final_config.time; }
};

/// Source grammar: one statement per line, `label:` prefixes, `#` comments.
/// Statements: INC x | BEQ x y label | HALT | BBZ input idx label,
/// macros: DEC x | MOV x y.
Program assemble(std::string_view source);

/// Single concrete step.  Returns the successor configuration, or
/// nullopt when c sits on a Halt (the machine halts at c.time).
/// Throws MachineError when control runs past the last instruction.
std::optional<Configuration> step(const Program& p, const Configuration& c);

/// Conservative omega-loop detection from c: simulates forward and
/// returns a descriptor only when control returns to c.ip with constant
/// register deltas and every branch outcome provably stable for all
/// later passes (decided exactly on CNF limit/finite parts).
std::optional<LoopDescriptor> detect_omega_loop(const Program& p, const Configuration& c);

/// Limit rule: time jumps to the least limit ordinal above start.time,
/// control returns to instruction 0, registers take their suprema.
Configuration apply_limit(const LoopDescriptor& loop, const Configuration& start);

RunSummary run(const Program& p, const std::map<std::string, Ordinal>& inputs,
               std::uint64_t fuel, std::uint64_t max_jumps);

/// Configuration at any timestep covered by the summary (concrete
/// segments by lookup, limit phases by pass arithmetic).
Configuration config_at(const RunSummary& s, const Ordinal& t);

/// Final register values under user-visible names.
std::map<std::string, Ordinal> final_registers(const Program& p, const RunSummary& s);

}  // namespace ovm

#endif
