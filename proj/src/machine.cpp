#include "ordinalvm/machine.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ovm {

int Program::reg_slot(std::string_view name) const {
    for (std::size_t i = 0; i < regs.size(); ++i)
        if (regs[i] == name) return static_cast<int>(i);
    return -1;
}

// ---------------------------------------------------------------------------
// Assembler
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char ch : line) {
        if (ch == '#') break;
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) { toks.push_back(cur); cur.clear(); }
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

struct Assembler {
    Program prog;
    std::unordered_map<std::string, int> binding;  // current name -> slot
    std::unordered_map<std::string, int> labels;
    struct Fixup { std::size_t at; std::string label; int line_no; };
    std::vector<Fixup> fixups;
    std::vector<std::string> pending_labels;
    int macro_site = 0;

    [[noreturn]] void fail(int line_no, const std::string& msg) {
        throw AssembleError("line " + std::to_string(line_no) + ": " + msg);
    }

    int fresh_reg(const std::string& name) {
        prog.regs.push_back(name);
        return static_cast<int>(prog.regs.size()) - 1;
    }

    int user_reg(const std::string& name, int line_no) {
        if (name.rfind("__", 0) == 0) fail(line_no, "register names starting with __ are reserved");
        auto it = binding.find(name);
        if (it != binding.end()) return it->second;
        int slot = fresh_reg(name);
        binding[name] = slot;
        prog.initial_binding.emplace(name, slot);
        prog.user_names.push_back(name);
        return slot;
    }

    int input_id(const std::string& name) {
        for (std::size_t i = 0; i < prog.inputs.size(); ++i)
            if (prog.inputs[i] == name) return static_cast<int>(i);
        prog.inputs.push_back(name);
        return static_cast<int>(prog.inputs.size()) - 1;
    }

    void place_label(const std::string& label, int line_no) {
        if (labels.count(label)) fail(line_no, "duplicate label '" + label + "'");
        labels[label] = static_cast<int>(prog.code.size());
    }

    void emit(Instruction ins) {
        for (const std::string& l : pending_labels)
            labels[l] = static_cast<int>(prog.code.size());
        pending_labels.clear();
        prog.code.push_back(ins);
    }

    void emit_branch(int r1, int r2, const std::string& label, int line_no) {
        fixups.push_back({prog.code.size(), label, line_no});
        emit({Instruction::Op::BranchEq, r1, r2, -1, -1});
    }

    // Decrement subroutine: fresh a, b (and a zero register) per site.
    // a is pushed up to y with b one behind; b ends as y's predecessor,
    // and the source name is rebound to b.  On limit inputs the climb
    // passes through limit restarts and b lands back on y itself.
    void expand_dec(const std::string& yname, int line_no) {
        int y = user_reg(yname, line_no);
        std::string s = std::to_string(macro_site++);
        int a = fresh_reg("__d" + s + "_a");
        int b = fresh_reg("__d" + s + "_b");
        int z = fresh_reg("__d" + s + "_z");
        std::string loop = "__d" + s + "_loop";
        std::string ret = "__d" + s + "_ret";
        std::string done = "__d" + s + "_done";

        emit_branch(y, z, done, line_no);  // 0 has no predecessor
        emit_branch(a, y, ret, line_no);   // limit-restart path: a already caught y
        emit({Instruction::Op::Inc, a});
        pending_labels.push_back(loop);
        emit_branch(a, y, ret, line_no);
        emit({Instruction::Op::Inc, a});
        emit({Instruction::Op::Inc, b});
        emit_branch(z, z, loop, line_no);
        pending_labels.push_back(ret);
        pending_labels.push_back(done);
        binding[yname] = b;
        prog.final_binding[yname] = b;  // provisional; refreshed at finish
    }

    // x := y by incrementing x until it equals y.  Diverges when x > y.
    void expand_mov(const std::string& xname, const std::string& yname, int line_no) {
        int x = user_reg(xname, line_no);
        int y = user_reg(yname, line_no);
        std::string s = std::to_string(macro_site++);
        int z = fresh_reg("__m" + s + "_z");
        std::string loop = "__m" + s + "_loop";
        std::string done = "__m" + s + "_done";
        pending_labels.push_back(loop);
        emit_branch(x, y, done, line_no);
        emit({Instruction::Op::Inc, x});
        emit_branch(z, z, loop, line_no);
        pending_labels.push_back(done);
    }

    void statement(const std::vector<std::string>& toks, int line_no) {
        const std::string& op = toks[0];
        if (op == "INC") {
            if (toks.size() != 2) fail(line_no, "INC takes one register");
            emit({Instruction::Op::Inc, user_reg(toks[1], line_no)});
        } else if (op == "BEQ") {
            if (toks.size() != 4) fail(line_no, "BEQ takes two registers and a label");
            int r1 = user_reg(toks[1], line_no);
            int r2 = user_reg(toks[2], line_no);
            emit_branch(r1, r2, toks[3], line_no);
        } else if (op == "HALT") {
            if (toks.size() != 1) fail(line_no, "HALT takes no operands");
            emit({Instruction::Op::Halt});
        } else if (op == "BBZ") {
            if (toks.size() != 4) fail(line_no, "BBZ takes an input, an index register and a label");
            int in = input_id(toks[1]);
            int idx = user_reg(toks[2], line_no);
            fixups.push_back({prog.code.size(), toks[3], line_no});
            emit({Instruction::Op::BitBranch, idx, -1, -1, in});
        } else if (op == "DEC") {
            if (toks.size() != 2) fail(line_no, "DEC takes one register");
            expand_dec(toks[1], line_no);
        } else if (op == "MOV") {
            if (toks.size() != 3) fail(line_no, "MOV takes two registers");
            expand_mov(toks[1], toks[2], line_no);
        } else {
            fail(line_no, "unknown statement '" + op + "'");
        }
    }

    Program finish() {
        if (!pending_labels.empty()) {
            // trailing labels need a landing instruction
            emit({Instruction::Op::Halt});
        }
        if (prog.code.empty()) throw AssembleError("empty program");
        for (const Fixup& f : fixups) {
            auto it = labels.find(f.label);
            if (it == labels.end()) fail(f.line_no, "unknown label '" + f.label + "'");
            prog.code[f.at].target = it->second;
        }
        for (const std::string& name : prog.user_names)
            prog.final_binding[name] = binding[name];
        return std::move(prog);
    }
};

}  // namespace

Program assemble(std::string_view source) {
    Assembler as;
    std::istringstream in{std::string(source)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        while (!toks.empty() && toks[0].size() > 1 && toks[0].back() == ':') {
            as.pending_labels.push_back(toks[0].substr(0, toks[0].size() - 1));
            toks.erase(toks.begin());
        }
        if (toks.empty()) continue;
        as.statement(toks, line_no);
    }
    return as.finish();
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

std::optional<Configuration> step(const Program& p, const Configuration& c) {
    if (c.ip < 0 || c.ip >= static_cast<int>(p.code.size()))
        throw MachineError("instruction pointer out of range");
    const Instruction& ins = p.code[c.ip];
    Configuration n = c;
    switch (ins.op) {
        case Instruction::Op::Halt:
            return std::nullopt;
        case Instruction::Op::Inc:
            n.regs[ins.r1] = n.regs[ins.r1].succ();
            n.ip = c.ip + 1;
            break;
        case Instruction::Op::BranchEq:
            n.ip = (c.regs[ins.r1] == c.regs[ins.r2]) ? ins.target : c.ip + 1;
            break;
        case Instruction::Op::BitBranch:
            throw MachineError("bit-branch instructions require run_truncated");
    }
    n.time = c.time.succ();
    if (n.ip >= static_cast<int>(p.code.size()))
        throw MachineError("fell off program: control ran past the last instruction");
    return n;
}

// ---------------------------------------------------------------------------
// Acceleration
// ---------------------------------------------------------------------------

namespace {

constexpr int kDetectBound = 128;

struct BranchObs {
    Ordinal lim_u, lim_v;
    std::uint64_t fin_u, fin_v;  // finite parts at branch time, pass 0
    int slot_u, slot_v;
    bool equal;
};

// Branch outcome for pass n: equal iff lim parts match and
// (fin_u + n*du) == (fin_v + n*dv).  Stable iff the outcome agrees with
// pass 0 for every n >= 0.
bool branch_stable(const BranchObs& b, std::uint64_t du, std::uint64_t dv) {
    if (b.lim_u != b.lim_v) return true;  // never equal, at any pass
    long long A = static_cast<long long>(b.fin_u) - static_cast<long long>(b.fin_v);
    long long D = static_cast<long long>(du) - static_cast<long long>(dv);
    if (D == 0) return true;              // outcome constant in n
    if (A == 0) return false;             // equal now, diverges next pass
    if ((A > 0) == (D > 0)) return true;  // gap widens, never meets
    return (-A) % D != 0;                 // meets at n = -A/D if integral
}

}  // namespace

std::optional<LoopDescriptor> detect_omega_loop(const Program& p, const Configuration& c) {
    LoopDescriptor d;
    d.entry_ip = c.ip;
    d.deltas.assign(p.regs.size(), 0);
    std::vector<BranchObs> branches;

    Configuration cur = c;
    for (int steps = 0; steps < kDetectBound; ++steps) {
        const Instruction& ins = p.code[cur.ip];
        if (ins.op == Instruction::Op::Halt || ins.op == Instruction::Op::BitBranch)
            return std::nullopt;
        d.path.push_back(cur.ip);
        if (ins.op == Instruction::Op::Inc) {
            d.inc_slot.push_back(ins.r1);
        } else {
            d.inc_slot.push_back(-1);
            BranchObs ob;
            ob.slot_u = ins.r1;
            ob.slot_v = ins.r2;
            auto [lu, fu] = cur.regs[ins.r1].split();
            auto [lv, fv] = cur.regs[ins.r2].split();
            ob.lim_u = lu; ob.fin_u = fu;
            ob.lim_v = lv; ob.fin_v = fv;
            ob.equal = cur.regs[ins.r1] == cur.regs[ins.r2];
            branches.push_back(ob);
            d.branch_signature.push_back(ob.equal);
        }
        cur = *step(p, cur);
        if (ins.op == Instruction::Op::Inc) d.deltas[ins.r1] += 1;
        if (cur.ip == c.ip) {
            d.period = steps + 1;
            for (const BranchObs& b : branches)
                if (!branch_stable(b, d.deltas[b.slot_u], d.deltas[b.slot_v]))
                    return std::nullopt;
            return d;
        }
    }
    return std::nullopt;
}

Configuration apply_limit(const LoopDescriptor& loop, const Configuration& start) {
    Configuration post;
    post.time = start.time.limit_part() + Ordinal::omega();
    post.ip = 0;
    post.regs.reserve(start.regs.size());
    for (std::size_t r = 0; r < start.regs.size(); ++r)
        post.regs.push_back(Ordinal::sup_progression(start.regs[r], loop.deltas[r]));
    return post;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

RunSummary run(const Program& p, const std::map<std::string, Ordinal>& inputs,
               std::uint64_t fuel, std::uint64_t max_jumps) {
    if (p.code.empty()) throw MachineError("empty program");
    Configuration c;
    c.regs.assign(p.regs.size(), Ordinal{});
    for (const auto& [name, val] : inputs) {
        auto it = p.initial_binding.find(name);
        if (it == p.initial_binding.end())
            throw MachineError("unknown input register '" + name + "'");
        c.regs[it->second] = val;
    }

    // Every control-flow cycle contains a branch target, so detection
    // only needs to be attempted there.
    std::vector<bool> is_target(p.code.size(), false);
    for (const Instruction& ins : p.code)
        if (ins.op == Instruction::Op::BranchEq || ins.op == Instruction::Op::BitBranch)
            is_target[ins.target] = true;

    RunSummary s;
    RunSummary::ConcreteSegment seg;
    seg.push_back(c);
    const bool accel = max_jumps > 0;
    std::uint64_t jumps = max_jumps;

    auto flush = [&] {
        if (!seg.empty()) { s.phases.emplace_back(std::move(seg)); seg = {}; }
    };

    for (;;) {
        if (p.code[c.ip].op == Instruction::Op::Halt) {
            s.outcome = RunSummary::Outcome::Halted;
            s.final_config = c;
            flush();
            return s;
        }
        if (accel && is_target[c.ip]) {
            if (auto d = detect_omega_loop(p, c)) {
                if (jumps == 0) {
                    s.outcome = RunSummary::Outcome::OutOfJumps;
                    s.final_config = c;
                    flush();
                    return s;
                }
                if (!seg.empty() && seg.back() == c) seg.pop_back();
                flush();
                RunSummary::LimitJump j;
                j.loop = *d;
                j.pre = c;
                j.post = apply_limit(*d, c);
                c = j.post;
                s.phases.emplace_back(std::move(j));
                --jumps;
                seg.push_back(c);
                continue;
            }
        }
        if (fuel == 0) {
            s.outcome = RunSummary::Outcome::OutOfFuel;
            s.final_config = c;
            flush();
            return s;
        }
        c = *step(p, c);
        --fuel;
        seg.push_back(c);
    }
}

Configuration config_at(const RunSummary& s, const Ordinal& t) {
    for (const RunSummary::Phase& ph : s.phases) {
        if (const auto* seg = std::get_if<RunSummary::ConcreteSegment>(&ph)) {
            if (seg->empty()) continue;
            const Ordinal& t0 = seg->front().time;
            if (t < t0 || t.limit_part() != t0.limit_part()) continue;
            std::uint64_t off = Ordinal::finite_diff(t, t0);
            if (off < seg->size()) return (*seg)[off];
        } else {
            const auto& j = std::get<RunSummary::LimitJump>(ph);
            if (t < j.pre.time || t.limit_part() != j.pre.time.limit_part()) continue;
            std::uint64_t sdiff = Ordinal::finite_diff(t, j.pre.time);
            std::uint64_t q = sdiff / j.loop.period;
            std::uint64_t off = sdiff % j.loop.period;
            Configuration c;
            c.time = t;
            c.ip = j.loop.path[off];
            c.regs = j.pre.regs;
            std::vector<std::uint64_t> add(c.regs.size(), 0);
            for (std::size_t r = 0; r < add.size(); ++r) add[r] = q * j.loop.deltas[r];
            for (std::uint64_t o = 0; o < off; ++o)
                if (j.loop.inc_slot[o] >= 0) add[j.loop.inc_slot[o]] += 1;
            for (std::size_t r = 0; r < c.regs.size(); ++r)
                if (add[r] > 0) c.regs[r] = c.regs[r] + add[r];
            return c;
        }
    }
    if (s.final_config.time == t) return s.final_config;
    throw MachineError("timestep " + t.str() + " not covered by run summary");
}

std::map<std::string, Ordinal> final_registers(const Program& p, const RunSummary& s) {
    std::map<std::string, Ordinal> out;
    for (const std::string& name : p.user_names)
        out[name] = s.final_config.regs[p.final_binding.at(name)];
    return out;
}

}  // namespace ovm
