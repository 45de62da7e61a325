#include "ordinalvm/verifier.hpp"

#include <algorithm>

namespace ovm {

Verifier::Verifier(const Program& p) : program_(p) {
    values_.resize(p.regs.size());
    inverses_.resize(p.regs.size());
    cited_.resize(p.regs.size());
    attainers_.resize(p.regs.size());
}

void Verifier::fire(std::string rule, std::string detail) {
    if (!verdict_)
        verdict_ = Verdict::reject(pos_, std::move(rule), std::move(detail));
}

std::uint32_t Verifier::ensure_id(std::uint64_t index) {
    auto it = ids_.find(index);
    if (it != ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(id_index_.size());
    ids_.emplace(index, id);
    id_index_.push_back(index);
    std::size_t cap = reach_.empty() ? 0 : reach_[0].size();
    if (id >= cap) {
        cap = std::max<std::size_t>(64, cap * 2);
        for (auto& b : reach_) b.resize(cap);
        for (auto& b : rreach_) b.resize(cap);
    }
    reach_.emplace_back(cap);
    rreach_.emplace_back(cap);
    return id;
}

std::optional<std::uint32_t> Verifier::id_of(std::uint64_t index) const {
    auto it = ids_.find(index);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

bool Verifier::reaches(std::uint64_t a, std::uint64_t b) const {
    auto ia = id_of(a), ib = id_of(b);
    if (!ia || !ib) return false;
    return reach_[*ia].test(*ib);
}

bool Verifier::ordered(std::uint64_t a, std::uint64_t b) const {
    return reaches(a, b) || reaches(b, a);
}

void Verifier::mention(std::uint64_t index) {
    if (rejected()) return;
    auto [it, fresh] = mentioned_.insert(index);
    if (!fresh) return;
    // a pair first completed after its deadline passed is already late
    if (zpos_ == 0) return;
    std::uint64_t q = zpos_ - 1;
    for (std::uint64_t other : mentioned_) {
        if (other == index) continue;
        std::uint64_t s = other + index;
        if (2 * s * s > q) break;  // sums only grow from here
        if (!ordered(index, other)) {
            fire("R5", "pair (" + std::to_string(std::min(index, other)) + "," +
                           std::to_string(std::max(index, other)) +
                           ") unordered past its deadline");
            return;
        }
    }
}

void Verifier::check_monotone(std::uint64_t n, std::uint64_t m) {
    // el(n) < el(m) is now known: register values must not decrease
    for (std::size_t r = 0; r < values_.size() && !rejected(); ++r) {
        auto in = values_[r].find(n);
        if (in == values_[r].end()) continue;
        auto im = values_[r].find(m);
        if (im == values_[r].end()) continue;
        std::uint64_t vn = in->second, vm = im->second;
        if (vn == vm) continue;
        if (reaches(vm, vn)) {
            fire("R9", program_.regs[r] + " decreases from timestep " + std::to_string(n) +
                           " to " + std::to_string(m));
            return;
        }
        if (!reaches(vn, vm))
            tripwires_[{vm, vn}].push_back(
                {"R9", program_.regs[r] + " decreases from timestep " + std::to_string(n) +
                           " to " + std::to_string(m)});
    }
}

void Verifier::add_edge(std::uint64_t n, std::uint64_t m) {
    if (rejected()) return;
    if (n == m) {
        fire("R4", "index " + std::to_string(n) + " below itself");
        return;
    }
    if (reaches(m, n)) {
        fire("R4", "already learned " + std::to_string(m) + " < " + std::to_string(n));
        return;
    }
    if (final_ && n == *final_) {
        fire("R1", "final element " + std::to_string(n) + " claimed below " +
                       std::to_string(m));
        return;
    }
    {
        auto cn = controls_.find(n);
        if (cn != controls_.end() && program_.is_halt(static_cast<int>(cn->second))) {
            fire("R3", "control at " + std::to_string(n) +
                           " is the stop command but " + std::to_string(n) + " < " +
                           std::to_string(m));
            return;
        }
    }
    // late facts some earlier check was waiting for
    if (auto tw = tripwires_.find({n, m}); tw != tripwires_.end()) {
        fire(tw->second.front().rule, tw->second.front().detail);
        return;
    }
    std::uint32_t a = ensure_id(n), b = ensure_id(m);
    bool fresh = !reach_[a].test(b);
    if (fresh) {
        Bits desc = reach_[b];
        desc.set(b);
        Bits anc = rreach_[a];
        anc.set(a);
        for (std::size_t x = anc.find_first(); x != Bits::npos; x = anc.find_next(x))
            reach_[x] |= desc;
        for (std::size_t y = desc.find_first(); y != Bits::npos; y = desc.find_next(y))
            rreach_[y] |= anc;
        // discreteness: did this edge squeeze something between a successor pair?
        for (const SuccPair& sp : succ_pairs_) {
            if (sp.n == n && sp.m == m) continue;
            bool left = (sp.n == n) || reaches(sp.n, n);
            bool right = (sp.m == m) || reaches(m, sp.m);
            if (left && right) {
                fire("R6", "element between successor pair (" + std::to_string(sp.m) +
                               "," + std::to_string(sp.n) + ")");
                return;
            }
        }
    }
    check_monotone(n, m);
}

void Verifier::run_succ_check(std::size_t idx) {
    if (rejected()) return;
    SuccPair& sp = succ_pairs_[idx];
    if (sp.done) return;
    auto cn = controls_.find(sp.n);
    if (cn == controls_.end()) return;
    const Instruction& ins = program_.code[cn->second];
    auto cm = controls_.find(sp.m);
    auto val = [&](std::size_t r, std::uint64_t i) -> std::optional<std::uint64_t> {
        auto it = values_[r].find(i);
        if (it == values_[r].end()) return std::nullopt;
        return it->second;
    };
    switch (ins.op) {
        case Instruction::Op::Halt:
            fire("R3", "control at " + std::to_string(sp.n) +
                           " is the stop command but has a successor");
            return;
        case Instruction::Op::Inc: {
            if (cm != controls_.end() && cm->second != cn->second + 1) {
                fire("R7", "control after INC at " + std::to_string(sp.n) +
                               " is not the next line");
                return;
            }
            bool all_known = cm != controls_.end();
            for (std::size_t r = 0; r < values_.size(); ++r) {
                auto vn = val(r, sp.n), vm = val(r, sp.m);
                if (!vn || !vm) {
                    all_known = false;
                    continue;
                }
                if (static_cast<int>(r) == ins.r1) {
                    if (*vn == *vm) {
                        fire("R7", program_.regs[r] + " unchanged across INC at " +
                                       std::to_string(sp.n));
                        return;
                    }
                    auto sf = succ_of_.find(*vn);
                    if (sf != succ_of_.end()) {
                        if (sf->second != *vm) {
                            fire("R7", program_.regs[r] + " at " + std::to_string(sp.m) +
                                           " is not the successor value");
                            return;
                        }
                    } else {
                        auto [e, fresh] = expected_succ_.emplace(*vn, *vm);
                        if (!fresh && e->second != *vm) {
                            fire("R7", "conflicting successor expectations for value " +
                                           std::to_string(*vn));
                            return;
                        }
                        all_known = false;  // revisit when the succ fact lands
                    }
                } else if (*vn != *vm) {
                    fire("R7", program_.regs[r] + " changed across INC of " +
                                   program_.regs[ins.r1] + " at " + std::to_string(sp.n));
                    return;
                }
            }
            if (all_known) sp.done = true;
            return;
        }
        case Instruction::Op::BranchEq: {
            bool all_known = cm != controls_.end();
            for (std::size_t r = 0; r < values_.size(); ++r) {
                auto vn = val(r, sp.n), vm = val(r, sp.m);
                if (!vn || !vm) {
                    all_known = false;
                    continue;
                }
                if (*vn != *vm) {
                    fire("R7", program_.regs[r] + " changed across branch at " +
                                   std::to_string(sp.n));
                    return;
                }
            }
            auto v1 = val(static_cast<std::size_t>(ins.r1), sp.n);
            auto v2 = val(static_cast<std::size_t>(ins.r2), sp.n);
            if (v1 && v2 && cm != controls_.end()) {
                std::uint64_t expect = (*v1 == *v2) ? static_cast<std::uint64_t>(ins.target)
                                                    : cn->second + 1;
                if (cm->second != expect) {
                    fire("R7", "control after branch at " + std::to_string(sp.n) +
                                   " does not match the comparison");
                    return;
                }
            } else {
                all_known = false;
            }
            if (all_known) sp.done = true;
            return;
        }
        case Instruction::Op::BitBranch:
            return;  // no certificates for bit-reading machines
    }
}

void Verifier::on_z(const ZStatement& st) {
    ++zpos_;
    if (zpos_ == 1 && st.kind != ZStatement::Kind::Final) {
        fire("R1", "first statement is not the final-element statement");
        return;
    }
    switch (st.kind) {
        case ZStatement::Kind::Final: {
            if (final_ && *final_ != st.a) {
                fire("R1", "conflicting final elements " + std::to_string(*final_) +
                               " and " + std::to_string(st.a));
                return;
            }
            final_ = st.a;
            mention(st.a);
            if (auto ia = id_of(st.a); ia && reach_[*ia].any()) {
                fire("R1", "final element " + std::to_string(st.a) + " is not greatest");
                return;
            }
            auto c = controls_.find(st.a);
            if (c != controls_.end() && !program_.is_halt(static_cast<int>(c->second)))
                fire("R2", "control at final index " + std::to_string(st.a) +
                               " is not the stop command");
            break;
        }
        case ZStatement::Kind::Less:
            // order the pair before the deadline audit sees the mentions
            add_edge(st.a, st.b);
            mention(st.a);
            mention(st.b);
            break;
        case ZStatement::Kind::Succ: {
            std::uint64_t m = st.a, n = st.b;
            if (m == n) {
                fire("R6", "index " + std::to_string(m) + " its own successor");
                return;
            }
            if (limits_.count(m)) {
                fire("R6", "limit index " + std::to_string(m) + " marked as a successor");
                return;
            }
            if (auto s = succ_of_.find(n); s != succ_of_.end() && s->second != m) {
                fire("R6", "two successors for " + std::to_string(n));
                return;
            }
            if (auto pd = pred_of_.find(m); pd != pred_of_.end() && pd->second != n) {
                fire("R6", "two predecessors for " + std::to_string(m));
                return;
            }
            if (reaches(m, n)) {
                fire("R6", std::to_string(n) + " is not less than " + std::to_string(m));
                return;
            }
            add_edge(n, m);
            mention(n);
            mention(m);
            if (rejected()) return;
            // nothing may already sit strictly between n and m
            if (auto in = id_of(n), im = id_of(m); in && im) {
                Bits between = reach_[*in];
                between &= rreach_[*im];
                if (between.any()) {
                    fire("R6", "element between successor pair (" + std::to_string(m) +
                                   "," + std::to_string(n) + ")");
                    return;
                }
            }
            if (auto e = expected_succ_.find(n);
                e != expected_succ_.end() && e->second != m) {
                fire("R7", "successor value of " + std::to_string(n) +
                               " contradicts an INC step");
                return;
            }
            bool fresh = !succ_of_.count(n);
            succ_of_[n] = m;
            pred_of_[m] = n;
            if (fresh) {
                succ_pairs_.push_back({m, n, false});
                std::size_t idx = succ_pairs_.size() - 1;
                succ_by_index_[m].push_back(idx);
                succ_by_index_[n].push_back(idx);
                run_succ_check(idx);
            }
            break;
        }
        case ZStatement::Kind::Limit: {
            mention(st.a);
            if (rejected()) return;
            if (pred_of_.count(st.a)) {
                fire("R6", "successor index " + std::to_string(st.a) + " marked as a limit");
                return;
            }
            limits_.insert(st.a);
            auto c = controls_.find(st.a);
            if (c != controls_.end() && c->second != 0)
                fire("R8", "control at limit index " + std::to_string(st.a) +
                               " is not instruction 0");
            break;
        }
    }
    sweep_deadlines();
}

void Verifier::on_control(std::uint64_t i, std::uint64_t line) {
    mention(i);
    if (rejected()) return;
    if (line >= program_.code.size()) {
        fire("R7", "control line " + std::to_string(line) + " out of range");
        return;
    }
    if (auto c = controls_.find(i); c != controls_.end()) {
        if (c->second != line)
            fire("R7", "conflicting control records at " + std::to_string(i));
        return;
    }
    controls_[i] = line;
    bool halt = program_.is_halt(static_cast<int>(line));
    if (final_ && *final_ == i && !halt) {
        fire("R2", "control at final index " + std::to_string(i) +
                       " is not the stop command");
        return;
    }
    if (halt) {
        if (auto ia = id_of(i); ia && reach_[*ia].any()) {
            fire("R3", "control at " + std::to_string(i) +
                           " is the stop command but " + std::to_string(i) +
                           " is not greatest");
            return;
        }
    }
    if (limits_.count(i) && line != 0) {
        fire("R8", "control at limit index " + std::to_string(i) +
                       " is not instruction 0");
        return;
    }
    if (auto it = succ_by_index_.find(i); it != succ_by_index_.end())
        for (std::size_t idx : it->second) {
            run_succ_check(idx);
            if (rejected()) return;
        }
}

void Verifier::on_value(std::uint64_t reg, std::uint64_t i, std::uint64_t v) {
    if (reg >= values_.size()) {
        fire("FRAME", "register " + std::to_string(reg) + " out of range");
        return;
    }
    mention(i);
    mention(v);
    if (rejected()) return;
    if (auto it = values_[reg].find(i); it != values_[reg].end()) {
        if (it->second != v)
            fire("R7", "conflicting value records for " + program_.regs[reg] + " at " +
                           std::to_string(i));
        return;
    }
    values_[reg][i] = v;
    attainers_[reg][v].push_back(i);
    // monotonicity against every timestep already ordered with i
    if (id_of(i)) {
        for (std::uint64_t j : id_index_) {
            if (j == i) continue;
            if (!values_[reg].count(j)) continue;
            if (reaches(i, j))
                check_monotone(i, j);
            else if (reaches(j, i))
                check_monotone(j, i);
            if (rejected()) return;
        }
    }
    if (auto c = cited_[reg].find(i); c != cited_[reg].end() && c->second != v) {
        fire("R10", program_.regs[reg] + " at " + std::to_string(i) +
                        " contradicts its inverse record");
        return;
    }
    if (auto inv = inverses_[reg].find(v); inv != inverses_[reg].end()) {
        std::uint64_t i0 = inv->second;
        if (i0 != i) {
            if (reaches(i, i0)) {
                fire("R10", program_.regs[reg] + " attains value " + std::to_string(v) +
                                " before its recorded earliest timestep");
                return;
            }
            if (!reaches(i0, i))
                tripwires_[{i, i0}].push_back(
                    {"R10", program_.regs[reg] + " attains value " + std::to_string(v) +
                                " before its recorded earliest timestep"});
        }
    }
    if (auto it = succ_by_index_.find(i); it != succ_by_index_.end())
        for (std::size_t idx : it->second) {
            run_succ_check(idx);
            if (rejected()) return;
        }
}

void Verifier::on_inverse(std::uint64_t reg, std::uint64_t v, std::uint64_t i) {
    if (reg >= values_.size()) {
        fire("FRAME", "register " + std::to_string(reg) + " out of range");
        return;
    }
    mention(v);
    mention(i);
    if (rejected()) return;
    if (auto it = inverses_[reg].find(v); it != inverses_[reg].end()) {
        if (it->second != i)
            fire("R10", "conflicting inverse records for " + program_.regs[reg] +
                            " value " + std::to_string(v));
        return;
    }
    if (auto c = cited_[reg].find(i); c != cited_[reg].end() && c->second != v) {
        fire("R10", "two values recorded earliest at timestep " + std::to_string(i));
        return;
    }
    inverses_[reg][v] = i;
    cited_[reg][i] = v;
    if (auto val = values_[reg].find(i); val != values_[reg].end() && val->second != v) {
        fire("R10", program_.regs[reg] + " at " + std::to_string(i) +
                        " contradicts its inverse record");
        return;
    }
    if (auto at = attainers_[reg].find(v); at != attainers_[reg].end())
        for (std::uint64_t m : at->second) {
            if (m == i) continue;
            if (reaches(m, i)) {
                fire("R10", program_.regs[reg] + " attains value " + std::to_string(v) +
                                " before its recorded earliest timestep");
                return;
            }
            if (!reaches(i, m))
                tripwires_[{m, i}].push_back(
                    {"R10", program_.regs[reg] + " attains value " + std::to_string(v) +
                                " before its recorded earliest timestep"});
        }
}

void Verifier::sweep_deadlines() {
    if (rejected() || zpos_ == 0) return;
    std::uint64_t q = zpos_ - 1;
    while (2 * pair_sum_due_ * pair_sum_due_ <= q) {
        std::uint64_t s = pair_sum_due_++;
        for (std::uint64_t a = 0; 2 * a < s; ++a) {
            std::uint64_t b = s - a;
            if (!mentioned_.count(a) || !mentioned_.count(b)) continue;
            if (!ordered(a, b)) {
                fire("R5", "pair (" + std::to_string(a) + "," + std::to_string(b) +
                               ") unordered past its deadline");
                return;
            }
        }
    }
    while (succ_deadline(succ_due_) <= q) {
        std::uint64_t n = succ_due_++;
        if (!mentioned_.count(n)) continue;
        if (final_ && *final_ == n) continue;
        if (!succ_of_.count(n)) {
            fire("R5", "no successor fact for " + std::to_string(n) +
                           " past its deadline");
            return;
        }
    }
}

std::optional<Verdict> Verifier::ingest(const Record& r) {
    if (verdict_) return verdict_;
    switch (r.tag) {
        case Record::Tag::Z:
            try {
                on_z(r.as_z());
            } catch (const CertificateError& e) {
                fire("FRAME", e.what());
            }
            break;
        case Record::Tag::Control:
            if (r.payload.size() != 2)
                fire("FRAME", "bad control payload");
            else
                on_control(r.payload[0], r.payload[1]);
            break;
        case Record::Tag::Value:
            if (r.payload.size() != 3)
                fire("FRAME", "bad value payload");
            else
                on_value(r.payload[0], r.payload[1], r.payload[2]);
            break;
        case Record::Tag::Inverse:
            if (r.payload.size() != 3)
                fire("FRAME", "bad inverse payload");
            else
                on_inverse(r.payload[0], r.payload[1], r.payload[2]);
            break;
    }
    ++pos_;
    return verdict_;
}

Verdict verify(const Program& p, const std::vector<Record>& records,
               std::size_t max_records) {
    Verifier v(p);
    std::size_t n = std::min(records.size(), max_records);
    for (std::size_t i = 0; i < n; ++i)
        if (auto rej = v.ingest(records[i])) return *rej;
    return Verdict::accept(n);
}

}  // namespace ovm
