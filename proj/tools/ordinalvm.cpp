#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ordinalvm/certificate.hpp"
#include "ordinalvm/diophantine.hpp"
#include "ordinalvm/machine.hpp"
#include "ordinalvm/ordinal.hpp"
#include "ordinalvm/verifier.hpp"

namespace {

using namespace ovm;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

std::map<std::string, Ordinal> parse_inputs(const std::vector<std::string>& raw) {
    std::map<std::string, Ordinal> inputs;
    for (const std::string& s : raw) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("input binding '" + s + "' is not name=ordinal");
        inputs[s.substr(0, eq)] = Ordinal::parse(s.substr(eq + 1));
    }
    return inputs;
}

std::string summary_line(const Program& p, const RunSummary& s) {
    std::ostringstream os;
    switch (s.outcome) {
        case RunSummary::Outcome::Halted: os << "HALTED"; break;
        case RunSummary::Outcome::OutOfFuel: os << "OUTOFFUEL"; break;
        case RunSummary::Outcome::OutOfJumps: os << "OUTOFJUMPS"; break;
    }
    os << " t=" << s.final_config.time.str();
    for (const auto& [name, value] : final_registers(p, s))
        os << " " << name << "=" << value.str();
    return os.str();
}

std::string instr_str(const Program& p, const Instruction& ins) {
    std::ostringstream os;
    switch (ins.op) {
        case Instruction::Op::Inc: os << "INC " << p.regs[ins.r1]; break;
        case Instruction::Op::BranchEq:
            os << "BEQ " << p.regs[ins.r1] << " " << p.regs[ins.r2] << " " << ins.target;
            break;
        case Instruction::Op::Halt: os << "HALT"; break;
        case Instruction::Op::BitBranch:
            os << "BBZ " << p.inputs[ins.input] << " " << p.regs[ins.r1] << " " << ins.target;
            break;
    }
    return os.str();
}

std::vector<Record> load_cert(const std::string& path, const std::string& format,
                              const Program& p) {
    std::string data = read_file(path);
    if (format == "text") return records_from_text(data, p);
    if (format == "packed") return decode_bits(unpack_bits(data));
    return decode_bits(data);
}

std::string dump_cert(const std::vector<Record>& records, const std::string& format,
                      const Program& p) {
    if (format == "text") return records_to_text(records, p);
    if (format == "packed") return pack_bits(encode_bits(records));
    return encode_bits(records) + "\n";
}

const char* kWaiterSource =
    "# count x up to y, then stop\n"
    "loop: BEQ x y done\n"
    "      INC x\n"
    "      BEQ x x loop\n"
    "done: HALT\n";

int run_demo() {
    bool ok = true;
    auto expect = [&ok](bool cond, const std::string& what) {
        std::cout << (cond ? "  ok  " : "  FAIL") << "  " << what << "\n";
        ok = ok && cond;
    };
    Program p = assemble(kWaiterSource);
    std::map<std::string, Ordinal> inputs{{"y", Ordinal::omega()}};
    RunSummary s = run(p, inputs, 100000, 16);
    std::cout << "run: " << summary_line(p, s) << "\n";
    expect(s.outcome == RunSummary::Outcome::Halted &&
               s.final_config.time == Ordinal::omega() + 1,
           "waiter halts at t=w+1");
    auto regs = final_registers(p, s);
    expect(regs.at("x") == Ordinal::omega(), "x = w at the halt");

    const std::size_t prefix = 100000;
    std::vector<Record> cert = make_certificate(p, s, prefix);
    Verdict v = verify(p, cert, prefix);
    std::cout << "verify: " << (v.accepted ? "ACCEPT " + std::to_string(v.consumed)
                                           : "REJECT " + std::to_string(v.position) + " " +
                                                 v.rule + " " + v.detail)
              << "\n";
    expect(v.accepted && v.consumed == cert.size(), "clean certificate accepted");

    std::cout << "mutation kill:\n";
    std::cout << "  kind                   rule  fired  position\n";
    for (MutationKind kind : all_mutations()) {
        std::vector<Record> bad = mutate(cert, kind, p, s);
        Verdict bv = verify(p, bad, prefix);
        bool killed = !bv.accepted && bv.rule == expected_rule(kind);
        std::ostringstream row;
        row.setf(std::ios::left);
        row.width(22);
        row << mutation_name(kind);
        row << " " << expected_rule(kind) << "    " << (bv.accepted ? "-" : bv.rule)
            << "     " << (bv.accepted ? std::string("-") : std::to_string(bv.position));
        expect(killed, row.str());
    }
    std::cout << (ok ? "demo OK" : "demo FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ordinal register machine toolkit"};
    app.require_subcommand(1);

    std::string program_path, cert_path, output_path, format = "text";
    std::vector<std::string> input_bindings;
    std::uint64_t fuel = 100000, max_jumps = 16, prefix = 100000, max_records = 100000;
    bool trace = false;
    std::string mutation_kind;

    auto* cmd_assemble = app.add_subcommand("assemble", "assemble a program and list it");
    cmd_assemble->add_option("program", program_path, "source file")->required();

    auto* cmd_run = app.add_subcommand("run", "run a program");
    cmd_run->add_option("program", program_path, "source file")->required();
    cmd_run->add_option("--input", input_bindings, "initial register value name=ordinal");
    cmd_run->add_option("--fuel", fuel, "concrete step budget");
    cmd_run->add_option("--max-jumps", max_jumps, "limit jump budget (0 disables acceleration)");
    cmd_run->add_flag("--trace", trace, "print every concrete configuration");

    auto* cmd_certify = app.add_subcommand("certify", "emit a run certificate");
    cmd_certify->add_option("--program", program_path, "source file")->required();
    cmd_certify->add_option("--input", input_bindings, "initial register value name=ordinal");
    cmd_certify->add_option("--fuel", fuel, "concrete step budget");
    cmd_certify->add_option("--max-jumps", max_jumps, "limit jump budget");
    cmd_certify->add_option("--prefix", prefix, "number of records to emit");
    cmd_certify->add_option("--format", format, "text|bits|packed");
    cmd_certify->add_option("-o,--output", output_path, "output file (default stdout)");

    auto* cmd_verify = app.add_subcommand("verify", "check a certificate");
    cmd_verify->add_option("--program", program_path, "source file")->required();
    cmd_verify->add_option("--cert", cert_path, "certificate file")->required();
    cmd_verify->add_option("--max-records", max_records, "records to consume");
    cmd_verify->add_option("--format", format, "text|bits|packed");

    auto* cmd_mutate = app.add_subcommand("mutate", "corrupt a generated certificate");
    cmd_mutate->add_option("--program", program_path, "source file")->required();
    cmd_mutate->add_option("--input", input_bindings, "initial register value name=ordinal");
    cmd_mutate->add_option("--fuel", fuel, "concrete step budget");
    cmd_mutate->add_option("--max-jumps", max_jumps, "limit jump budget");
    cmd_mutate->add_option("--kind", mutation_kind, "mutation kind")->required();
    cmd_mutate->add_option("--prefix", prefix, "number of records");
    cmd_mutate->add_option("--format", format, "text|bits|packed");
    cmd_mutate->add_option("-o,--output", output_path, "output file (default stdout)");

    auto* cmd_dioph = app.add_subcommand("dioph", "Diophantine utilities");
    cmd_dioph->require_subcommand(1);
    std::string arg1, arg2, system_path, witness_path;
    std::vector<std::string> real_bindings;
    auto* d_stretch = cmd_dioph->add_subcommand("stretch", "spread bits n positions apart");
    d_stretch->add_option("value", arg1)->required();
    d_stretch->add_option("n", arg2)->required();
    auto* d_dom = cmd_dioph->add_subcommand("dominate", "bitwise domination test");
    d_dom->add_option("a", arg1)->required();
    d_dom->add_option("b", arg2)->required();
    auto* d_trunc = cmd_dioph->add_subcommand("trunc", "truncation witness g < 2^a r < g+1");
    d_trunc->add_option("r", arg1, "rational p/q")->required();
    d_trunc->add_option("a", arg2)->required();
    auto* d_eval = cmd_dioph->add_subcommand("eval", "evaluate a constraint system");
    d_eval->add_option("--system", system_path)->required();
    d_eval->add_option("--witness", witness_path)->required();
    d_eval->add_option("--real", real_bindings, "real variable binding name=p/q");

    auto* cmd_demo = app.add_subcommand("demo", "end-to-end waiter walkthrough");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_assemble->parsed()) {
            Program p = assemble(read_file(program_path));
            std::cout << "OK " << p.code.size() << " instructions " << p.regs.size()
                      << " registers\n";
            for (std::size_t i = 0; i < p.code.size(); ++i)
                std::cout << i << ": " << instr_str(p, p.code[i]) << "\n";
            return 0;
        }
        if (cmd_run->parsed()) {
            Program p = assemble(read_file(program_path));
            RunSummary s = run(p, parse_inputs(input_bindings), fuel, max_jumps);
            if (trace) {
                for (const auto& phase : s.phases) {
                    if (const auto* seg = std::get_if<RunSummary::ConcreteSegment>(&phase)) {
                        for (const Configuration& c : *seg) {
                            std::cout << "t=" << c.time.str() << " ip=" << c.ip;
                            for (std::size_t r = 0; r < p.regs.size(); ++r)
                                std::cout << " " << p.regs[r] << "=" << c.regs[r].str();
                            std::cout << "\n";
                        }
                    } else {
                        const auto& j = std::get<RunSummary::LimitJump>(phase);
                        std::cout << "LIMIT JUMP from t=" << j.pre.time.str() << " to t="
                                  << j.post.time.str() << "\n";
                    }
                }
            }
            std::cout << summary_line(p, s) << "\n";
            return s.outcome == RunSummary::Outcome::Halted ? 0 : 1;
        }
        if (cmd_certify->parsed()) {
            Program p = assemble(read_file(program_path));
            RunSummary s = run(p, parse_inputs(input_bindings), fuel, max_jumps);
            auto records = make_certificate(p, s, prefix);
            write_output(output_path, dump_cert(records, format, p));
            return 0;
        }
        if (cmd_verify->parsed()) {
            Program p = assemble(read_file(program_path));
            std::vector<Record> records;
            try {
                records = load_cert(cert_path, format, p);
            } catch (const FramingError& e) {
                std::cout << "REJECT " << e.position << " FRAME " << e.what() << "\n";
                return 1;
            }
            Verdict v = verify(p, records, max_records);
            if (v.accepted) {
                std::cout << "ACCEPT " << v.consumed << "\n";
                return 0;
            }
            std::cout << "REJECT " << v.position << " " << v.rule << " " << v.detail << "\n";
            return 1;
        }
        if (cmd_mutate->parsed()) {
            Program p = assemble(read_file(program_path));
            RunSummary s = run(p, parse_inputs(input_bindings), fuel, max_jumps);
            auto kind = mutation_from_name(mutation_kind);
            if (!kind) throw std::runtime_error("unknown mutation kind '" + mutation_kind + "'");
            auto records = mutate(make_certificate(p, s, prefix), *kind, p, s);
            write_output(output_path, dump_cert(records, format, p));
            return 0;
        }
        if (d_stretch->parsed()) {
            std::cout << stretch(BigInt(arg1), std::stoull(arg2)).str() << "\n";
            return 0;
        }
        if (d_dom->parsed()) {
            std::cout << (dominates(BigInt(arg1), BigInt(arg2)) ? "true" : "false") << "\n";
            return 0;
        }
        if (d_trunc->parsed()) {
            std::cout << truncation_witness(parse_rational(arg1), std::stoull(arg2)).str()
                      << "\n";
            return 0;
        }
        if (d_eval->parsed()) {
            ConstraintSystem sys = system_from_json(read_file(system_path));
            WitnessTuple w = witness_from_json(read_file(witness_path));
            std::map<std::string, Rational> reals;
            for (const std::string& b : real_bindings) {
                auto eq = b.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("real binding '" + b + "' is not name=p/q");
                reals[b.substr(0, eq)] = parse_rational(b.substr(eq + 1));
            }
            std::cout << (eval_system(sys, w, reals) ? "true" : "false") << "\n";
            return 0;
        }
        if (cmd_demo->parsed()) return run_demo();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
