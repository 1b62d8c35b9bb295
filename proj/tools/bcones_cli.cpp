// bcones: command-line front end for Hankel construction, persistence-of-
// excitation checks, membership queries, simulation and finite-horizon MPUMs.
//
// Exit codes: 0 success / REPRESENTATIVE / feasible, 1 unexpected failure,
// 2 invalid input, 3 NOT_REPRESENTATIVE / infeasible, 4 UNDECIDED.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcones/bcones.hpp"
#include "bcones/io.hpp"

namespace {

using namespace bcones;
using bcones::io::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNegative = 3;
constexpr int kExitUndecided = 4;

constexpr std::uint64_t kDefaultSeed = 20240601;

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("BEHAVIOR_CONES_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InputError(std::string("BEHAVIOR_CONES_SEED is not an unsigned integer: '") + env + "'");
    }
    return kDefaultSeed;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

Trajectory load_trajectory(const std::string& path)
{
    auto in = open_input(path);
    try {
        return io::read_trajectory_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

StateTrajectory load_states(const std::string& path)
{
    auto in = open_input(path);
    try {
        return io::read_state_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

json load_json(const std::string& path)
{
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

/// Writes to `path`, or to standard output when it is empty.
void emit(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw InputError("not a number in list: '" + cell + "'");
        }
    }
    return out;
}

int verdict_exit(Verdict v)
{
    switch (v) {
    case Verdict::representative: return kExitOk;
    case Verdict::notRepresentative: return kExitNegative;
    case Verdict::undecided: return kExitUndecided;
    }
    return kExitFailure;
}

struct SearchOptions {
    std::uint64_t seed = kDefaultSeed;
    std::size_t restarts = 50;

    [[nodiscard]] NnRankConfig config(double rankTol) const
    {
        NnRankConfig c;
        c.seed = seed;
        c.restarts = restarts;
        c.rankTol = rankTol;
        return c;
    }
};

// ---- hankel ---------------------------------------------------------------

struct HankelArgs {
    std::string trajectory;
    std::size_t L = 1;
    std::string output;
};

int run_hankel(const HankelArgs& a)
{
    const Trajectory w = load_trajectory(a.trajectory);
    emit_json(a.output, io::hankel_to_json(build_hankel(w, a.L)));
    return kExitOk;
}

// ---- pe-check -------------------------------------------------------------

struct PeArgs {
    std::string trajectory;
    std::string state;
    std::string cls = "linear";
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t L = 1;
    double tol = 0.0;
    SearchOptions search;
    std::string output;
};

int run_pe_check(const PeArgs& a)
{
    const ModelClass cls = parse_model_class(a.cls);
    const Trajectory w = load_trajectory(a.trajectory);
    PEReport r;
    switch (cls) {
    case ModelClass::linear: r = pe_check_linear(w, a.m, a.n, a.L, a.tol); break;
    case ModelClass::affine: r = pe_check_affine(w, a.m, a.n, a.L, a.tol); break;
    case ModelClass::positiveLinear:
    case ModelClass::positiveAffine: {
        if (a.state.empty()) throw InputError("class " + a.cls + " needs a state trajectory (--state)");
        const StateTrajectory x = load_states(a.state);
        const NnRankConfig cfg = a.search.config(a.tol);
        r = cls == ModelClass::positiveLinear ? pe_check_positive(w, x, a.m, a.n, a.L, cfg)
                                              : pe_check_positive_affine(w, x, a.m, a.n, a.L, cfg);
        break;
    }
    }
    emit_json(a.output, io::report_to_json(r));
    return verdict_exit(r.verdict);
}

// ---- member ---------------------------------------------------------------

struct MemberArgs {
    std::string behavior;
    std::string window;
    double tol = kDefaultMembershipTol;
    std::string output;
};

int run_member(const MemberArgs& a)
{
    const FiniteBehavior B = io::behavior_from_json(load_json(a.behavior));
    const Trajectory w = load_trajectory(a.window);
    if (w.q() != B.q() || w.length() != B.horizon())
        throw InputError("window has " + std::to_string(w.length()) + " samples of dimension " +
                         std::to_string(w.q()) + ", behavior expects " + std::to_string(B.horizon()) +
                         " of dimension " + std::to_string(B.q()));
    const MembershipCertificate c = membership(B, w.stacked(), a.tol);
    emit_json(a.output, io::certificate_to_json(c));
    return c.feasible ? kExitOk : kExitNegative;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    std::string x0;
    std::size_t T = 1;
    std::string input;
    std::string output;
    std::string stateOutput;
};

int run_simulate(const SimulateArgs& a)
{
    const StateSpaceModel ss = io::model_from_json(load_json(a.model));
    const std::vector<double> x0v = a.x0.empty() ? std::vector<double>(ss.n(), 0.0) : parse_list(a.x0);
    if (x0v.size() != ss.n())
        throw InputError("--x0 has " + std::to_string(x0v.size()) + " entries, model order is " +
                         std::to_string(ss.n()));
    const Vector x0 = Eigen::Map<const Vector>(x0v.data(), static_cast<Index>(x0v.size()));

    Matrix u(0, 0);
    if (ss.m() > 0) {
        if (a.input.empty()) throw InputError("model has inputs; supply --input");
        auto in = open_input(a.input);
        const io::CsvTable t = io::read_csv(in);
        for (const auto& name : t.header)
            if (name.empty() || name[0] != 'u') throw InputError("input header fields must be named u<k>");
        u = t.values;
    }
    const Simulation sim = simulate(ss, x0, u, a.T);
    std::ostringstream traj;
    io::write_trajectory_csv(traj, sim.trajectory);
    emit(a.output, traj.str());
    if (!a.stateOutput.empty()) {
        std::ostringstream st;
        io::write_state_csv(st, sim.states);
        emit(a.stateOutput, st.str());
    }
    return kExitOk;
}

// ---- mpum -----------------------------------------------------------------

struct MpumArgs {
    std::string trajectory;
    std::size_t L = 1;
    std::string cls = "positiveLinear";
    std::string output;
};

int run_mpum(const MpumArgs& a)
{
    const Trajectory w = load_trajectory(a.trajectory);
    const MpumResult r = mpum_finite(w, a.L, parse_model_class(a.cls));
    emit_json(a.output, io::behavior_to_json(r.behavior));
    return kExitOk;
}

// ---- leslie-demo ----------------------------------------------------------

struct DemoArgs {
    std::size_t n = 4;
    std::size_t L = 4;
    SearchOptions search;
    bool json = false;
    std::string output;
};

struct Check {
    std::string name;
    std::string expected;
    std::string actual;
    bool ok = false;
};

std::string matrix_text(const Matrix& M)
{
    std::ostringstream s;
    for (Index i = 0; i < M.rows(); ++i) {
        s << "  ";
        for (Index j = 0; j < M.cols(); ++j) s << (j ? " " : "") << io::format_number(M(i, j));
        s << '\n';
    }
    return s.str();
}

std::string bounds_text(const NnRankBounds& b)
{
    return "(" + std::to_string(b.lower) + "," + (b.upper ? std::to_string(*b.upper) : std::string("?")) + ")";
}

int run_leslie_demo(const DemoArgs& a)
{
    const StateSpaceModel ss = leslie_model({0, 0, 0, 1}, {1, 1, 1}, 2);
    const Simulation sim = simulate(ss, Vector::Unit(4, 0), 7);
    const Trajectory& w = sim.trajectory;
    const NnRankConfig cfg = a.search.config(0.0);

    Matrix referenceH(4, 4);
    referenceH << 0, 0, 1, 1,
              0, 1, 1, 0,
              1, 1, 0, 0,
              1, 0, 0, 1;

    const Matrix H = build_hankel(w, a.L).entries;
    const PEReport lin = pe_check_linear(w, 0, a.n, a.L);
    const PEReport aff = pe_check_affine(w, 0, a.n, a.L);
    const PEReport pos = pe_check_positive(w, sim.states, 0, a.n, a.L, cfg);
    const PEReport cvx = pe_check_positive_affine(w, sim.states, 0, a.n, a.L, cfg);
    const Matrix X = input_state_matrix(w, sim.states, a.L);

    std::vector<Check> checks;
    auto check = [&](std::string name, std::string expected, std::string actual) {
        const bool ok = expected == actual;
        checks.push_back({std::move(name), std::move(expected), std::move(actual), ok});
    };
    check("trajectory", "0 0 1 1 0 0 1", [&] {
        std::string s;
        for (Index t = 0; t < w.outputs().rows(); ++t) s += (t ? " " : "") + io::format_number(w.outputs()(t, 0));
        return s;
    }());
    check("hankel matrix", matrix_text(referenceH), matrix_text(H));
    check("rank", "3", std::to_string(lin.ordinaryRank));
    check("nonnegative rank bounds", "(4,4)", bounds_text(*pos.nnBounds));
    check("state matrix H_1(x)", matrix_text(Matrix::Identity(4, 4)), matrix_text(X));
    check("monomial order", "4",
          pos.monomial ? std::to_string(pos.monomial->order()) : std::string("none"));
    check("linear verdict", "NOT_REPRESENTATIVE", std::string(to_string(lin.verdict)));
    check("positive verdict", "REPRESENTATIVE", std::string(to_string(pos.verdict)));
    bool allOk = true;
    for (const auto& c : checks) allOk = allOk && c.ok;

    if (a.json) {
        json j;
        j["model"] = io::model_to_json(ss);
        j["trajectory"] = io::matrix_to_json(w.samples());
        j["hankel"] = io::matrix_to_json(H);
        j["reports"] = json::array({io::report_to_json(lin), io::report_to_json(aff), io::report_to_json(pos),
                                    io::report_to_json(cvx)});
        j["checks"] = json::array();
        for (const auto& c : checks)
            j["checks"].push_back({{"name", c.name}, {"expected", c.expected}, {"actual", c.actual}, {"ok", c.ok}});
        j["reproduced"] = allOk;
        emit_json(a.output, j);
        return allOk ? kExitOk : kExitFailure;
    }

    std::ostringstream s;
    s << "Leslie model, n = 4 age classes, output = last 2 classes, x(0) = e1, T = 7\n";
    s << "claimed order n = " << a.n << ", depth L = " << a.L << "\n\n";
    s << "A =\n" << matrix_text(ss.A()) << "C =\n" << matrix_text(ss.C());
    s << "w_d = " << checks[0].actual << "\n\n";
    s << "H_" << a.L << "(w_d) (" << H.rows() << " x " << H.cols() << ") =\n" << matrix_text(H);
    s << "rank H = " << lin.ordinaryRank << ", rank [H; 1] = " << aff.ordinaryRank << "\n";
    s << "rank+ H bounds = " << bounds_text(*pos.nnBounds) << " (lower bound by "
      << to_string(pos.nnBounds->lowerMethod) << ")\n";
    s << "rank+ [H; 1] bounds = " << bounds_text(*cvx.nnBounds) << "\n";
    s << "monomial submatrix of [H_L(u); H_1(x)] of order " << a.n << ": "
      << (pos.monomial ? "found" : pos.monomialStatus == MonomialStatus::absent ? "absent" : "not checked") << "\n\n";
    s << "verdicts:\n";
    for (const PEReport* r : {&lin, &aff, &pos, &cvx})
        s << "  " << to_string(r->modelClass) << ": " << to_string(r->verdict) << " (required "
          << r->requiredRank << ")\n";
    if (pos.representation)
        s << "\nrepresentation: " << to_string(pos.representation->hull()) << " of the columns of\n"
          << matrix_text(pos.representation->generators());
    s << "\nreference values:\n";
    for (const auto& c : checks) {
        s << "  [" << (c.ok ? "match" : "MISMATCH") << "] " << c.name;
        if (!c.ok && c.expected.find('\n') == std::string::npos)
            s << ": expected " << c.expected << ", got " << c.actual;
        s << '\n';
    }
    s << (allOk ? "all reference values reproduced\n" : "reference values NOT reproduced\n");
    emit(a.output, s.str());
    return allOk ? kExitOk : kExitFailure;
}

void add_search_options(CLI::App* cmd, SearchOptions& s)
{
    cmd->add_option("--seed", s.seed, "Master seed for the factorization search")->capture_default_str();
    cmd->add_option("--restarts", s.restarts, "Factorization restarts per inner dimension")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Data-driven representations of conical, convex and affine behaviors"};
    app.require_subcommand(1);

    SearchOptions search;
    try {
        search.seed = default_seed();
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }

    HankelArgs hankelArgs;
    auto* hankelCmd = app.add_subcommand("hankel", "Depth-L block-Hankel matrix of a trajectory");
    hankelCmd->add_option("trajectory", hankelArgs.trajectory, "Trajectory CSV (u1..um,y1..yp)")->required();
    hankelCmd->add_option("-L,--length", hankelArgs.L, "Depth")->required()->check(CLI::PositiveNumber);
    hankelCmd->add_option("--output", hankelArgs.output, "Output file (default: stdout)");

    PeArgs peArgs;
    peArgs.search = search;
    auto* peCmd = app.add_subcommand("pe-check", "Persistence-of-excitation verdict for a model class");
    peCmd->add_option("trajectory", peArgs.trajectory, "Trajectory CSV")->required();
    peCmd->add_option("--state", peArgs.state, "State trajectory CSV (x1..xn); needed for positive classes");
    peCmd->add_option("--class", peArgs.cls, "linear | affine | positiveLinear | positiveAffine")
        ->capture_default_str();
    peCmd->add_option("-m,--inputs", peArgs.m, "Number of inputs")->required();
    peCmd->add_option("-n,--order", peArgs.n, "Model order")->required();
    peCmd->add_option("-L,--length", peArgs.L, "Depth")->required()->check(CLI::PositiveNumber);
    peCmd->add_option("--tol", peArgs.tol, "Relative rank tolerance (0: max(rows,cols) eps)")
        ->check(CLI::NonNegativeNumber);
    add_search_options(peCmd, peArgs.search);
    peCmd->add_option("--output", peArgs.output, "Output file (default: stdout)");

    MemberArgs memberArgs;
    auto* memberCmd = app.add_subcommand("member", "Membership of a window in a behavior");
    memberCmd->add_option("behavior", memberArgs.behavior, "Behavior JSON")->required();
    memberCmd->add_option("window", memberArgs.window, "Window CSV with L samples")->required();
    memberCmd->add_option("--tol", memberArgs.tol, "Relative residual tolerance")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    memberCmd->add_option("--output", memberArgs.output, "Output file (default: stdout)");

    SimulateArgs simArgs;
    auto* simCmd = app.add_subcommand("simulate", "Simulate a state-space model");
    simCmd->add_option("model", simArgs.model, "Model JSON")->required();
    simCmd->add_option("--x0", simArgs.x0, "Initial state, comma separated (default: zero)");
    simCmd->add_option("-T,--steps", simArgs.T, "Number of samples")->required()->check(CLI::PositiveNumber);
    simCmd->add_option("--input", simArgs.input, "Input CSV (u1..um); needed when m > 0");
    simCmd->add_option("--output", simArgs.output, "Trajectory CSV (default: stdout)");
    simCmd->add_option("--state-output", simArgs.stateOutput, "State trajectory CSV");

    MpumArgs mpumArgs;
    auto* mpumCmd = app.add_subcommand("mpum", "Finite-horizon most powerful unfalsified model");
    mpumCmd->add_option("trajectory", mpumArgs.trajectory, "Trajectory CSV")->required();
    mpumCmd->add_option("-L,--length", mpumArgs.L, "Horizon")->required()->check(CLI::PositiveNumber);
    mpumCmd->add_option("--class", mpumArgs.cls, "linear | affine | positiveLinear | positiveAffine")
        ->capture_default_str();
    mpumCmd->add_option("--output", mpumArgs.output, "Output file (default: stdout)");

    DemoArgs demoArgs;
    demoArgs.search = search;
    auto* demoCmd = app.add_subcommand("leslie-demo", "Population-model case study with reference values");
    demoCmd->add_option("-n,--order", demoArgs.n, "Claimed model order")->capture_default_str();
    demoCmd->add_option("-L,--length", demoArgs.L, "Depth")->capture_default_str()->check(CLI::Range(1, 7));
    add_search_options(demoCmd, demoArgs.search);
    demoCmd->add_flag("--json", demoArgs.json, "Emit the report as JSON");
    demoCmd->add_option("--output", demoArgs.output, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*hankelCmd) return run_hankel(hankelArgs);
        if (*peCmd) return run_pe_check(peArgs);
        if (*memberCmd) return run_member(memberArgs);
        if (*simCmd) return run_simulate(simArgs);
        if (*mpumCmd) return run_mpum(mpumArgs);
        if (*demoCmd) return run_leslie_demo(demoArgs);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
