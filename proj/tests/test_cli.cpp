#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bcones/io.hpp"
#include "oracles.hpp"

using namespace bcones;
using bcones::io::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status = -1;
    std::string out;
};

Outcome run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" BCONES_CLI_PATH "\" " + args + " 2>/dev/null";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string data(const std::string& name) { return "\"" + std::string(BCONES_DATA_DIR) + "/" + name + "\""; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("bcones_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& contents)
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << contents;
        return "\"" + p.string() + "\"";
    }
    std::string path(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }
    std::string read(const std::string& name) const
    {
        std::ifstream in(dir_ / name);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

Matrix leslie_h4()
{
    Matrix H(4, 4);
    H << 0, 0, 1, 1,
         0, 1, 1, 0,
         1, 1, 0, 0,
         1, 0, 0, 1;
    return H;
}

} // namespace

TEST_F(Cli, HankelOfLeslieData)
{
    const Outcome r = run("hankel " + data("leslie_trajectory.csv") + " -L 4");
    ASSERT_EQ(r.status, 0);
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("rows"), 4);
    EXPECT_EQ(j.at("cols"), 4);
    EXPECT_EQ(io::matrix_from_json(j.at("entries")), leslie_h4());
}

TEST_F(Cli, HankelOfShortScalar)
{
    const Outcome r = run("hankel " + file("w.csv", "y1\n1\n2\n3\n") + " -L 2");
    ASSERT_EQ(r.status, 0);
    Matrix expected(2, 2);
    expected << 1, 2, 2, 3;
    EXPECT_EQ(io::matrix_from_json(json::parse(r.out).at("entries")), expected);
}

TEST_F(Cli, HankelInputErrors)
{
    EXPECT_EQ(run("hankel " + file("w.csv", "y1\n1\n2\n3\n") + " -L 4").status, 2);
    EXPECT_EQ(run("hankel " + file("bad.csv", "y1\n1\nfoo\n") + " -L 1").status, 2);
    EXPECT_EQ(run("hankel " + file("ragged.csv", "u1,y1\n1,2\n3\n") + " -L 1").status, 2);
    EXPECT_EQ(run("hankel " + path("missing.csv") + " -L 1").status, 2);
    EXPECT_EQ(run("hankel " + data("leslie_trajectory.csv")).status, 2);
    EXPECT_EQ(run("hankel " + data("leslie_trajectory.csv") + " -L 0").status, 2);
}

TEST_F(Cli, HankelIsByteDeterministic)
{
    std::mt19937_64 rng(91);
    std::ostringstream csv;
    io::write_trajectory_csv(csv, Trajectory(oracle::uniform(20, 3, rng, -1, 1), 1));
    const std::string w = file("w.csv", csv.str());
    const Outcome a = run("hankel " + w + " -L 5");
    const Outcome b = run("hankel " + w + " -L 5 --output " + path("h.json"));
    ASSERT_EQ(a.status, 0);
    ASSERT_EQ(b.status, 0);
    EXPECT_EQ(a.out, read("h.json"));
    EXPECT_EQ(a.out, run("hankel " + w + " -L 5").out);
}

TEST_F(Cli, PeCheckExitCodes)
{
    const std::string w = data("leslie_trajectory.csv");
    const std::string x = " --state " + data("leslie_state.csv");
    const Outcome pos = run("pe-check " + w + x + " --class positiveLinear -m 0 -n 4 -L 4");
    EXPECT_EQ(pos.status, 0);
    const json j = json::parse(pos.out);
    EXPECT_EQ(j.at("verdict"), "REPRESENTATIVE");
    EXPECT_EQ(j.at("nnLower"), 4);
    EXPECT_EQ(j.at("nnUpper"), 4);
    EXPECT_EQ(j.at("ordinaryRank"), 3);
    EXPECT_EQ(j.at("monomialFound"), true);

    const Outcome lin = run("pe-check " + w + " --class linear -m 0 -n 4 -L 4");
    EXPECT_EQ(lin.status, 3);
    EXPECT_EQ(json::parse(lin.out).at("verdict"), "NOT_REPRESENTATIVE");

    EXPECT_EQ(run("pe-check " + w + " --class positiveLinear -m 0 -n 4 -L 4").status, 2);
    EXPECT_EQ(run("pe-check " + w + " --class conical -m 0 -n 4 -L 4").status, 2);
    EXPECT_EQ(run("pe-check " + w + x + " --class positiveLinear -m 0 -n 3 -L 4").status, 3);
    EXPECT_EQ(run("pe-check " + w + x + " --class positiveAffine -m 0 -n 4 -L 4").status, 3);
    EXPECT_EQ(run("pe-check " + w + " --class affine -m 0 -n 4 -L 4").status, 3);
    EXPECT_EQ(run("pe-check " + w + " --class bogus -m 0 -n 4 -L 4").status, 2);
    EXPECT_EQ(run("pe-check " + w + " --class linear -m 1 -n 4 -L 4").status, 2);
    EXPECT_EQ(run("pe-check " + w + " --class linear -m 0 -n 4 -L 8").status, 2);
}

TEST_F(Cli, PeCheckIsDeterministicUnderSeed)
{
    const std::string args = "pe-check " + data("leslie_trajectory.csv") + " --state " + data("leslie_state.csv") +
                             " --class positiveAffine -m 0 -n 3 -L 4 --restarts 5";
    const Outcome a = run(args + " --seed 7");
    const Outcome b = run(args + " --seed 7");
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.status, b.status);
    const Outcome c = run(args, "BEHAVIOR_CONES_SEED=7");
    EXPECT_EQ(c.out, a.out);
    EXPECT_EQ(run(args, "BEHAVIOR_CONES_SEED=seven").status, 2);
}

TEST_F(Cli, MemberExitCodes)
{
    const std::string cone = path("cone.json");
    ASSERT_EQ(run("mpum " + data("leslie_trajectory.csv") + " -L 4 --class positiveLinear --output " + cone).status, 0);

    EXPECT_EQ(run("member " + cone + " " + file("g.csv", "y1\n0\n0\n1\n1\n")).status, 0);
    const Outcome neg = run("member " + cone + " " + file("neg.csv", "y1\n0\n0\n-1\n-1\n"));
    EXPECT_EQ(neg.status, 3);
    EXPECT_EQ(json::parse(neg.out).at("feasible"), false);

    std::mt19937_64 rng(92);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector point = leslie_h4() * oracle::uniform(4, 1, rng);
        std::ostringstream csv;
        io::write_trajectory_csv(csv, Trajectory(point, 0));
        EXPECT_EQ(run("member " + cone + " " + file("p.csv", csv.str())).status, 0);
    }
    EXPECT_EQ(run("member " + cone + " " + file("short.csv", "y1\n0\n1\n")).status, 2);
    EXPECT_EQ(run("member " + file("bad.json", "{not json") + " " + file("g2.csv", "y1\n0\n0\n1\n1\n")).status, 2);
}

TEST_F(Cli, SimulateLeslie)
{
    const Outcome r = run("simulate " + data("leslie_model.json") + " --x0 1,0,0,0 -T 7 --state-output " + path("x.csv"));
    ASSERT_EQ(r.status, 0);
    std::istringstream out(r.out);
    const Trajectory w = io::read_trajectory_csv(out);
    Vector expected(7);
    expected << 0, 0, 1, 1, 0, 0, 1;
    EXPECT_EQ(Vector(w.outputs()), expected);
    std::istringstream x(read("x.csv"));
    EXPECT_EQ(Matrix(io::read_state_csv(x).samples().topRows(4)), Matrix::Identity(4, 4));
}

TEST_F(Cli, SimulateZeroAndAffineModels)
{
    const std::string zero = file("zero.json", R"({"n":2,"m":1,"p":1,"affine":false,
        "A":[[0,0],[0,0]],"B":[[0],[0]],"C":[[0,0]],"D":[[0]]})");
    const Outcome z = run("simulate " + zero + " -T 3 --input " + file("u.csv", "u1\n1\n2\n3\n"));
    ASSERT_EQ(z.status, 0);
    EXPECT_EQ(z.out, "u1,y1\n1,0\n2,0\n3,0\n");

    const std::string affine = file("aff.json", R"({"n":1,"m":0,"p":1,"affine":true,
        "A":[[0]],"C":[[1]],"E":[1],"F":[0]})");
    const Outcome a = run("simulate " + affine + " --x0 0 -T 3");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, "y1\n0\n1\n1\n");

    EXPECT_EQ(run("simulate " + zero + " -T 3").status, 2);
    EXPECT_EQ(run("simulate " + affine + " --x0 0,1 -T 3").status, 2);
}

TEST_F(Cli, MpumClasses)
{
    const Outcome cone = run("mpum " + data("leslie_trajectory.csv") + " -L 4 --class positiveLinear");
    ASSERT_EQ(cone.status, 0);
    const FiniteBehavior B = io::behavior_from_json(json::parse(cone.out));
    EXPECT_EQ(B.hull(), HullType::convexCone);
    EXPECT_EQ(B.generators(), leslie_h4());

    const Outcome aff = run("mpum " + file("w.csv", "y1\n1\n2\n") + " -L 1 --class affine");
    ASSERT_EQ(aff.status, 0);
    EXPECT_EQ(json::parse(aff.out).at("hull"), "affine");
    EXPECT_EQ(run("mpum " + file("w2.csv", "y1\n1\n2\n") + " -L 3").status, 2);
}

TEST_F(Cli, LeslieDemo)
{
    const Outcome ok = run("leslie-demo --json");
    ASSERT_EQ(ok.status, 0);
    const json j = json::parse(ok.out);
    EXPECT_EQ(j.at("reproduced"), true);
    for (const auto& c : j.at("checks")) EXPECT_TRUE(c.at("ok").get<bool>()) << c.dump();

    const Outcome text = run("leslie-demo");
    EXPECT_EQ(text.status, 0);
    EXPECT_NE(text.out.find("rank H = 3"), std::string::npos);
    EXPECT_NE(text.out.find("rank+ H bounds = (4,4)"), std::string::npos);

    EXPECT_NE(run("leslie-demo -n 3").status, 0);

    const Outcome deeper = run("leslie-demo -L 5 --json");
    EXPECT_NE(deeper.status, 0);
    const json d = json::parse(deeper.out);
    EXPECT_EQ(d.at("hankel").size(), 5u);
    EXPECT_EQ(d.at("hankel").at(0).size(), 3u);
    EXPECT_EQ(d.at("reports").at(0).at("ordinaryRank"), 3);
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("--help").status, 0);
}
