#include "switching/experiment.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

using namespace switching;

namespace {

RunConfig small_config(const std::string& name) {
    RunConfig c;
    c.components = 3;
    c.alpha = 1e-1;
    c.mesh_edge = 0.2;
    c.time_intervals = 50;
    c.homotopy.gamma_min = 1e-8;
    c.output_dir = std::filesystem::temp_directory_path() / ("switching_experiment_" + name);
    std::filesystem::remove_all(c.output_dir);
    return c;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST(ControlsCsv, RoundTripIsExact) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    ControlTrajectory u(17, 4);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u.data()[i] = normal(rng) * std::pow(10.0, static_cast<double>(i % 9) - 4);
    u(3, 2) = 0.0;
    u(4, 1) = -0.0;
    std::stringstream s;
    write_controls_csv(s, u, TimeGrid{2.0, 17});
    const ControlTrajectory back = read_controls_csv(s);
    EXPECT_TRUE(back == u);
}

TEST(ControlsCsv, HeaderAndTimes) {
    std::stringstream s;
    write_controls_csv(s, ControlTrajectory::Zero(2, 2), TimeGrid{1.0, 2});
    EXPECT_EQ(s.str(), "t,u1,u2\n0.25,0,0\n0.75,0,0\n");
}

TEST(ControlsCsv, RejectsMalformedInput) {
    std::stringstream empty;
    EXPECT_THROW(read_controls_csv(empty), std::runtime_error);
    std::stringstream ragged("t,u1,u2\n0.5,1\n");
    EXPECT_THROW(read_controls_csv(ragged), std::runtime_error);
}

TEST(Experiment, WritesFilesAndIsDeterministic) {
    RunConfig config = small_config("determinism");
    config.emit_svg = true;
    const ExperimentOutput first = run_experiment(config);
    ASSERT_TRUE(std::filesystem::exists(first.controls_csv));
    ASSERT_TRUE(std::filesystem::exists(first.summary));
    ASSERT_TRUE(std::filesystem::exists(first.svg));
    const std::string csv = slurp(first.controls_csv);
    const std::string summary = slurp(first.summary);

    const ExperimentOutput second = run_experiment(config);
    EXPECT_EQ(slurp(second.controls_csv), csv);
    EXPECT_EQ(slurp(second.summary), summary);

    std::ifstream in(first.controls_csv);
    const ControlTrajectory u = read_controls_csv(in);
    EXPECT_TRUE(u == first.report.u);
    EXPECT_EQ(u.rows(), 50);
    EXPECT_EQ(u.cols(), 3);

    const std::string svg = slurp(first.svg);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::filesystem::remove_all(config.output_dir);
}

TEST(Experiment, SummaryMatchesDiagnostics) {
    const RunConfig config = small_config("summary");
    const ExperimentOutput output = run_experiment(config);
    const auto summary = nlohmann::json::parse(slurp(output.summary));
    const auto& report = output.report;
    EXPECT_EQ(summary["tau"].get<std::vector<int>>(), report.diagnostics.tau);
    EXPECT_EQ(summary["switch_points"].get<int>(), report.diagnostics.switch_points);
    EXPECT_EQ(summary["gamma_bar"].get<double>(), report.last_gamma);
    EXPECT_EQ(summary["N"].get<int>(), 3);
    ASSERT_EQ(summary["stages"].size(), report.stages.size());
    for (std::size_t k = 0; k < report.stages.size(); ++k) {
        const auto& stage = summary["stages"][k];
        EXPECT_EQ(stage["ssn"].get<int>(), report.stages[k].newton_iterations);
        EXPECT_EQ(stage["cg_last"].get<int>(), report.stages[k].last_cg_iterations);
        EXPECT_EQ(stage["residuals"].size(), report.stages[k].history.size());
        if (report.stages[k].status == StageStatus::Converged)
            EXPECT_EQ(stage["tau"].get<std::vector<int>>(), report.stages[k].diagnostics.tau);
    }
    EXPECT_FALSE(std::filesystem::exists(config.output_dir / "controls.svg"));
    std::filesystem::remove_all(config.output_dir);
}

TEST(Sweep, ParameterNames) {
    EXPECT_EQ(parse_sweep_parameter("alpha"), SweepParameter::Alpha);
    EXPECT_EQ(parse_sweep_parameter("gamma"), SweepParameter::Gamma);
    EXPECT_THROW(parse_sweep_parameter("beta"), ConfigError);
}

TEST(Sweep, EmptyListGivesHeaderOnly) {
    const auto rows = run_table_sweep(small_config("empty"), SweepParameter::Alpha, {});
    EXPECT_TRUE(rows.empty());
    std::stringstream s;
    write_sweep_csv(s, SweepParameter::Alpha, rows);
    EXPECT_EQ(s.str(), "alpha,tau1,tau2,tau3,gamma_bar,ssn,cg,status\n");
    std::stringstream g;
    write_sweep_csv(g, SweepParameter::Gamma, rows);
    EXPECT_EQ(g.str(), "gamma,tau1,tau2,tau3,gamma,ssn,cg,status\n");
}

TEST(Sweep, AlphaRowsMatchSingleRuns) {
    const RunConfig base = small_config("alpha");
    const std::vector<double> alphas = {1e-1, 1e-3};
    const auto rows = run_table_sweep(base, SweepParameter::Alpha, alphas);
    ASSERT_EQ(rows.size(), 2u);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        RunConfig single = base;
        single.alpha = alphas[k];
        const ExperimentSetup setup = build_setup(single);
        const SolveReport report = solve_configured(single, setup);
        EXPECT_EQ(rows[k].value, alphas[k]);
        EXPECT_EQ(rows[k].gamma, report.last_gamma);
        EXPECT_EQ(rows[k].tau[0], report.diagnostics.tau[0]);
        EXPECT_EQ(rows[k].tau[1], report.diagnostics.tau[1]);
        EXPECT_EQ(rows[k].status, "converged");
    }
}

TEST(Sweep, GammaRowsFollowOneHomotopy) {
    const RunConfig base = small_config("gamma");
    const auto rows = run_table_sweep(base, SweepParameter::Gamma, {1e-2, 1e-4, 1e-6});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].gamma, 1e-2);
    EXPECT_EQ(rows[2].gamma, 1e-6);
    std::stringstream s;
    write_sweep_csv(s, SweepParameter::Gamma, rows);
    std::string line;
    int lines = 0;
    while (std::getline(s, line))
        ++lines;
    EXPECT_EQ(lines, 4);
}

TEST(Sweep, OffScheduleGammaStillGetsARow) {
    const RunConfig base = small_config("offschedule");
    const auto rows = run_table_sweep(base, SweepParameter::Gamma, {3e-3, 1e-4});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].gamma, 3e-3);
    EXPECT_EQ(rows[0].status, "converged");
    EXPECT_LE(rows[0].tau[0] + rows[0].tau[1] + rows[0].tau[2], 50);
    EXPECT_EQ(rows[1].gamma, 1e-4);

    // The fixed solve lands on the same solution as a homotopy reaching 3e-3.
    RunConfig direct = base;
    direct.homotopy.gamma_start = 3e-2;
    direct.homotopy.gamma_min = 3e-3;
    const ExperimentSetup setup = build_setup(direct);
    const SolveReport report = solve_configured(direct, setup);
    EXPECT_EQ(rows[0].tau, std::vector<int>(report.diagnostics.tau.begin(), report.diagnostics.tau.begin() + 3));
}
