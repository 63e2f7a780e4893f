#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ntree/commands.hpp"

using namespace ntree;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("trace starts from the uniform-state values") {
    RunConfig cfg;
    cfg.command = "trace";
    cfg.n = 2;
    cfg.m = 6;
    cfg.f_leaf = 3;
    cfg.steps = 160;
    cfg.out = temp_file("ntree_trace.csv").string();
    const auto rows = parse_csv(run_command(cfg));
    REQUIRE(rows.size() == 162);  // header + steps 0..160
    REQUIRE(rows[0] == std::vector<std::string>{"step", "f_prob", "path_prob"});
    const double two_e = 2.0 * 127.0;
    CHECK(std::stod(rows[1][1]) == Catch::Approx(2.0 / two_e).epsilon(1e-9));
    CHECK(std::stod(rows[1][2]) == Catch::Approx(2.0 * 6.0 / two_e).epsilon(1e-9));

    SECTION("two oscillation cycles are visible over 4x the schedule") {
        // count prominent maxima of the path column
        std::vector<double> path;
        for (std::size_t i = 1; i < rows.size(); ++i)
            path.push_back(std::stod(rows[i][2]));
        const double gate = 0.5;
        int crest_regions = 0;
        bool above = false;
        for (double v : path) {
            if (!above && v > gate) {
                ++crest_regions;
                above = true;
            } else if (above && v < 0.3) {
                above = false;
            }
        }
        CHECK(crest_regions >= 2);
    }
}

TEST_CASE("identical configs produce byte-identical output") {
    RunConfig cfg;
    cfg.command = "bench";
    cfg.n = 2;
    cfg.m = 8;
    cfg.runs = 300;
    cfg.seed = 12345;
    const std::string a = cmd_bench(cfg);
    const std::string b = cmd_bench(cfg);
    CHECK(a == b);

    cfg.threads = 4;
    CHECK(cmd_bench(cfg) == a);

    RunConfig grid;
    grid.command = "peaks";
    grid.n_range = {2, 3};
    grid.m_range = {2, 5};
    const std::string p1 = cmd_peaks(grid);
    grid.threads = 3;
    CHECK(cmd_peaks(grid) == p1);
}

TEST_CASE("peak table reproduces the headline probability trends") {
    RunConfig cfg;
    cfg.command = "peaks";
    cfg.n_range = {2, 3};
    cfg.m_range = {4, 6};
    const auto rows = parse_csv(cmd_peaks(cfg));
    REQUIRE(rows.size() == 7);
    // columns: n, m, path_peak_step, path_peak_prob, f_peak_step, f_peak_prob
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const bool same_n = rows[i][0] == rows[i + 1][0];
        if (!same_n) continue;
        CHECK(std::stod(rows[i + 1][3]) > std::stod(rows[i][3]));  // path grows in M
        CHECK(std::stod(rows[i + 1][5]) < std::stod(rows[i][5]));  // F falls in M
        CHECK(std::stoll(rows[i + 1][2]) > std::stoll(rows[i][2]));  // steps grow
    }
}

TEST_CASE("eigen report carries the reduced dimension") {
    RunConfig cfg;
    cfg.command = "eigen";
    cfg.n = 2;
    cfg.m = 4;
    const auto j = nlohmann::json::parse(cmd_eigen(cfg));
    CHECK(j.at("d") == 15);
    CHECK(j.at("schema_version") == kSchemaVersion);
    CHECK(std::abs(j.at("theta_lambda_degrees").get<double>() - 5.5376) < 1e-3);
    CHECK(j.at("beta_abs").get<double>() > 0.5);
}

TEST_CASE("fit over a modest grid lands near the default constants") {
    RunConfig cfg;
    cfg.command = "fit";
    cfg.n_range = {2, 8};
    cfg.m_range = {1, 8};
    cfg.threads = 4;
    const auto j = nlohmann::json::parse(cmd_fit(cfg));
    const StepModel defaults = default_step_model();
    CHECK(std::abs(j.at("alpha").get<double>() - defaults.alpha) < 3.0);
    CHECK(std::abs(j.at("beta").get<double>() - defaults.beta) < 0.08);
    CHECK(std::abs(j.at("gamma").get<double>() - defaults.gamma) < 0.02);
    CHECK(j.at("residuals").size() == 7 * 8);
    CHECK(j.at("max_rel_residual").get<double>() < 0.2);
}

TEST_CASE("analytics table matches the TrialModel entries") {
    RunConfig cfg;
    cfg.command = "analytics";
    cfg.m = 12;
    const auto rows = parse_csv(cmd_analytics(cfg));
    REQUIRE(rows.size() == 1 + 4 * 8);  // four p values, y = 1..8
    bool checked = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][1] == "0.9" && rows[i][2] == "3") {
            TrialModel model(12, 0.9);
            CHECK(std::stod(rows[i][3]) ==
                  Catch::Approx(model.p_succ(3, TrialModel::Mode::ExactSum)));
            CHECK(std::stod(rows[i][4]) ==
                  Catch::Approx(model.p_succ(3, TrialModel::Mode::ClosedForm)));
            checked = true;
        }
    }
    CHECK(checked);
}

TEST_CASE("tables render as JSON when asked") {
    RunConfig cfg;
    cfg.command = "peaks";
    cfg.n = 2;
    cfg.m = 3;
    cfg.format = "json";
    const auto j = nlohmann::json::parse(cmd_peaks(cfg));
    CHECK(j.at("schema_version") == kSchemaVersion);
    REQUIRE(j.at("rows").size() == 1);
    CHECK(j["rows"][0].at("n") == 2);
    CHECK(j["rows"][0].at("path_peak_prob").is_number());

    cfg.format = "yaml";
    CHECK_THROWS_AS(cmd_peaks(cfg), ConfigError);

    RunConfig eig;
    eig.command = "eigen";
    eig.format = "csv";
    CHECK_THROWS_AS(cmd_eigen(eig), ConfigError);
}

TEST_CASE("binary state snapshots round-trip with a validated header") {
    TreeMaze maze(2, 5, 11);
    WalkEngine engine(maze);
    WalkState s = engine.initial_state();
    engine.evolve(s, 37);
    const auto path = temp_file("ntree_state.bin").string();
    save_state(path, maze, s);
    const WalkState back = load_state(path, maze);
    REQUIRE(back.amp == s.amp);

    // header is 16 bytes + payload
    CHECK(std::filesystem::file_size(path) == 16 + s.amp.size() * sizeof(double));

    // a mismatched maze is rejected
    TreeMaze other(2, 6, 11);
    CHECK_THROWS_AS(load_state(path, other), InvalidState);
    CHECK_THROWS_AS(load_state("/nonexistent/state.bin", maze), IoError);
}

TEST_CASE("config JSON round-trips and validates") {
    const nlohmann::json j{{"command", "bench"}, {"n", 3},       {"m", 9},
                           {"f_leaf", "random"}, {"seed", 42},   {"runs", 250},
                           {"format", "csv"},    {"threads", 2}, {"m_range", {4, 10}}};
    const RunConfig cfg = config_from_json(j);
    CHECK(cfg.command == "bench");
    CHECK(cfg.n == 3);
    CHECK(cfg.m == 9);
    CHECK(cfg.f_leaf == -1);
    CHECK(cfg.seed == 42);
    CHECK(cfg.runs == 250);
    CHECK(cfg.m_range.lo == 4);
    CHECK(cfg.m_range.hi == 10);

    CHECK_THROWS_AS(config_from_json({{"f_leaf", "sometimes"}}), ConfigError);
    CHECK_THROWS_AS(parse_range("57"), ConfigError);
    CHECK_THROWS_AS(parse_range("9:2"), ConfigError);
    CHECK(parse_range("2:15").hi == 15);
}

TEST_CASE("bad run configurations are rejected") {
    RunConfig cfg;
    cfg.command = "warp";
    CHECK_THROWS_AS(run_command(cfg), ConfigError);

    cfg.command = "bench";
    cfg.algorithms = {"simulated-annealing"};
    CHECK_THROWS_AS(cmd_bench(cfg), ConfigError);

    cfg = RunConfig{};
    cfg.command = "trace";
    cfg.n = 1;
    CHECK_THROWS_AS(cmd_trace(cfg), ConfigError);

    cfg = RunConfig{};
    cfg.command = "trace";
    cfg.f_leaf = 99;  // out of range for (2,4)
    CHECK_THROWS_AS(cmd_trace(cfg), ConfigError);
}

#ifdef NTREE_CLI_PATH
TEST_CASE("the binary maps errors to documented exit codes") {
    const std::string cli = NTREE_CLI_PATH;
    const std::string null = " > /dev/null 2>&1";
    auto run = [&](const std::string& args) {
        const int raw = std::system((cli + " " + args + null).c_str());
        return WEXITSTATUS(raw);
    };
    CHECK(run("--command eigen --n 2 --m 3") == 0);
    CHECK(run("--command warp") == 2);
    CHECK(run("") == 2);  // no command anywhere
    CHECK(run("--command trace --n 1 --m 3") == 2);
    CHECK(run("--command trace --n 2 --m 3 --steps 5 --out /nonexistent/dir/x.csv") == 4);

    SECTION("config file plus flag overrides") {
        const auto path = temp_file("ntree_cfg.json");
        std::ofstream(path) << R"({"command":"eigen","n":2,"m":3})";
        CHECK(run("--config " + path.string()) == 0);
        CHECK(run("--config " + path.string() + " --m 0") == 2);
        CHECK(run("--config /nonexistent/cfg.json") == 2);
    }
}
#endif
