#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <set>
#include <vector>

#include "cr/game24.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ctest injects CR_CLI as the absolute path of the built binary.
std::string cli_path() {
    const char* p = std::getenv("CR_CLI");
    REQUIRE_MESSAGE(p != nullptr, "CR_CLI must point at the cr binary");
    return p;
}

std::string asset_dir() {
    const char* p = std::getenv("CR_ASSET_DIR");
    REQUIRE_MESSAGE(p != nullptr, "CR_ASSET_DIR must point at the assets directory");
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cr_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the binary through the shell, capturing exit code and both streams.
RunResult run_cli(const std::string& args) {
    TempDir io;
    const fs::path out_path = io.file("stdout.txt");
    const fs::path err_path = io.file("stderr.txt");
    const std::string cmd = "'" + cli_path() + "' " + args + " > '" + out_path.string() +
                            "' 2> '" + err_path.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

json parse_json(const std::string& text) {
    CAPTURE(text);
    return json::parse(text);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

const std::string kMixedCsv = "4,9,10,13\n1,1,1,1\n2,7,12,13\n1,1,4,6\n5,5,5,5\n";
const std::array<std::array<int, 4>, 5> kMixedPuzzles = {{
    {4, 9, 10, 13},
    {1, 1, 1, 1},
    {2, 7, 12, 13},
    {1, 1, 4, 6},
    {5, 5, 5, 5},
}};

}  // namespace

TEST_CASE("solve24 matches the closed-form oracle in exhaustive mode") {
    TempDir dir;
    write_file(dir.file("puzzles.csv"), kMixedCsv);
    const fs::path out = dir.file("out.json");
    RunResult r = run_cli("solve24 '" + dir.file("puzzles.csv").string() + "' --seed 3 --out '" +
                          out.string() + "'");
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());  // --out suppresses stdout

    json doc = parse_json(slurp(out));
    REQUIRE(doc.at("items").size() == kMixedPuzzles.size());
    int solved = 0;
    for (std::size_t i = 0; i < kMixedPuzzles.size(); ++i) {
        const json& item = doc["items"][i];
        const bool oracle = cr::game24::oracle_solvable(kMixedPuzzles[i]).has_value();
        CHECK(item.at("solved").get<bool>() == oracle);
        if (oracle) {
            ++solved;
            CHECK(item.at("halted_by") == "reporter");
            const std::string eq = item.at("equation").get<std::string>();
            CHECK(eq.find("= 24") != std::string::npos);
        } else {
            CHECK(item.at("equation").get<std::string>().empty());
            CHECK(item.at("halted_by") == "iteration_cap");
        }
    }
    CHECK(doc.at("aggregates").at("accuracy").get<double>() ==
          doctest::Approx(static_cast<double>(solved) / kMixedPuzzles.size()));
    CHECK(doc.at("aggregates").at("solved").get<int>() == solved);
}

TEST_CASE("solve24 exhaustive search is breadth-invariant on solvability") {
    TempDir dir;
    write_file(dir.file("puzzles.csv"), "4,9,10,13\n1,1,1,1\n");
    RunResult r = run_cli("solve24 '" + dir.file("puzzles.csv").string() +
                          "' --breadth 3 --seed 5");
    CHECK(r.exit_code == 0);
    json doc = parse_json(r.out);
    CHECK(doc["items"][0].at("solved") == true);
    CHECK(doc["items"][1].at("solved") == false);
}

TEST_CASE("solve24 random mode stays within the proposal budget") {
    TempDir dir;
    write_file(dir.file("puzzles.csv"), "1,1,1,1\n3,3,8,8\n");
    RunResult r = run_cli("solve24 '" + dir.file("puzzles.csv").string() +
                          "' --mode random --budget 25 --limit 200 --seed 7");
    CHECK(r.exit_code == 0);
    json doc = parse_json(r.out);
    for (const json& item : doc.at("items")) {
        // The budget caps validated propositions; one visited state is the premise.
        CHECK(item.at("metrics").at("visited_states").get<int>() - 1 <= 25);
        if (!item.at("solved").get<bool>()) {
            const std::string halt = item.at("halted_by").get<std::string>();
            CHECK((halt == "proposal_budget" || halt == "iteration_cap"));
        }
    }
}

TEST_CASE("solve24 rejects missing and malformed puzzle files") {
    RunResult missing = run_cli("solve24 /nonexistent/puzzles.csv");
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("error:") != std::string::npos);

    TempDir dir;
    write_file(dir.file("short.csv"), "4,9,10\n");
    RunResult short_row = run_cli("solve24 '" + dir.file("short.csv").string() + "'");
    CHECK(short_row.exit_code == 2);
    CHECK(short_row.err.find("expected 4 values") != std::string::npos);

    write_file(dir.file("junk.csv"), "4,nine,10,13\n");
    RunResult junk = run_cli("solve24 '" + dir.file("junk.csv").string() + "'");
    CHECK(junk.exit_code == 2);
    CHECK(junk.err.find("bad integer") != std::string::npos);
}

TEST_CASE("logic answers every bundled fixture correctly") {
    const std::string fixtures = asset_dir() + "/fixtures";
    RunResult r = run_cli("logic '" + fixtures + "/rock.json' '" + fixtures +
                          "/bird_flight.json' '" + fixtures + "/language_models.json' '" +
                          fixtures + "/mammal_guess.json' --seed 1");
    CHECK(r.exit_code == 0);
    json doc = parse_json(r.out);
    REQUIRE(doc.at("items").size() == 4);
    for (const json& item : doc.at("items")) {
        CAPTURE(item.at("path").get<std::string>());
        CHECK(item.at("correct") == true);
        CHECK(item.at("predicted") == item.at("gold"));
    }
    CHECK(doc.at("aggregates").at("accuracy").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("aggregates").at("scored") == 4);
    CHECK(doc.at("aggregates").at("errors") == 0);
}

TEST_CASE("logic records one label per vote and takes the majority") {
    const std::string rock = asset_dir() + "/fixtures/rock.json";
    RunResult r = run_cli("logic '" + rock + "' --k 3 --seed 9");
    CHECK(r.exit_code == 0);
    json doc = parse_json(r.out);
    const json& item = doc["items"][0];
    REQUIRE(item.at("votes").size() == 3);
    for (const json& vote : item.at("votes")) CHECK(vote == "True");
    CHECK(item.at("predicted") == "True");
    // The closure derivation is deterministic, so each vote costs the same 17 calls.
    CHECK(doc["aggregates"]["totals"].at("proposer_calls") == 51);
}

TEST_CASE("logic isolates per-item parse failures") {
    TempDir dir;
    write_file(dir.file("bad.json"),
               "{\"premises\": [\"Colorless green ideas sleep furiously.\"],\n"
               " \"hypothesis\": \"Rock has wings.\", \"label\": \"True\"}\n");
    const std::string rock = asset_dir() + "/fixtures/rock.json";
    RunResult r = run_cli("logic '" + dir.file("bad.json").string() + "' '" + rock + "'");
    CHECK(r.exit_code == 0);  // batch keeps going
    json doc = parse_json(r.out);
    REQUIRE(doc.at("items").size() == 2);
    CHECK(doc["items"][0].contains("error"));
    CHECK(doc["items"][1].at("correct") == true);
    CHECK(doc["aggregates"]["errors"] == 1);
    CHECK(doc["aggregates"]["scored"] == 1);
    CHECK(doc["aggregates"]["accuracy"].get<double>() == doctest::Approx(1.0));

    RunResult missing = run_cli("logic /nonexistent/problem.json");
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("simulate lemma1-grid sweeps the full grid without violations") {
    TempDir dir;
    const fs::path out = dir.file("grid.csv");
    RunResult r = run_cli("simulate lemma1-grid --step 0.5 --nmax 3 --out '" + out.string() + "'");
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("0 violations") != std::string::npos);

    std::vector<std::string> lines = split_lines(slurp(out));
    REQUIRE(lines.size() == 1 + 3 * 3 * 3);  // header + {0,.5,1}^2 x {1,2,3}
    CHECK(lines[0] == "p1,p2,n,lhs,rhs,holds");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> cells = split_csv_row(lines[i]);
        REQUIRE(cells.size() == 6);
        CHECK(cells[5] == "1");
        const double lhs = std::stod(cells[3]);
        const double rhs = std::stod(cells[4]);
        CHECK(lhs <= rhs + 1e-12);
        if (cells[2] == "1") CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("simulate lemma1-grid rejects a step outside (0, 1]") {
    CHECK(run_cli("simulate lemma1-grid --step 0").exit_code == 2);
    CHECK(run_cli("simulate lemma1-grid --step 1.5").exit_code == 2);
}

TEST_CASE("simulate ordering-sweep keeps the method ordering at every sample") {
    TempDir dir;
    const fs::path out = dir.file("sweep.csv");
    RunResult r = run_cli("simulate ordering-sweep --params 4 --trials 2000 --nmax 4 --seed 5"
                          " --out '" + out.string() + "'");
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("0 violations") != std::string::npos);

    std::vector<std::string> lines = split_lines(slurp(out));
    REQUIRE(lines.size() == 1 + 4);
    CHECK(lines[0] ==
          "p1,p2,n,cotsc,cotsc_se,tot,tot_se,cr,cr_se,tot_closed,"
          "ok_cotsc_le_tot,ok_tot_le_cr,ok_tot_closed");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> cells = split_csv_row(lines[i]);
        REQUIRE(cells.size() == 13);
        CHECK(cells[10] == "1");
        CHECK(cells[11] == "1");
        CHECK(cells[12] == "1");
    }

    // Same seed, same table, byte for byte.
    const fs::path again = dir.file("sweep2.csv");
    run_cli("simulate ordering-sweep --params 4 --trials 2000 --nmax 4 --seed 5 --out '" +
            again.string() + "'");
    CHECK(slurp(out) == slurp(again));
}

TEST_CASE("simulate conceptual decomposition is self-consistent") {
    RunResult r = run_cli("simulate conceptual --puzzle 2,7,12,13 --trials 1000 --seed 11");
    CHECK(r.exit_code == 0);
    json doc = parse_json(r.out);
    CHECK(doc.at("consistent_3sigma") == true);
    const double p1 = doc.at("p1_hat").at("value").get<double>();
    const double p2 = doc.at("p2_hat").at("value").get<double>();
    CHECK(doc.at("product_p1_p2").get<double>() == doctest::Approx(p1 * p2).epsilon(1e-12));
    CHECK(doc.at("pipeline_hat").at("trials") == 1000);

    RunResult bad = run_cli("simulate conceptual --puzzle 1,2,3 --trials 10");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("report aggregates event logs and tolerates corrupt lines") {
    TempDir dir;
    write_file(dir.file("puzzles.csv"), kMixedCsv);
    const fs::path log_dir = dir.file("logs");
    fs::create_directories(log_dir);
    RunResult solve = run_cli("solve24 '" + dir.file("puzzles.csv").string() +
                              "' --seed 3 --log '" + (log_dir / "solve.jsonl").string() +
                              "' --out '" + dir.file("solve.json").string() + "'");
    REQUIRE(solve.exit_code == 0);
    const std::string rock = asset_dir() + "/fixtures/rock.json";
    RunResult logic = run_cli("logic '" + rock + "' --k 1 --seed 1 --log '" +
                              (log_dir / "logic.jsonl").string() + "' --out '" +
                              dir.file("logic.json").string() + "'");
    REQUIRE(logic.exit_code == 0);

    // Ground truth: replay the logs ourselves and sum the halt metrics.
    long long want_sessions = 0, want_reported = 0, want_rejected = 0, want_visited = 0;
    for (const char* name : {"solve.jsonl", "logic.jsonl"}) {
        std::set<int> seen;
        std::set<int> reported;
        std::istringstream in(slurp(log_dir / name));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json ev = json::parse(line);
            const int session = ev.at("session").get<int>();
            seen.insert(session);
            if (ev.at("event") == "report") reported.insert(session);
            if (ev.at("event") == "halt") {
                want_rejected += ev.at("rejected").get<long long>();
                want_visited += ev.at("visited_states").get<long long>();
            }
        }
        want_sessions += static_cast<long long>(seen.size());
        want_reported += static_cast<long long>(reported.size());
    }
    REQUIRE(want_sessions == 6);  // five puzzles + one logic problem

    RunResult rep = run_cli("report '" + log_dir.string() + "'");
    CHECK(rep.exit_code == 0);
    json doc = parse_json(rep.out);
    const json& agg = doc.at("aggregates");
    CHECK(agg.at("sessions").get<long long>() == want_sessions);
    CHECK(agg.at("reported").get<long long>() == want_reported);
    CHECK(agg.at("total_rejected").get<long long>() == want_rejected);
    CHECK(agg.at("mean_visited_states").get<double>() ==
          doctest::Approx(static_cast<double>(want_visited) / want_sessions));
    CHECK(agg.at("accuracy").get<double>() ==
          doctest::Approx(static_cast<double>(want_reported) / want_sessions));
    CHECK(doc.at("sessions").size() == static_cast<std::size_t>(want_sessions));

    // A corrupt line is skipped with a warning and changes no aggregate.
    std::ofstream append(log_dir / "logic.jsonl", std::ios::app);
    append << "{this is not json\n";
    append.close();
    RunResult rep2 = run_cli("report '" + log_dir.string() + "'");
    CHECK(rep2.exit_code == 0);
    CHECK(rep2.err.find("skipping corrupt log line") != std::string::npos);
    json doc2 = parse_json(rep2.out);
    CHECK(doc2.at("aggregates") == doc.at("aggregates"));
}

TEST_CASE("report refuses empty input sets") {
    TempDir dir;
    const fs::path empty = dir.file("empty");
    fs::create_directories(empty);
    RunResult r = run_cli("report '" + empty.string() + "'");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);

    RunResult missing = run_cli("report /nonexistent/logs");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("identical seeds reproduce identical run reports") {
    TempDir dir;
    write_file(dir.file("puzzles.csv"), kMixedCsv);
    const std::string base = "solve24 '" + dir.file("puzzles.csv").string() +
                             "' --mode random --budget 40 --seed 12 --out '";
    run_cli(base + dir.file("a.json").string() + "'");
    run_cli(base + dir.file("b.json").string() + "'");
    json a = parse_json(slurp(dir.file("a.json")));
    json b = parse_json(slurp(dir.file("b.json")));
    a.erase("wall_time_ms");
    b.erase("wall_time_ms");
    CHECK(a == b);

    const std::string rock = asset_dir() + "/fixtures/rock.json";
    RunResult l1 = run_cli("logic '" + rock + "' --k 5 --policy sampled --seed 4");
    RunResult l2 = run_cli("logic '" + rock + "' --k 5 --policy sampled --seed 4");
    json ja = parse_json(l1.out);
    json jb = parse_json(l2.out);
    ja.erase("wall_time_ms");
    jb.erase("wall_time_ms");
    CHECK(ja == jb);
}

TEST_CASE("usage errors exit 2 and help exits 0") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("solve24").exit_code == 2);
    CHECK(run_cli("solve24 x.csv --no-such-flag").exit_code == 2);
    CHECK(run_cli("simulate").exit_code == 2);

    RunResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("solve24") != std::string::npos);
    CHECK(help.out.find("logic") != std::string::npos);
    CHECK(help.out.find("simulate") != std::string::npos);
    CHECK(help.out.find("report") != std::string::npos);
}
