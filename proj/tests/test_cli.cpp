#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fakes.hpp"
#include "mixvote/cli.hpp"
#include "mixvote/run_log.hpp"

using namespace mixvote;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("mixvote-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ','))
            fields.push_back(f);
        if (line.back() == ',')
            fields.emplace_back();
        rows.push_back(fields);
    }
    return rows;
}

// 50 * P(Binomial(n, p) >= floor(n/2) + 1), summed directly.
double binomial_score(int n, double p)
{
    double tail = 0.0;
    for (int k = n / 2 + 1; k <= n; ++k) {
        double c = 1.0;
        for (int j = 0; j < k; ++j)
            c = c * (n - j) / (j + 1);
        tail += c * std::pow(p, k) * std::pow(1 - p, n - k);
    }
    return 50 * tail;
}

const char* kStrictMajority = R"(label: t
seed: 11
replications: 6
voter:
  accuracy: {original: %P%}
  distractor_scatter: 1
  entropy: flat
  latency: {mean_s: 10, jitter: 0.5}
mixer: {name: m, counts: {original: %N%}}
vote: {early_stop: false}
)";

std::string strict_majority(double p, int n, int reps = 6)
{
    std::string s = kStrictMajority;
    s.replace(s.find("%P%"), 3, std::to_string(p));
    s.replace(s.find("%N%"), 3, std::to_string(n));
    s.replace(s.find("replications: 6"), 15, "replications: " + std::to_string(reps));
    return s;
}

int simulate(const fs::path& scenario, const fs::path& out, std::string* err_text = nullptr)
{
    cli::SimulateArgs a;
    a.scenario = scenario;
    a.out = out;
    std::ostringstream o, e;
    const int rc = cli::cmd_simulate(a, o, e);
    if (err_text)
        *err_text = e.str();
    return rc;
}

int analyze(const fs::path& logs, const fs::path& out, std::string* err_text = nullptr)
{
    std::ostringstream o, e;
    const int rc = cli::cmd_analyze({logs, out}, o, e);
    if (err_text)
        *err_text = e.str();
    return rc;
}

} // namespace

TEST_CASE("simulate writes one log per replication and a summary")
{
    TempDir d;
    write(d / "s.yaml", strict_majority(0.69, 8));
    REQUIRE(simulate(d / "s.yaml", d / "out") == cli::kOk);
    int logs = 0;
    for (const auto& e : fs::directory_iterator(d / "out" / "logs")) {
        std::ifstream in(e.path());
        const auto parsed = read_run_log(in);
        CHECK(parsed.has_footer);
        CHECK(parsed.record.problems.size() == 50);
        ++logs;
    }
    CHECK(logs == 6);
    CHECK(fs::exists(d / "out" / "logs" / "m-00005.jsonl"));
    const auto summary = slurp(d / "out" / "summary.csv");
    CHECK(summary.rfind("# mixvote ", 0) == 0);
    const auto rows = csv_rows(summary);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "scenario");
    CHECK(rows[1][1] == "m");
    CHECK(rows[1][3] == "6");
}

TEST_CASE("certain voters score 50 every time")
{
    TempDir d;
    write(d / "s.yaml", strict_majority(1.0, 8));
    REQUIRE(simulate(d / "s.yaml", d / "out") == cli::kOk);
    const auto rows = csv_rows(slurp(d / "out" / "summary.csv"));
    CHECK(rows[1][4] == "50.0000");
    CHECK(rows[1][5] == "0.0000");
    CHECK(rows[1][7] == "50");
    CHECK(rows[1][8] == "50");
}

TEST_CASE("simulated mean tracks the binomial tail")
{
    TempDir d;
    write(d / "s.yaml", strict_majority(0.69, 8, 1000));
    REQUIRE(simulate(d / "s.yaml", d / "out") == cli::kOk);
    const auto rows = csv_rows(slurp(d / "out" / "summary.csv"));
    const double mean = std::stod(rows[1][4]);
    const double se = std::stod(rows[1][6]);
    CHECK(std::abs(mean - binomial_score(8, 0.69)) < 3 * se);
    CHECK(std::abs(mean - 39.4) < 0.3);
}

TEST_CASE("simulate refuses bad scenarios without writing anything")
{
    TempDir d;
    std::string err;
    CHECK(simulate(d / "missing.yaml", d / "out", &err) == cli::kInputError);
    CHECK_FALSE(fs::exists(d / "out"));

    write(d / "bad.yaml", "label: x\nreplications: 2\nvoter:\n  entropy: loud\n");
    CHECK(simulate(d / "bad.yaml", d / "out", &err) == cli::kInputError);
    CHECK(err.find("bad.yaml:4:") != std::string::npos);
    CHECK_FALSE(fs::exists(d / "out"));
}

TEST_CASE("simulate and analyze are byte-for-byte reproducible")
{
    TempDir d;
    write(d / "s.yaml", strict_majority(0.6, 8));
    REQUIRE(simulate(d / "s.yaml", d / "a") == cli::kOk);
    REQUIRE(simulate(d / "s.yaml", d / "b") == cli::kOk);
    cli::SimulateArgs serial{d / "s.yaml", std::nullopt, std::nullopt, d / "c", true};
    std::ostringstream o, e;
    REQUIRE(cli::cmd_simulate(serial, o, e) == cli::kOk);
    for (const auto& name : {"summary.csv", "logs/m-00000.jsonl", "logs/m-00005.jsonl"}) {
        CHECK(slurp(d / "a" / name) == slurp(d / "b" / name));
        CHECK(slurp(d / "a" / name) == slurp(d / "c" / name));
    }
    REQUIRE(analyze(d / "a" / "logs", d / "ra") == cli::kOk);
    REQUIRE(analyze(d / "b" / "logs", d / "rb") == cli::kOk);
    int files = 0;
    for (const auto& e : fs::directory_iterator(d / "ra")) {
        CHECK(slurp(e.path()) == slurp(d / "rb" / e.path().filename()));
        ++files;
    }
    CHECK(files == 12);
}

TEST_CASE("analyze: input errors")
{
    TempDir d;
    CHECK(analyze(d / "nope", d / "r") == cli::kInputError);
    fs::create_directories(d / "empty");
    CHECK(analyze(d / "empty", d / "r") == cli::kInputError);
    CHECK_FALSE(fs::exists(d / "r"));
}

TEST_CASE("analyze: correlation rows sit on -1/(N-1)")
{
    TempDir d;
    fs::create_directories(d / "logs");
    const std::vector<std::pair<int, double>> sizes{{8, 0.69}, {16, 0.46}, {3, 0.46}};
    for (const auto& [n, p] : sizes) {
        const auto dir = d / ("n" + std::to_string(n));
        write(d / "s.yaml", strict_majority(p, n, 1));
        REQUIRE(simulate(d / "s.yaml", dir) == cli::kOk);
        fs::copy_file(dir / "logs" / "m-00000.jsonl", d / "logs" / ("n" + std::to_string(n) + ".jsonl"));
    }
    REQUIRE(analyze(d / "logs", d / "r") == cli::kOk);
    const auto rows = csv_rows(slurp(d / "r" / "correlation.csv"));
    REQUIRE(rows.size() > 30);
    const auto& h = rows[0];
    const auto col = [&](const char* name) {
        return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
    };
    REQUIRE(col("rho_hat") < h.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const int n = std::stoi(rows[i][col("n")]);
        CHECK(std::stod(rows[i][col("rho_hat")]) == doctest::Approx(-1.0 / (n - 1)).epsilon(1e-3));
    }
}

TEST_CASE("analyze: degenerate problems are excluded, corrupt lines counted")
{
    TempDir d;
    write(d / "s.yaml", strict_majority(1.0, 8, 2));
    REQUIRE(simulate(d / "s.yaml", d / "o") == cli::kOk);
    auto text = slurp(d / "o" / "logs" / "m-00001.jsonl");
    write(d / "o" / "logs" / "m-00001.jsonl", "garbage\n" + text);
    std::string err;
    REQUIRE(analyze(d / "o" / "logs", d / "r", &err) == cli::kOk);
    CHECK(err.find("corrupt") != std::string::npos);
    CHECK(csv_rows(slurp(d / "r" / "correlation.csv")).size() == 1);
    const auto summary = slurp(d / "r" / "summary.csv");
    CHECK(summary.find("problems,100") != std::string::npos);
    CHECK(summary.find("correlation_points,0") != std::string::npos);
    CHECK(summary.find("excluded_points,100") != std::string::npos);
    CHECK(summary.find("corrupt_lines,1") != std::string::npos);
}

TEST_CASE("lottery")
{
    std::ostringstream o, e;
    REQUIRE(cli::cmd_lottery({39.7, 1.7, 44, 13, std::nullopt}, o, e) == cli::kOk);
    const auto rows = csv_rows(o.str());
    REQUIRE(rows.size() == 14);
    const double single = 0.5 * std::erfc(4.3 / 1.7 / std::sqrt(2.0));
    CHECK(std::stod(rows[13][1]) == doctest::Approx(1 - std::pow(1 - single, 13)).epsilon(1e-3));

    std::ostringstream o2;
    REQUIRE(cli::cmd_lottery({39.7, 1.7, 39.7, 1, std::nullopt}, o2, e) == cli::kOk);
    CHECK(csv_rows(o2.str())[1][1] == "0.5000");

    CHECK(cli::cmd_lottery({39.7, 0, 44, 13, std::nullopt}, o, e) == cli::kInputError);
    CHECK(cli::cmd_lottery({39.7, 1.7, 44, 0, std::nullopt}, o, e) == cli::kInputError);
}

TEST_CASE("budget trace")
{
    TempDir d;
    const auto run = [&](const std::string& trace, std::string* out_text = nullptr) {
        write(d / "t.txt", trace);
        std::ostringstream o, e;
        const int rc = cli::cmd_budget_trace({std::nullopt, d / "t.txt", 50}, o, e);
        if (out_text)
            *out_text = o.str();
        return rc;
    };
    std::string uniform;
    for (int i = 0; i < 50; ++i)
        uniform += "342\n";
    std::string out;
    REQUIRE(run(uniform, &out) == cli::kOk);
    auto rows = csv_rows(out);
    REQUIRE(rows.size() == 51);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][2] == "342.0000");
        CHECK(rows[i][5] == "0");
    }
    CHECK(rows[50][4] == "0.0000");

    REQUIRE(run("900\n", &out) == cli::kOk);
    rows = csv_rows(out);
    CHECK(std::stod(rows[2][2]) == doctest::Approx((17100.0 - 900) / 49).epsilon(1e-6));
    CHECK(std::stod(rows[2][2]) < 342);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i][5] == "0");

    std::string heavy;
    for (int i = 0; i < 25; ++i)
        heavy += "900,";
    REQUIRE(run(heavy, &out) == cli::kOk);
    rows = csv_rows(out);
    int fallbacks = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        fallbacks += rows[i][5] == "1";
        CHECK(std::stod(rows[i][4]) >= 0);
    }
    CHECK(fallbacks == 31);
    CHECK(rows[50][5] == "1");

    CHECK(run("10\n-1\n") == cli::kInputError);
    CHECK(run("ten\n") == cli::kInputError);
    CHECK(run(uniform + "1\n") == cli::kInputError);
}

TEST_CASE("live: unreachable backend is an environment error")
{
    TempDir d;
    write(d / "p.jsonl", R"({"id":"a","problem":"1+1","answer":2})" "\n");
    cli::LiveArgs a;
    a.problems = d / "p.jsonl";
    a.backend_url = "http://127.0.0.1:9/v1";
    a.prompts_dir = MIXVOTE_PROMPTS_DIR;
    a.out = d / "live.jsonl";
    std::ostringstream o, e;
    CHECK(cli::cmd_live(a, o, e) == cli::kEnvironmentError);
    CHECK_FALSE(fs::exists(a.out));

    a.backend_url = "https://127.0.0.1:9/v1";
    CHECK(cli::cmd_live(a, o, e) == cli::kInputError);
}

TEST_CASE("live: stub backend through the command")
{
    fakes::ChatStub stub([](const nlohmann::json&, httplib::Response& res) {
        fakes::stream_content(res, "Therefore \\boxed{42}.");
    });
    TempDir d;
    write(d / "p.jsonl", R"({"id":"a","problem":"x","answer":42})" "\n"
                         R"({"id":"b","problem":"y","answer":7})" "\n"
                         R"({"id":"c","problem":"z"})" "\n");
    cli::LiveArgs a;
    a.problems = d / "p.jsonl";
    a.backend_url = stub.base_url();
    a.prompts_dir = MIXVOTE_PROMPTS_DIR;
    a.out = d / "live.jsonl";
    std::ostringstream o, e;
    REQUIRE(cli::cmd_live(a, o, e) == cli::kOk);
    std::ifstream in(a.out);
    const auto parsed = read_run_log(in);
    CHECK(parsed.has_footer);
    REQUIRE(parsed.record.problems.size() == 3);
    for (const auto& p : parsed.record.problems)
        CHECK(p.final_answer == 42);
    CHECK(parsed.record.problems[0].correct() == std::optional<bool>(true));
    CHECK(parsed.record.problems[1].correct() == std::optional<bool>(false));

    write(d / "empty.jsonl", "");
    a.problems = d / "empty.jsonl";
    a.out = d / "empty-live.jsonl";
    REQUIRE(cli::cmd_live(a, o, e) == cli::kOk);
    std::ifstream in2(a.out);
    const auto empty = read_run_log(in2);
    CHECK(empty.has_footer);
    CHECK(empty.record.problems.empty());
}
