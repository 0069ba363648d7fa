#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + (env.empty() ? "" : " ") + QMEM_CLI_PATH + " " + args +
      " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << text;
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           const std::string& header) {
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("norms verb reports the requested log norms") {
  const RunResult r = run("norms --shape 2,1,1 --p 1,2,3,inf");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("log_norms").at("1").get<double>() ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(j.at("log_norms").at("2").get<double>() ==
        doctest::Approx(0.5 * std::log(6.0)).epsilon(1e-12));
  CHECK(j.at("log_norms").at("3").get<double>() ==
        doctest::Approx(std::log(10.0) / 3.0).epsilon(1e-12));
  CHECK(j.at("log_norms").at("inf").get<double>() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const RunResult bits = run("norms --shape 2 --p inf --bits");
  CHECK(json::parse(bits.out).at("log_norms").at("inf").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embed verb distinguishes the three verdicts by exit code") {
  const RunResult no = run("embed --a 2,2,2 --b 3,3");
  CHECK(no.exit_code == 2);
  CHECK(json::parse(no.out).at("embeddable").get<bool>() == false);

  const RunResult yes = run("embed --a 2,1 --b 3");
  CHECK(yes.exit_code == 0);
  const json jy = json::parse(yes.out);
  CHECK(jy.at("embeddable").get<bool>() == true);
  CHECK(jy.contains("diagram"));
  CHECK(jy.at("diagram").at("groups").size() >= 1);
}

TEST_CASE("supermajorize verb checks tail domination both ways") {
  CHECK(run("supermajorize --a 2,2,2 --b 3,3").exit_code == 0);
  const RunResult no = run("supermajorize --a 3,3 --b 2,2,2");
  CHECK(no.exit_code == 2);
  CHECK(json::parse(no.out).at("supermajorizes").get<bool>() == false);
}

TEST_CASE("bulk check verb reports verdict, margin, and witness") {
  const RunResult marginal = run("bulk check --a 2,2,2 --b 3,3");
  CHECK(marginal.exit_code == 0);
  const json jm = json::parse(marginal.out);
  CHECK(jm.at("status").get<std::string>() == "Marginal");
  CHECK(jm.at("witness_p").get<double>() == doctest::Approx(1.0));
  CHECK(std::abs(jm.at("margin").get<double>()) <= 1e-9);

  // Hyphenated spelling is interchangeable with the nested form.
  const RunResult alias = run("bulk-check --a 2,2,2 --b 3,3");
  CHECK(alias.exit_code == 0);
  CHECK(alias.out == marginal.out);

  const RunResult bad = run("bulk check --a 2,1 --b 1,1,1,1");
  CHECK(bad.exit_code == 2);
  CHECK(json::parse(bad.out).at("status").get<std::string>() == "Violated");
}

TEST_CASE("bulk construct verb emits a certified power pair") {
  const RunResult r =
      run("bulk construct --a 2,2,2 --b 3,3 --epsilon 1/4 --max-n 512");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("found").get<bool>());
  CHECK(j.at("n").get<unsigned>() >= 1);
  CHECK(j.at("m").get<unsigned>() >= j.at("n").get<unsigned>());
  CHECK(j.at("certificate_summary").at("group_count").get<unsigned>() >= 1);

  const RunResult bad = run("bulk construct --a 2,1 --b 1,1,1,1");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("capacity verb emits a deterministic boundary polyline") {
  const RunResult r = run("capacity --shape 2,1,1 --samples 64");
  CHECK(r.exit_code == 0);
  const auto rows = parse_csv(r.out, "H,S");
  REQUIRE(rows.size() >= 3);
  CHECK(rows.front()[0] == doctest::Approx(0.0));
  CHECK(rows.front()[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(rows.back()[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(rows.back()[1] == doctest::Approx(0.0));

  const RunResult again = run("capacity --shape 2,1,1 --samples 64");
  CHECK(again.out == r.out);
}

TEST_CASE("thermal and entropy verbs round-trip through a state file") {
  const RunResult th = run("thermal --shape 2,1 --p 1 --out cli_state.json");
  CHECK(th.exit_code == 0);
  const RunResult en = run("entropy --shape 2,1 --state cli_state.json");
  CHECK(en.exit_code == 0);
  const json j = json::parse(en.out);
  CHECK(j.at("classical").get<double>() ==
        doctest::Approx(std::log(3.0) - 2.0 / 3.0 * std::log(2.0))
            .epsilon(1e-10));
  CHECK(j.at("quantum").get<double>() ==
        doctest::Approx(2.0 / 3.0 * std::log(2.0)).epsilon(1e-10));

  CHECK(run("entropy --shape 3,1 --state cli_state.json").exit_code == 1);
}

TEST_CASE("region verbs answer membership and inclusion") {
  CHECK(run("region-contains --shape 2,1 --classical 0.2 --quantum 0.2")
            .exit_code == 0);
  const RunResult out =
      run("region-contains --shape 1,1,1 --classical 0 --quantum 0.6931");
  CHECK(out.exit_code == 2);
  CHECK(json::parse(out.out).at("margin").get<double>() < 0.0);

  CHECK(run("region-subset --a 2 --b 2,1").exit_code == 0);
  CHECK(run("region-subset --a 2,1 --b 2").exit_code == 2);
}

TEST_CASE("typical verb summarizes the restriction of a stored state") {
  write_file("cli_biased.json",
             R"({"blocks":[{"size":1,"weights":[0.25]},)"
             R"({"size":1,"weights":[0.75]}]})");
  const RunResult r =
      run("typical --shape 1,1 --state cli_biased.json --n 8 --alpha 0.15");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("prob_typ").get<double>() ==
        doctest::Approx(0.78607177734375).epsilon(1e-10));
  CHECK(j.at("shape_counts").at("1").get<std::string>() == "92");
  CHECK(j.at("log_block_count").get<double>() ==
        doctest::Approx(std::log(92.0)).epsilon(1e-10));
}

TEST_CASE("bound verb evaluates and optimizes the crossing bound") {
  write_file("cli_qubit.json", R"({"blocks":[{"size":2,"weights":[0.5,0.5]}]})");
  const RunResult fixed =
      run("bound --state cli_qubit.json --shape-a 2 --shape-b 1,1 --p inf");
  CHECK(fixed.exit_code == 0);
  CHECK(json::parse(fixed.out).at("bound").get<double>() ==
        doctest::Approx(0.5).epsilon(1e-10));

  const RunResult free = run("bound --state cli_qubit.json --shape-b 3,1");
  CHECK(free.exit_code == 0);
  const double opt = json::parse(free.out).at("log_bound").get<double>();
  for (const char* p : {"1", "1.25", "2", "4", "inf"}) {
    const RunResult at = run(std::string("bound --state cli_qubit.json "
                                         "--shape-b 3,1 --p ") +
                             p);
    CHECK(opt <= json::parse(at.out).at("log_bound").get<double>() + 1e-9);
  }
}

TEST_CASE("fidelity verb scores a channel pair from JSON") {
  write_file("cli_channels.json", R"({
    "decode": {"from": "2", "to": "2", "kraus": [
      {"j": 0, "k": 0, "l": 0, "rows": 2, "cols": 2,
       "entries": [[[1,0],[0,0]],[[0,0],[1,0]]]}]},
    "encode": {"from": "2", "to": "2", "kraus": [
      {"j": 0, "k": 0, "l": 0, "rows": 2, "cols": 2,
       "entries": [[[1,0],[0,0]],[[0,0],[1,0]]]}]}
  })");
  write_file("cli_qubit2.json",
             R"({"blocks":[{"size":2,"weights":[0.5,0.5]}]})");
  const RunResult r =
      run("fidelity --channels cli_channels.json --state cli_qubit2.json");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out).at("fidelity").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sandwich verb keeps the exact tail between its bounds") {
  const RunResult r = run("sandwich --shape 2,1 --n 8 --grid 20");
  CHECK(r.exit_code == 0);
  const auto rows =
      parse_csv(r.out, "t,exact_tail,chernoff_upper,cramer_lower");
  REQUIRE(rows.size() == 20);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 4);
    CHECK(row[3] <= row[1] * (1.0 + 1e-9) + 1e-9);
    CHECK(row[1] <= row[2] * (1.0 + 1e-9) + 1e-9);
  }

  const RunResult deg = run("sandwich --shape 1,1 --n 4");
  CHECK(deg.exit_code == 0);
  CHECK(json::parse(deg.out).contains("message"));
}

TEST_CASE("usage and budget failures use the reserved exit codes") {
  CHECK(run("norms --shape 0,2").exit_code == 1);
  CHECK(run("norms").exit_code == 1);
  CHECK(run("frobnicate --shape 2").exit_code == 1);
  CHECK(run("sandwich --shape 2,1 --n 8", "QMEM_BUDGET=2").exit_code == 3);
  CHECK(run("embed --a 2,1 --b 3", "QMEM_BUDGET=abc").exit_code == 1);
}
