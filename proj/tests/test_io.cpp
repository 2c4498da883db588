#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ncpfr/common.hpp"
#include "ncpfr/io.hpp"

using namespace ncpfr;

TEST_SUITE("io") {
  TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex64(0xabcull) == "0000000000000abc");
  }

  TEST_CASE("decimal text round-trips doubles") {
    for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    CHECK(format_double(0.0) == "0");
  }

  TEST_CASE("csv header names units and hash") {
    CsvTable t("demo", {{"n", "level"}, {"L_n", "norm"}});
    t.add_row({2.0, 0.5});
    CHECK(t.render("feed") == "# demo config_hash=feed\nn [level],L_n [norm]\n2,0.5\n");
    CHECK_THROWS_AS(t.add_row(std::vector<double>{1.0}), DomainError);
  }

  TEST_CASE("atomic write and svg reference") {
    const auto dir = std::filesystem::temp_directory_path() / "ncpfr_io_test";
    std::filesystem::remove_all(dir);
    write_file_atomic(dir / "x.csv", "abc\n");
    std::ifstream f(dir / "x.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == "abc\n");
    CHECK_FALSE(std::filesystem::exists(dir / "x.csv.tmp"));
    SvgPlot p{"t", "x", "y", true, "x.csv", {{"s", {1, 2, 3}, {1, 0.1, 0.01}}}};
    const std::string svg = p.render();
    CHECK(svg.find("x.csv") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("precision names and auto selection") {
    CHECK(parse_precision("extended") == Precision::Extended);
    CHECK_THROWS_AS(parse_precision("quad"), DomainError);
    CHECK(auto_precision(1024, 0.0, 10, Precision::Double) == Precision::Extended);
    CHECK(auto_precision(256, 2.0, 8, Precision::Double) == Precision::Extended);
    CHECK(auto_precision(256, 1.0, 8, Precision::Double) == Precision::Double);
  }
}
