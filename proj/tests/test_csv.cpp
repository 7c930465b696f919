#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "fairhpo/csv.hpp"

using namespace fairhpo;

TEST_CASE("rfc-4180 parsing", "[csv]") {
    auto rows = csv::parse("a,b,c\n1,\"x,y\",3\r\n4,\"he said \"\"hi\"\"\",6\n");
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0] == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(rows[1][1] == "x,y");
    REQUIRE(rows[2][1] == "he said \"hi\"");

    SECTION("embedded newline in quotes") {
        auto r = csv::parse("a\n\"line1\nline2\"\n");
        REQUIRE(r.size() == 2);
        REQUIRE(r[1][0] == "line1\nline2");
    }
    SECTION("no trailing newline") {
        auto r = csv::parse("a,b\n1,2");
        REQUIRE(r.size() == 2);
        REQUIRE(r[1][1] == "2");
    }
    SECTION("unterminated quote throws") {
        REQUIRE_THROWS_AS(csv::parse("a\n\"oops\n"), ValidationError);
    }
}

TEST_CASE("csv write-read round trip", "[csv]") {
    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "fairhpo_csv_test.csv").string();
    csv::Table t;
    t.header = {"name", "note"};
    t.rows = {{"plain", "no quoting"},
              {"comma, inside", "quote \" inside"},
              {"new\nline", ""}};
    csv::write_file(path, t);
    csv::Table back = csv::read_file(path);
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows == t.rows);
    fs::remove(path);
}

TEST_CASE("table column lookup and ragged rows", "[csv]") {
    csv::Table t;
    t.header = {"x", "y"};
    REQUIRE(t.column("y") == 1);
    REQUIRE(t.has_column("x"));
    REQUIRE_FALSE(t.has_column("z"));
    REQUIRE_THROWS_AS(t.column("z"), ValidationError);

    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "fairhpo_ragged.csv").string();
    {
        std::ofstream out(path);
        out << "a,b\n1,2,3\n";
    }
    REQUIRE_THROWS_AS(csv::read_file(path), ValidationError);
    fs::remove(path);
}
