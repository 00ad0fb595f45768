#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "js/csv.hpp"
#include "testutil.hpp"

using namespace js;
using namespace tu;

static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST_CASE("value kinds, equality and ordering") {
    CHECK(VI(3) == VI(3));
    CHECK_FALSE(VI(3) == VI(4));
    CHECK_FALSE(VI(3) == VF(3.0));  // kinds differ
    CHECK(VF(0.5) == VF(0.5));
    CHECK(VF(-0.0) == VF(0.0));  // negative zero collapses
    CHECK(VS("ab") == VS("ab"));
    CHECK_FALSE(VS("ab") == VS("ac"));
    CHECK(VS("ab").hash() == VS("ab").hash());
    CHECK(VI(7).hash() == VI(7).hash());

    CHECK(value_less(VI(2), VI(10)));
    CHECK_FALSE(value_less(VI(10), VI(2)));
    CHECK(value_less(VS("a"), VS("b")));
    CHECK_FALSE(value_less(VS("b"), VS("a")));
    // total order is irreflexive
    CHECK_FALSE(value_less(VF(1.5), VF(1.5)));

    CHECK(VI(42).as_number() == 42.0);
    CHECK(VF(0.25).as_number() == 0.25);
    CHECK_THROWS_AS(VS("x").as_number(), DomainError);

    CHECK(VI(-7).to_string() == "-7");
    CHECK(VF(0.5).to_string() == "0.5");
    CHECK(VS("hello").to_string() == "hello");
}

TEST_CASE("parse_csv infers kinds per column") {
    PhysicalRelation r = parse_csv("a,b,c\n1,1.5,x1\n2,2,x2\n", "t");
    REQUIRE(r.attrs == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(r.n() == 2);
    CHECK(r.cols[0][0] == VI(1));
    CHECK(r.cols[1][0] == VF(1.5));
    CHECK(r.cols[1][1] == VF(2.0));  // int-looking field promoted with the column
    CHECK(r.cols[2][1] == VS("x2"));
}

TEST_CASE("parse_csv edge cases") {
    // empty data section
    PhysicalRelation e = parse_csv("a,b\n", "t");
    CHECK(e.n() == 0);
    CHECK(e.attrs.size() == 2);

    // crlf and missing trailing newline
    PhysicalRelation crlf = parse_csv("a,b\r\n1,2\r\n3,4", "t");
    REQUIRE(crlf.n() == 2);
    CHECK(crlf.cols[1][1] == VI(4));

    CHECK_THROWS_AS(parse_csv("a,b\n1\n", "t"), RaggedRow);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n", "t"), RaggedRow);
    CHECK_THROWS_AS(parse_csv("a,b\n1,\n", "t"), BlankField);
    CHECK_THROWS_AS(parse_csv("a,\n1,2\n", "t"), BlankField);
}

TEST_CASE("declared schema pins kinds") {
    std::map<std::string, Kind> schema{{"a", Kind::Float}, {"b", Kind::Str}};
    PhysicalRelation r = parse_csv("a,b\n1,2\n", "t", &schema);
    CHECK(r.cols[0][0] == VF(1.0));
    CHECK(r.cols[1][0] == VS("2"));

    std::map<std::string, Kind> bad{{"a", Kind::Int}};
    CHECK_THROWS_AS(parse_csv("a\n1.5\n", "t", &bad), KindMismatch);
}

TEST_CASE("load_csv reads the worked instance") {
    PhysicalRelation r = load_csv(std::string(TESTDATA_DIR) + "/worked/R.csv");
    CHECK(r.name == "R");
    REQUIRE(r.attrs == std::vector<std::string>{"x", "y", "p"});
    REQUIRE(r.n() == 6);
    Db db = worked_db();
    CHECK(rows_identical(r, db.at("R")));

    CHECK_THROWS_AS(load_csv(std::string(TESTDATA_DIR) + "/worked/NOPE.csv"), IoError);
}

TEST_CASE("tuple_at projects row slices") {
    PhysicalRelation r = worked_db().at("R");
    std::vector<std::string> xy{"x", "y"};
    CHECK(tuple_at(r, 2, xy) == std::vector<Value>{VS("x4"), VS("y3")});
    CHECK(tuple_at(r, 0, {}).empty());
    CHECK_THROWS_AS(tuple_at(r, 6, std::vector<std::string>{"x"}), OutOfRange);
    CHECK_THROWS_AS(tuple_at(r, 0, std::vector<std::string>{"zzz"}), UnknownAttribute);

    // projecting onto all attributes reproduces the stored row
    for (size_t i = 0; i < r.n(); ++i) {
        std::vector<Value> row = tuple_at(r, i, r.attrs);
        for (size_t a = 0; a < r.attrs.size(); ++a) CHECK(row[a] == r.cols[a][i]);
    }
}

TEST_CASE("file-level round trip") {
    std::string text = slurp(std::string(TESTDATA_DIR) + "/worked/S.csv");
    PhysicalRelation r = parse_csv(text, "S");
    std::ostringstream out;
    write_csv(r, out);
    CHECK(out.str() == text);

    // numeric columns in canonical shortest form survive too
    std::string num = "a,b\n-3,0.25\n12,1e+300\n";
    std::ostringstream out2;
    write_csv(parse_csv(num, "t"), out2);
    CHECK(out2.str() == num);
}

TEST_CASE("relation round trip through write and parse") {
    Rng rng(99);
    for (int it = 0; it < 50; ++it) {
        PhysicalRelation r = make_relation("t", {"i", "f", "s"});
        int n = int(rng.bounded(9));
        for (int k = 0; k < n; ++k) {
            // floats chosen so their shortest rendering keeps a fraction part
            double f = (double(rng.bounded(401)) - 200.0) / 4.0;
            if (f == int64_t(f)) f += 0.25;
            r.append_row(std::vector<Value>{VI(int64_t(rng.bounded(2001)) - 1000), VF(f),
                                            VS("s" + std::to_string(rng.bounded(50)))});
        }
        std::ostringstream out;
        write_csv(r, out);
        PhysicalRelation back = parse_csv(out.str(), "t");
        CHECK(rows_identical(r, back));
    }
}

TEST_CASE("relation construction guards") {
    PhysicalRelation r = make_relation("t", {"a", "b"});
    r.append_row(std::vector<Value>{VI(1), VI(2)});
    CHECK(r.n() == 1);
    CHECK(r.attr_index("b") == 1);
    CHECK(r.attr_index("zzz") == -1);
}
