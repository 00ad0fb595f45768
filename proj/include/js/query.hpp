#pragma once

#include <optional>
#include <string>
#include <vector>

namespace js {

struct Atom {
    std::string rel;                 // relation name; may repeat across atoms (self-joins)
    std::vector<std::string> attrs;  // pairwise distinct within the atom

    bool mentions(std::string_view a) const {
        for (const std::string& x : attrs)
            if (x == a) return true;
        return false;
    }
    std::string label() const;  // "R(x,y,p)"
};

struct JoinQuery {
    std::vector<Atom> atoms;
    std::optional<std::string> bern_attr;

    // Attribute names in first-appearance order across atoms; fixes the
    // column order of flat outputs.
    std::vector<std::string> attr_order() const;
};

struct RelationDecl {
    std::string name;
    std::string file;
    std::optional<std::vector<std::string>> attrs;  // rename of the CSV header
};

struct QueryFile {
    std::vector<RelationDecl> relations;
    JoinQuery query;
};

// Line-oriented grammar ('#' starts a comment):
//   relation <name> file=<path> [attrs=<a,b,c>]
//   query: <Atom> [, <Atom>]*          Atom := Name(a1,...,ak)
//   bern: <attr>
// A bare line of atoms with an optional trailing "bern <attr>" is accepted as
// shorthand for the query/bern pair.
QueryFile parse_query_file(std::string_view text);
JoinQuery parse_query(std::string_view text);

}  // namespace js
