#include "js/query.hpp"

#include <algorithm>
#include <cctype>

#include "js/error.hpp"

namespace js {

std::string Atom::label() const {
    std::string s = rel + "(";
    for (size_t k = 0; k < attrs.size(); ++k) s += (k ? "," : "") + attrs[k];
    return s + ")";
}

std::vector<std::string> JoinQuery::attr_order() const {
    std::vector<std::string> order;
    for (const Atom& a : atoms)
        for (const std::string& x : a.attrs)
            if (std::find(order.begin(), order.end(), x) == order.end()) order.push_back(x);
    return order;
}

namespace {

struct Cursor {
    std::string_view s;
    size_t k = 0;

    void skip_ws() {
        while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
    }
    bool done() {
        skip_ws();
        return k >= s.size();
    }
    bool eat(char c) {
        skip_ws();
        if (k < s.size() && s[k] == c) {
            ++k;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        size_t start = k;
        while (k < s.size() && (std::isalnum(uint8_t(s[k])) || s[k] == '_')) ++k;
        if (k == start) throw SyntaxError("expected identifier in '" + std::string(s) + "'");
        return std::string(s.substr(start, k - start));
    }
};

Atom parse_atom(Cursor& c) {
    Atom a;
    a.rel = c.ident();
    if (!c.eat('(')) throw SyntaxError("expected '(' after " + a.rel);
    a.attrs.push_back(c.ident());
    while (c.eat(',')) a.attrs.push_back(c.ident());
    if (!c.eat(')')) throw SyntaxError("expected ')' in atom " + a.rel);
    for (size_t i = 0; i < a.attrs.size(); ++i)
        for (size_t j = i + 1; j < a.attrs.size(); ++j)
            if (a.attrs[i] == a.attrs[j])
                throw DuplicateAttr("attribute " + a.attrs[i] + " repeated in atom " +
                                    a.rel);
    return a;
}

std::vector<Atom> parse_atom_list(Cursor& c) {
    std::vector<Atom> atoms;
    atoms.push_back(parse_atom(c));
    for (;;) {
        c.eat(',');
        c.skip_ws();
        if (c.done()) break;
        // stop before a trailing "bern <attr>" in shorthand lines
        size_t save = c.k;
        std::string word = c.ident();
        if (word == "bern") {
            c.k = save;
            break;
        }
        c.k = save;
        atoms.push_back(parse_atom(c));
    }
    return atoms;
}

std::vector<std::string> split_commas(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t k = 0; k <= s.size(); ++k) {
        if (k == s.size() || s[k] == ',') {
            out.emplace_back(s.substr(start, k - start));
            start = k + 1;
        }
    }
    return out;
}

std::string strip(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(uint8_t(s[a]))) ++a;
    while (b > a && std::isspace(uint8_t(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

void parse_relation_line(std::string_view rest, QueryFile& out) {
    Cursor c{rest};
    RelationDecl d;
    d.name = c.ident();
    c.skip_ws();
    while (!c.done()) {
        std::string key = c.ident();
        if (!c.eat('=')) throw SyntaxError("expected '=' after " + key + " in relation line");
        c.skip_ws();
        size_t start = c.k;
        while (c.k < c.s.size() && !std::isspace(uint8_t(c.s[c.k]))) ++c.k;
        std::string val(c.s.substr(start, c.k - start));
        if (key == "file") {
            d.file = val;
        } else if (key == "attrs") {
            d.attrs = split_commas(val);
            for (auto& a : *d.attrs)
                if (a.empty()) throw SyntaxError("empty name in attrs= of relation " + d.name);
        } else {
            throw SyntaxError("unknown relation option " + key);
        }
    }
    if (d.file.empty()) throw SyntaxError("relation " + d.name + " missing file=");
    for (const RelationDecl& prev : out.relations)
        if (prev.name == d.name) throw SyntaxError("relation " + d.name + " declared twice");
    out.relations.push_back(std::move(d));
}

}  // namespace

QueryFile parse_query_file(std::string_view text) {
    QueryFile out;
    bool have_query = false;

    size_t start = 0;
    for (size_t k = 0; k <= text.size(); ++k) {
        if (k != text.size() && text[k] != '\n') continue;
        std::string_view raw = text.substr(start, k - start);
        start = k + 1;
        if (size_t hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        std::string line = strip(raw);
        if (line.empty()) continue;

        if (line.starts_with("relation ")) {
            parse_relation_line(std::string_view(line).substr(9), out);
        } else if (line.starts_with("query:")) {
            if (have_query) throw SyntaxError("more than one query line");
            Cursor c{std::string_view(line).substr(6)};
            out.query.atoms = parse_atom_list(c);
            if (!c.done()) throw SyntaxError("trailing text after query atoms: " + line);
            have_query = true;
        } else if (line.starts_with("bern:")) {
            if (out.query.bern_attr) throw SyntaxError("more than one bern line");
            std::string attr = strip(std::string_view(line).substr(5));
            Cursor c{attr};
            out.query.bern_attr = c.ident();
            if (!c.done()) throw SyntaxError("trailing text after bern attribute: " + line);
        } else {
            // shorthand: atoms, optionally followed by "bern <attr>"
            if (have_query) throw SyntaxError("unexpected line: " + line);
            Cursor c{line};
            out.query.atoms = parse_atom_list(c);
            have_query = true;
            if (!c.done()) {
                std::string word = c.ident();
                if (word != "bern") throw SyntaxError("unexpected token " + word);
                out.query.bern_attr = c.ident();
                if (!c.done()) throw SyntaxError("trailing text after bern attribute: " + line);
            }
        }
    }

    if (!have_query) throw SyntaxError("no query line");
    if (out.query.bern_attr) {
        bool found = false;
        for (const Atom& a : out.query.atoms) found = found || a.mentions(*out.query.bern_attr);
        if (!found)
            throw BernAttrUnknown("bern attribute " + *out.query.bern_attr +
                                  " occurs in no atom");
    }
    return out;
}

JoinQuery parse_query(std::string_view text) { return parse_query_file(text).query; }

}  // namespace js
