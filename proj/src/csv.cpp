#include "js/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "js/error.hpp"

namespace js {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t k = 0; k <= line.size(); ++k) {
        if (k == line.size() || line[k] == ',') {
            out.push_back(line.substr(start, k - start));
            start = k + 1;
        }
    }
    return out;
}

bool parse_int(std::string_view s, int64_t& v) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e;
}

bool parse_float(std::string_view s, double& v) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e;
}

}  // namespace

PhysicalRelation parse_csv(std::string_view text, std::string name,
                           const std::map<std::string, Kind>* schema) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    for (size_t k = 0; k <= text.size(); ++k) {
        if (k == text.size() || text[k] == '\n') {
            std::string_view line = text.substr(start, k - start);
            if (line.ends_with('\r')) line.remove_suffix(1);
            if (k == text.size() && line.empty()) break;  // trailing newline
            lines.push_back(line);
            start = k + 1;
        }
    }
    if (lines.empty()) throw IoError("csv " + name + ": missing header line");

    std::vector<std::string_view> header = split_fields(lines[0]);
    PhysicalRelation rel;
    rel.name = std::move(name);
    for (std::string_view h : header) {
        if (h.empty()) throw BlankField("csv " + rel.name + ": blank header field");
        rel.attrs.emplace_back(h);
    }
    size_t width = rel.attrs.size();
    size_t nrows = lines.size() - 1;

    std::vector<std::vector<std::string_view>> rows;
    rows.reserve(nrows);
    for (size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string_view> fields = split_fields(lines[i]);
        if (fields.size() != width)
            throw RaggedRow("csv " + rel.name + ": line " + std::to_string(i + 1) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(width));
        for (std::string_view f : fields)
            if (f.empty())
                throw BlankField("csv " + rel.name + ": blank field on line " +
                                 std::to_string(i + 1));
        rows.push_back(std::move(fields));
    }

    rel.cols.resize(width);
    for (size_t c = 0; c < width; ++c) {
        Kind kind;
        bool declared = false;
        if (schema) {
            auto it = schema->find(rel.attrs[c]);
            if (it != schema->end()) {
                kind = it->second;
                declared = true;
            }
        }
        if (!declared) {
            kind = Kind::Int;
            int64_t iv;
            double fv;
            for (auto& row : rows) {
                if (kind == Kind::Int && !parse_int(row[c], iv)) kind = Kind::Float;
                if (kind == Kind::Float && !parse_float(row[c], fv)) {
                    kind = Kind::Str;
                    break;
                }
            }
        }
        std::vector<Value>& col = rel.cols[c];
        col.reserve(nrows);
        for (size_t i = 0; i < rows.size(); ++i) {
            std::string_view f = rows[i][c];
            switch (kind) {
                case Kind::Int: {
                    int64_t v;
                    if (!parse_int(f, v))
                        throw KindMismatch("csv " + rel.name + ": attribute " + rel.attrs[c] +
                                           " declared int, got '" + std::string(f) + "'");
                    col.push_back(Value::of_int(v));
                    break;
                }
                case Kind::Float: {
                    double v;
                    if (!parse_float(f, v))
                        throw KindMismatch("csv " + rel.name + ": attribute " + rel.attrs[c] +
                                           " declared float, got '" + std::string(f) + "'");
                    col.push_back(Value::of_float(v));
                    break;
                }
                default: col.push_back(Value::of_str(f));
            }
        }
    }
    return rel;
}

PhysicalRelation load_csv(const std::string& path, const std::map<std::string, Kind>* schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string base = path;
    if (size_t slash = base.find_last_of('/'); slash != std::string::npos)
        base = base.substr(slash + 1);
    if (base.ends_with(".csv")) base = base.substr(0, base.size() - 4);
    return parse_csv(buf.str(), base, schema);
}

void write_csv(const PhysicalRelation& rel, std::ostream& out) {
    for (size_t k = 0; k < rel.attrs.size(); ++k)
        out << (k ? "," : "") << rel.attrs[k];
    out << '\n';
    for (size_t i = 0; i < rel.n(); ++i) {
        for (size_t k = 0; k < rel.cols.size(); ++k)
            out << (k ? "," : "") << rel.cols[k][i].to_string();
        out << '\n';
    }
}

void write_csv(const PhysicalRelation& rel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_csv(rel, out);
}

}  // namespace js
