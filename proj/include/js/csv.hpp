#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "js/relation.hpp"

namespace js {

// Comma-delimited, first line = header, UTF-8. Blank fields are rejected
// (no nulls). Kinds are inferred per column (Int if every field parses as an
// integer, else Float if every field parses, else Str) unless pinned by
// `schema`.
PhysicalRelation parse_csv(std::string_view text, std::string name,
                           const std::map<std::string, Kind>* schema = nullptr);

PhysicalRelation load_csv(const std::string& path,
                          const std::map<std::string, Kind>* schema = nullptr);

void write_csv(const PhysicalRelation& rel, std::ostream& out);
void write_csv(const PhysicalRelation& rel, const std::string& path);

}  // namespace js
