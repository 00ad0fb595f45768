#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "js/error.hpp"

namespace js {

enum class Kind : uint8_t { Int, Float, Str };

const char* kind_name(Kind k);

// Global append-only string pool. Equal strings get equal ids, so values can
// compare and hash by id alone.
uint32_t intern(std::string_view s);
const std::string& interned(uint32_t id);

// 16-byte tagged scalar. Strings are stored as interned pool ids; the pool is
// process-global, so ids are comparable across relations.
class Value {
  public:
    Value() : i_(0), kind_(Kind::Int) {}

    static Value of_int(int64_t v) {
        Value x;
        x.kind_ = Kind::Int;
        x.i_ = v;
        return x;
    }
    static Value of_float(double v) {
        Value x;
        x.kind_ = Kind::Float;
        x.f_ = (v == 0.0) ? 0.0 : v;  // collapse -0.0 so bitwise equality matches ==
        return x;
    }
    static Value of_str(std::string_view s) {
        Value x;
        x.kind_ = Kind::Str;
        x.s_ = intern(s);
        return x;
    }

    Kind kind() const { return kind_; }
    int64_t as_int() const { return i_; }
    double as_float() const { return f_; }
    uint32_t str_id() const { return s_; }
    const std::string& as_str() const { return interned(s_); }

    // Int promotes to double; Str has no numeric view.
    double as_number() const {
        switch (kind_) {
            case Kind::Int: return double(i_);
            case Kind::Float: return f_;
            default: throw DomainError("value is not numeric");
        }
    }

    bool operator==(const Value& o) const {
        if (kind_ != o.kind_) return false;
        if (kind_ == Kind::Str) return s_ == o.s_;
        return i_ == o.i_;  // Int payload; Float compares by bit pattern via union
    }
    bool operator!=(const Value& o) const { return !(*this == o); }

    uint64_t hash() const;
    std::string to_string() const;

  private:
    union {
        int64_t i_;
        double f_;
        uint32_t s_;
    };
    Kind kind_;
};

// Total order for canonical sorting: by kind rank, then payload; strings by
// content so the order does not depend on interning history.
bool value_less(const Value& a, const Value& b);

}  // namespace js
