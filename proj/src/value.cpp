#include "js/value.hpp"

#include <charconv>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace js {

namespace {

uint64_t splitmix_step(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct Pool {
    std::mutex mu;
    std::deque<std::string> strings;  // stable references under growth
    std::unordered_map<std::string_view, uint32_t> ids;
};

Pool& pool() {
    static Pool* p = new Pool();  // leaked: values may outlive static dtor order
    return *p;
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Int: return "int";
        case Kind::Float: return "float";
        default: return "str";
    }
}

uint32_t intern(std::string_view s) {
    Pool& p = pool();
    std::scoped_lock lk(p.mu);
    auto it = p.ids.find(s);
    if (it != p.ids.end()) return it->second;
    p.strings.emplace_back(s);
    uint32_t id = uint32_t(p.strings.size() - 1);
    p.ids.emplace(std::string_view(p.strings.back()), id);
    return id;
}

const std::string& interned(uint32_t id) {
    Pool& p = pool();
    std::scoped_lock lk(p.mu);
    return p.strings.at(id);
}

uint64_t Value::hash() const {
    uint64_t payload = (kind_ == Kind::Str) ? uint64_t(s_) : uint64_t(i_);
    return splitmix_step(payload ^ (uint64_t(kind_) << 56));
}

std::string Value::to_string() const {
    switch (kind_) {
        case Kind::Int: return std::to_string(i_);
        case Kind::Float: {
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, f_);
            (void)ec;
            return std::string(buf, end);
        }
        default: return as_str();
    }
}

bool value_less(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return int(a.kind()) < int(b.kind());
    switch (a.kind()) {
        case Kind::Int: return a.as_int() < b.as_int();
        case Kind::Float: return a.as_float() < b.as_float();
        default: return a.as_str() < b.as_str();
    }
}

}  // namespace js
