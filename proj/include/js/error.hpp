#pragma once

#include <stdexcept>
#include <string>

namespace js {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define JS_DEFINE_ERROR(NAME)    \
    struct NAME : Error {        \
        using Error::Error;      \
    }

// storage
JS_DEFINE_ERROR(IoError);
JS_DEFINE_ERROR(RaggedRow);
JS_DEFINE_ERROR(BlankField);
JS_DEFINE_ERROR(KindMismatch);
JS_DEFINE_ERROR(OutOfRange);
JS_DEFINE_ERROR(UnknownAttribute);

// planner
JS_DEFINE_ERROR(SyntaxError);
JS_DEFINE_ERROR(DuplicateAttr);
JS_DEFINE_ERROR(BernAttrUnknown);
JS_DEFINE_ERROR(NotAcyclic);
JS_DEFINE_ERROR(AttrNotInTree);
JS_DEFINE_ERROR(InvalidSchemeUnion);

// shredded stores
JS_DEFINE_ERROR(SchemeClash);
JS_DEFINE_ERROR(OverflowError);
JS_DEFINE_ERROR(PositionOutOfRange);
JS_DEFINE_ERROR(NonIncreasingProbeSequence);

// sampling
JS_DEFINE_ERROR(DomainError);
JS_DEFINE_ERROR(ProbabilityOutOfRange);

// cli / orchestration
JS_DEFINE_ERROR(UsageError);

#undef JS_DEFINE_ERROR

}  // namespace js
