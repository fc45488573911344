#pragma once

#include "ambdispatch/error.h"

#include <optional>

// Runs f and reports the ErrorCode it threw, if any.
template <class F>
std::optional<amb::ErrorCode> error_code_of(F&& f)
{
    try {
        f();
    } catch (const amb::Error& e) {
        return e.code();
    }
    return std::nullopt;
}
