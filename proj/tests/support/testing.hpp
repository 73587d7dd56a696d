#pragma once

#include <doctest.h>

#include <filesystem>
#include <string>

#include "margin_gate/error.hpp"

// Checks that `expr` throws margin_gate::Error carrying `code`.
#define CHECK_ERROR_CODE(expr, expected_code)                                                   \
    do {                                                                                        \
        bool threw_ = false;                                                                    \
        try {                                                                                   \
            static_cast<void>(expr);                                                            \
        } catch (const margin_gate::Error& e_) {                                                \
            threw_ = true;                                                                      \
            CHECK_MESSAGE(e_.code() == (expected_code), "got " << margin_gate::to_string(e_.code())); \
        }                                                                                       \
        CHECK_MESSAGE(threw_, "expected " << margin_gate::to_string(expected_code));           \
    } while (false)

namespace testing_support {

inline std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "margin_gate_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace testing_support
