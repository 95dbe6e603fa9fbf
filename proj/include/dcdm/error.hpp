// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dcdm {

// Broad failure classes; the CLI maps them onto process exit codes.
enum class ErrorClass {
    Validation,  // bad arguments, malformed input, config mistakes -> exit 1
    Runtime,     // numeric trouble, I/O failures, training divergence -> exit 2
    Transport,   // LLM endpoint unreachable / HTTP failure -> exit 3
};

class Error : public std::runtime_error {
  public:
    Error(ErrorClass cls, std::string category, const std::string& detail)
        : std::runtime_error("error: " + category + ": " + detail),
          cls_(cls),
          category_(std::move(category)),
          detail_(detail) {}

    ErrorClass error_class() const noexcept { return cls_; }
    const std::string& category() const noexcept { return category_; }
    const std::string& detail() const noexcept { return detail_; }

    int exit_code() const noexcept {
        switch (cls_) {
            case ErrorClass::Validation: return 1;
            case ErrorClass::Runtime: return 2;
            case ErrorClass::Transport: return 3;
        }
        return 2;
    }

  private:
    ErrorClass cls_;
    std::string category_;
    std::string detail_;
};

[[noreturn]] inline void throw_validation(const std::string& category, const std::string& detail) {
    throw Error(ErrorClass::Validation, category, detail);
}

[[noreturn]] inline void throw_runtime(const std::string& category, const std::string& detail) {
    throw Error(ErrorClass::Runtime, category, detail);
}

[[noreturn]] inline void throw_transport(const std::string& category, const std::string& detail) {
    throw Error(ErrorClass::Transport, category, detail);
}

}  // namespace dcdm
