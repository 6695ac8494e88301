#pragma once

#include <stdexcept>

namespace owlaudit::cli {

// Bad input: unknown flags, missing files, invalid configs or bundles.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

int main(int argc, char** argv);

}  // namespace owlaudit::cli
