#ifndef LFS_ERRORS_HPP
#define LFS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lfs {

// Error taxonomy, mapped to distinct process exit codes by the CLI.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration value, unusable flag combination, missing dataset.
class config_error : public error {
public:
    using error::error;
};

// File system and codec failures.
class io_error : public error {
public:
    using error::error;
};

// Violated call contract: shape mismatch, out-of-range argument.
class contract_error : public error {
public:
    using error::error;
};

// Undefined numeric result (zero-norm NCC) or non-finite loss.
class numeric_error : public error {
public:
    using error::error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw contract_error(what);
}

} // namespace lfs

#endif
