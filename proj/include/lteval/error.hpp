#pragma once

#include <stdexcept>
#include <string>

namespace lteval {

// Invalid user configuration (bad key, out-of-range value). Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model or meter was driven outside its contract.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace lteval
