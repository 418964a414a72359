#ifndef WEAKVID_ERROR_HPP
#define WEAKVID_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace weakvid {

// All pipeline errors carry the owning module and a stable condition code so
// the CLI can emit machine-parseable "module: Code: detail" lines.
class Error : public std::runtime_error {
public:
    Error(std::string_view module, std::string_view code, const std::string& detail)
        : std::runtime_error(std::string(module) + ": " + std::string(code) + ": " + detail),
          module_(module),
          code_(code) {}

    const std::string& module_name() const { return module_; }
    const std::string& code() const { return code_; }

private:
    std::string module_;
    std::string code_;
};

} // namespace weakvid

#endif
