#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clens {

/// Error raised for malformed or inconsistent input artifacts (code models,
/// traces, pattern/group files, ground truths). Maps to CLI exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Error raised for bad invocations of the library/CLI (missing inputs,
/// out-of-range options). Maps to CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void input_error(const std::string& msg) { throw InputError(msg); }

/// Interns strings to dense int32 handles. Handle order follows first
/// insertion, so identical input streams yield identical tables.
class SymbolTable {
public:
    std::int32_t intern(std::string_view s) {
        auto it = index_.find(std::string(s));
        if (it != index_.end()) return it->second;
        auto id = static_cast<std::int32_t>(names_.size());
        names_.emplace_back(s);
        index_.emplace(names_.back(), id);
        return id;
    }

    [[nodiscard]] std::int32_t lookup(std::string_view s) const {
        auto it = index_.find(std::string(s));
        return it == index_.end() ? -1 : it->second;
    }

    [[nodiscard]] const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::int32_t> index_;
};

/// Shortest round-trip decimal rendering of a double, identical across runs.
std::string format_double(double v);

/// Reads an entire file into a string; throws InputError if unreadable.
std::string read_file(const std::string& path);

/// Writes a string to a file, replacing existing content.
void write_file(const std::string& path, std::string_view content);

/// Effective worker count: min(hardware, CONCEPT_LENS_THREADS if set).
unsigned effective_thread_count();

}  // namespace clens
