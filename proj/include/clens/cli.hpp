#pragma once

namespace clens::cli {

/// Entry point for the concept-lens executable. Returns 0 on success, 1 on
/// usage errors, 2 on malformed inputs.
int run(int argc, const char* const* argv);

}  // namespace clens::cli
