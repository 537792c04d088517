#pragma once

namespace eqarm {

/// Entry point behind the eqarm binary. Exit codes: 0 success, 1 validation
/// error, 2 transport error, 64 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace eqarm
