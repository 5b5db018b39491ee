#pragma once

namespace mvu {

/// Entry point of the mvu command line. Exit codes: 0 success, 1 validation
/// error (bad flags, malformed config, bad parameters), 2 numerical failure.
int cli_main(int argc, char** argv);

}  // namespace mvu
