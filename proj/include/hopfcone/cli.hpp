#pragma once

namespace hopfcone {

/// Batch front end.  Returns 0 on success, 2 on invalid input, 3 when a
/// solver hits an iteration cap.
int run_cli(int argc, const char* const* argv);

}  // namespace hopfcone
