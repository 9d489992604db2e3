#pragma once

#include <iosfwd>

namespace aggkin {

// Quick self-check battery at small sizes: fast-path vs literal-sum
// agreement, mass-flux identities, tableau consistency, and the analytic
// constant-kernel run. Prints one pass/fail line per property to `out`
// (unless quiet) and returns the number of failures.
int run_verification(std::ostream& out, bool quiet = false);

}  // namespace aggkin
