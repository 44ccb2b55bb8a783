#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfiso {

// Front-end entry point, separated from main() so the exit-code contract is
// testable in-process. args excludes the program name.
//
//   analyze --gram F --iso F --prime P [--precision N] [--certificate F]
//   decide  (same flags; exit 3 when the class is not single)
//   compare --a-gram F --a-iso F --b-gram F --b-iso F --prime P
//   realize --spec F --prime P [--out-gram F] [--out-iso F]
//   counterexample --gram F --iso F --prime P [--out-gram F] [--out-iso F]
//                  [--out-recipe F]  (exit 5 when the class is single)
//   selftest
//
// Exit codes: 0 ok/true, 2 malformed input, 3 decide-false / gl-only,
// 4 unrelated, 5 no witness. MILNOR_PRECISION overrides the default
// precision of 40; --precision overrides both.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfiso
