// Walks one pencil through the whole stack: parse, classify, build the
// limit witness when one exists, and cross-check with the scaling iteration.

#include <iostream>

#include "slocc/slocc.hpp"

int main() {
    using namespace slocc;

    const std::string spec = "M2(0)+M1(1)+M1(inf)";  // 2x4x4, strictly semistable
    const auto parsed = parse_pencil_spec(spec);
    const auto report = report_for_structure(parsed.structure);

    std::cout << "pencil:      " << spec << "\n";
    std::cout << "orbit type:  " << to_string(report.type) << "\n";
    if (report.limit_class)
        std::cout << "closure:     " << render_pencil_spec(*report.limit_class) << "\n";

    const auto fam = witness_for(parsed.structure);
    const auto state = representative_state(parsed.structure);
    for (double alpha : {0.0, 10.0, 20.0, 30.0}) {
        const auto moved = evaluate_family(fam, alpha, state);
        std::cout << "alpha " << alpha << ": norm ratio " << moved.norm() / state.norm()
                  << ", deviation from critical " << criticality_deviation(moved.normalized())
                  << "\n";
    }

    const auto nf = crosscheck(state);
    std::cout << "scaling verdict: " << to_string(nf.numeric)
              << (nf.agree ? " (agrees)" : " (disagrees)") << "\n";
    return 0;
}
