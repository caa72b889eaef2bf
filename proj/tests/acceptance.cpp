// Runs the acceptance criteria and prints one pass/fail line for each.
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wtm/verification.hpp"

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string only;
    app.add_option("--only", only, "comma-separated criterion ids, e.g. 4-as-stated or 1,5,7");
    CLI11_PARSE(app, argc, argv);

    std::vector<wtm::verify::CheckLine> lines;
    try {
        if (only.empty()) {
            lines = wtm::verify::run_suite("all");
        } else {
            std::vector<std::string> ids;
            std::stringstream ss(only);
            for (std::string s; std::getline(ss, s, ',');) ids.push_back(s);
            lines = wtm::verify::run_ids(ids);
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    int failed = 0;
    for (const auto& c : lines) {
        std::printf("%s  AC %-11s %-78s measured=%.3e tol=%.1e  %.2fs/%.0fs%s%s\n", c.pass ? "PASS" : "FAIL", c.id.c_str(), c.name.c_str(), c.measured,
                    c.tolerance, c.seconds, c.budget, c.detail.empty() ? "" : "  ", c.detail.c_str());
        failed += !c.pass;
    }
    std::printf("%zu checks, %d failed\n", lines.size(), failed);
    return failed ? 1 : 0;
}
