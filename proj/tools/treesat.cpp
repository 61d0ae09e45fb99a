#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "treesat/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Satisfiability checker for XML queries and schemas"};
    treesat::RunConfig config;
    std::string format = "human";
    app.add_option("spec", config.spec_path, "problem specification file")->required();
    app.add_flag("--attributes,-a", config.attributes, "take attributes into account");
    app.add_option("--budget", config.budget, "maximum number of node types the solver may admit");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"human", "xml", "json"}));
    app.add_option("--schema-dir", config.schema_dir, "directory searched for schema files");

    // "-attributes" is accepted as a synonym for --attributes.
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        args.push_back(a == "-attributes" ? "--attributes" : a);
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    config.format = format == "xml" ? treesat::OutputFormat::xml
                    : format == "json" ? treesat::OutputFormat::json
                                       : treesat::OutputFormat::human;
    try {
        treesat::RunReport report = treesat::run(config);
        std::cout << treesat::render(report, config.format);
        return treesat::exit_code(report);
    } catch (const treesat::RunError& e) {
        if (e.budget()) std::cerr << "resource limit reached, verdict unknown (" << e.what() << ")\n";
        else std::cerr << "error in " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
