#include "treesat/run.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treesat/logic.hpp"
#include "treesat/predicates.hpp"
#include "treesat/schema.hpp"
#include "treesat/solver.hpp"
#include "treesat/validate.hpp"

namespace treesat {

namespace {

class Phases {
public:
    explicit Phases(RunReport& r) : r_(r) {}

    template <class F>
    auto operator()(const std::string& phase, F&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        auto stop = [&] {
            r_.timings.emplace_back(phase, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                stop();
            } else {
                auto out = fn();
                stop();
                return out;
            }
        } catch (const ResourceLimit& e) {
            throw RunError(phase, e.what(), true);
        } catch (const RunError&) {
            throw;
        } catch (const std::exception& e) {
            throw RunError(phase, e.what());
        }
    }

private:
    RunReport& r_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

RunReport run(const RunConfig& config) {
    RunReport report;
    Phases phase(report);

    std::string dir = config.schema_dir;
    if (dir.empty()) {
        dir = std::filesystem::path(config.spec_path).parent_path().string();
        if (dir.empty()) dir = ".";
    }
    Environment env(dir, config.attributes);

    ProblemSpec spec = phase("parse", [&] {
        return parse_spec(config.spec_text.empty() ? read_file(config.spec_path) : config.spec_text);
    });
    FormulaPtr f = phase("expand", [&] { return expand(spec, env); });
    f = phase("placeholders", [&] { return resolve_placeholders(f); });
    f = phase("normalize", [&] { return normalize(f); });
    phase("cycle-check", [&] { check_cycle_free(f); });
    report.formula_size = formula_size(f);
    report.formula = f;

    SolverOptions opts;
    opts.budget = config.budget;
    SatResult r = phase("solve", [&] { return satisfiable(f, opts); });
    report.sat = r.sat;
    report.lean_size = r.lean_size;
    report.types = r.types;
    report.rounds = r.rounds;
    if (!r.sat) return report;
    report.binary_witness = r.witness;
    report.binary_target = r.target;

    phase("witness", [&] {
        report.witness = forest_from_binary(r.witness);
        report.annotation = annotate(r.witness, r.target, contains_start(f));
        report.witness_xml = serialize(report.witness, report.annotation);
    });
    phase("validate", [&] {
        for (const Schema* s : env.used()) {
            Diagnostic d;
            d.schema = std::filesystem::path(s->path).filename().string();
            d.root = s->root;
            if (report.witness.size() != 1) {
                d.valid = false;
                d.message = "witness has " + std::to_string(report.witness.size()) + " top-level elements";
            } else {
                Validation v = validate(report.witness[0], s->type, config.attributes);
                d.valid = v.ok;
                d.node = v.ok ? -1 : v.node;
                d.message = v.message;
            }
            report.diagnostics.push_back(std::move(d));
        }
    });
    return report;
}

std::string render(const RunReport& report, OutputFormat format) {
    switch (format) {
    case OutputFormat::xml: return report.witness_xml;
    case OutputFormat::json: {
        nlohmann::ordered_json j;
        j["verdict"] = report.sat ? "satisfiable" : "unsatisfiable";
        if (report.sat) {
            j["witness"] = report.witness_xml;
            j["context"] = report.annotation.context;
            j["target"] = report.annotation.target;
        }
        j["diagnostics"] = nlohmann::ordered_json::array();
        for (const auto& d : report.diagnostics) {
            nlohmann::ordered_json e;
            e["schema"] = d.schema;
            e["root"] = d.root;
            e["valid"] = d.valid;
            if (!d.valid) {
                e["node"] = d.node;
                e["message"] = d.message;
            }
            j["diagnostics"].push_back(e);
        }
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& [name, secs] : report.timings) t[name] = secs;
        j["timings"] = t;
        j["formula_size"] = report.formula_size;
        j["lean_size"] = report.lean_size;
        j["types"] = report.types;
        j["rounds"] = report.rounds;
        return j.dump(2) + "\n";
    }
    case OutputFormat::human: break;
    }
    std::ostringstream out;
    out << (report.sat ? "Satisfiable" : "Unsatisfiable (property proved)") << "\n";
    if (report.sat) out << "\n" << report.witness_xml;
    if (!report.diagnostics.empty()) out << "\n";
    for (const auto& d : report.diagnostics) {
        out << d.schema << " (" << d.root << "): ";
        if (d.valid) out << "valid\n";
        else out << "validity error at element " << d.node << ": " << d.message << "\n";
    }
    double total = 0;
    for (const auto& [_, secs] : report.timings) total += secs;
    out << "\ntime " << total << " s\n";
    return out.str();
}

}  // namespace treesat
