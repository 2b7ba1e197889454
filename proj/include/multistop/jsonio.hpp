#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "multistop/axioms.hpp"
#include "multistop/evaluation.hpp"
#include "multistop/family.hpp"
#include "multistop/multistop.hpp"
#include "multistop/oracle.hpp"
#include "multistop/tree.hpp"

namespace multistop {

// Report value tree with insertion-ordered object keys and %.17g doubles, so
// identical runs serialize to identical bytes.
class Report {
public:
    static Report object() { return Report(Kind::Object); }
    static Report array() { return Report(Kind::Array); }
    static Report str(std::string s);
    static Report num(double v);
    static Report integer(std::int64_t v);
    static Report boolean(bool b);

    Report& set(const std::string& key, Report value); // object only
    Report& push(Report value);                        // array only

    std::string dump(int indent = 0) const;
    static std::string format_double(double v);

private:
    enum class Kind { Object, Array, String, Number, Integer, Bool };
    explicit Report(Kind k) : kind_(k) {}

    void write(std::string& out, int indent, int depth) const;

    Kind kind_;
    std::string str_;
    double num_ = 0.0;
    std::int64_t int_ = 0;
    bool bool_ = false;
    std::vector<std::pair<std::string, Report>> members_;
    std::vector<Report> items_;
};

// ---- configuration parsing (JSON files / inline JSON / shorthands) ----

ScenarioTree load_tree(const std::string& spec_text);
ScenarioTree load_tree_file(const std::string& path);

// Operator spec: JSON text, path, or shorthand ("linear", "entropic:1.0",
// "g:discount:0.1", "g:zabs:0.05", "robust:<tilt>:<penalty>", "broken").
struct OperatorConfig {
    bool broken = false;
    std::string label;
    std::function<Evaluation(const ScenarioTree&)> build; // unset when broken
};
OperatorConfig parse_operator(const std::string& text);

// Payoff spec: JSON text, path, or shorthand ("additive", "multiplicative",
// "additive-call:K", "multiplicative-call:K", "table@file.json").
PayoffFamily parse_payoff(const std::string& text, const ScenarioTree& tree, int d);

// Start spec: "root", "stage:<k>", or JSON {"stop": ["id", ...]}.
StoppingTime parse_start(const std::string& text, const ScenarioTree& tree);

// ---- report builders ----

Report family_report(const ScenarioTree& tree, const AdaptedFamily& family);
Report stopping_report(const ScenarioTree& tree, const StoppingTime& t);
Report solve_report(const ScenarioTree& tree, const MultiSolution& sol, const StoppingTime& S,
                    const std::string& op_label, double tol);
Report oracle_report(const ScenarioTree& tree, const OracleResult& res);
Report axiom_report_json(const AxiomReport& report);

// ---- CSV projection of node-value families ----

std::string families_to_csv(const ScenarioTree& tree,
                            const std::vector<std::pair<std::string, AdaptedFamily>>& families);
std::vector<std::pair<std::string, AdaptedFamily>> families_from_csv(const ScenarioTree& tree,
                                                                     const std::string& csv);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace multistop
