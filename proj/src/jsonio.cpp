#include "multistop/jsonio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace multistop {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Report writer
// ---------------------------------------------------------------------------

Report Report::str(std::string s) {
    Report r(Kind::String);
    r.str_ = std::move(s);
    return r;
}

Report Report::num(double v) {
    Report r(Kind::Number);
    r.num_ = v;
    return r;
}

Report Report::integer(std::int64_t v) {
    Report r(Kind::Integer);
    r.int_ = v;
    return r;
}

Report Report::boolean(bool b) {
    Report r(Kind::Bool);
    r.bool_ = b;
    return r;
}

Report& Report::set(const std::string& key, Report value) {
    members_.emplace_back(key, std::move(value));
    return *this;
}

Report& Report::push(Report value) {
    items_.push_back(std::move(value));
    return *this;
}

std::string Report::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void escape_into(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
}

} // namespace

void Report::write(std::string& out, int indent, int depth) const {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string closing_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (kind_) {
    case Kind::String: escape_into(out, str_); break;
    case Kind::Number: out += format_double(num_); break;
    case Kind::Integer: out += std::to_string(int_); break;
    case Kind::Bool: out += bool_ ? "true" : "false"; break;
    case Kind::Object: {
        out += '{';
        bool first = true;
        for (const auto& [key, value] : members_) {
            if (!first) out += ',';
            first = false;
            out += nl;
            out += pad;
            escape_into(out, key);
            out += indent > 0 ? ": " : ":";
            value.write(out, indent, depth + 1);
        }
        if (!members_.empty()) {
            out += nl;
            out += closing_pad;
        }
        out += '}';
        break;
    }
    case Kind::Array: {
        out += '[';
        bool first = true;
        for (const Report& value : items_) {
            if (!first) out += ',';
            first = false;
            out += nl;
            out += pad;
            value.write(out, indent, depth + 1);
        }
        if (!items_.empty()) {
            out += nl;
            out += closing_pad;
        }
        out += ']';
        break;
    }
    }
}

std::string Report::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write file '" + path + "'");
    out << content;
}

namespace {

json parse_json_text(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SpecError(std::string("malformed JSON in ") + what);
    return j;
}

// Inline JSON, or a path to a JSON file.
std::string resolve_text(const std::string& text) {
    if (!text.empty() && text.front() == '{') return text;
    if (std::filesystem::exists(text)) return read_text_file(text);
    return text; // shorthand; callers decide
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SpecError(std::string("cannot parse number '") + s + "' in " + what);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Tree specs
// ---------------------------------------------------------------------------

ScenarioTree load_tree(const std::string& spec_text) {
    const json j = parse_json_text(spec_text, "tree spec");
    std::vector<double> dates;
    if (j.contains("grid")) {
        if (!j["grid"].contains("dates")) throw SpecError("tree grid needs a 'dates' array");
        for (const auto& d : j["grid"]["dates"]) dates.push_back(d.get<double>());
    }

    if (j.contains("binomial")) {
        const json& b = j["binomial"];
        for (const char* key : {"n", "p", "root", "up", "down"})
            if (!b.contains(key))
                throw SpecError(std::string("binomial spec is missing '") + key + "'");
        return ScenarioTree::binomial(b["n"].get<int>(), b["p"].get<double>(),
                                      b["root"].get<double>(), b["up"].get<double>(),
                                      b["down"].get<double>(), dates);
    }

    if (!j.contains("nodes")) throw SpecError("tree spec needs 'nodes' or 'binomial'");
    if (dates.empty()) throw SpecError("explicit tree spec needs grid dates");
    std::vector<ScenarioTree::NodeSpec> specs;
    for (const auto& n : j["nodes"]) {
        ScenarioTree::NodeSpec s;
        if (!n.contains("id") || !n.contains("stage"))
            throw SpecError("node spec needs 'id' and 'stage'");
        s.id = n["id"].get<std::string>();
        s.stage = n["stage"].get<int>();
        if (n.contains("parent") && !n["parent"].is_null()) s.parent = n["parent"].get<std::string>();
        if (n.contains("p")) s.p = n["p"].get<double>();
        if (n.contains("value")) s.value = n["value"].get<double>();
        specs.push_back(std::move(s));
    }
    BermudanGrid grid;
    grid.dates = std::move(dates);
    return ScenarioTree::from_nodes(std::move(grid), specs);
}

ScenarioTree load_tree_file(const std::string& path) { return load_tree(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Operator specs
// ---------------------------------------------------------------------------

namespace {

OperatorConfig operator_from_json(const json& j) {
    if (!j.contains("op")) throw SpecError("operator spec needs 'op'");
    const std::string op = j["op"].get<std::string>();
    OperatorConfig cfg;
    if (op == "broken") {
        cfg.broken = true;
        cfg.label = "broken";
        return cfg;
    }
    if (op == "linear") {
        cfg.label = "linear";
        cfg.build = [](const ScenarioTree&) { return make_linear(); };
        return cfg;
    }
    if (op == "entropic") {
        const double gamma = j.value("gamma", 1.0);
        cfg.label = "entropic";
        cfg.build = [gamma](const ScenarioTree&) { return make_entropic(gamma); };
        return cfg;
    }
    if (op == "g") {
        const std::string driver = j.value("driver", "discount");
        const double param = j.value("param", driver == "discount" ? 0.1 : 0.05);
        cfg.label = "g-" + driver;
        if (driver == "discount")
            cfg.build = [param](const ScenarioTree&) { return make_discount_g(param); };
        else if (driver == "zabs")
            cfg.build = [param](const ScenarioTree&) { return make_zabs_g(param); };
        else
            throw SpecError("unknown g driver '" + driver + "' (discount|zabs)");
        return cfg;
    }
    if (op == "robust") {
        cfg.label = "robust";
        if (j.contains("ambiguity")) {
            // Parallel arrays: ambiguity = [{"node","q"}], penalty = [{"node","c"}].
            std::map<std::string, double> penalties;
            if (j.contains("penalty"))
                for (const auto& e : j["penalty"])
                    penalties[e["node"].get<std::string>()] = e["c"].get<double>();
            std::vector<std::pair<std::string, RobustAlternative>> entries;
            for (const auto& e : j["ambiguity"]) {
                RobustAlternative alt;
                const std::string node = e["node"].get<std::string>();
                for (const auto& q : e["q"]) alt.q.push_back(q.get<double>());
                auto it = penalties.find(node);
                alt.penalty = it == penalties.end() ? 0.0 : it->second;
                entries.emplace_back(node, std::move(alt));
            }
            cfg.build = [entries](const ScenarioTree& tree) {
                RobustTable table(tree.size());
                for (const auto& [node, alt] : entries)
                    table[static_cast<std::size_t>(tree.index_of(node))].push_back(alt);
                return make_penalized_robust(tree, std::move(table));
            };
        } else {
            const double tilt = j.value("tilt", 0.15);
            const double penalty = j.value("penalty_weight", 0.0);
            cfg.build = [tilt, penalty](const ScenarioTree& tree) {
                return make_tilted_robust(tree, tilt, penalty);
            };
        }
        return cfg;
    }
    throw SpecError("unknown operator '" + op + "'");
}

} // namespace

OperatorConfig parse_operator(const std::string& text) {
    const std::string resolved = resolve_text(text);
    if (!resolved.empty() && resolved.front() == '{')
        return operator_from_json(parse_json_text(resolved, "operator spec"));

    const std::vector<std::string> parts = split(resolved, ':');
    json j;
    if (parts[0] == "linear" || parts[0] == "broken") {
        j["op"] = parts[0];
    } else if (parts[0] == "entropic") {
        j["op"] = "entropic";
        if (parts.size() > 1) j["gamma"] = to_double(parts[1], "operator spec");
    } else if (parts[0] == "g") {
        j["op"] = "g";
        if (parts.size() > 1) j["driver"] = parts[1];
        if (parts.size() > 2) j["param"] = to_double(parts[2], "operator spec");
    } else if (parts[0] == "robust") {
        j["op"] = "robust";
        if (parts.size() > 1) j["tilt"] = to_double(parts[1], "operator spec");
        if (parts.size() > 2) j["penalty_weight"] = to_double(parts[2], "operator spec");
    } else {
        throw SpecError("unknown operator shorthand '" + resolved + "'");
    }
    return operator_from_json(j);
}

// ---------------------------------------------------------------------------
// Payoff specs
// ---------------------------------------------------------------------------

namespace {

AdaptedFamily eta_from_json(const json& spec, const ScenarioTree& tree) {
    if (spec.is_string()) {
        if (spec.get<std::string>() == "node-value") return node_values(tree);
        throw SpecError("unknown eta spec '" + spec.get<std::string>() + "'");
    }
    if (spec.contains("call")) return call_payoff(tree, spec["call"].value("strike", 1.0));
    throw SpecError("eta spec must be \"node-value\" or {\"call\":{\"strike\":K}}");
}

PayoffFamily payoff_from_json(const json& j, const ScenarioTree& tree, int d) {
    const std::string kind = j.value("kind", "additive");
    if (kind == "additive")
        return PayoffFamily::additive(tree, eta_from_json(j.value("eta", json("node-value")), tree), d);
    if (kind == "multiplicative")
        return PayoffFamily::multiplicative(tree, eta_from_json(j.value("eta", json("node-value")), tree), d);
    if (kind == "weighted-additive") {
        std::vector<double> weights;
        for (const auto& w : j["weights"]) weights.push_back(w.get<double>());
        if (static_cast<int>(weights.size()) != d)
            throw SpecError("weighted-additive weights must have length d");
        return PayoffFamily::weighted_additive(
            tree, eta_from_json(j.value("eta", json("node-value")), tree), std::move(weights));
    }
    if (kind == "table") {
        std::vector<PayoffFamily::TableEntry> entries;
        for (const auto& e : j["entries"]) {
            PayoffFamily::TableEntry t;
            t.node = tree.index_of(e["node"].get<std::string>());
            for (const auto& k : e["stages"]) t.stages.push_back(k.get<int>());
            t.value = e["value"].get<double>();
            entries.push_back(std::move(t));
        }
        return PayoffFamily::table(tree, d, std::move(entries), j.value("symmetric", false));
    }
    throw SpecError("unknown payoff kind '" + kind + "'");
}

} // namespace

PayoffFamily parse_payoff(const std::string& text, const ScenarioTree& tree, int d) {
    const std::string resolved = resolve_text(text);
    if (!resolved.empty() && resolved.front() == '{')
        return payoff_from_json(parse_json_text(resolved, "payoff spec"), tree, d);

    const std::vector<std::string> parts = split(resolved, ':');
    json j;
    if (parts[0] == "additive" || parts[0] == "multiplicative") {
        j["kind"] = parts[0];
        j["eta"] = "node-value";
    } else if (parts[0] == "additive-call" || parts[0] == "multiplicative-call") {
        j["kind"] = parts[0] == "additive-call" ? "additive" : "multiplicative";
        j["eta"] = {{"call", {{"strike", parts.size() > 1 ? to_double(parts[1], "payoff spec") : 1.0}}}};
    } else {
        throw SpecError("unknown payoff shorthand '" + resolved + "'");
    }
    return payoff_from_json(j, tree, d);
}

StoppingTime parse_start(const std::string& text, const ScenarioTree& tree) {
    const std::string resolved = resolve_text(text);
    if (resolved == "root" || resolved.empty()) return StoppingTime::at_stage(tree, 0);
    if (resolved.rfind("stage:", 0) == 0)
        return StoppingTime::at_stage(tree, static_cast<int>(to_double(resolved.substr(6), "start spec")));
    if (!resolved.empty() && resolved.front() == '{') {
        const json j = parse_json_text(resolved, "start spec");
        if (!j.contains("stop")) throw SpecError("start spec needs a 'stop' node list");
        std::vector<std::uint8_t> marks(tree.size(), 0);
        for (const auto& id : j["stop"])
            marks[static_cast<std::size_t>(tree.index_of(id.get<std::string>()))] = 1;
        return StoppingTime(tree, std::move(marks));
    }
    throw SpecError("unknown start spec '" + resolved + "'");
}

// ---------------------------------------------------------------------------
// Report builders
// ---------------------------------------------------------------------------

Report family_report(const ScenarioTree& tree, const AdaptedFamily& family) {
    Report obj = Report::object();
    for (std::size_t m = 0; m < tree.size(); ++m)
        obj.set(tree.node(static_cast<int>(m)).id, Report::num(family[m]));
    return obj;
}

Report stopping_report(const ScenarioTree& tree, const StoppingTime& t) {
    Report obj = Report::object();
    for (std::size_t m = 0; m < tree.size(); ++m)
        obj.set(tree.node(static_cast<int>(m)).id, Report::boolean(t.stops_at(static_cast<int>(m))));
    return obj;
}

namespace {

Report node_list(const ScenarioTree& tree, const std::vector<int>& nodes) {
    Report arr = Report::array();
    for (int m : nodes) arr.push(Report::str(tree.node(m).id));
    return arr;
}

} // namespace

Report solve_report(const ScenarioTree& tree, const MultiSolution& sol, const StoppingTime& S,
                    const std::string& op_label, double tol) {
    Report rep = Report::object();
    rep.set("command", Report::str("solve"));
    rep.set("operator", Report::str(op_label));
    rep.set("d", Report::integer(sol.d));
    rep.set("start", node_list(tree, S.frontier()));
    rep.set("tolerance", Report::num(tol));

    Report value = Report::object();
    for (int a : S.frontier())
        value.set(tree.node(a).id, Report::num(sol.value[static_cast<std::size_t>(a)]));
    rep.set("value", std::move(value));

    Report families = Report::object();
    families.set("V", family_report(tree, sol.value));
    families.set("phi", family_report(tree, sol.phi));
    Report aux = Report::array();
    for (const AdaptedFamily& fam : sol.aux) aux.push(family_report(tree, fam));
    families.set("aux", std::move(aux));
    rep.set("families", std::move(families));

    Report policy = Report::object();
    policy.set("theta", stopping_report(tree, sol.theta));
    Report tuple = Report::array();
    for (const StoppingTime& t : sol.tuple) tuple.push(stopping_report(tree, t));
    policy.set("tuple", std::move(tuple));
    rep.set("policy", std::move(policy));

    Report regions = Report::array();
    for (const std::vector<int>& region : sol.regions) regions.push(node_list(tree, region));
    rep.set("regions", std::move(regions));

    Report certs = Report::object();
    certs.set("plugin_gap", Report::num(sol.plugin_gap));
    rep.set("certificates", std::move(certs));
    return rep;
}

Report oracle_report(const ScenarioTree& tree, const OracleResult& res) {
    Report rep = Report::object();
    rep.set("command", Report::str("oracle"));
    rep.set("strategy_count", Report::integer(static_cast<std::int64_t>(res.strategy_count)));
    rep.set("tuple_count", Report::integer(static_cast<std::int64_t>(res.tuple_count)));

    Report value = Report::object();
    Report argmax = Report::object();
    Report ties = Report::object();
    for (std::size_t f = 0; f < res.frontier.size(); ++f) {
        const std::string& id = tree.node(res.frontier[f]).id;
        value.set(id, Report::num(res.value[f]));
        Report tuples = Report::array();
        for (const std::vector<int>& t : res.argmax[f]) {
            Report one = Report::array();
            for (int i : t) one.push(Report::integer(i));
            tuples.push(std::move(one));
        }
        argmax.set(id, std::move(tuples));
        ties.set(id, Report::integer(static_cast<std::int64_t>(res.argmax_count[f])));
    }
    rep.set("value", std::move(value));
    rep.set("argmax", std::move(argmax));
    rep.set("argmax_count", std::move(ties));
    return rep;
}

Report axiom_report_json(const AxiomReport& report) {
    Report rep = Report::object();
    rep.set("command", Report::str("axioms"));
    rep.set("operator", Report::str(report.op_label));
    rep.set("seed", Report::integer(static_cast<std::int64_t>(report.seed)));
    Report checks = Report::array();
    for (const CheckResult& c : report.checks) {
        Report one = Report::object();
        one.set("name", Report::str(c.name));
        one.set("pass", Report::boolean(c.pass));
        one.set("samples", Report::integer(c.samples));
        one.set("tolerance", Report::num(c.tolerance));
        one.set("detail", Report::str(c.detail));
        checks.push(std::move(one));
    }
    rep.set("checks", std::move(checks));
    rep.set("pass", Report::boolean(report.all_pass()));
    return rep;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string families_to_csv(const ScenarioTree& tree,
                            const std::vector<std::pair<std::string, AdaptedFamily>>& families) {
    std::string out = "family,node,stage,value\n";
    for (const auto& [name, fam] : families) {
        if (fam.size() != tree.size()) throw SpecError("family size does not match the tree");
        for (std::size_t m = 0; m < tree.size(); ++m) {
            out += name;
            out += ',';
            out += tree.node(static_cast<int>(m)).id;
            out += ',';
            out += std::to_string(tree.node(static_cast<int>(m)).stage);
            out += ',';
            out += Report::format_double(fam[m]);
            out += '\n';
        }
    }
    return out;
}

std::vector<std::pair<std::string, AdaptedFamily>> families_from_csv(const ScenarioTree& tree,
                                                                     const std::string& csv) {
    std::vector<std::pair<std::string, AdaptedFamily>> out;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "family,node,stage,value")
        throw SpecError("unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 4) throw SpecError("malformed CSV row '" + line + "'");
        if (out.empty() || out.back().first != cells[0])
            out.emplace_back(cells[0], AdaptedFamily(tree.size(), 0.0));
        out.back().second[static_cast<std::size_t>(tree.index_of(cells[1]))] =
            to_double(cells[3], "CSV value");
    }
    return out;
}

} // namespace multistop
