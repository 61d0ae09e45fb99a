#include "treesat/predicates.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "treesat/errors.hpp"

namespace treesat {

namespace {

struct Arity {
    int min;
    int max;
};

const std::map<std::string, Arity>& builtins() {
    static const std::map<std::string, Arity> table = {
        {"select", {1, 2}},
        {"exists", {1, 2}},
        {"type", {2, 4}},
        {"forward_incompatible", {2, 3}},
        {"backward_incompatible", {2, 3}},
        {"element", {1, 1}},
        {"attribute", {1, 1}},
        {"exclude", {1, 1}},
        {"added_element", {2, 2}},
        {"added_attribute", {2, 2}},
        {"non_empty", {2, 2}},
        {"new_element_names", {3, 4}},
        {"new_regions", {3, 4}},
        {"new_region", {3, 4}},
        {"new_contents", {3, 4}},
        {"new_content", {3, 4}},
        {"ancestor", {1, 1}},
        {"descendant", {1, 1}},
        {"following", {1, 1}},
        {"preceding", {1, 1}},
        {"ancestor-or-self", {1, 1}},
        {"descendant-or-self", {1, 1}},
    };
    return table;
}

// Blanks out '//' comments, keeping string literals and positions intact.
std::string strip_comments(const std::string& text) {
    std::string out = text;
    bool in_string = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
        char c = out[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        }
    }
    return out;
}

// Top-level ';' positions (outside strings and parentheses).
std::vector<std::size_t> separators(const std::string& text) {
    std::vector<std::size_t> out;
    bool in_string = false;
    int depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        } else if (c == ';' && depth == 0) {
            out.push_back(i);
        }
    }
    return out;
}

// Text with everything outside [b, e) blanked, so parser positions refer to
// the whole input.
std::string segment(const std::string& text, std::size_t b, std::size_t e) {
    std::string out = text;
    for (std::size_t i = 0; i < out.size(); ++i)
        if ((i < b || i >= e) && out[i] != '\n') out[i] = ' ';
    return out;
}

std::pair<int, int> position_of(const std::string& text, std::size_t at) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void walk_calls(const FormulaPtr& f, const std::function<void(const Formula&)>& fn) {
    if (f->kind == FormulaKind::Call) fn(*f);
    for (const auto& k : f->kids) walk_calls(k, fn);
    for (const auto& b : f->bindings) walk_calls(b.body, fn);
}

void check_calls(const FormulaPtr& f, const std::map<std::string, const Definition*>& defs) {
    walk_calls(f, [&](const Formula& c) {
        int n = static_cast<int>(c.kids.size());
        auto d = defs.find(c.name);
        if (d != defs.end()) {
            if (n != static_cast<int>(d->second->params.size()))
                throw ArityError("predicate " + c.name + " expects " + std::to_string(d->second->params.size()) +
                                 " arguments, got " + std::to_string(n));
            return;
        }
        auto b = builtins().find(c.name);
        if (b == builtins().end()) throw UnknownPredicate("unknown predicate " + c.name);
        if (n < b->second.min || n > b->second.max || (c.name == "type" && n == 3))
            throw ArityError("predicate " + c.name + " does not take " + std::to_string(n) + " arguments");
    });
}

FormulaPtr with_parts(const FormulaPtr& f, std::vector<FormulaPtr> kids, std::vector<Binding> bindings) {
    switch (f->kind) {
    case FormulaKind::And: return fm::conj(kids);
    case FormulaKind::Or: return fm::disj(kids);
    default: break;
    }
    auto g = std::make_shared<Formula>(*f);
    g->kids = std::move(kids);
    g->bindings = std::move(bindings);
    return g;
}

const std::string& string_arg(const Formula& call, std::size_t i) {
    const FormulaPtr& a = call.kids.at(i);
    if (a->kind != FormulaKind::String)
        throw ArityError("argument " + std::to_string(i + 1) + " of " + call.name + " must be a string");
    return a->name;
}

bool is_string(const Formula& call, std::size_t i) { return call.kids.at(i)->kind == FormulaKind::String; }

FormulaPtr root_anchor() {
    return fm::conj({fm::lnot(fm::modal(Program::parent1, fm::top())), fm::lnot(fm::modal(Program::parent2, fm::top()))});
}

FormulaPtr names_disjunction(const std::set<std::string>& names) {
    std::vector<FormulaPtr> parts;
    for (const auto& n : names) parts.push_back(fm::name(n));
    return fm::disj(parts);
}

FormulaPtr attributes_disjunction(const std::set<std::string>& names) {
    std::vector<FormulaPtr> parts;
    for (const auto& n : names) parts.push_back(fm::attr(n));
    return fm::disj(parts);
}

std::set<std::string> minus(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& x : a)
        if (!b.count(x)) out.insert(x);
    return out;
}

class Expander {
public:
    Expander(const ProblemSpec& spec, Environment& env) : env_(env) {
        for (const auto& d : spec.defs) defs_[d.name] = &d;
    }

    FormulaPtr run(const FormulaPtr& f) {
        if (f->kind == FormulaKind::String) throw ArityError("string literal outside a predicate argument");
        if (f->kind == FormulaKind::Call) return call(*f);
        if (f->kids.empty() && f->bindings.empty()) return f;
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(run(k));
        std::vector<Binding> bs;
        for (const auto& b : f->bindings) bs.push_back({b.var, run(b.body)});
        return with_parts(f, std::move(kids), std::move(bs));
    }

private:
    FormulaPtr arg(const Formula& c, std::size_t i) { return run(c.kids.at(i)); }

    FormulaPtr call(const Formula& c) {
        auto d = defs_.find(c.name);
        if (d != defs_.end()) return custom(*d->second, c);
        const std::string& n = c.name;
        auto& names = env_.names();
        if (n == "select" || n == "exists") {
            auto q = xpath::desugar(xpath::parse(string_arg(c, 0)));
            FormulaPtr ctx = c.kids.size() > 1 ? arg(c, 1) : (n == "select" ? fm::start() : fm::top());
            return n == "select" ? xpath::compile_select(q, ctx, names, env_.attributes())
                                 : xpath::compile_exists(q, ctx, names, env_.attributes());
        }
        if (n == "type") {
            const Schema& s = env_.schema(string_arg(c, 0), string_arg(c, 1));
            if (c.kids.size() == 4) return env_.type_formula(s, arg(c, 2), arg(c, 3));
            return env_.type_formula(s, fm::top(), fm::bottom());
        }
        if (n == "backward_incompatible" || n == "forward_incompatible") {
            FormulaPtr old_t, new_t;
            if (c.kids.size() == 3) {
                old_t = plain_type(string_arg(c, 0), string_arg(c, 2));
                new_t = plain_type(string_arg(c, 1), string_arg(c, 2));
            } else {
                old_t = arg(c, 0);
                new_t = arg(c, 1);
            }
            if (n == "forward_incompatible") std::swap(old_t, new_t);
            return fm::conj({new_t, fm::lnot(old_t), root_anchor()});
        }
        if (n == "element") return names_disjunction(element_names_in(arg(c, 0)));
        if (n == "attribute") return attributes_disjunction(attribute_universe(arg(c, 0)));
        if (n == "added_element")
            return names_disjunction(minus(element_names_in(arg(c, 1)), element_names_in(arg(c, 0))));
        if (n == "added_attribute")
            return attributes_disjunction(minus(attribute_universe(arg(c, 1)), attribute_universe(arg(c, 0))));
        if (n == "exclude")
            return fm::lnot(axis_formula("ancestor-or-self", axis_formula("descendant-or-self", arg(c, 0), names), names));
        if (builtins().count(n) && builtins().at(n).max == 1) return axis_formula(n, arg(c, 0), names);
        if (n == "non_empty") {
            auto q = xpath::desugar(xpath::parse(string_arg(c, 0)));
            return xpath::compile_select(q, fm::conj({arg(c, 1), fm::start(), root_anchor()}), names,
                                         env_.attributes());
        }
        if (n == "new_element_names") return new_element_names(c);
        if (n == "new_regions" || n == "new_region") return evolution(c, true);
        if (n == "new_contents" || n == "new_content") return evolution(c, false);
        throw UnknownPredicate("unknown predicate " + n);
    }

    FormulaPtr plain_type(const std::string& file, const std::string& root) {
        return env_.type_formula(env_.schema(file, root), fm::top(), fm::bottom());
    }

    // The schema behind argument i: a file name (4-argument form, root last)
    // or a type("file","root") call.
    const Schema& schema_arg(const Formula& c, std::size_t i) {
        if (c.kids.size() == 4) return env_.schema(string_arg(c, i), string_arg(c, 3));
        const FormulaPtr& a = c.kids.at(i);
        if (a->kind == FormulaKind::Call && a->name == "type" && a->kids.size() == 2 && is_string(*a, 0) &&
            is_string(*a, 1))
            return env_.schema(string_arg(*a, 0), string_arg(*a, 1));
        throw ArityError("argument " + std::to_string(i + 1) + " of " + c.name +
                         " must be a type(\"file\",\"root\") call");
    }

    FormulaPtr type_or_formula(const Formula& c, std::size_t i) {
        if (c.kids.size() == 4) return plain_type(string_arg(c, i), string_arg(c, 3));
        return arg(c, i);
    }

    FormulaPtr new_element_names(const Formula& c) {
        auto q = xpath::desugar(xpath::parse(string_arg(c, 0)));
        FormulaPtr old_t = type_or_formula(c, 1);
        FormulaPtr new_t = type_or_formula(c, 2);
        FormulaPtr ctx = fm::conj({new_t, fm::start(), root_anchor()});
        return fm::land(fm::lnot(names_disjunction(element_names_in(old_t))),
                        xpath::compile_select(q, ctx, env_.names(), env_.attributes()));
    }

    // Documents valid against the new schema (every node tagged _all) and
    // invalid against the old one, with _old_complement marking where the old
    // obligations fail.
    FormulaPtr evolution(const Formula& c, bool regions) {
        auto q = xpath::desugar(xpath::parse(string_arg(c, 0)));
        const Schema& old_s = schema_arg(c, 1);
        const Schema& new_s = schema_arg(c, 2);
        auto& names = env_.names();
        FormulaPtr oc = fm::prop(tag_old_complement);
        FormulaPtr new_t = env_.type_formula(new_s, fm::prop(tag_all), fm::bottom());
        FormulaPtr old_t = env_.type_formula(old_s, fm::top(), fm::lnot(oc));
        FormulaPtr added = names_disjunction(minus(element_names_in(new_t), element_names_in(old_t)));
        FormulaPtr ctx = fm::conj({new_t, fm::lnot(old_t), fm::start(), root_anchor()});
        std::vector<FormulaPtr> parts = {xpath::compile_select(q, ctx, names, env_.attributes()), fm::lnot(added)};
        if (regions) {
            parts.push_back(axis_formula("ancestor", oc, names));
            parts.push_back(fm::lnot(axis_formula("descendant", oc, names)));
        } else {
            parts.push_back(fm::lnot(axis_formula("ancestor", added, names)));
            parts.push_back(axis_formula("descendant", oc, names));
        }
        parts.push_back(fm::lnot(axis_formula("following", oc, names)));
        parts.push_back(fm::lnot(axis_formula("preceding", oc, names)));
        return fm::conj(parts);
    }

    FormulaPtr custom(const Definition& d, const Formula& c) {
        std::map<std::string, FormulaPtr> args;
        for (std::size_t i = 0; i < d.params.size(); ++i) args[d.params[i]] = c.kids[i];
        // Let-bound variables of the body get fresh names so that arguments
        // cannot be captured.
        std::map<std::string, std::string> renamed;
        int k = ++instances_;
        FormulaPtr body = substitute(d.body, args, renamed, k);
        return run(body);
    }

    FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, FormulaPtr>& args,
                          std::map<std::string, std::string> renamed, int k) {
        switch (f->kind) {
        case FormulaKind::Name: {
            auto it = args.find(f->name);
            return it == args.end() ? f : it->second;
        }
        case FormulaKind::Variable: {
            auto it = renamed.find(f->name);
            return it == renamed.end() ? f : fm::var(it->second);
        }
        case FormulaKind::Let:
            for (const auto& b : f->bindings) renamed[b.var] = "p" + std::to_string(k) + "_" + b.var;
            break;
        default: break;
        }
        if (f->kids.empty() && f->bindings.empty()) return f;
        std::vector<FormulaPtr> kids;
        for (const auto& x : f->kids) kids.push_back(substitute(x, args, renamed, k));
        std::vector<Binding> bs;
        for (const auto& b : f->bindings) bs.push_back({renamed.at(b.var), substitute(b.body, args, renamed, k)});
        if (f->kind == FormulaKind::Call) {
            auto g = std::make_shared<Formula>(*f);
            g->kids = std::move(kids);
            return g;
        }
        return with_parts(f, std::move(kids), std::move(bs));
    }

    Environment& env_;
    std::map<std::string, const Definition*> defs_;
    int instances_ = 0;
};

}  // namespace

bool is_builtin(const std::string& name) { return builtins().count(name) > 0; }

ProblemSpec parse_spec(const std::string& raw) {
    std::string text = strip_comments(raw);
    std::vector<std::size_t> seps = separators(text);
    ProblemSpec spec;
    static const std::regex head(R"(^\s*([A-Za-z_][A-Za-z0-9_.:\-]*)\s*\(\s*([^()]*)\)\s*=(?!>))");
    static const std::regex param(R"(^[A-Za-z][A-Za-z0-9_.\-]*$)");
    std::size_t begin = 0;
    for (std::size_t s : seps) {
        std::string part = text.substr(begin, s - begin);
        std::smatch m;
        auto [line, col] = position_of(text, begin);
        if (!std::regex_search(part, m, head)) throw ParseError("predicate definition expected before ';'", line, col);
        Definition d;
        d.name = m[1];
        if (is_builtin(d.name)) throw ParseError("cannot redefine built-in predicate " + d.name, line, col);
        std::stringstream ps(m[2].str());
        std::string p;
        while (std::getline(ps, p, ',')) {
            p.erase(0, p.find_first_not_of(" \t\r\n"));
            p.erase(p.find_last_not_of(" \t\r\n") + 1);
            if (!std::regex_match(p, param)) throw ParseError("malformed parameter list for " + d.name, line, col);
            d.params.push_back(p);
        }
        for (const auto& other : spec.defs)
            if (other.name == d.name) throw ParseError("predicate " + d.name + " defined twice", line, col);
        std::size_t body_at = begin + static_cast<std::size_t>(m.length(0));
        d.body = parse_formula(segment(text, body_at, s), true);
        spec.defs.push_back(std::move(d));
        begin = s + 1;
    }
    spec.goal = parse_formula(segment(text, begin, text.size()), true);

    std::map<std::string, const Definition*> defs;
    for (const auto& d : spec.defs) defs[d.name] = &d;
    for (const auto& d : spec.defs) check_calls(d.body, defs);
    check_calls(spec.goal, defs);

    // No recursion through definitions.
    std::map<std::string, std::set<std::string>> calls;
    for (const auto& d : spec.defs)
        walk_calls(d.body, [&](const Formula& c) {
            if (defs.count(c.name)) calls[d.name].insert(c.name);
        });
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
        state[n] = 1;
        for (const auto& m : calls[n]) {
            if (state[m] == 1) throw ParseError("predicate " + n + " is recursive through " + m + "; use let", 1, 1);
            if (state[m] == 0) visit(m);
        }
        state[n] = 2;
    };
    for (const auto& d : spec.defs)
        if (state[d.name] == 0) visit(d.name);

    auto reserved = [](const FormulaPtr& f) {
        for (const auto& p : propositions_in(f))
            if (p == tag_all || p == tag_old_complement)
                throw ParseError("proposition " + p + " is reserved", 1, 1);
    };
    for (const auto& d : spec.defs) reserved(d.body);
    reserved(spec.goal);
    return spec;
}

Environment::Environment(std::string schema_dir, bool attributes)
    : dir_(std::move(schema_dir)), attributes_(attributes) {}

const Schema& Environment::schema(const std::string& file, const std::string& root) {
    namespace fs = std::filesystem;
    fs::path p(file);
    if (!fs::exists(p) && p.is_relative()) {
        if (fs::exists(fs::path(dir_) / file)) {
            p = fs::path(dir_) / file;
        } else if (fs::is_directory(dir_)) {
            // One level of subdirectories of the schema directory, in name order.
            std::vector<fs::path> subdirs;
            for (const auto& e : fs::directory_iterator(dir_))
                if (e.is_directory()) subdirs.push_back(e.path());
            std::sort(subdirs.begin(), subdirs.end());
            for (const auto& d : subdirs)
                if (fs::exists(d / file)) {
                    p = d / file;
                    break;
                }
        }
    }
    if (!fs::exists(p)) throw UnknownSchemaFile("schema file not found: " + file);
    std::string key = fs::weakly_canonical(p).string();
    auto& slot = cache_[{key, root}];
    if (!slot) {
        auto s = std::make_unique<Schema>();
        s->path = key;
        s->root = root;
        if (p.extension() == ".dtd") {
            s->type = parse_dtd(key, root, &s->info);
        } else {
            std::ifstream in(key, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            TypePtr t = parse_internal(ss.str());
            s->type = t;
            if (!element_names(t).count(root)) throw UnknownRoot("element " + root + " not defined in " + file);
        }
        s->binary = binarize(s->type);
        slot = std::move(s);
        used_.push_back(slot.get());
    }
    return *slot;
}

FormulaPtr Environment::type_formula(const Schema& s, const FormulaPtr& tag, const FormulaPtr& frontier) {
    CompileOptions o;
    o.attributes = attributes_;
    o.var_prefix = "t" + std::to_string(++types_) + "_";
    return compile_type(s.binary, tag, frontier, o);
}

void Environment::reset_names() {
    names_ = xpath::FreshNames();
    types_ = 0;
}

FormulaPtr axis_formula(const std::string& axis, const FormulaPtr& phi, xpath::FreshNames& names) {
    static const std::map<std::string, xpath::Axis> axes = {
        {"ancestor", xpath::Axis::ancestor},
        {"descendant", xpath::Axis::descendant},
        {"following", xpath::Axis::following},
        {"preceding", xpath::Axis::preceding},
        {"ancestor-or-self", xpath::Axis::ancestor_or_self},
        {"descendant-or-self", xpath::Axis::descendant_or_self},
    };
    auto it = axes.find(axis);
    if (it == axes.end()) throw UnknownPredicate("unknown axis predicate " + axis);
    return xpath::axis_exists(it->second, phi, names);
}

FormulaPtr expand(const ProblemSpec& spec, Environment& env) {
    env.reset_names();
    Expander e(spec, env);
    return e.run(spec.goal);
}

}  // namespace treesat
