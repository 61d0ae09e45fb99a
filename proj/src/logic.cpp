#include "treesat/logic.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "treesat/errors.hpp"

namespace treesat {

// ------------------------------------------------------------------ normalize

namespace {

struct Dual {
    std::string pos;
    std::string neg;
};

class Normalizer {
public:
    explicit Normalizer(const FormulaPtr& f) { collect_names(f); }

    FormulaPtr run(const FormulaPtr& f, bool positive, const std::map<std::string, Dual>& env) {
        switch (f->kind) {
        case FormulaKind::True: return positive ? fm::top() : fm::bottom();
        case FormulaKind::False: return positive ? fm::bottom() : fm::top();
        case FormulaKind::Name:
        case FormulaKind::Prop:
        case FormulaKind::Start:
        case FormulaKind::Attribute: return positive ? f : fm::lnot(f);
        case FormulaKind::And:
        case FormulaKind::Or: {
            auto a = run(f->kids[0], positive, env);
            auto b = run(f->kids[1], positive, env);
            bool conj = (f->kind == FormulaKind::And) == positive;
            return conj ? fm::conj({a, b}) : fm::disj({a, b});
        }
        case FormulaKind::Implies: {
            if (positive)
                return fm::disj({run(f->kids[0], false, env), run(f->kids[1], true, env)});
            return fm::conj({run(f->kids[0], true, env), run(f->kids[1], false, env)});
        }
        case FormulaKind::Equiv: {
            auto ap = run(f->kids[0], true, env), an = run(f->kids[0], false, env);
            auto bp = run(f->kids[1], true, env), bn = run(f->kids[1], false, env);
            if (positive) return fm::disj({fm::conj({ap, bp}), fm::conj({an, bn})});
            return fm::disj({fm::conj({ap, bn}), fm::conj({an, bp})});
        }
        case FormulaKind::Not: return run(f->kids[0], !positive, env);
        case FormulaKind::Modality: {
            auto probe = fm::modal(f->program, fm::top());
            if (positive) {
                auto body = run(f->kids[0], true, env);
                if (body->kind == FormulaKind::False) return fm::bottom();
                return fm::modal(f->program, body);
            }
            auto body = run(f->kids[0], false, env);
            if (body->kind == FormulaKind::False) return fm::lnot(probe);
            return fm::disj({fm::lnot(probe), fm::modal(f->program, body)});
        }
        case FormulaKind::Variable: {
            auto it = env.find(f->name);
            if (it == env.end()) throw Error("unbound variable $" + f->name);
            return fm::var(positive ? it->second.pos : it->second.neg);
        }
        case FormulaKind::Let: return run_let(f, positive, env);
        case FormulaKind::Call:
        case FormulaKind::String: throw Error("predicate call '" + f->name + "' reached normalization unexpanded");
        }
        return f;
    }

private:
    void collect_names(const FormulaPtr& f) {
        if (f->kind == FormulaKind::Variable) used_.insert(f->name);
        for (const auto& b : f->bindings) {
            used_.insert(b.var);
            collect_names(b.body);
        }
        for (const auto& k : f->kids) collect_names(k);
    }

    std::string dual_name(const std::string& v) {
        std::string n = v + "_n";
        while (used_.count(n)) n += "n";
        used_.insert(n);
        return n;
    }

    FormulaPtr run_let(const FormulaPtr& f, bool positive, const std::map<std::string, Dual>& outer) {
        std::map<std::string, Dual> env = outer;
        for (const auto& b : f->bindings) {
            auto it = duals_.find(b.var);
            if (it == duals_.end()) it = duals_.emplace(b.var, dual_name(b.var)).first;
            env[b.var] = Dual{b.var, it->second};
        }
        std::vector<Binding> all;
        for (const auto& b : f->bindings) {
            all.push_back({env[b.var].pos, run(b.body, true, env)});
            all.push_back({env[b.var].neg, run(b.body, false, env)});
        }
        FormulaPtr body = run(f->kids[0], positive, env);

        // keep only bindings reachable from the body
        std::set<std::string> live;
        std::vector<std::string> work;
        auto visit = [&](const FormulaPtr& g) {
            for (const auto& v : free_variables(g))
                if (!live.count(v)) {
                    live.insert(v);
                    work.push_back(v);
                }
        };
        visit(body);
        while (!work.empty()) {
            std::string v = work.back();
            work.pop_back();
            for (const auto& b : all)
                if (b.var == v) visit(b.body);
        }
        std::vector<Binding> kept;
        for (const auto& b : all)
            if (live.count(b.var)) kept.push_back(b);
        if (kept.empty()) return body;
        return fm::let(std::move(kept), body);
    }

    std::set<std::string> used_;
    std::map<std::string, std::string> duals_;
};

}  // namespace

FormulaPtr normalize(const FormulaPtr& f) {
    Normalizer n(f);
    return n.run(f, true, {});
}

// --------------------------------------------------------------- cycle check

namespace {

int program_bit(Program p) { return 1 << static_cast<int>(p); }

struct VarGraph {
    std::vector<std::string> names;
    struct Edge {
        int from, to, mask;
    };
    std::vector<Edge> edges;
};

void build_graph(const FormulaPtr& f, std::map<std::string, int>& env, int cur, int mask, VarGraph& g) {
    switch (f->kind) {
    case FormulaKind::Variable: {
        auto it = env.find(f->name);
        if (it == env.end()) throw Error("unbound variable $" + f->name);
        if (cur >= 0) g.edges.push_back({cur, it->second, mask});
        return;
    }
    case FormulaKind::Modality:
        build_graph(f->kids[0], env, cur, mask | program_bit(f->program), g);
        return;
    case FormulaKind::Let: {
        std::map<std::string, int> inner = env;
        std::vector<int> ids;
        for (const auto& b : f->bindings) {
            int id = static_cast<int>(g.names.size());
            g.names.push_back(b.var);
            inner[b.var] = id;
            ids.push_back(id);
        }
        for (std::size_t i = 0; i < f->bindings.size(); ++i) build_graph(f->bindings[i].body, inner, ids[i], 0, g);
        build_graph(f->kids[0], inner, cur, mask, g);
        return;
    }
    default:
        for (const auto& k : f->kids) build_graph(k, env, cur, mask, g);
    }
}

// Tarjan's algorithm, iterative. Returns component id per vertex.
std::vector<int> components(int n, const std::vector<std::vector<int>>& adj) {
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on(n, false);
    std::vector<int> stack;
    int counter = 0, ncomp = 0;
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<std::pair<int, std::size_t>> call{{s, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = true;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < adj[v].size()) {
                int w = adj[v][i++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

}  // namespace

void check_cycle_free(const FormulaPtr& f) {
    VarGraph g;
    std::map<std::string, int> env;
    build_graph(f, env, -1, 0, g);
    int n = static_cast<int>(g.names.size());
    if (n == 0) return;

    std::vector<std::vector<int>> unguarded(n), all(n);
    for (const auto& e : g.edges) {
        all[e.from].push_back(e.to);
        if (e.mask == 0) unguarded[e.from].push_back(e.to);
    }
    auto ucomp = components(n, unguarded);
    std::vector<int> usize(n, 0);
    for (int c : ucomp) ++usize[c];
    for (const auto& e : g.edges)
        if (e.mask == 0 && (e.from == e.to || (ucomp[e.from] == ucomp[e.to] && usize[ucomp[e.from]] > 1)))
            throw CycleError("variable $" + g.names[e.to] + " is used recursively without a guarding modality");

    auto comp = components(n, all);
    std::map<int, int> masks;
    std::map<int, int> witness;
    for (const auto& e : g.edges)
        if (comp[e.from] == comp[e.to]) {
            masks[comp[e.from]] |= e.mask;
            witness.emplace(comp[e.from], e.to);
        }
    for (const auto& [c, m] : masks) {
        for (Program p : {Program::child1, Program::child2}) {
            if ((m & program_bit(p)) && (m & program_bit(converse(p))))
                throw CycleError("variable $" + g.names[witness[c]] + " recurses through both programs " +
                                 to_string(p) + " and " + to_string(converse(p)));
        }
    }
}

// --------------------------------------------------------------- model check

namespace {

class ModelChecker {
public:
    explicit ModelChecker(const BinaryTree& t) : t_(t), n_(static_cast<int>(t.size())) {}

    using Set = std::vector<bool>;

    Set eval(const FormulaPtr& f, std::map<std::string, Set>& env) {
        Set out(n_, false);
        switch (f->kind) {
        case FormulaKind::True: out.assign(n_, true); break;
        case FormulaKind::False: break;
        case FormulaKind::Name:
            for (int i = 0; i < n_; ++i) out[i] = t_.nodes[i].name == f->name;
            break;
        case FormulaKind::Prop:
            for (int i = 0; i < n_; ++i) out[i] = t_.nodes[i].props.count(f->name) > 0;
            break;
        case FormulaKind::Start:
            for (int i = 0; i < n_; ++i) out[i] = t_.nodes[i].props.count("#") > 0;
            break;
        case FormulaKind::Attribute:
            for (int i = 0; i < n_; ++i) out[i] = t_.nodes[i].attrs.count(f->name) > 0;
            break;
        case FormulaKind::Or:
        case FormulaKind::And:
        case FormulaKind::Implies:
        case FormulaKind::Equiv: {
            Set a = eval(f->kids[0], env), b = eval(f->kids[1], env);
            for (int i = 0; i < n_; ++i) {
                switch (f->kind) {
                case FormulaKind::Or: out[i] = a[i] || b[i]; break;
                case FormulaKind::And: out[i] = a[i] && b[i]; break;
                case FormulaKind::Implies: out[i] = !a[i] || b[i]; break;
                default: out[i] = a[i] == b[i]; break;
                }
            }
            break;
        }
        case FormulaKind::Not: {
            Set a = eval(f->kids[0], env);
            for (int i = 0; i < n_; ++i) out[i] = !a[i];
            break;
        }
        case FormulaKind::Modality: {
            Set a = eval(f->kids[0], env);
            for (int i = 0; i < n_; ++i) {
                const auto& nd = t_.nodes[i];
                switch (f->program) {
                case Program::child1: out[i] = nd.child1 >= 0 && a[nd.child1]; break;
                case Program::child2: out[i] = nd.child2 >= 0 && a[nd.child2]; break;
                case Program::parent1: out[i] = t_.is_child1(i) && a[nd.parent]; break;
                case Program::parent2: out[i] = t_.is_child2(i) && a[nd.parent]; break;
                }
            }
            break;
        }
        case FormulaKind::Variable: {
            auto it = env.find(f->name);
            if (it == env.end()) throw Error("unbound variable $" + f->name);
            out = it->second;
            break;
        }
        case FormulaKind::Let: out = eval_let(f, env); break;
        case FormulaKind::Call:
        case FormulaKind::String: throw Error("cannot evaluate unexpanded predicate '" + f->name + "'");
        }
        return out;
    }

private:
    Set eval_let(const FormulaPtr& f, std::map<std::string, Set>& env) {
        auto fv = free_vars_cached(f);
        bool closed = fv.empty();
        if (closed) {
            auto it = closed_cache_.find(f.get());
            if (it != closed_cache_.end()) return it->second;
        }
        std::map<std::string, Set> inner = env;
        for (const auto& b : f->bindings) inner[b.var] = Set(n_, false);
        std::size_t cap = static_cast<std::size_t>(n_) * f->bindings.size() + 4;
        for (std::size_t round = 0; round < cap; ++round) {
            bool changed = false;
            std::vector<Set> next;
            next.reserve(f->bindings.size());
            for (const auto& b : f->bindings) next.push_back(eval(b.body, inner));
            for (std::size_t i = 0; i < f->bindings.size(); ++i) {
                if (next[i] != inner[f->bindings[i].var]) {
                    changed = true;
                    inner[f->bindings[i].var] = std::move(next[i]);
                }
            }
            if (!changed) break;
        }
        Set out = eval(f->kids[0], inner);
        if (closed) closed_cache_[f.get()] = out;
        return out;
    }

    const std::set<std::string>& free_vars_cached(const FormulaPtr& f) {
        auto it = fv_cache_.find(f.get());
        if (it == fv_cache_.end()) it = fv_cache_.emplace(f.get(), free_variables(f)).first;
        return it->second;
    }

    const BinaryTree& t_;
    int n_;
    std::unordered_map<const Formula*, std::set<std::string>> fv_cache_;
    std::unordered_map<const Formula*, Set> closed_cache_;
};

}  // namespace

std::vector<bool> models(const FormulaPtr& f, const BinaryTree& t) {
    ModelChecker mc(t);
    std::map<std::string, ModelChecker::Set> env;
    return mc.eval(f, env);
}

bool check_model(const FormulaPtr& f, const BinaryTree& t, int n) {
    if (n < 0 || n >= static_cast<int>(t.size())) return false;
    return models(f, t)[n];
}

}  // namespace treesat
